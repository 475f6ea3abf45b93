#include "gstoep/estimators.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <tuple>

namespace gstoep {

namespace {

constexpr double kStationarity = 1e-5;

// Every iterative estimator works in (alpha0, beta) with alpha = alpha0 (1, beta).
// Then Gamma(alpha) = alpha0 Gamma(1, beta), the box is |beta_i| <= K_i, the
// Frobenius constraint depends on beta only, and for fixed beta the
// likelihood P log alpha0 + log det Gamma_1 - alpha0 tr(Gamma_1 S) is
// maximized in closed form over alpha0.

VecR pad_beta(const VecR& beta, Index p) {
  VecR full = VecR::Zero(p - 1);
  full.head(beta.size()) = beta;
  return full;
}

struct Scaled {
  double t = 0.0;  // tr(Gamma_1 S)
};

Scaled unit_gamma(const LikelihoodContext<double>& ctx, const VecR& beta) {
  Scaled out;
  out.t = trace_gamma_scm(ctx.sums(), GsParams<double>(1.0, pad_beta(beta, ctx.dim())));
  if (!(out.t > 0.0) || !std::isfinite(out.t)) {
    throw NumericalError("tr(Gamma S) is not positive; the sample covariance is degenerate");
  }
  return out;
}

// A trial step may leave the PD region before the constraint sees it, so
// only the white-noise start reports a degenerate SCM.
bool scaled(const LikelihoodContext<double>& ctx, const VecR& beta, Scaled& out) {
  try {
    out = unit_gamma(ctx, beta);
    return true;
  } catch (const NumericalError&) {
    if (beta.isZero()) throw;
    return false;
  }
}

Evaluation<double> evaluate_scaled(const LikelihoodContext<double>& ctx, const Scaled& sc, const VecR& beta,
                                   double alpha0) {
  const Index p = ctx.dim();
  Evaluation<double> ev;
  ev.alpha = GsParams<double>(alpha0, alpha0 * pad_beta(beta, p));
  try {
    ev.cov = ar_to_autocov<double>(-beta, 1.0 / alpha0, p);
  } catch (const UnstableProcess& e) {
    throw NotPositiveDefinite(std::string("Gamma(alpha) is not positive definite: ") + e.what());
  }
  ev.trace_gamma_s = alpha0 * sc.t;
  ev.loglik = -toeplitz_logdet(ev.cov) - ev.trace_gamma_s;
  return ev;
}

std::vector<Index> beta_support(Index w) {
  std::vector<Index> s(static_cast<size_t>(w));
  for (Index i = 0; i < w; ++i) s[static_cast<size_t>(i)] = i + 1;
  return s;
}

/// dL/dbeta = alpha0 dL/dalpha_{1..w}.
VecR beta_gradient(const LikelihoodContext<double>& ctx, const Evaluation<double>& ev, Index w) {
  if (w == 0) return VecR(0);
  return ev.alpha.alpha0() * grad(ctx, ev, beta_support(w));
}

void check_order(Index p, Index order, const char* who) {
  if (order < 0 || order > p - 1) {
    throw std::invalid_argument(std::string(who) + ": order must lie in [0, P-1], got " + std::to_string(order));
  }
}

/// Barzilai-Borwein step for ascent, or the default step when undefined.
double bb_step(const VecR& ds, const VecR& dg, double fallback) {
  const double sy = -ds.dot(dg);
  const double ss = ds.squaredNorm();
  if (!(sy > 0.0) || !(ss > 0.0)) return fallback;
  return std::clamp(ss / sy, 1e-12, 1e12);
}

EstimationReport finish(std::string name, const Evaluation<double>& ev, Index order) {
  EstimationReport r;
  r.estimator = std::move(name);
  r.alpha = ev.alpha;
  r.order = order;
  r.loglik = ev.loglik;
  r.cm = ev.cov;
  return r;
}

// ---------------------------------------------------------------- barrier

struct BarrierPoint {
  VecR beta;
  double alpha0 = 0.0;
  Scaled sc;
  Evaluation<double> ev;
  double phi = 0.0;
  double cval = 0.0;  // frob: constraint value; eig: unused
  VecR lambda;        // eig: eigenvalues of Gamma_1
};

class FrobModel {
 public:
  FrobModel(const LikelihoodContext<double>& ctx, const ToleranceSet& tol) : ctx_(ctx), tol_(tol) {}

  std::optional<BarrierPoint> point(const VecR& beta, double mu) const {
    const Index p = ctx_.dim();
    BarrierPoint bp;
    bp.beta = beta;
    bp.cval = frob_constraint_value(GsParams<double>(1.0, pad_beta(beta, p)), tol_.eps_f);
    if (!(bp.cval < 0.0)) return std::nullopt;
    if (!scaled(ctx_, beta, bp.sc)) return std::nullopt;
    // stationary point of P log a - a t + mu log(a - eps0), larger root
    const double t = bp.sc.t;
    const double b = static_cast<double>(p) + t * tol_.eps0 + mu;
    bp.alpha0 = (b + std::sqrt(b * b - 4.0 * t * static_cast<double>(p) * tol_.eps0)) / (2.0 * t);
    try {
      bp.ev = evaluate_scaled(ctx_, bp.sc, beta, bp.alpha0);
    } catch (const NumericalError&) {
      return std::nullopt;
    }
    bp.phi = bp.ev.loglik + mu * std::log(bp.alpha0 - tol_.eps0) + mu * std::log(-bp.cval);
    return bp;
  }

  VecR gradient(const BarrierPoint& bp, double mu) const {
    const Index w = bp.beta.size();
    VecR g = beta_gradient(ctx_, bp.ev, w);
    if (w == 0) return g;
    const FrobConstraint fc =
        frob_constraint(GsParams<double>(1.0, pad_beta(bp.beta, ctx_.dim())), tol_.eps_f, beta_support(w));
    return g + (mu / bp.cval) * fc.gradient;
  }

 private:
  const LikelihoodContext<double>& ctx_;
  ToleranceSet tol_;
};

class EigModel {
 public:
  EigModel(const LikelihoodContext<double>& ctx, const ToleranceSet& tol)
      : ctx_(ctx), tol_(tol), eps_(tol.eps_eig / std::max(ctx.trace_scale(), 1e-300)) {}

  std::optional<BarrierPoint> point(const VecR& beta, double mu) const {
    BarrierPoint bp;
    bp.beta = beta;
    if (!scaled(ctx_, beta, bp.sc)) return std::nullopt;
    bp.lambda = symmetric_eigenvalues(gs_assemble(GsParams<double>(1.0, pad_beta(beta, ctx_.dim()))));
    if (!(bp.lambda(0) > 0.0)) return std::nullopt;
    bp.alpha0 = profile_alpha0(bp.lambda, bp.sc.t, mu);
    try {
      bp.ev = evaluate_scaled(ctx_, bp.sc, beta, bp.alpha0);
    } catch (const NumericalError&) {
      return std::nullopt;
    }
    bp.phi = bp.ev.loglik + mu * std::log(bp.alpha0 - tol_.eps0) + mu * log_barrier(bp.lambda, bp.alpha0);
    return bp;
  }

  VecR gradient(const BarrierPoint& bp, double mu) const {
    const Index w = bp.beta.size();
    VecR g = beta_gradient(ctx_, bp.ev, w);
    const double base = log_barrier(bp.lambda, bp.alpha0);
    for (Index i = 0; i < w; ++i) {
      double h = 1e-7 * std::max(1.0, std::abs(bp.beta(i)));
      double shifted = barrier_at(bp.beta, i, h, bp.alpha0);
      if (!std::isfinite(shifted)) {
        h = -h;
        shifted = barrier_at(bp.beta, i, h, bp.alpha0);
      }
      g(i) += mu * (shifted - base) / h;
    }
    return g;
  }

 private:
  double log_barrier(const VecR& lambda, double a0) const {
    double s = 0.0;
    for (Index i = 0; i < lambda.size(); ++i) {
      const double v = a0 * lambda(i) - eps_;
      if (!(v > 0.0)) return -std::numeric_limits<double>::infinity();
      s += std::log(v);
    }
    return s;
  }

  double barrier_at(VecR beta, Index i, double h, double a0) const {
    beta(i) += h;
    const MatR g1 = gs_assemble(GsParams<double>(1.0, pad_beta(beta, ctx_.dim())));
    return log_barrier(symmetric_eigenvalues(g1), a0);
  }

  // Root of P/a - t + mu/(a - eps0) + mu sum lambda_i/(a lambda_i - eps),
  // which is decreasing on the feasible half line.
  double profile_alpha0(const VecR& lambda, double t, double mu) const {
    const double p = static_cast<double>(ctx_.dim());
    auto deriv = [&](double a) {
      double d = p / a - t + mu / (a - tol_.eps0);
      for (Index i = 0; i < lambda.size(); ++i) d += mu * lambda(i) / (a * lambda(i) - eps_);
      return d;
    };
    double lo = std::max(tol_.eps0, eps_ / lambda(0));
    double hi = std::max(2.0 * lo, 2.0 * p / t);
    while (deriv(hi) > 0.0) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (deriv(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

  const LikelihoodContext<double>& ctx_;
  ToleranceSet tol_;
  double eps_;
};

template <typename Model>
EstimationReport barrier_ascent(const char* name, const Model& model,
                                Index order, const EstimatorOptions& opts) {
  VecR beta = VecR::Zero(order);
  double mu = opts.mu0;
  std::optional<BarrierPoint> cur = model.point(beta, mu);
  if (!cur) throw NumericalError(std::string(name) + ": white-noise start is infeasible");

  int iterations = 0;
  bool converged = false;
  VecR g = model.gradient(*cur, mu);
  for (int outer = 0; outer < opts.outer_iter; ++outer) {
    if (outer > 0) {
      mu *= opts.mu_factor;
      cur = model.point(cur->beta, mu);
      g = model.gradient(*cur, mu);
    }
    converged = false;
    VecR prev_beta, prev_g;
    for (int it = 0; it < opts.inner_max_iter; ++it) {
      if (g.size() == 0 || g.squaredNorm() == 0.0) {
        converged = true;
        break;
      }
      double step = it == 0 ? opts.initial_step : bb_step(cur->beta - prev_beta, g - prev_g, opts.initial_step);
      std::optional<BarrierPoint> next;
      for (int bt = 0; bt < opts.max_backtracks; ++bt, step *= opts.backtrack) {
        auto trial = model.point(cur->beta + step * g, mu);
        if (trial && trial->phi >= cur->phi + opts.sufficient * step * g.squaredNorm()) {
          next = std::move(trial);
          break;
        }
      }
      if (!next) {
        converged = g.norm() < 1e-5 * (1.0 + std::abs(cur->ev.loglik));
        break;
      }
      ++iterations;
      const double gain = next->phi - cur->phi;
      prev_beta = cur->beta;
      prev_g = g;
      cur = std::move(next);
      g = model.gradient(*cur, mu);
      if (opts.observer) opts.observer(cur->ev.alpha, cur->ev.loglik);
      if (gain <= opts.inner_rel_tol * std::max(1.0, std::abs(cur->phi))) {
        converged = true;
        break;
      }
    }
  }
  EstimationReport r = finish(name, cur->ev, order);
  r.iterations = iterations;
  r.converged = converged;
  r.stationarity = g.norm();
  return r;
}

}  // namespace

// ---------------------------------------------------------------- pgd

EstimationReport estimate_pgd(const LikelihoodContext<double>& ctx, const BoxSpec& spec, Index order,
                              const EstimatorOptions& opts) {
  const Index p = ctx.dim();
  if (spec.dim() != p) throw std::invalid_argument("estimate_pgd: box dimension does not match the data");
  check_order(p, order, "estimate_pgd");
  opts.tol.validate();
  const VecR k = spec.k().head(order);

  auto clamp_box = [&](VecR b) {
    for (Index i = 0; i < b.size(); ++i) b(i) = std::clamp(b(i), -k(i), k(i));
    return b;
  };
  auto at = [&](const VecR& beta) {
    const Scaled sc = unit_gamma(ctx, beta);
    const double a0 = std::max(opts.tol.eps0, static_cast<double>(p) / sc.t);
    return evaluate_scaled(ctx, sc, beta, a0);
  };
  // gradient with components clipped at active faces
  auto projected = [&](const VecR& beta, const VecR& g) {
    VecR d = g;
    for (Index i = 0; i < d.size(); ++i) {
      if ((beta(i) >= k(i) && d(i) > 0.0) || (beta(i) <= -k(i) && d(i) < 0.0)) d(i) = 0.0;
    }
    return d;
  };

  VecR beta = VecR::Zero(order);
  Evaluation<double> ev = at(beta);
  VecR g = beta_gradient(ctx, ev, order);
  if (opts.observer) opts.observer(ev.alpha, ev.loglik);

  int iterations = 0;
  bool converged = false;
  VecR prev_beta, prev_g;
  VecR d = projected(beta, g);
  for (int it = 0; it < opts.max_iter; ++it) {
    if (d.size() == 0 || d.squaredNorm() == 0.0) {
      converged = true;
      break;
    }
    double step = it == 0 ? opts.initial_step : bb_step(beta - prev_beta, g - prev_g, opts.initial_step);
    std::optional<Evaluation<double>> next;
    VecR next_beta;
    for (int bt = 0; bt < opts.max_backtracks; ++bt, step *= opts.backtrack) {
      VecR trial = clamp_box(beta + step * g);
      const double decrease = g.dot(trial - beta);
      if (!(decrease > 0.0)) continue;
      Evaluation<double> tev = at(trial);
      if (tev.loglik >= ev.loglik + opts.sufficient * decrease) {
        next = std::move(tev);
        next_beta = std::move(trial);
        break;
      }
    }
    if (!next) {
      converged = d.norm() < kStationarity * (1.0 + std::abs(ev.loglik));
      break;
    }
    ++iterations;
    const double gain = next->loglik - ev.loglik;
    prev_beta = beta;
    prev_g = g;
    beta = std::move(next_beta);
    ev = std::move(*next);
    g = beta_gradient(ctx, ev, order);
    d = projected(beta, g);
    if (opts.observer) opts.observer(ev.alpha, ev.loglik);
    // a small gain alone is not enough while the projected gradient is still
    // large; BB steps often stall for one iteration on ill-conditioned data
    const bool stationary = d.norm() < kStationarity * (1.0 + std::abs(ev.loglik));
    if (stationary && gain <= opts.rel_tol * std::max(1.0, std::abs(ev.loglik))) {
      converged = true;
      break;
    }
  }
  EstimationReport r = finish("pgd", ev, order);
  r.family_id = spec.family_id();
  r.iterations = iterations;
  r.converged = converged;
  r.stationarity = d.norm();
  return r;
}

EstimationReport estimate_frob(const LikelihoodContext<double>& ctx, Index order, const EstimatorOptions& opts) {
  check_order(ctx.dim(), order, "estimate_frob");
  opts.tol.validate();
  return barrier_ascent("frob", FrobModel(ctx, opts.tol), order, opts);
}

EstimationReport estimate_eig(const LikelihoodContext<double>& ctx, Index order, const EstimatorOptions& opts) {
  if (ctx.dim() > kEigenvalueGuard) {
    throw DimensionGuard("estimate_eig: P = " + std::to_string(ctx.dim()) +
                         " exceeds the O(P^3) guard of 64; use frob or pgd");
  }
  check_order(ctx.dim(), order, "estimate_eig");
  opts.tol.validate();
  return barrier_ascent("eig", EigModel(ctx, opts.tol), order, opts);
}

// ---------------------------------------------------------------- pls

MatR s_tilde(const MatR& s, Index w) {
  const Index p = s.rows();
  if (w < 0 || w >= p) throw std::invalid_argument("s_tilde: order must lie in [0, P-1]");
  // prefix sums along diagonal delta = row - col, indexed by row
  std::vector<VecR> pre(static_cast<size_t>(2 * w + 1));
  for (Index delta = -w; delta <= w; ++delta) {
    VecR& v = pre[static_cast<size_t>(delta + w)];
    v = VecR::Zero(p + 1);
    for (Index r = 0; r < p; ++r) {
      const Index c = r - delta;
      v(r + 1) = v(r) + (c >= 0 && c < p ? s(r, c) : 0.0);
    }
  }
  MatR st(w + 1, w + 1);
  for (Index j = 0; j <= w; ++j) {
    for (Index l = 0; l <= w; ++l) {
      const VecR& v = pre[static_cast<size_t>(j - l + w)];
      st(j, l) = v(p - l) - v(w - l);
    }
  }
  return st;
}

PlsSolution pls_solve(const MatR& st, Index p) {
  const Index w = st.rows() - 1;
  PlsSolution sol;
  const double scale = st(0, 0) / static_cast<double>(p - w);
  if (w == 0) {
    sol.a = VecR(0);
    sol.sigma2 = scale;
  } else {
    const MatR m = st.bottomRightCorner(w, w);
    const VecR rhs = st.col(0).tail(w);
    Eigen::LLT<MatR> llt(m);
    if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-14)) {
      llt.compute(m + 1e-10 * std::max(scale, 1e-300) * MatR::Identity(w, w));
      sol.regularized = true;
    }
    sol.a = llt.solve(rhs);
    sol.sigma2 = (st(0, 0) - rhs.dot(sol.a)) / static_cast<double>(p - w);
  }
  if (!(sol.sigma2 > 0.0) || !std::isfinite(sol.sigma2)) {
    sol.sigma2 = 1e-12 * std::max(scale, 1e-300);
    sol.regularized = true;
  }
  return sol;
}

double conditional_loglik(const MatR& st, Index p, const VecR& a, double sigma2) {
  const Index w = st.rows() - 1;
  const VecR cross = st.col(0).tail(w);
  const double q = st(0, 0) - 2.0 * a.dot(cross) + a.dot(st.bottomRightCorner(w, w) * a);
  return -static_cast<double>(p - w) * std::log(sigma2) - q / sigma2;
}

GsParams<double> pls_alpha(const MatR& s, const BoxSpec& spec, Index order, double eps0, bool* regularized) {
  const Index p = s.rows();
  if (spec.dim() != p) throw std::invalid_argument("pls: box dimension does not match the data");
  check_order(p, order, "pls");
  const PlsSolution sol = pls_solve(s_tilde(s, order), p);
  if (regularized) *regularized = sol.regularized;
  VecR rest = VecR::Zero(p - 1);
  rest.head(order) = -sol.a / sol.sigma2;
  return project_box(GsParams<double>(std::max(1.0 / sol.sigma2, eps0), rest), spec, eps0);
}

EstimationReport estimate_pls(const LikelihoodContext<double>& ctx, const BoxSpec& spec, Index order,
                              const EstimatorOptions& opts) {
  bool reg = false;
  const GsParams<double> alpha = pls_alpha(ctx.scm(), spec, order, opts.tol.eps0, &reg);
  EstimationReport r = finish("pls", evaluate(ctx, alpha), order);
  r.family_id = spec.family_id();
  r.regularized = reg;
  r.converged = true;
  return r;
}

// ---------------------------------------------------------------- tuning

Index default_candidate_cap(Index p) {
  const Index cap = static_cast<Index>(std::floor(2.0 * std::sqrt(static_cast<double>(p)))) + 8;
  return std::max<Index>(1, std::min(p - 1, cap));
}

EstimationReport tune_order(const Fitter& fit, const LikelihoodContext<double>& ctx, Index max_order) {
  const Index p = ctx.dim();
  const Index cap = max_order < 0 ? default_candidate_cap(p) : std::min(max_order + 1, p);
  const double log_n = std::log(static_cast<double>(ctx.samples()));
  const double n = static_cast<double>(ctx.samples());

  std::optional<EstimationReport> best;
  std::vector<OrderCandidate> seen;
  int strikes = 0;
  for (Index i = 1; i <= cap; ++i) {
    EstimationReport r = fit(ctx, i - 1);
    const double score = static_cast<double>(i) * log_n - n * r.loglik;
    seen.push_back({i - 1, r.loglik, score});
    if (!best || score < best->bic) {
      r.bic = score;
      best = std::move(r);
      strikes = 0;
    } else if (++strikes >= 5) {
      break;
    }
  }
  best->candidates = std::move(seen);
  return *best;
}

const BoxSpec& cached_box_spec(const BoxFamily& family, Index p, double eps_eta) {
  static std::mutex mu;
  static std::map<std::tuple<std::string, Index, double>, std::unique_ptr<BoxSpec>> cache;
  const auto key = std::make_tuple(family.id, p, eps_eta);
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, std::make_unique<BoxSpec>(BoxSpec::from_family(family, p, eps_eta))).first;
  }
  return *it->second;
}

EstimationReport tune_box_family(const std::function<Fitter(const BoxSpec&)>& make,
                                 const LikelihoodContext<double>& ctx, const std::vector<BoxFamily>& families,
                                 OrderPolicy policy, double eps_eta) {
  if (families.empty()) throw std::invalid_argument("tune_box_family: no families registered");
  std::optional<EstimationReport> best;
  for (const BoxFamily& fam : families) {
    const BoxSpec& spec = cached_box_spec(fam, ctx.dim(), eps_eta);
    const Fitter fit = make(spec);
    EstimationReport r = policy.automatic ? tune_order(fit, ctx) : fit(ctx, policy.fixed);
    r.family_id = fam.id;
    if (!best || r.loglik > best->loglik) best = std::move(r);
  }
  return *best;
}

}  // namespace gstoep
