#include "gstoep/baselines.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <numbers>

namespace gstoep {

MatR sample_cov(const MatR& x) {
  if (x.rows() < 1) throw std::invalid_argument("sample_cov: need N >= 1");
  MatR s = MatR::Zero(x.cols(), x.cols());
  s.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose(), 1.0 / static_cast<double>(x.rows()));
  return s.selfadjointView<Eigen::Lower>();
}

VecR s_avg_head(const MatR& s, Index lags) {
  const Index p = s.rows();
  lags = std::min(lags, p);
  VecR c(lags);
  for (Index q = 0; q < lags; ++q) {
    double acc = 0.0;
    for (Index i = 0; i + q < p; ++i) acc += s(i + q, i);
    c(q) = acc / static_cast<double>(p - q);
  }
  return c;
}

HermitianToeplitz<double> s_avg(const MatR& s) { return HermitianToeplitz<double>(s_avg_head(s, s.rows())); }

double MaskSpec::weight(Index q) const {
  if (kind == Kind::Banding) return q <= k ? 1.0 : 0.0;
  if (k == 0) return q == 0 ? 1.0 : 0.0;
  return std::clamp(2.0 - 2.0 * static_cast<double>(q) / static_cast<double>(k), 0.0, 1.0);
}

HermitianToeplitz<double> mask_apply(const HermitianToeplitz<double>& t, const MaskSpec& spec) {
  VecR c = t.first_col();
  for (Index q = 0; q < c.size(); ++q) c(q) *= spec.weight(q);
  return HermitianToeplitz<double>(c);
}

HermitianToeplitz<double> banded_estimate(const MatR& s, const MaskSpec& spec) {
  const Index p = s.rows();
  VecR c = VecR::Zero(p);
  const Index lags = std::min(p, spec.k + 1);
  c.head(lags) = s_avg_head(s, lags);
  for (Index q = 0; q < lags; ++q) c(q) *= spec.weight(q);
  return HermitianToeplitz<double>(c);
}

CvResult cv_tune_mask(const MatR& x, MaskSpec::Kind kind, int folds) {
  const Index n = x.rows();
  const Index p = x.cols();
  if (folds < 2) throw std::invalid_argument("cv_tune_mask: need at least 2 folds");
  if (n < folds) {
    throw std::invalid_argument("cv_tune_mask: need N >= " + std::to_string(folds) +
                                " samples for cross validation");
  }
  CvResult out;
  out.risk.assign(static_cast<size_t>(p), 0.0);
  for (int f = 0; f < folds; ++f) {
    const Index lo = n * f / folds;
    const Index hi = n * (f + 1) / folds;
    MatR train(n - (hi - lo), p);
    train << x.topRows(lo), x.bottomRows(n - hi);
    const VecR t = s_avg(sample_cov(train)).first_col();
    const MatR sv = sample_cov(x.middleRows(lo, hi - lo));
    // per lag: entry count, sum and (constant) sum of squares of S_val
    VecR cnt(p), sum(p);
    for (Index q = 0; q < p; ++q) {
      double acc = 0.0;
      for (Index i = 0; i + q < p; ++i) acc += sv(i + q, i) + (q > 0 ? sv(i, i + q) : 0.0);
      cnt(q) = static_cast<double>((q > 0 ? 2 : 1) * (p - q));
      sum(q) = acc;
    }
    for (Index k = 0; k < p; ++k) {
      const MaskSpec m{kind, k};
      double r = 0.0;
      for (Index q = 0; q < p; ++q) {
        const double v = m.weight(q) * t(q);
        r += cnt(q) * v * v - 2.0 * v * sum(q);
      }
      out.risk[static_cast<size_t>(k)] += r;
    }
  }
  Index best = 0;
  for (Index k = 1; k < p; ++k)
    if (out.risk[static_cast<size_t>(k)] < out.risk[static_cast<size_t>(best)]) best = k;
  out.spec = MaskSpec{kind, best};
  return out;
}

HermitianToeplitz<double> circ_mle(const MatR& s) {
  const Index p = s.rows();
  VecR c = VecR::Zero(p);
  for (Index j = 0; j < p; ++j)
    for (Index i = 0; i < p; ++i) c((i - j + p) % p) += s(i, j);
  c /= static_cast<double>(p);
  // symmetrize the wrapped lags r and P - r (equal up to rounding for symmetric S)
  for (Index r = 1; r < p; ++r) {
    if (r < p - r) {
      const double m = 0.5 * (c(r) + c(p - r));
      c(r) = c(p - r) = m;
    }
  }
  return HermitianToeplitz<double>(c);
}

VecR circ_spectrum(const MatR& s) {
  const Index p = s.rows();
  VecR d = VecR::Zero(p);
  for (Index j = 0; j < p; ++j)
    for (Index i = 0; i < p; ++i) d((i - j + p) % p) += s(i, j);
  VecR lambda(p);
  for (Index m = 0; m < p; ++m) {
    std::complex<double> acc = 0.0;
    for (Index r = 0; r < p; ++r) acc += d(r) * std::polar(1.0, -2.0 * std::numbers::pi * double(m * r % p) / double(p));
    lambda(m) = acc.real() / static_cast<double>(p);
  }
  return lambda;
}

namespace {

/// C_p = F~^H Sigma F~, Toeplitz with c(k) = (1/G) sum_m sigma_m e^{-2 pi i m k / G}.
MatR embedded_cov(const VecR& sigma, Index p) {
  const Index g = sigma.size();
  VecR c(p);
  for (Index k = 0; k < p; ++k) {
    double acc = 0.0;
    for (Index m = 0; m < g; ++m) acc += sigma(m) * std::cos(2.0 * std::numbers::pi * double(m * k % g) / double(g));
    c(k) = acc / static_cast<double>(g);
  }
  return HermitianToeplitz<double>(c).dense();
}

/// diag(F~ M F~^H) for symmetric M: only the diagonal sums of M matter,
/// q_k = (1/G) (m_0 + 2 sum_{d>0} m_d cos(2 pi k d / G)), O(P^2 + G P).
VecR embedded_diag(const MatR& m, Index g) {
  const Index p = m.rows();
  VecR sums = VecR::Zero(p);
  for (Index j = 0; j < p; ++j)
    for (Index i = j; i < p; ++i) sums(i - j) += m(i, j);
  VecR q(g);
  for (Index k = 0; k < g; ++k) {
    double acc = sums(0);
    for (Index d = 1; d < p; ++d) acc += 2.0 * sums(d) * std::cos(2.0 * std::numbers::pi * double(k * d % g) / double(g));
    q(k) = acc / static_cast<double>(g);
  }
  return q;
}

struct Factored {
  Eigen::LLT<MatR> llt;
  bool regularized = false;
};

Factored factor(const MatR& c, double scale) {
  Factored f;
  f.llt.compute(c);
  if (f.llt.info() != Eigen::Success) {
    f.llt.compute(c + 1e-10 * scale * MatR::Identity(c.rows(), c.cols()));
    f.regularized = true;
    if (f.llt.info() != Eigen::Success) throw NotPositiveDefinite("em_toeplitz: C_p is singular even after the ridge");
  }
  return f;
}

double gauss_loglik(const Eigen::LLT<MatR>& llt, const MatR& s) {
  const MatR l = llt.matrixL();
  double logdet = 0.0;
  for (Index i = 0; i < l.rows(); ++i) logdet += 2.0 * std::log(l(i, i));
  return -logdet - llt.solve(s).trace();
}

}  // namespace

EmResult em_toeplitz(const MatR& s, const EmOptions& opts) {
  const Index p = s.rows();
  const Index g = opts.g == 0 ? 2 * p : opts.g;
  if (g < p) throw std::invalid_argument("em_toeplitz: embedding size G must be >= P");
  const double scale = std::max(s.trace() / static_cast<double>(p), 1e-300);

  // Sigma^(0) = diag(F S_emb F^H), S_emb = S padded with scale * I
  EmResult out;
  out.sigma = embedded_diag(s, g).array() + scale * static_cast<double>(g - p) / static_cast<double>(g);

  MatR c = embedded_cov(out.sigma, p);
  Factored fc = factor(c, scale);
  out.regularized |= fc.regularized;
  out.loglik.push_back(gauss_loglik(fc.llt, s));
  for (int it = 0; it < opts.max_iter; ++it) {
    // Sigma' = Sigma + Sigma^2 diag(F~ (C^-1 S C^-1 - C^-1) F~^H)
    const MatR cinv = fc.llt.solve(MatR::Identity(p, p));
    MatR m = cinv * s * cinv - cinv;
    m = 0.5 * (m + m.transpose());
    const VecR q = embedded_diag(m, g);
    VecR next(g);
    for (Index k = 0; k < g; ++k) next(k) = std::max(0.0, out.sigma(k) + out.sigma(k) * out.sigma(k) * q(k));
    const double change = (next - out.sigma).norm() / std::max(out.sigma.norm(), 1e-300);
    out.sigma = next;
    ++out.iterations;
    c = embedded_cov(out.sigma, p);
    fc = factor(c, scale);
    out.regularized |= fc.regularized;
    out.loglik.push_back(gauss_loglik(fc.llt, s));
    if (change < opts.tol) {
      out.converged = true;
      break;
    }
  }
  out.cm = c;
  return out;
}

MatR target_th(const MatR& s) {
  const Index p = s.rows();
  const double diag = s.trace() / static_cast<double>(p);
  const double off = p > 1 ? (s.sum() - s.trace()) / static_cast<double>(p * (p - 1)) : 0.0;
  MatR t = MatR::Constant(p, p, off);
  t.diagonal().setConstant(diag);
  return t;
}

MatR shrink_target(const MatR& s, ShrinkTarget target) {
  switch (target) {
    case ShrinkTarget::SAvg: return s_avg(s).dense();
    case ShrinkTarget::TH: return target_th(s);
    case ShrinkTarget::Identity: return MatR::Identity(s.rows(), s.cols());
  }
  throw std::logic_error("shrink_target: unknown target");
}

MatR shrink(const MatR& s, const MatR& target, double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("shrink: rho must lie in [0, 1]");
  return (1.0 - rho) * s + rho * target;
}

double plugin_rho(const MatR& x, const MatR& s, const MatR& target) {
  const Index n = x.rows();
  if (n < 2) return 1.0;
  double var = 0.0;
  for (Index r = 0; r < n; ++r) {
    const VecR xr = x.row(r).transpose();
    var += ((xr * xr.transpose()) - s).squaredNorm();
  }
  var /= static_cast<double>(n) * static_cast<double>(n - 1);
  const double dist = (s - target).squaredNorm();
  if (!(dist > 0.0)) return 1.0;
  return std::clamp(var / dist, 0.0, 1.0);
}

ShrinkResult shrink_estimate(const MatR& x, const MatR& s, ShrinkTarget target, std::optional<double> rho) {
  const MatR t = shrink_target(s, target);
  ShrinkResult r;
  r.rho = rho ? *rho : plugin_rho(x, s, t);
  r.cm = shrink(s, t, r.rho);
  return r;
}

}  // namespace gstoep
