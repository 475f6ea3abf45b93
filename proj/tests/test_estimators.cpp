#include "gstoep/baselines.hpp"
#include "gstoep/estimators.hpp"
#include "gstoep/processes.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <map>

using namespace gstoep;

namespace {

VecR vec(std::initializer_list<double> v) {
  VecR out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

LikelihoodContext<double> data_ctx(const ProcessSpec& spec, Index n, std::uint64_t seed) {
  return LikelihoodContext<double>(sample_cov(sample(spec, n, seed)), n);
}

const BoxSpec& box(Index p, size_t family = 1) { return cached_box_spec(standard_box_families()[family], p); }

void check_report(const EstimationReport& r) {
  CHECK(spectral_pd_check(r.alpha));
  for (Index i = r.order + 1; i < r.alpha.dim(); ++i) CHECK(r.alpha[i] == 0.0);
  // banded ICM
  const MatR g = r.icm_dense();
  for (Index i = 0; i < g.rows(); ++i)
    for (Index j = 0; j < g.cols(); ++j)
      if (std::abs(i - j) > r.order) CHECK(g(i, j) == 0.0);
}

}  // namespace

TEST_CASE("white-noise MLE for S = I") {
  const Index p = 10;
  LikelihoodContext<double> ctx(MatR::Identity(p, p), 50);
  const auto pgd = estimate_pgd(ctx, box(p), 3);
  const auto frob = estimate_frob(ctx, 3);
  const auto eig = estimate_eig(ctx, 3);
  const auto pls = estimate_pls(ctx, box(p), 3);
  for (const auto* r : {&pgd, &frob, &eig, &pls}) {
    CHECK(r->alpha.alpha0() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r->alpha.rest().cwiseAbs().maxCoeff() < 1e-6);
    CHECK(r->loglik == doctest::Approx(-double(p)).epsilon(1e-6));
    check_report(*r);
  }
}

TEST_CASE("PGD recovers AR(1) at the population limit") {
  const Index p = 8;
  const auto spec = ProcessSpec::ar(vec({0.5}), 0.75, p);
  LikelihoodContext<double> ctx(true_cm(spec).dense(), 1000);
  for (size_t f = 0; f < 5; ++f) {
    // the slowest-decaying family caps |alpha_1 / alpha_0| below 0.5 at P = 8
    const double cap = box(p, f).k()(0);
    const auto r = estimate_pgd(ctx, box(p, f), 1);
    CHECK(std::abs(-r.alpha[1] / r.alpha.alpha0() - std::min(0.5, cap)) < 1e-3);
    CHECK(r.converged);
  }
}

TEST_CASE("PGD contracts: monotone objective, feasible iterates, stationarity") {
  const auto a05 = ProcessSpec::ar(vec({0.5}), 0.64, 16);
  const auto a09 = ProcessSpec::ar(vec({0.9}), 0.64, 16);
  const auto ma = ProcessSpec::ma(vec({0.5, 0.3}), 1.0, 16);
  int trials = 0;
  for (const auto* spec : {&a05, &a09, &ma}) {
    for (int t = 0; t < 20; ++t) {
      const auto ctx = data_ctx(*spec, 8 + 8 * (t % 3), 700 + t);
      for (size_t f = 0; f < 5; ++f) {
        const BoxSpec& b = box(16, f);
        std::vector<double> objective;
        bool feasible = true;
        EstimatorOptions opts;
        opts.observer = [&](const GsParams<double>& alpha, double l) {
          objective.push_back(l);
          feasible = feasible && b.contains(alpha, 1e-12) && alpha.alpha0() >= opts.tol.eps0;
        };
        const auto r = estimate_pgd(ctx, b, 1 + t % 5, opts);
        ++trials;
        CHECK(feasible);
        for (size_t i = 1; i < objective.size(); ++i) CHECK(objective[i] >= objective[i - 1]);
        CHECK(r.converged);
        CHECK(r.stationarity < 1e-5 * (1.0 + std::abs(r.loglik)));
        CHECK(r.loglik == doctest::Approx(loglik(ctx, r.alpha)).epsilon(1e-12));
        check_report(r);
      }
    }
  }
  CHECK(trials == 300);
}

TEST_CASE("Frobenius and eigenvalue estimators") {
  const auto spec = ProcessSpec::ar(vec({0.5}), 0.64, 16);
  SUBCASE("feasible, PD and stationary on small data") {
    for (int t = 0; t < 10; ++t) {
      const auto ctx = data_ctx(spec, 8, 900 + t);
      const auto fr = estimate_frob(ctx, 1 + t % 4);
      CHECK(frob_constraint_value(fr.alpha, ToleranceSet{}.eps_f) < 0.0);
      CHECK(fr.converged);
      CHECK(fr.stationarity < 1e-5 * (1.0 + std::abs(fr.loglik)));
      check_report(fr);
      const auto ei = estimate_eig(ctx, 1 + t % 4);
      CHECK(eig_constraints(ei.alpha, 0.0).minCoeff() > 0.0);
      CHECK(ei.converged);
      check_report(ei);
    }
  }
  SUBCASE("large-N consistency") {
    const auto ctx = data_ctx(spec, 1024, 41);
    const Fitter fit = [](const LikelihoodContext<double>& c, Index w) { return estimate_frob(c, w); };
    const auto r = tune_order(fit, ctx);
    CHECK(nmse(r.icm_dense(), gs_assemble(ar_to_gs<double>(vec({0.5}), 0.64, 16))) < 1e-2);
  }
  SUBCASE("eig and frob land in the same performance band") {
    const MatR truth = gs_assemble(ar_to_gs<double>(vec({0.5}), 0.64, 16));
    double e_sum = 0.0, f_sum = 0.0;
    const Fitter fe = [](const LikelihoodContext<double>& c, Index w) { return estimate_eig(c, w); };
    const Fitter ff = [](const LikelihoodContext<double>& c, Index w) { return estimate_frob(c, w); };
    for (int t = 0; t < 20; ++t) {
      const auto ctx = data_ctx(spec, 8, 1200 + t);
      e_sum += nmse(tune_order(fe, ctx).icm_dense(), truth);
      f_sum += nmse(tune_order(ff, ctx).icm_dense(), truth);
    }
    MESSAGE("mean NMSE_icm eig " << e_sum / 20 << " frob " << f_sum / 20);
    CHECK(e_sum / f_sum > 0.5);
    CHECK(e_sum / f_sum < 2.0);
  }
  CHECK_THROWS_AS(estimate_eig(LikelihoodContext<double>(MatR::Identity(65, 65), 3), 1), DimensionGuard);
}

TEST_CASE("barrier estimators survive trial steps outside the PD region") {
  // N = 4 < P with high orders: backtracking proposes non-PD Gamma
  VecR a(1), b(1);
  a << 0.7;
  b << 0.3;
  const auto arma = ProcessSpec::arma(a, b, 0.64, 16);
  for (int t = 0; t < 4; ++t) {
    const auto ctx = data_ctx(arma, 4, static_cast<std::uint64_t>(t));
    for (Index w = 12; w <= 15; ++w) {
      check_report(estimate_eig(ctx, w));
      check_report(estimate_frob(ctx, w));
    }
  }
  CHECK_THROWS_AS(estimate_eig(LikelihoodContext<double>(MatR::Zero(4, 4), 4), 1), NumericalError);
}

TEST_CASE("PLS closed form") {
  SUBCASE("hand example") {
    MatR x(1, 3);
    x << 1, 2, 3;
    const MatR s = sample_cov(x);
    const MatR st = s_tilde(s, 1);
    CHECK(st == (MatR(2, 2) << 13, 8, 8, 5).finished());
    const PlsSolution sol = pls_solve(st, 3);
    CHECK(std::abs(sol.a(0) - 1.6) < 1e-12);
    CHECK(std::abs(sol.sigma2 - 0.1) < 1e-12);
    CHECK(1.0 / sol.sigma2 == doctest::Approx(10.0));
    CHECK(-sol.a(0) / sol.sigma2 == doctest::Approx(-16.0));
    // after projection the result is PD
    const auto alpha = pls_alpha(s, box(3), 1);
    CHECK(alpha.alpha0() == doctest::Approx(10.0));
    CHECK(alpha[1] == doctest::Approx(-box(3).k()(0) * 10.0));
    CHECK(spectral_pd_check(alpha));
  }
  SUBCASE("white noise, w = 0") {
    std::mt19937_64 rng(30);
    const MatR x = oracle::random_mat<double>(rng, 5, 7);
    const MatR s = sample_cov(x);
    const PlsSolution sol = pls_solve(s_tilde(s, 0), 7);
    CHECK(sol.sigma2 == doctest::Approx(s.trace() / 7.0));
  }
  SUBCASE("S tilde matches its definition and a is the least-squares solution") {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 500; ++t) {
      const Index p = 6 + static_cast<Index>(rng() % 20);
      const Index w = 1 + static_cast<Index>(rng() % 4);
      const Index n = 1 + static_cast<Index>(rng() % 5);
      const MatR x = oracle::random_mat<double>(rng, n, p);
      const MatR s = sample_cov(x);
      const MatR st = s_tilde(s, w);
      for (Index j = 0; j <= w; ++j)
        for (Index l = 0; l <= w; ++l) {
          double ref = 0.0;
          for (Index tt = w; tt < p; ++tt) ref += s(tt - l, tt - j);
          REQUIRE(std::abs(st(j, l) - ref) < 1e-12 * (1.0 + std::abs(ref)));
        }
      // stacked regression x_t on x_{t-1..t-w}, t = w..P-1, all samples
      MatR design(n * (p - w), w);
      VecR target(n * (p - w));
      for (Index k = 0; k < n; ++k)
        for (Index tt = w; tt < p; ++tt) {
          target(k * (p - w) + tt - w) = x(k, tt);
          for (Index m = 1; m <= w; ++m) design(k * (p - w) + tt - w, m - 1) = x(k, tt - m);
        }
      const VecR ls = (design.transpose() * design).ldlt().solve(design.transpose() * target);
      const PlsSolution sol = pls_solve(st, p);
      if (sol.regularized) {
        // rank-deficient design: the ridge picks one solution among many
        CHECK(n * (p - w) < 2 * w + 2);
        continue;
      }
      CHECK((sol.a - ls).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, ls.cwiseAbs().maxCoeff()));
    }
  }
  SUBCASE("conditional likelihood is maximized") {
    std::mt19937_64 rng(32);
    const auto spec = ProcessSpec::ar(vec({0.5, -0.2}), 1.0, 12);
    const MatR s = sample_cov(sample(spec, 6, 33));
    const MatR st = s_tilde(s, 2);
    const PlsSolution sol = pls_solve(st, 12);
    const double best = conditional_loglik(st, 12, sol.a, sol.sigma2);
    std::normal_distribution<double> nd(0.0, 0.1);
    int violations = 0;
    for (int t = 0; t < 10000; ++t) {
      VecR a = sol.a;
      for (Index i = 0; i < a.size(); ++i) a(i) += nd(rng);
      const double s2 = sol.sigma2 * std::exp(nd(rng));
      violations += conditional_loglik(st, 12, a, s2) > best;
    }
    CHECK(violations == 0);
  }
  SUBCASE("singular systems are regularized and flagged") {
    MatR x(1, 4);
    x << 1, 0, 0, 0;
    const PlsSolution sol = pls_solve(s_tilde(sample_cov(x), 2), 4);
    CHECK(sol.regularized);
    CHECK(std::isfinite(sol.sigma2));
  }
  SUBCASE("reports are PD on hard data") {
    const auto spec = ProcessSpec::ar(vec({0.95}), 0.64, 16);
    for (int t = 0; t < 50; ++t) {
      const auto ctx = data_ctx(spec, 2, 40 + t);
      check_report(estimate_pls(ctx, box(16, t % 5), 1 + t % 6));
    }
  }
}

TEST_CASE("BIC order selection") {
  const auto ar1 = ProcessSpec::ar(vec({0.5}), 0.64, 16);
  const auto white = ProcessSpec::ar(VecR(0), 0.64, 16);
  const BoxSpec& b = box(16);
  const Fitter pgd = [&](const LikelihoodContext<double>& c, Index w) { return estimate_pgd(c, b, w); };
  const Fitter pls = [&](const LikelihoodContext<double>& c, Index w) { return estimate_pls(c, b, w); };
  for (const Fitter* fit : {&pgd, &pls}) {
    int ar_hits = 0, white_hits = 0;
    for (int t = 0; t < 100; ++t) {
      const auto ra = tune_order(*fit, data_ctx(ar1, 256, 10000 + t));
      const auto rw = tune_order(*fit, data_ctx(white, 256, 20000 + t));
      ar_hits += ra.order == 1;
      white_hits += rw.order == 0;
      if (t == 0) {
        const auto ctx = data_ctx(ar1, 256, 10000);
        CHECK(ra.loglik == doctest::Approx(loglik(ctx, ra.alpha)).epsilon(1e-12));
        CHECK(ra.bic == doctest::Approx(2.0 * std::log(256.0) - 256.0 * ra.loglik));
        CHECK(ra.candidates.size() >= 2);
      }
    }
    MESSAGE("order recovery AR(1) " << ar_hits << "/100, white " << white_hits << "/100");
    CHECK(ar_hits >= 90);
    CHECK(white_hits >= 90);
  }
  CHECK(default_candidate_cap(16) == 15);
  CHECK(default_candidate_cap(256) == 40);
  CHECK(default_candidate_cap(2) == 1);
}

TEST_CASE("box family selection") {
  const auto& fams = standard_box_families();
  const auto spec = ProcessSpec::ar(vec({0.5}), 0.64, 16);
  const auto ctx = data_ctx(spec, 16, 5);
  const auto make = [](const BoxSpec& b) -> Fitter {
    return [&b](const LikelihoodContext<double>& c, Index w) { return estimate_pgd(c, b, w); };
  };
  SUBCASE("single family equals a direct call") {
    const auto one = tune_box_family(make, ctx, {fams[2]});
    const auto direct = tune_order(make(box(16, 2)), ctx);
    CHECK(one.loglik == direct.loglik);
    CHECK(one.alpha.full() == direct.alpha.full());
    CHECK(one.family_id == fams[2].id);
  }
  SUBCASE("argmax over families") {
    const auto best = tune_box_family(make, ctx, fams);
    double top = -1e300;
    for (size_t f = 0; f < fams.size(); ++f) top = std::max(top, tune_order(make(box(16, f)), ctx).loglik);
    CHECK(best.loglik == top);
  }
  SUBCASE("selected bound shape accommodates |alpha_1 / alpha_0| = |a|") {
    // K_1 grows with lambda across the standard families, so strongly
    // correlated data needs a fast-decaying (large lambda) family while
    // weakly correlated data is fitted equally well by all of them and the
    // tie goes to the first one.
    for (Index f = 1; f < 5; ++f) CHECK(box(16, f).k()(0) > box(16, f - 1).k()(0));
    const auto strong = ProcessSpec::ar(vec({0.9}), 0.64, 16);
    const auto weak = ProcessSpec::ar(vec({0.1}), 0.64, 16);
    std::map<std::string, int> strong_hist, weak_hist;
    for (int t = 0; t < 100; ++t) {
      ++strong_hist[tune_box_family(make, data_ctx(strong, 8, 3000 + t), fams).family_id];
      ++weak_hist[tune_box_family(make, data_ctx(weak, 8, 4000 + t), fams).family_id];
    }
    int strong_large = 0, weak_small = 0;
    for (auto& [id, n] : strong_hist) strong_large += (id == fams[3].id || id == fams[4].id) ? n : 0;
    for (auto& [id, n] : weak_hist) weak_small += (id == fams[0].id || id == fams[1].id) ? n : 0;
    MESSAGE("a=0.9 picks lambda in {1.8, 2.2}: " << strong_large << "/100; a=0.1 picks lambda in {0.6, 1}: "
                                               << weak_small << "/100");
    CHECK(strong_large > 50);
    CHECK(weak_small > 50);
  }
}
