#include "gstoep/likelihood.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <chrono>
#include <complex>
#include <random>

using namespace gstoep;
using cplx = std::complex<double>;

namespace {

template <typename T>
GsParams<T> random_feasible(std::mt19937_64& rng, Index p, Index w) {
  std::uniform_real_distribution<double> s(0.4, 2.5);
  return ar_to_gs<T>(oracle::random_stable_ar<T>(rng, w, 0.8), s(rng), p);
}

template <typename T>
Mat<T> random_scm(std::mt19937_64& rng, Index p, Index n) {
  const Mat<T> x = oracle::random_mat<T>(rng, n, p);
  return (x.adjoint() * x) / static_cast<double>(n);
}

// L as a function of the real coordinates, for finite differences.
template <typename T>
double loglik_at(const LikelihoodContext<T>& ctx, Vec<T> full) {
  return loglik(ctx, GsParams<T>::from_full(full));
}

}  // namespace

TEST_CASE("loglik closed forms") {
  const Index p = 5;
  LikelihoodContext<double> ctx(MatR::Identity(p, p), 10);
  CHECK(loglik(ctx, GsParams<double>::white(1.0, p)) == doctest::Approx(-double(p)).epsilon(1e-15));

  LikelihoodContext<double> ctx2(MatR::Identity(2, 2), 3);
  CHECK(loglik(ctx2, GsParams<double>::white(2.0, 2)) == doctest::Approx(2 * std::log(2.0) - 4).epsilon(1e-15));
}

TEST_CASE("loglik matches dense log det minus trace") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const Index p = 3 + static_cast<Index>(rng() % 30);
    const auto alpha = random_feasible<double>(rng, p, std::min<Index>(p - 1, 4));
    const MatR s = random_scm<double>(rng, p, p + 3);
    LikelihoodContext<double> ctx(s, p + 3);
    const MatR gamma = oracle::gs_dense<double>(alpha.full());
    const double expect = oracle::dense_logdet<double>(gamma) - (gamma * s).trace();
    CHECK(std::abs(loglik(ctx, alpha) - expect) < 1e-9 * (1 + std::abs(expect)));
  }
  SUBCASE("complex") {
    const Index p = 12;
    const auto alpha = random_feasible<cplx>(rng, p, 3);
    const Mat<cplx> s = random_scm<cplx>(rng, p, 20);
    LikelihoodContext<cplx> ctx(s, 20);
    const Mat<cplx> gamma = oracle::gs_dense<cplx>(alpha.full());
    const double expect = oracle::dense_logdet<cplx>(gamma) - (gamma * s).trace().real();
    CHECK(std::abs(loglik(ctx, alpha) - expect) < 1e-9 * (1 + std::abs(expect)));
  }
}

TEST_CASE("loglik rejects non-PD parameters") {
  LikelihoodContext<double> ctx(MatR::Identity(3, 3), 4);
  VecR rest(2);
  rest << -1.5, 0.0;
  CHECK_THROWS_AS(loglik(ctx, GsParams<double>(1.0, rest)), NotPositiveDefinite);
}

TEST_CASE("loglik is deterministic") {
  std::mt19937_64 rng(1);
  const auto alpha = random_feasible<double>(rng, 20, 5);
  LikelihoodContext<double> ctx(random_scm<double>(rng, 20, 7), 7);
  const double a = loglik(ctx, alpha);
  const double b = loglik(ctx, alpha);
  CHECK(std::memcmp(&a, &b, sizeof(double)) == 0);
}

TEST_CASE("gradient vanishes at the population optimum") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const Index p = 16;
    const VecR a = oracle::random_stable_ar<double>(rng, 3);
    const auto alpha = ar_to_gs<double>(a, 0.64, p);
    LikelihoodContext<double> ctx(ar_to_autocov<double>(a, 0.64, p).dense(), 100);
    const VecR g = grad(ctx, evaluate(ctx, alpha), leading_support(p - 1));
    CHECK(g.cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("gradient matches central finite differences (real)") {
  std::mt19937_64 rng(3);
  const double h = 1e-6;
  int checked = 0;
  for (Index p : {8, 16, 32}) {
    for (int trial = 0; trial < 34; ++trial) {
      const Index w = 1 + static_cast<Index>(rng() % std::min<Index>(p - 1, 6));
      const auto alpha = random_feasible<double>(rng, p, w);
      LikelihoodContext<double> ctx(random_scm<double>(rng, p, 8), 8);
      const auto support = leading_support(w);
      const VecR g = grad(ctx, evaluate(ctx, alpha), support);
      const VecR base = alpha.full();
      for (size_t n = 0; n < support.size(); ++n) {
        VecR xp = base, xm = base;
        xp(support[n]) += h;
        xm(support[n]) -= h;
        const double fd = (loglik_at(ctx, xp) - loglik_at(ctx, xm)) / (2 * h);
        REQUIRE(std::abs(g(static_cast<Index>(n)) - fd) <= 1e-5 * std::abs(fd));
      }
      ++checked;
    }
  }
  CHECK(checked >= 100);
}

TEST_CASE("gradient matches central finite differences (complex)") {
  std::mt19937_64 rng(4);
  const double h = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    const Index p = 10;
    const auto alpha = random_feasible<cplx>(rng, p, 3);
    LikelihoodContext<cplx> ctx(random_scm<cplx>(rng, p, 6), 6);
    const Vec<cplx> g = grad(ctx, evaluate(ctx, alpha), leading_support(3));
    const Vec<cplx> base = alpha.full();
    {
      Vec<cplx> xp = base, xm = base;
      xp(0) += h;
      xm(0) -= h;
      const double fd = (loglik_at(ctx, xp) - loglik_at(ctx, xm)) / (2 * h);
      CHECK(std::abs(g(0).real() - fd) <= 1e-5 * std::abs(fd));
    }
    for (Index i = 1; i <= 3; ++i) {
      for (const cplx dir : {cplx(1, 0), cplx(0, 1)}) {
        Vec<cplx> xp = base, xm = base;
        xp(i) += h * dir;
        xm(i) -= h * dir;
        const double fd = (loglik_at(ctx, xp) - loglik_at(ctx, xm)) / (2 * h);
        const double analytic = dir.real() != 0.0 ? g(i).real() : g(i).imag();
        CHECK(std::abs(analytic - fd) <= 1e-5 * std::abs(fd));
      }
    }
  }
}

TEST_CASE("gradient support restriction and dense alpha0 cross-check") {
  std::mt19937_64 rng(5);
  const auto alpha = random_feasible<double>(rng, 12, 4);
  LikelihoodContext<double> ctx(random_scm<double>(rng, 12, 5), 5);
  const auto ev = evaluate(ctx, alpha);
  const VecR only0 = grad(ctx, ev, {0});
  CHECK(only0.size() == 1);
  const VecR full = grad(ctx, ev, leading_support(4));
  CHECK(only0(0) == full(0));
  const VecR dense0 = grad(ctx, ev, {0}, GradientOptions{.dense_alpha0 = true});
  CHECK(dense0(0) == doctest::Approx(only0(0)).epsilon(1e-10));
}

TEST_CASE("gradient cost grows at most quadratically") {
  std::mt19937_64 rng(6);
  auto time_grad = [&](Index p) {
    const auto alpha = random_feasible<double>(rng, p, 6);
    LikelihoodContext<double> ctx(random_scm<double>(rng, p, 4), 4);
    const auto ev = evaluate(ctx, alpha);
    const auto support = leading_support(6);
    double best = 1e300;
    for (int rep = 0; rep < 7; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      double sink = 0.0;
      for (int k = 0; k < 200; ++k) sink += grad(ctx, ev, support)(0);
      const auto t1 = std::chrono::steady_clock::now();
      best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
      CHECK(std::isfinite(sink));
    }
    return best;
  };
  const double t128 = time_grad(128);
  const double t256 = time_grad(256);
  MESSAGE("gradient time ratio 256/128 = " << t256 / t128);
  CHECK(t256 / t128 <= 5.0);
}

TEST_CASE("tr(Gamma S) from diagonal sums matches the dense product") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const Index p = 1 + static_cast<Index>(rng() % 40);
    const Index w = static_cast<Index>(rng() % p);
    const auto alpha = random_feasible<double>(rng, p, w);
    const MatR s = random_scm<double>(rng, p, 3);
    const double dense = (oracle::gs_dense<double>(alpha.full()) * s).trace();
    REQUIRE(std::abs(trace_gamma_scm(PartialDiagSums<double>(s), alpha) - dense) <= 1e-12 * (1.0 + std::abs(dense)));

    const auto ac = random_feasible<cplx>(rng, p, w);
    const Mat<cplx> sc = random_scm<cplx>(rng, p, 3);
    const double dc = (oracle::gs_dense<cplx>(ac.full()) * sc).trace().real();
    REQUIRE(std::abs(trace_gamma_scm(PartialDiagSums<cplx>(sc), ac) - dc) <= 1e-12 * (1.0 + std::abs(dc)));
  }
}
