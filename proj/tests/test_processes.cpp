#include "gstoep/baselines.hpp"
#include "gstoep/processes.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cstring>

using namespace gstoep;

namespace {

VecR vec(std::initializer_list<double> v) {
  VecR out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_CASE("true covariances") {
  SUBCASE("FBM h = 0.5 is white") {
    const VecR c = true_cm(ProcessSpec::fbm(0.5, 6)).first_col();
    CHECK(c(0) == doctest::Approx(1.0));
    CHECK(c.tail(5).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("MA(1)") {
    const VecR c = true_cm(ProcessSpec::ma(vec({0.5}), 1.0, 5)).first_col();
    CHECK(c(0) == doctest::Approx(1.25));
    CHECK(c(1) == doctest::Approx(0.5));
    CHECK(c.tail(3).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("AR(1)") {
    const VecR c = true_cm(ProcessSpec::ar(vec({0.5}), 0.75, 4)).first_col();
    CHECK(c(0) == doctest::Approx(1.0));
    CHECK(c(1) == doctest::Approx(0.5));
    CHECK(c(2) == doctest::Approx(0.25));
    CHECK(c(3) == doctest::Approx(0.125));
  }
  SUBCASE("ARMA(1,1) closed form agrees with the psi-weight sum") {
    const VecR c = true_cm(ProcessSpec::arma(vec({0.7}), vec({0.3}), 0.64, 12)).first_col();
    // psi_0 = 1, psi_j = (a + b) a^{j-1}
    auto psi = [](int j) { return j == 0 ? 1.0 : (0.7 + 0.3) * std::pow(0.7, j - 1); };
    VecR ref = VecR::Zero(12);
    for (Index k = 0; k < 12; ++k) {
      double s = 0.0;
      for (int j = 0; j < 4000; ++j) s += psi(j) * psi(j + static_cast<int>(k));
      ref(k) = 0.64 * s;
    }
    CHECK((c - ref).cwiseAbs().maxCoeff() < 1e-10);
    // the general ARMA path on an ARMA(2,1) matches its own recursion
    const VecR c2 = true_cm(ProcessSpec::arma(vec({0.5, -0.2}), vec({0.4}), 1.0, 6)).first_col();
    for (Index k = 2; k < 6; ++k) CHECK(c2(k) == doctest::Approx(0.5 * c2(k - 1) - 0.2 * c2(k - 2)).epsilon(1e-10));
  }
  SUBCASE("FBM is nonnegative and decreasing") {
    for (double h : {0.6, 0.75, 0.9, 1.0}) {
      const VecR c = true_cm(ProcessSpec::fbm(h, 32)).first_col();
      CHECK(c(0) == doctest::Approx(1.0));
      for (Index d = 1; d < 32; ++d) {
        CHECK(c(d) >= 0.0);
        CHECK(c(d) <= c(d - 1) + 1e-15);
      }
    }
  }
  SUBCASE("experiment settings are PD") {
    for (double a : {0.1, 0.5, 0.9}) CHECK_NOTHROW(toeplitz_logdet(true_cm(ProcessSpec::ar(vec({a}), 0.64, 128))));
    CHECK_NOTHROW(toeplitz_logdet(true_cm(ProcessSpec::ma(vec({0.5, 0.3, 0.2}), 1.0, 64))));
    CHECK_NOTHROW(toeplitz_logdet(true_cm(ProcessSpec::fbm(0.9, 64))));
    CHECK_NOTHROW(toeplitz_logdet(true_cm(ProcessSpec::arma(vec({0.7}), vec({0.3}), 0.64, 256))));
  }
  SUBCASE("invalid specs") {
    CHECK_THROWS_AS(ProcessSpec::ar(vec({1.2}), 1.0, 4), UnstableProcess);
    CHECK_THROWS_AS(ProcessSpec::ar(vec({0.5}), 0.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(ProcessSpec::fbm(0.4, 4), std::invalid_argument);
  }
}

TEST_CASE("sampling") {
  const auto spec = ProcessSpec::ar(vec({0.5}), 0.75, 6);
  const MatR a = sample(spec, 20, 99);
  const MatR b = sample(spec, 20, 99);
  CHECK(a.rows() == 20);
  CHECK(std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0);
  CHECK(sample(spec, 20, 100) != a);

  SUBCASE("law of large numbers") {
    const auto big = ProcessSpec::ar(vec({0.5}), 0.75, 8);
    const MatR x = sample(big, 100000, 7);
    const MatR truth = true_cm(big).dense();
    CHECK(oracle::rel_frob(s_avg(sample_cov(x)).dense(), truth) < 0.02);
    // per coordinate, and for the grand mean with its exact standard deviation
    const VecR means = x.colwise().mean().transpose();
    CHECK(means.cwiseAbs().maxCoeff() < 4.0 * std::sqrt(truth(0, 0) / 100000.0));
    CHECK(std::abs(x.mean()) < 4.0 * std::sqrt(truth.sum() / (100000.0 * 64.0)));
  }
  SUBCASE("exact stationary covariance at P = 4") {
    const auto small = ProcessSpec::ar(vec({0.5}), 0.75, 4);
    const MatR s = sample_cov(sample(small, 1000000, 3));
    const MatR truth = true_cm(small).dense();
    CHECK(((s - truth).cwiseAbs().array() <= 0.01 * truth.cwiseAbs().maxCoeff()).all());
  }
}

TEST_CASE("nmse") {
  const MatR t = MatR::Identity(3, 3) * 2.0;
  CHECK(nmse(t, t) == 0.0);
  CHECK(nmse(MatR::Zero(3, 3), t) == doctest::Approx(1.0));
  CHECK(nmse(2.0 * t, t) == doctest::Approx(1.0));
  CHECK_THROWS_AS(nmse(t, MatR::Zero(3, 3)), std::invalid_argument);
  CHECK_THROWS_AS(nmse(t, MatR::Zero(2, 2)), std::invalid_argument);
}
