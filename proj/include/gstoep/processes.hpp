#pragma once

// Ground-truth stationary processes, their exact covariances, and exact
// sampling by Cholesky coloring.

#include "gstoep/toeplitz.hpp"

#include <cstdint>
#include <string>

namespace gstoep {

struct ProcessSpec {
  enum class Kind { AR, MA, ARMA, FBM };

  Kind kind = Kind::AR;
  VecR a;  // AR coefficients, X_t = sum a_i X_{t-i} + ...
  VecR b;  // MA coefficients, ... + e_t + sum b_i e_{t-i}
  double sigma2 = 1.0;
  double hurst = 0.5;
  Index dim = 1;

  static ProcessSpec ar(VecR a, double sigma2, Index p);
  static ProcessSpec ma(VecR b, double sigma2, Index p);
  static ProcessSpec arma(VecR a, VecR b, double sigma2, Index p);
  static ProcessSpec fbm(double hurst, Index p);

  /// Throws std::invalid_argument on bad parameters, UnstableProcess on an
  /// unstable AR part.
  void validate() const;
  std::string describe() const;
};

HermitianToeplitz<double> true_cm(const ProcessSpec& spec);

/// N x P matrix, one sample per row, x = L z with C = L L^T.
MatR sample(const ProcessSpec& spec, Index n, std::uint64_t seed);

/// Same, reusing a precomputed Cholesky factor of the true CM.
MatR sample_with_factor(const MatR& chol_lower, Index n, std::uint64_t seed);

MatR cholesky_factor(const HermitianToeplitz<double>& c);

/// ||est - truth||_F^2 / ||truth||_F^2.
double nmse(const MatR& estimate, const MatR& truth);

}  // namespace gstoep
