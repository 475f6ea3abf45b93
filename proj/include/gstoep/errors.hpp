#pragma once

#include <stdexcept>
#include <string>

namespace gstoep {

/// Base class for all numerical failures raised by the library.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A matrix that must be positive definite is not (nonpositive prediction
/// error variance, unstable AR step-down, failed Cholesky).
class NotPositiveDefinite : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Step-down recursion hit a reflection coefficient with modulus >= 1.
class UnstableProcess : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularMatrix : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// An O(P^3) routine was asked to run above its dimension guard.
class DimensionGuard : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace gstoep
