#pragma once

#include "gstoep/scalar.hpp"

#include <complex>

namespace gstoep {

/// Eigenvalues (ascending) of a real symmetric matrix by cyclic Jacobi
/// rotations. Stops once the off-diagonal Frobenius mass drops below
/// rel_tol * ||A||_F.
VecR symmetric_eigenvalues(MatR a, double rel_tol = 1e-12, int max_sweeps = 100);

/// Eigenvalues (ascending) of a complex Hermitian matrix, via the real
/// 2P x 2P embedding [[Re, -Im], [Im, Re]] whose spectrum doubles each value.
VecR hermitian_eigenvalues(const Mat<std::complex<double>>& a, double rel_tol = 1e-12);

inline VecR hermitian_eigenvalues(const MatR& a, double rel_tol = 1e-12) {
  return symmetric_eigenvalues(a, rel_tol);
}

}  // namespace gstoep
