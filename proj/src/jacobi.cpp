#include "gstoep/jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gstoep {

VecR symmetric_eigenvalues(MatR a, double rel_tol, int max_sweeps) {
  const Index n = a.rows();
  if (n != a.cols()) throw std::invalid_argument("symmetric_eigenvalues: matrix must be square");
  const double scale = a.norm();
  if (n == 0) return VecR(0);
  if (scale == 0.0) return VecR::Zero(n);

  auto off_mass = [&]() {
    double s = 0.0;
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < max_sweeps && off_mass() >= rel_tol * scale; ++sweep) {
    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  VecR ev = a.diagonal();
  std::sort(ev.data(), ev.data() + n);
  return ev;
}

VecR hermitian_eigenvalues(const Mat<std::complex<double>>& a, double rel_tol) {
  const Index n = a.rows();
  MatR big(2 * n, 2 * n);
  big.topLeftCorner(n, n) = a.real();
  big.bottomRightCorner(n, n) = a.real();
  big.topRightCorner(n, n) = -a.imag();
  big.bottomLeftCorner(n, n) = a.imag();
  const VecR doubled = symmetric_eigenvalues(big, rel_tol);
  VecR ev(n);
  for (Index i = 0; i < n; ++i) ev(i) = 0.5 * (doubled(2 * i) + doubled(2 * i + 1));
  return ev;
}

}  // namespace gstoep
