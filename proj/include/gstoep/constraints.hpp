#pragma once

// Positive-definiteness certificates for GS parameters.
//
//   Gamma(alpha) PD  <=>  ||Z^H B^{-H}||_2 < 1
//   ||Z^H B^{-H}||_F^2 = sum_d (P - d) |g_d|^2          (closed form via g)
//   |alpha_i| <= K_i alpha0 with B(K) < 1  =>  PD        (box certificate)

#include "gstoep/jacobi.hpp"
#include "gstoep/toeplitz.hpp"

#include <functional>
#include <string>
#include <vector>

namespace gstoep {

struct ToleranceSet {
  double eps0 = 1e-6;     // lower bound for alpha0
  double eps_f = 1e-4;    // Frobenius slack
  double eps_eta = 1e-3;  // bisection bracket width on B_f(eta)
  double eps_eig = 1e-6;  // eigenvalue floor, relative to the ICM scale

  void validate() const;
};

/// g_1..g_{P-1} (entry d-1 holds g_d), the first row of Z^H B^{-H}.
template <Field T>
Vec<T> g_vector(const GsParams<T>& alpha) {
  const Index p = alpha.dim();
  if (p < 2) return Vec<T>(0);
  const double a0 = alpha.alpha0();
  Vec<T> r(p - 1);
  for (Index i = 1; i < p; ++i) r(i - 1) = -conj(alpha[i]) / a0;
  const Vec<T> f = fib_seq<T>(r, p - 2);
  Vec<T> g = Vec<T>::Zero(p - 1);
  for (Index d = 1; d < p; ++d) {
    T acc(0);
    for (Index j = 1; j <= d; ++j) {
      const T num = alpha[p - j];
      if (num != T(0)) acc += (num / a0) * f(d - j);
    }
    g(d - 1) = acc;
  }
  return g;
}

/// ||Z^H B^{-H}||_F^2 from the g vector, O(P^2).
template <Field T>
double frobenius_bound(const GsParams<T>& alpha) {
  const Vec<T> g = g_vector(alpha);
  const Index p = alpha.dim();
  double s = 0.0;
  for (Index d = 1; d < p; ++d) s += static_cast<double>(p - d) * abs2(g(d - 1));
  return s;
}

/// Dense strictly upper triangular Toeplitz Z^H B^{-H} built from g.
template <Field T>
Mat<T> zb_matrix(const GsParams<T>& alpha) {
  const Index p = alpha.dim();
  const Vec<T> g = g_vector(alpha);
  Mat<T> m = Mat<T>::Zero(p, p);
  for (Index i = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j) m(i, j) = g(j - i - 1);
  return m;
}

/// Exact PD test: largest singular value of Z^H B^{-H} strictly below one.
template <Field T>
bool spectral_pd_check(const GsParams<T>& alpha) {
  if (alpha.dim() < 2) return true;
  const Mat<T> m = zb_matrix(alpha);
  const Mat<T> gram = m.adjoint() * m;
  const VecR ev = hermitian_eigenvalues(gram);
  return ev(ev.size() - 1) < 1.0;
}

/// B(K) = sum_d (P-d) (sum_{j=1}^d K_{P-j} F_{d-j}(K))^2 for K_1..K_{P-1}.
double b_of_k(const VecR& k);

/// A bound-generating family f(eta, i), i = 1..P-1.
struct BoxFamily {
  std::string id;
  std::function<double(double, Index)> f;
};

/// f(eta, i) = eta * exp(-lambda * i).
BoxFamily exponential_family(double lambda);

/// The five exponential families with lambda in {0.6, 1, 1.4, 1.8, 2.2}.
const std::vector<BoxFamily>& standard_box_families();

/// Rejects families that do not vanish at eta = 0, go negative, or are not
/// monotone in eta (checked on a grid).
void validate_family(const BoxFamily& family, Index p);

struct EtaResult {
  double eta = 0.0;
  VecR k;
  double bound = 0.0;  // B_f(eta)
};

/// Largest-bracket eta with 1 - tol <= B_f(eta) < 1, by bisection.
EtaResult bisect_eta(const BoxFamily& family, Index p, double tol = 1e-3);

/// Box constraints |alpha_i| <= K_i alpha0 certified by B(K) < 1.
class BoxSpec {
 public:
  BoxSpec(VecR k, std::string family_id, double eta);

  static BoxSpec from_family(const BoxFamily& family, Index p, double tol = 1e-3);

  const VecR& k() const { return k_; }
  const std::string& family_id() const { return family_id_; }
  double eta() const { return eta_; }
  Index dim() const { return k_.size() + 1; }
  double certificate() const { return bound_; }

  /// alpha inside the box, within a relative slack.
  template <Field T>
  bool contains(const GsParams<T>& alpha, double slack = 1e-12) const;

 private:
  VecR k_;
  std::string family_id_;
  double eta_ = 0.0;
  double bound_ = 0.0;
};

template <Field T>
bool BoxSpec::contains(const GsParams<T>& alpha, double slack) const {
  if (alpha.dim() != dim()) return false;
  const double a0 = alpha.alpha0();
  for (Index i = 1; i < alpha.dim(); ++i) {
    const double lim = k_(i - 1) * a0 * (1.0 + slack);
    if constexpr (is_complex_v<T>) {
      if (std::abs(alpha[i].real()) > 0.5 * lim || std::abs(alpha[i].imag()) > 0.5 * lim) return false;
    } else {
      if (std::abs(alpha[i]) > lim) return false;
    }
  }
  return true;
}

/// Clamp alpha0 to >= eps0, then each alpha_i into [-K_i alpha0, K_i alpha0]
/// (real) or its real and imaginary parts into [-K_i alpha0/2, K_i alpha0/2].
template <Field T>
GsParams<T> project_box(const GsParams<T>& alpha, const BoxSpec& spec, double eps0) {
  if (alpha.dim() != spec.dim()) throw std::invalid_argument("project_box: dimension mismatch");
  const double a0 = std::max(alpha.alpha0(), eps0);
  Vec<T> rest = alpha.rest();
  for (Index i = 0; i < rest.size(); ++i) {
    const double lim = spec.k()(i) * a0;
    if constexpr (is_complex_v<T>) {
      const double h = 0.5 * lim;
      rest(i) = T(std::clamp(rest(i).real(), -h, h), std::clamp(rest(i).imag(), -h, h));
    } else {
      rest(i) = std::clamp(rest(i), -lim, lim);
    }
  }
  return GsParams<T>(a0, std::move(rest));
}

struct FrobConstraint {
  double value = 0.0;  // ||Z^H B^{-H}||_F^2 - 1 + eps_f
  VecR gradient;       // w.r.t. the support coordinates
};

inline double frob_constraint_value(const GsParams<double>& alpha, double eps_f) {
  return frobenius_bound(alpha) - 1.0 + eps_f;
}

/// Value plus forward-difference gradient over `support` (real case).
FrobConstraint frob_constraint(const GsParams<double>& alpha, double eps_f, const std::vector<Index>& support,
                               double rel_step = 1e-7);

inline constexpr Index kEigenvalueGuard = 64;

/// lambda_i(Gamma(alpha)) - eps for all P eigenvalues, ascending.
/// Throws DimensionGuard above P = 64.
template <Field T>
VecR eig_constraints(const GsParams<T>& alpha, double eps) {
  if (alpha.dim() > kEigenvalueGuard) {
    throw DimensionGuard("eig_constraints: P = " + std::to_string(alpha.dim()) +
                         " exceeds the O(P^3) guard of 64; use the Frobenius or box constraints");
  }
  VecR ev = hermitian_eigenvalues(gs_assemble(alpha));
  return ev.array() - eps;
}

}  // namespace gstoep
