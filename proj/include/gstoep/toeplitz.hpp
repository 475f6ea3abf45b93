#pragma once

// Structured linear algebra for Hermitian Toeplitz matrices and their
// Gohberg-Semencul (GS) parameterized inverses.
//
// Toeplitz and triangular-Toeplitz matrices are carried as first columns.
// Dense materialization exists (`dense()`) for tests and for the O(P^3)
// baselines only; every routine here is O(P^2) or better.

#include "gstoep/errors.hpp"
#include "gstoep/scalar.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace gstoep {

/// Hermitian Toeplitz matrix stored as its first column c(0..P-1).
/// Entry (i, j) is c(i - j) with c(-k) = conj(c(k)).
template <Field T>
class HermitianToeplitz {
 public:
  HermitianToeplitz() = default;
  explicit HermitianToeplitz(Vec<T> first_col) : col_(std::move(first_col)) {
    if (col_.size() == 0) {
      throw std::invalid_argument("HermitianToeplitz: empty first column");
    }
    if constexpr (is_complex_v<T>) {
      const double scale = std::max(1.0, std::abs(col_(0)));
      if (std::abs(col_(0).imag()) > 1e-12 * scale) {
        throw std::invalid_argument("HermitianToeplitz: c(0) must be real");
      }
      col_(0) = T(col_(0).real(), 0.0);
    }
  }

  Index dim() const { return col_.size(); }
  const Vec<T>& first_col() const { return col_; }

  /// c(lag) for any signed lag in (-P, P).
  T at(Index lag) const { return lag >= 0 ? col_(lag) : conj(col_(-lag)); }

  Mat<T> dense() const {
    const Index p = dim();
    Mat<T> m(p, p);
    for (Index i = 0; i < p; ++i) {
      for (Index j = 0; j < p; ++j) m(i, j) = at(i - j);
    }
    return m;
  }

 private:
  Vec<T> col_;
};

/// Lower triangular Toeplitz matrix stored as its first column.
template <Field T>
class LowerTriToeplitz {
 public:
  LowerTriToeplitz() = default;
  explicit LowerTriToeplitz(Vec<T> first_col) : col_(std::move(first_col)) {}

  Index dim() const { return col_.size(); }
  const Vec<T>& first_col() const { return col_; }

  Mat<T> dense() const {
    const Index p = dim();
    Mat<T> m = Mat<T>::Zero(p, p);
    for (Index i = 0; i < p; ++i) {
      for (Index j = 0; j <= i; ++j) m(i, j) = col_(i - j);
    }
    return m;
  }

 private:
  Vec<T> col_;
};

/// GS parameter vector: alpha0 > 0 real, alpha_1..alpha_{P-1} free.
template <Field T>
class GsParams {
 public:
  GsParams() = default;
  GsParams(double alpha0, Vec<T> rest) : alpha0_(alpha0), rest_(std::move(rest)) {
    if (!(alpha0_ > 0.0) || !std::isfinite(alpha0_)) {
      throw std::invalid_argument("GsParams: alpha0 must be real, finite and > 0");
    }
  }

  /// White-noise point (alpha0, 0, ..., 0) of dimension p.
  static GsParams white(double alpha0, Index p) { return GsParams(alpha0, Vec<T>::Zero(p - 1)); }

  /// Builds from a full vector (alpha0 stored as T; imaginary part must vanish).
  static GsParams from_full(const Vec<T>& full) {
    return GsParams(real_part(full(0)), full.tail(full.size() - 1));
  }

  Index dim() const { return rest_.size() + 1; }
  double alpha0() const { return alpha0_; }
  const Vec<T>& rest() const { return rest_; }

  /// alpha_i for i in [0, P).
  T operator[](Index i) const { return i == 0 ? T(alpha0_) : rest_(i - 1); }

  Vec<T> full() const {
    Vec<T> v(dim());
    v(0) = T(alpha0_);
    v.tail(rest_.size()) = rest_;
    return v;
  }

  /// Index of the last nonzero alpha_i (i >= 1); 0 for white noise.
  Index order() const {
    for (Index i = rest_.size(); i >= 1; --i) {
      if (rest_(i - 1) != T(0)) return i;
    }
    return 0;
  }

 private:
  double alpha0_ = 1.0;
  Vec<T> rest_;
};

/// Partial diagonal sums of a P x P matrix Q:
///   sums(k, m) = sum_{j=0}^{min(P-k-1, P-m-1)} Q(k+j, m+j).
template <Field T>
class PartialDiagSums {
 public:
  PartialDiagSums() = default;
  explicit PartialDiagSums(const Mat<T>& q) : table_(q.rows(), q.cols()) {
    if (q.rows() != q.cols()) throw std::invalid_argument("PartialDiagSums: matrix must be square");
    const Index p = q.rows();
    for (Index k = p - 1; k >= 0; --k) {
      for (Index m = p - 1; m >= 0; --m) {
        table_(k, m) = q(k, m) + ((k + 1 < p && m + 1 < p) ? table_(k + 1, m + 1) : T(0));
      }
    }
  }

  Index dim() const { return table_.rows(); }
  T operator()(Index k, Index m) const { return table_(k, m); }

 private:
  // row-major: the trace kernels sweep m for fixed k
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> table_;
};

/// Generalized Fibonacci sequence F_0..F_{up_to} with weights r_1..r_n
/// (r(0) holds r_1): F_0 = 1, F_i = sum_{l<i} r_{i-l} F_l. Weights beyond
/// the supplied length are treated as zero.
template <Field T>
Vec<T> fib_seq(const Vec<T>& r, Index up_to) {
  Vec<T> f = Vec<T>::Zero(up_to + 1);
  f(0) = T(1);
  const Index nr = r.size();
  for (Index i = 1; i <= up_to; ++i) {
    T acc(0);
    const Index l_min = std::max<Index>(0, i - nr);
    for (Index l = l_min; l < i; ++l) acc += r(i - l - 1) * f(l);
    f(i) = acc;
  }
  return f;
}

template <Field T>
LowerTriToeplitz<T> build_B(const GsParams<T>& alpha) {
  return LowerTriToeplitz<T>(alpha.full());
}

/// First column (0, conj(alpha_{P-1}), ..., conj(alpha_1)).
template <Field T>
LowerTriToeplitz<T> build_Z(const GsParams<T>& alpha) {
  const Index p = alpha.dim();
  Vec<T> z = Vec<T>::Zero(p);
  for (Index m = 1; m < p; ++m) z(m) = conj(alpha[p - m]);
  return LowerTriToeplitz<T>(std::move(z));
}

namespace detail {

// Accumulates sign * L L^H for lower-triangular Toeplitz L (first column l)
// into the lower triangle of out, diagonal by diagonal:
//   (L L^H)(i, i-d) = sum_{m=d}^{i} l_m conj(l_{m-d}).
template <Field T>
void accumulate_gram(const Vec<T>& l, double sign, Mat<T>& out) {
  const Index p = l.size();
  Index first_nz = 0;
  while (first_nz < p && l(first_nz) == T(0)) ++first_nz;
  if (first_nz == p) return;
  for (Index d = 0; d < p; ++d) {
    T acc(0);
    for (Index i = d; i < p; ++i) {
      if (i - d >= first_nz) acc += l(i) * conj(l(i - d));
      out(i, i - d) += sign * acc;
    }
  }
}

}  // namespace detail

/// Gamma(alpha) = (1/alpha0)(B B^H - Z Z^H), dense Hermitian, O(P^2).
/// Positive definiteness is not checked here.
template <Field T>
Mat<T> gs_assemble(const GsParams<T>& alpha) {
  const Index p = alpha.dim();
  Mat<T> gamma = Mat<T>::Zero(p, p);
  detail::accumulate_gram(build_B(alpha).first_col(), 1.0, gamma);
  detail::accumulate_gram(build_Z(alpha).first_col(), -1.0, gamma);
  const double inv = 1.0 / alpha.alpha0();
  for (Index j = 0; j < p; ++j) {
    gamma(j, j) = T(real_part(gamma(j, j)) * inv);
    for (Index i = j + 1; i < p; ++i) {
      gamma(i, j) *= inv;
      gamma(j, i) = conj(gamma(i, j));
    }
  }
  return gamma;
}

/// Inverse of a lower triangular Toeplitz matrix via the Fibonacci closed
/// form: for unit diagonal and subdiagonal -r, the inverse column is
/// (1, F_1(r), ..., F_{P-1}(r)); the general case rescales by d_0.
template <Field T>
LowerTriToeplitz<T> tri_toeplitz_inverse(const LowerTriToeplitz<T>& d) {
  const Vec<T>& col = d.first_col();
  const Index p = col.size();
  if (p == 0) throw std::invalid_argument("tri_toeplitz_inverse: empty matrix");
  if (col(0) == T(0)) throw SingularMatrix("tri_toeplitz_inverse: zero diagonal");
  const T d0 = col(0);
  Vec<T> r = -col.tail(p - 1) / d0;
  Vec<T> inv = fib_seq<T>(r, p - 1) / d0;
  return LowerTriToeplitz<T>(std::move(inv));
}

/// AR(w) model X_t = sum_i a_i X_{t-i} + e_t, Var(e_t) = sigma2.
template <Field T>
struct ArModel {
  Vec<T> a;
  double sigma2 = 1.0;
};

/// alpha0 = 1/sigma2, alpha_i = -a_i/sigma2. The AR order is the index of
/// the last nonzero alpha_i.
template <Field T>
ArModel<T> gs_to_ar(const GsParams<T>& alpha) {
  const Index w = alpha.order();
  ArModel<T> m;
  m.sigma2 = 1.0 / alpha.alpha0();
  m.a = -alpha.rest().head(w) / alpha.alpha0();
  return m;
}

template <Field T>
GsParams<T> ar_to_gs(const Vec<T>& a, double sigma2, Index p) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("ar_to_gs: sigma2 must be > 0");
  if (a.size() > p - 1) throw std::invalid_argument("ar_to_gs: AR order must be < P");
  Vec<T> rest = Vec<T>::Zero(p - 1);
  rest.head(a.size()) = -a / sigma2;
  return GsParams<T>(1.0 / sigma2, std::move(rest));
}

/// Step-down (reverse Levinson): prediction polynomials of orders w..0 and
/// reflection coefficients k_1..k_w. polys[m] holds a^{(m)}_1..a^{(m)}_m.
template <Field T>
struct StepDown {
  std::vector<Vec<T>> polys;
  Vec<T> reflection;
};

inline constexpr double kStabilityMargin = 1e-12;

template <Field T>
StepDown<T> step_down(const Vec<T>& a) {
  const Index w = a.size();
  StepDown<T> out;
  out.polys.resize(static_cast<size_t>(w) + 1);
  out.reflection = Vec<T>::Zero(w);
  out.polys[w] = a;
  for (Index m = w; m >= 1; --m) {
    const Vec<T>& cur = out.polys[m];
    const T k = cur(m - 1);
    const double mag2 = abs2(k);
    if (!(std::sqrt(mag2) < 1.0 - kStabilityMargin)) {
      throw UnstableProcess("step_down: reflection coefficient k_" + std::to_string(m) +
                            " has modulus >= 1");
    }
    out.reflection(m - 1) = k;
    Vec<T> lower(m - 1);
    for (Index i = 1; i < m; ++i) lower(i - 1) = (cur(i - 1) + k * conj(cur(m - i - 1))) / (1.0 - mag2);
    out.polys[m - 1] = std::move(lower);
  }
  return out;
}

/// Autocovariances c(0..P-1) of a stable AR(w) process: step-down to
/// reflection coefficients, forward Levinson for c(0..w), Yule-Walker
/// extension beyond w. O(w^2 + P w).
template <Field T>
HermitianToeplitz<T> ar_to_autocov(const Vec<T>& a, double sigma2, Index p) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("ar_to_autocov: sigma2 must be > 0");
  const Index w = a.size();
  const StepDown<T> sd = step_down(a);
  double e = sigma2;
  for (Index m = 0; m < w; ++m) e /= (1.0 - abs2(sd.reflection(m)));
  Vec<T> c = Vec<T>::Zero(std::max(p, w + 1));
  c(0) = T(e);
  double err = e;
  for (Index m = 1; m <= w; ++m) {
    const Vec<T>& prev = sd.polys[m - 1];
    T acc = sd.reflection(m - 1) * err;
    for (Index i = 1; i < m; ++i) acc += prev(i - 1) * c(m - i);
    c(m) = acc;
    err *= (1.0 - abs2(sd.reflection(m - 1)));
  }
  for (Index k = w + 1; k < p; ++k) {
    T acc(0);
    for (Index i = 1; i <= w; ++i) acc += a(i - 1) * c(k - i);
    c(k) = acc;
  }
  return HermitianToeplitz<T>(c.head(p));
}

/// Levinson-Durbin on c(0..P-1): AR(P-1) predictor and the prediction
/// error variances E_0..E_{P-1}. Fails with NotPositiveDefinite as soon as a
/// variance is nonpositive.
template <Field T>
struct LevinsonResult {
  Vec<T> a;
  Vec<T> reflection;
  VecR errors;
};

template <Field T>
LevinsonResult<T> levinson_durbin(const HermitianToeplitz<T>& c, Index order = -1) {
  const Index p = c.dim();
  const Index w = order < 0 ? p - 1 : order;
  LevinsonResult<T> out;
  out.errors = VecR::Zero(w + 1);
  out.reflection = Vec<T>::Zero(w);
  Vec<T> a = Vec<T>::Zero(w);
  double err = real_part(c.at(0));
  if (!(err > 0.0) || !std::isfinite(err)) throw NotPositiveDefinite("levinson_durbin: c(0) <= 0");
  out.errors(0) = err;
  Vec<T> tmp(w);
  for (Index m = 1; m <= w; ++m) {
    T num = c.at(m);
    for (Index i = 1; i < m; ++i) num -= a(i - 1) * c.at(m - i);
    const T k = num / err;
    for (Index i = 1; i < m; ++i) tmp(i - 1) = a(i - 1) - k * conj(a(m - i - 1));
    for (Index i = 1; i < m; ++i) a(i - 1) = tmp(i - 1);
    a(m - 1) = k;
    out.reflection(m - 1) = k;
    err *= (1.0 - abs2(k));
    if (!(err > 0.0) || !std::isfinite(err)) {
      throw NotPositiveDefinite("levinson_durbin: nonpositive prediction error at order " +
                                std::to_string(m));
    }
    out.errors(m) = err;
  }
  out.a = std::move(a);
  return out;
}

/// GS parameters of the inverse of a PD Toeplitz matrix (full order P-1).
template <Field T>
GsParams<T> autocov_to_gs(const HermitianToeplitz<T>& c) {
  const LevinsonResult<T> lev = levinson_durbin(c);
  return ar_to_gs<T>(lev.a, lev.errors(lev.errors.size() - 1), c.dim());
}

/// log det C = sum_k log E_k over the Levinson prediction-error variances.
template <Field T>
double toeplitz_logdet(const HermitianToeplitz<T>& c) {
  const LevinsonResult<T> lev = levinson_durbin(c);
  return lev.errors.array().log().sum();
}

/// tr(C D (E^k)^T) for Hermitian Toeplitz C (first column c) and lower
/// triangular Toeplitz D (first column d):
///   sum_m min(P-k, P-m) d_m c(k-m),   O(P).
template <Field T>
T trace_toep_tri_shift(const HermitianToeplitz<T>& c, const Vec<T>& d, Index k) {
  const Index p = c.dim();
  T acc(0);
  for (Index m = 0; m < p; ++m) {
    if (d(m) == T(0)) continue;
    acc += static_cast<double>(std::min(p - k, p - m)) * d(m) * c.at(k - m);
  }
  return acc;
}

/// tr(Q D (E^k)^T) = sum_m d_m sums(k, m) for any Q with precomputed
/// partial diagonal sums. O(P).
template <Field T>
T trace_general_tri_shift(const PartialDiagSums<T>& sums, const Vec<T>& d, Index k) {
  const Index p = sums.dim();
  T acc(0);
  for (Index m = 0; m < p; ++m) {
    if (d(m) == T(0)) continue;
    acc += d(m) * sums(k, m);
  }
  return acc;
}

}  // namespace gstoep
