#pragma once

// Exact Gaussian log-likelihood in GS coordinates,
//   L(alpha) = log det Gamma(alpha) - tr(Gamma(alpha) S),
// and its analytic gradient. Gamma^{-1} is obtained through the AR
// relation and the reverse Levinson recursion, so one evaluation plus one
// gradient costs O(P^2).

#include "gstoep/toeplitz.hpp"

#include <vector>

namespace gstoep {

template <Field T>
class LikelihoodContext {
 public:
  LikelihoodContext(Mat<T> scm, Index n_samples)
      : s_(std::move(scm)), sums_(s_), n_(n_samples) {
    if (s_.rows() != s_.cols() || s_.rows() < 1) {
      throw std::invalid_argument("LikelihoodContext: sample covariance must be square and nonempty");
    }
    if (n_ < 1) throw std::invalid_argument("LikelihoodContext: need at least one sample");
  }

  const Mat<T>& scm() const { return s_; }
  const PartialDiagSums<T>& sums() const { return sums_; }
  Index samples() const { return n_; }
  Index dim() const { return s_.rows(); }
  /// tr(S)/P, the natural scale of the data.
  double trace_scale() const { return real_part(s_.trace()) / static_cast<double>(dim()); }

 private:
  Mat<T> s_;
  PartialDiagSums<T> sums_;
  Index n_;
};

/// Everything one likelihood evaluation produces; the gradient reuses it.
template <Field T>
struct Evaluation {
  GsParams<T> alpha;
  HermitianToeplitz<T> cov;  // Gamma^{-1}
  double trace_gamma_s = 0.0;
  double loglik = 0.0;
};

namespace detail {

/// sum over nonzero taps i, l of d_i conj(d_l) sum_j S(j + l, j + i), i.e.
/// tr(L L^H S) for the lower triangular Toeplitz L with first column d.
template <Field T>
T gram_trace(const PartialDiagSums<T>& sums, const Vec<T>& d) {
  std::vector<Index> nz;
  for (Index i = 0; i < d.size(); ++i)
    if (d(i) != T(0)) nz.push_back(i);
  T acc(0);
  for (Index i : nz)
    for (Index l : nz) acc += d(i) * conj(d(l)) * sums(l, i);
  return acc;
}

}  // namespace detail

/// tr(Gamma(alpha) S) from the diagonal sums of S, O(w^2) for order w.
template <Field T>
double trace_gamma_scm(const PartialDiagSums<T>& sums, const GsParams<T>& alpha) {
  const Vec<T> b = build_B(alpha).first_col();
  const Vec<T> z = build_Z(alpha).first_col();
  return real_part(detail::gram_trace(sums, b) - detail::gram_trace(sums, z)) / alpha.alpha0();
}

template <Field T>
Evaluation<T> evaluate(const LikelihoodContext<T>& ctx, const GsParams<T>& alpha) {
  if (alpha.dim() != ctx.dim()) throw std::invalid_argument("evaluate: dimension mismatch");
  Evaluation<T> ev;
  ev.alpha = alpha;
  const ArModel<T> ar = gs_to_ar(alpha);
  try {
    ev.cov = ar_to_autocov<T>(ar.a, ar.sigma2, alpha.dim());
  } catch (const UnstableProcess& e) {
    throw NotPositiveDefinite(std::string("Gamma(alpha) is not positive definite: ") + e.what());
  }
  ev.trace_gamma_s = trace_gamma_scm(ctx.sums(), alpha);
  ev.loglik = -toeplitz_logdet(ev.cov) - ev.trace_gamma_s;
  return ev;
}

template <Field T>
double loglik(const LikelihoodContext<T>& ctx, const GsParams<T>& alpha) {
  return evaluate(ctx, alpha).loglik;
}

struct GradientOptions {
  /// Evaluate d/d alpha0 with dense products instead of the trace kernels.
  bool dense_alpha0 = false;
};

/// Gradient entries for the indices in `support` (in that order).
///
/// Entry 0 is real. For i >= 1 the real case returns dL/d alpha_i; the
/// complex case returns dL/dRe(alpha_i) + j dL/dIm(alpha_i), i.e. the
/// steepest-ascent direction in the complex plane.
template <Field T>
Vec<T> grad(const LikelihoodContext<T>& ctx, const Evaluation<T>& ev, const std::vector<Index>& support,
            GradientOptions opts = {}) {
  const Index p = ctx.dim();
  const double a0 = ev.alpha.alpha0();
  const Vec<T> b = build_B(ev.alpha).first_col();
  const Vec<T> z = build_Z(ev.alpha).first_col();
  Vec<T> g(static_cast<Index>(support.size()));
  for (size_t n = 0; n < support.size(); ++n) {
    const Index i = support[n];
    if (i < 0 || i >= p) throw std::out_of_range("grad: support index out of range");
    if (i == 0) {
      double d0;
      if (opts.dense_alpha0) {
        const Mat<T> bd = build_B(ev.alpha).dense();
        const Mat<T> diff = ev.cov.dense() - ctx.scm();
        d0 = real_part((diff * (bd + bd.adjoint() - gs_assemble(ev.alpha))).trace()) / a0;
      } else {
        const T tr_cb = trace_toep_tri_shift(ev.cov, b, 0) - trace_general_tri_shift(ctx.sums(), b, 0);
        d0 = (2.0 * real_part(tr_cb) - static_cast<double>(p) + ev.trace_gamma_s) / a0;
      }
      g(static_cast<Index>(n)) = T(d0);
    } else {
      const T u = trace_toep_tri_shift(ev.cov, b, i) - trace_general_tri_shift(ctx.sums(), b, i);
      const T v = trace_toep_tri_shift(ev.cov, z, p - i) - trace_general_tri_shift(ctx.sums(), z, p - i);
      g(static_cast<Index>(n)) = (2.0 / a0) * (u - conj(v));
    }
  }
  return g;
}

/// Support {0, 1, ..., order}.
inline std::vector<Index> leading_support(Index order) {
  std::vector<Index> s(static_cast<size_t>(order) + 1);
  for (Index i = 0; i <= order; ++i) s[static_cast<size_t>(i)] = i;
  return s;
}

}  // namespace gstoep
