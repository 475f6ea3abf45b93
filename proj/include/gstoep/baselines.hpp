#pragma once

// Comparison estimators: sample covariance, diagonal averaging, banding and
// tapering (with cross-validated bandwidth), the circulant MLE, EM on a
// circulant embedding, and shrinkage toward structured targets.

#include "gstoep/toeplitz.hpp"

#include <complex>
#include <optional>
#include <vector>

namespace gstoep {

/// (1/N) sum_n x_n x_n^T, samples in rows.
MatR sample_cov(const MatR& x);

/// c(q) = mean of the q-th subdiagonal of S. Not necessarily PSD.
HermitianToeplitz<double> s_avg(const MatR& s);

/// First `lags` autocovariances of s_avg only, O(P lags).
VecR s_avg_head(const MatR& s, Index lags);

struct MaskSpec {
  enum class Kind { Banding, Tapering };
  Kind kind = Kind::Banding;
  Index k = 0;

  /// Weight applied to lag q: banding 1{q <= k}; tapering the trapezoid
  /// that is 1 up to k/2 and falls linearly to 0 at k.
  double weight(Index q) const;
};

HermitianToeplitz<double> mask_apply(const HermitianToeplitz<double>& t, const MaskSpec& spec);

/// Masked s_avg computed from the needed diagonals only, O(P k).
HermitianToeplitz<double> banded_estimate(const MatR& s, const MaskSpec& spec);

struct CvResult {
  MaskSpec spec;
  std::vector<double> risk;  // indexed by k
};

/// Bandwidth minimizing the summed Frobenius distance between the masked
/// s_avg of the training folds and the raw SCM of each contiguous held-out
/// fold. Ties go to the smaller k.
CvResult cv_tune_mask(const MatR& x, MaskSpec::Kind kind, int folds = 4);

/// Orthogonal projection of S onto symmetric circulants, equal to
/// F^H diag(F S F^H) F with the unitary DFT.
HermitianToeplitz<double> circ_mle(const MatR& s);

/// Eigenvalues diag(F S F^H) by a direct DFT, O(P^2).
VecR circ_spectrum(const MatR& s);

struct EmOptions {
  Index g = 0;  // embedding size, 0 means 2P
  int max_iter = 200;
  double tol = 1e-6;  // relative change of Sigma
};

struct EmResult {
  MatR cm;
  VecR sigma;  // diagonal of the embedded spectrum
  int iterations = 0;
  bool converged = false;
  bool regularized = false;
  /// -log det C_p - tr(C_p^{-1} S) before the first and after every update.
  std::vector<double> loglik;
};

EmResult em_toeplitz(const MatR& s, const EmOptions& opts = {});

enum class ShrinkTarget { SAvg, TH, Identity };

/// (tr S / P) I + (sum_{i != j} S_ij / (P (P - 1))) H, H the off-diagonal ones.
MatR target_th(const MatR& s);

MatR shrink_target(const MatR& s, ShrinkTarget target);

/// (1 - rho) S + rho T.
MatR shrink(const MatR& s, const MatR& target, double rho);

/// clamp(sum Var(S_ij) / sum (S_ij - T_ij)^2, 0, 1) with the unbiased
/// per-entry variance of the sample mean. Returns 1 for N < 2.
double plugin_rho(const MatR& x, const MatR& s, const MatR& target);

struct ShrinkResult {
  MatR cm;
  double rho = 0.0;
};

ShrinkResult shrink_estimate(const MatR& x, const MatR& s, ShrinkTarget target,
                             std::optional<double> rho = std::nullopt);

}  // namespace gstoep
