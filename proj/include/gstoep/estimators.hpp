#pragma once

// The four PD-guaranteeing estimators in GS coordinates plus order and
// box-family tuning. All of them work on real-valued data.
//
//   pgd   box-constrained projected gradient ascent on the exact likelihood
//   frob  log-barrier ascent under the Frobenius surrogate constraint
//   eig   log-barrier ascent under eigenvalue constraints (P <= 64)
//   pls   closed-form conditional least squares, projected onto the box

#include "gstoep/constraints.hpp"
#include "gstoep/likelihood.hpp"

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace gstoep {

struct OrderCandidate {
  Index order = 0;
  double loglik = 0.0;
  double score = 0.0;  // BIC, smaller is better
};

struct EstimationReport {
  std::string estimator;
  GsParams<double> alpha;
  Index order = 0;
  std::string family_id;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Norm of the projected (pgd) or barrier (frob, eig) gradient at exit.
  double stationarity = 0.0;
  /// Set when a ridge had to be added to a singular system (pls).
  bool regularized = false;
  double bic = std::numeric_limits<double>::quiet_NaN();
  std::vector<OrderCandidate> candidates;
  HermitianToeplitz<double> cm;

  MatR icm_dense() const { return gs_assemble(alpha); }
};

struct EstimatorOptions {
  ToleranceSet tol;
  int max_iter = 500;
  double rel_tol = 1e-8;
  // Armijo line search
  double initial_step = 1.0;
  double backtrack = 0.5;
  double sufficient = 1e-4;
  int max_backtracks = 40;
  // barrier schedule (frob, eig)
  double mu0 = 1.0;
  double mu_factor = 0.1;
  int outer_iter = 8;
  int inner_max_iter = 300;
  double inner_rel_tol = 1e-10;
  /// Called with every accepted iterate and its objective (pgd: L_D).
  std::function<void(const GsParams<double>&, double)> observer;
};

EstimationReport estimate_pgd(const LikelihoodContext<double>& ctx, const BoxSpec& spec, Index order,
                              const EstimatorOptions& opts = {});

EstimationReport estimate_frob(const LikelihoodContext<double>& ctx, Index order, const EstimatorOptions& opts = {});

/// Throws DimensionGuard above P = 64.
EstimationReport estimate_eig(const LikelihoodContext<double>& ctx, Index order, const EstimatorOptions& opts = {});

/// S~_{j,l} = sum_{t=w}^{P-1} S_{t-l,t-j}, (w+1) x (w+1), in O(P w).
MatR s_tilde(const MatR& s, Index w);

struct PlsSolution {
  VecR a;  // unconstrained AR coefficients
  double sigma2 = 0.0;
  bool regularized = false;
};

/// Maximizer of the conditional likelihood given S~.
PlsSolution pls_solve(const MatR& st, Index p);

/// -(P-w) log sigma2 - (S~00 - 2 a^T S~_{>=1,0} + a^T S~_{>=1,>=1} a) / sigma2
double conditional_loglik(const MatR& st, Index p, const VecR& a, double sigma2);

/// PLS parameters only (no likelihood evaluation); the timed kernel.
GsParams<double> pls_alpha(const MatR& s, const BoxSpec& spec, Index order, double eps0 = 1e-6,
                           bool* regularized = nullptr);

EstimationReport estimate_pls(const LikelihoodContext<double>& ctx, const BoxSpec& spec, Index order,
                              const EstimatorOptions& opts = {});

/// Fits one fixed order.
using Fitter = std::function<EstimationReport(const LikelihoodContext<double>&, Index)>;

/// Largest candidate support size: min(P - 1, floor(2 sqrt(P)) + 8).
Index default_candidate_cap(Index p);

/// BIC over supports i = 1, 2, ... (AR order i - 1) with score
/// i log N - N L_i, stopping after 5 consecutive non-improving candidates.
/// max_order < 0 uses the default cap.
EstimationReport tune_order(const Fitter& fit, const LikelihoodContext<double>& ctx, Index max_order = -1);

struct OrderPolicy {
  bool automatic = true;
  Index fixed = 0;
};

/// Box spec for (family, P), computed once and cached process-wide.
const BoxSpec& cached_box_spec(const BoxFamily& family, Index p, double eps_eta = 1e-3);

/// Runs the estimator once per family and keeps the maximum likelihood
/// (ties go to the earlier family).
EstimationReport tune_box_family(const std::function<Fitter(const BoxSpec&)>& make,
                                 const LikelihoodContext<double>& ctx, const std::vector<BoxFamily>& families,
                                 OrderPolicy policy = {}, double eps_eta = 1e-3);

}  // namespace gstoep
