#include "gstoep/bench/registry.hpp"

#include "gstoep/baselines.hpp"

#include <Eigen/Cholesky>

namespace gstoep::bench {

namespace {

MatR pd_inverse(const MatR& c, const std::string& who) {
  Eigen::LLT<MatR> llt(c);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite(who + ": estimate is not positive definite");
  return llt.solve(MatR::Identity(c.rows(), c.cols()));
}

std::vector<BoxFamily> families_for(const EstimatorSettings& s) {
  if (!s.family) return standard_box_families();
  for (const auto& f : standard_box_families())
    if (f.id == *s.family) return {f};
  throw UsageError("unknown box family '" + *s.family + "'");
}

Fit from_report(EstimationReport r, bool want_icm) {
  Fit f;
  f.cm = r.cm.dense();
  if (want_icm) f.icm = r.icm_dense();
  f.hyper_name = "order";
  f.hyper = static_cast<double>(r.order);
  f.family_id = r.family_id;
  f.iterations = r.iterations;
  f.converged = r.converged;
  f.report = std::move(r);
  return f;
}

using BoxFit = EstimationReport (*)(const LikelihoodContext<double>&, const BoxSpec&, Index, const EstimatorOptions&);
using PlainFit = EstimationReport (*)(const LikelihoodContext<double>&, Index, const EstimatorOptions&);

Fit boxed(BoxFit est, const FitInput& in, const EstimatorSettings& s, bool want_icm) {
  const LikelihoodContext<double> ctx(in.s, in.x.rows());
  const auto make = [est](const BoxSpec& b) -> Fitter {
    return [est, &b](const LikelihoodContext<double>& c, Index w) { return est(c, b, w, {}); };
  };
  return from_report(tune_box_family(make, ctx, families_for(s), s.order), want_icm);
}

Fit plain(PlainFit est, const FitInput& in, const EstimatorSettings& s, bool want_icm) {
  const LikelihoodContext<double> ctx(in.s, in.x.rows());
  const Fitter fit = [est](const LikelihoodContext<double>& c, Index w) { return est(c, w, {}); };
  return from_report(s.order.automatic ? tune_order(fit, ctx) : fit(ctx, s.order.fixed), want_icm);
}

Fit masked(MaskSpec::Kind kind, const FitInput& in, const EstimatorSettings& s) {
  Fit f;
  MaskSpec m{kind, 0};
  if (s.width) m.k = *s.width;
  else m = cv_tune_mask(in.x, kind).spec;
  f.cm = banded_estimate(in.s, m).dense();
  f.hyper_name = "k";
  f.hyper = static_cast<double>(m.k);
  return f;
}

Fit shrunk(ShrinkTarget target, const FitInput& in, const EstimatorSettings& s, bool want_icm, const char* who) {
  Fit f;
  const ShrinkResult r = shrink_estimate(in.x, in.s, target, s.rho);
  f.cm = r.cm;
  f.toeplitz = false;
  f.hyper_name = "rho";
  f.hyper = r.rho;
  if (want_icm) f.icm = pd_inverse(f.cm, who);
  return f;
}

const BoxSpec& timing_box(Index p) { return cached_box_spec(standard_box_families().front(), p); }

std::vector<EstimatorInfo> build() {
  std::vector<EstimatorInfo> r;
  r.push_back({"scm", "sample covariance (1/N) sum x x^T", false, "O(N P^2)", "",
               [](const FitInput& in, const EstimatorSettings&, bool) {
                 Fit f;
                 f.cm = in.s;
                 f.toeplitz = false;
                 return f;
               },
               {}});
  r.push_back({"savg", "diagonal averaging of the SCM", false, "O(P^2)", "",
               [](const FitInput& in, const EstimatorSettings&, bool) {
                 Fit f;
                 f.cm = s_avg(in.s).dense();
                 return f;
               },
               [](const FitInput& in, Index, int) { (void)s_avg(in.s); }});
  r.push_back({"band", "banded diagonal average, k by 4-fold CV", false, "O(P k_B)", "k",
               [](const FitInput& in, const EstimatorSettings& s, bool) { return masked(MaskSpec::Kind::Banding, in, s); },
               [](const FitInput& in, Index h, int) { (void)banded_estimate(in.s, {MaskSpec::Kind::Banding, h}); }});
  r.push_back({"tape", "tapered diagonal average, k by 4-fold CV", false, "O(P k_T)", "k",
               [](const FitInput& in, const EstimatorSettings& s, bool) { return masked(MaskSpec::Kind::Tapering, in, s); },
               [](const FitInput& in, Index h, int) { (void)banded_estimate(in.s, {MaskSpec::Kind::Tapering, h}); }});
  r.push_back({"circ", "circulant maximum likelihood", true, "O(P^2)", "",
               [](const FitInput& in, const EstimatorSettings&, bool want_icm) {
                 Fit f;
                 f.cm = circ_mle(in.s).dense();
                 if (want_icm) f.icm = pd_inverse(f.cm, "circ");
                 return f;
               },
               [](const FitInput& in, Index, int) { (void)circ_mle(in.s); }});
  r.push_back({"em", "EM on a 2P circulant embedding", true, "O(T_E P^3)", "iterations",
               [](const FitInput& in, const EstimatorSettings& s, bool want_icm) {
                 Fit f;
                 const EmResult e = em_toeplitz(in.s, {s.em_g, s.em_max_iter, s.em_tol});
                 f.cm = e.cm;
                 f.hyper_name = "iterations";
                 f.hyper = e.iterations;
                 f.iterations = e.iterations;
                 f.converged = e.converged;
                 if (want_icm) f.icm = pd_inverse(f.cm, "em");
                 return f;
               },
               [](const FitInput& in, Index, int em_iter) { (void)em_toeplitz(in.s, {0, em_iter, 0.0}); }});
  r.push_back({"shrink_savg", "shrinkage toward the diagonal average, plug-in rho", false, "O(N P^2)", "rho",
               [](const FitInput& in, const EstimatorSettings& s, bool) {
                 return shrunk(ShrinkTarget::SAvg, in, s, false, "shrink_savg");
               },
               [](const FitInput& in, Index, int) { (void)shrink_estimate(in.x, in.s, ShrinkTarget::SAvg); }});
  r.push_back({"shrink_th", "shrinkage toward t_H (equal diagonal, equal off-diagonal), plug-in rho", true,
               "O(N P^2)", "rho",
               [](const FitInput& in, const EstimatorSettings& s, bool want_icm) {
                 return shrunk(ShrinkTarget::TH, in, s, want_icm, "shrink_th");
               },
               [](const FitInput& in, Index, int) { (void)shrink_estimate(in.x, in.s, ShrinkTarget::TH); }});
  r.push_back({"eig", "GS likelihood, eigenvalue barrier (P <= 64), BIC order", true, "O(w P^3) per step", "order",
               [](const FitInput& in, const EstimatorSettings& s, bool want_icm) {
                 return plain(&estimate_eig, in, s, want_icm);
               },
               [](const FitInput& in, Index h, int) {
                 const LikelihoodContext<double> ctx(in.s, in.x.rows());
                 (void)estimate_eig(ctx, h);
               }});
  r.push_back({"frob", "GS likelihood, Frobenius barrier, BIC order", true, "O(xi P^2)", "order",
               [](const FitInput& in, const EstimatorSettings& s, bool want_icm) {
                 return plain(&estimate_frob, in, s, want_icm);
               },
               [](const FitInput& in, Index h, int) {
                 const LikelihoodContext<double> ctx(in.s, in.x.rows());
                 (void)estimate_frob(ctx, h);
               }});
  r.push_back({"pgd", "GS likelihood, box constraints, projected gradient, BIC order and family", true,
               "O(L_B T_B P^2)", "order",
               [](const FitInput& in, const EstimatorSettings& s, bool want_icm) {
                 return boxed(&estimate_pgd, in, s, want_icm);
               },
               [](const FitInput& in, Index h, int) {
                 const LikelihoodContext<double> ctx(in.s, in.x.rows());
                 (void)estimate_pgd(ctx, timing_box(in.s.rows()), h);
               }});
  r.push_back({"pls", "projected least squares in closed form, BIC order and family", true, "O(P i + i^3)", "order",
               [](const FitInput& in, const EstimatorSettings& s, bool want_icm) {
                 return boxed(&estimate_pls, in, s, want_icm);
               },
               [](const FitInput& in, Index h, int) { (void)pls_alpha(in.s, timing_box(in.s.rows()), h); }});
  return r;
}

}  // namespace

const std::vector<EstimatorInfo>& registry() {
  static const std::vector<EstimatorInfo> r = build();
  return r;
}

const EstimatorInfo* find_estimator(const std::string& name) {
  for (const auto& e : registry())
    if (e.name == name) return &e;
  return nullptr;
}

}  // namespace gstoep::bench
