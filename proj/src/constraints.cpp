#include "gstoep/constraints.hpp"

#include <cmath>
#include <sstream>

namespace gstoep {

void ToleranceSet::validate() const {
  if (!(eps0 > 0.0 && eps_f > 0.0 && eps_eta > 0.0 && eps_eig > 0.0)) {
    throw std::invalid_argument("ToleranceSet: all tolerances must be strictly positive");
  }
  if (eps_f >= 1.0 || eps_eta >= 1.0) throw std::invalid_argument("ToleranceSet: eps_f and eps_eta must be < 1");
}

double b_of_k(const VecR& k) {
  const Index p = k.size() + 1;
  if (p < 2) return 0.0;
  const VecR f = fib_seq<double>(k, p - 2);
  double s = 0.0;
  for (Index d = 1; d < p; ++d) {
    double inner = 0.0;
    for (Index j = 1; j <= d; ++j) inner += k(p - j - 1) * f(d - j);
    s += static_cast<double>(p - d) * inner * inner;
  }
  return s;
}

BoxFamily exponential_family(double lambda) {
  std::ostringstream id;
  id << "exp" << lambda;
  return BoxFamily{id.str(), [lambda](double eta, Index i) { return eta * std::exp(-lambda * static_cast<double>(i)); }};
}

const std::vector<BoxFamily>& standard_box_families() {
  static const std::vector<BoxFamily> families = {exponential_family(0.6), exponential_family(1.0),
                                                  exponential_family(1.4), exponential_family(1.8),
                                                  exponential_family(2.2)};
  return families;
}

void validate_family(const BoxFamily& family, Index p) {
  if (!family.f) throw std::invalid_argument("validate_family: empty function");
  const double grid[] = {0.0, 1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0};
  for (Index i = 1; i < p; ++i) {
    if (family.f(0.0, i) != 0.0) {
      throw std::invalid_argument("validate_family: " + family.id + " does not vanish at eta = 0");
    }
    double prev = 0.0;
    for (double eta : grid) {
      const double v = family.f(eta, i);
      if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("validate_family: " + family.id + " is negative");
      if (v < prev) throw std::invalid_argument("validate_family: " + family.id + " is not monotone in eta");
      prev = v;
    }
  }
}

namespace {

VecR family_bounds(const BoxFamily& family, Index p, double eta) {
  VecR k(p - 1);
  for (Index i = 1; i < p; ++i) k(i - 1) = family.f(eta, i);
  return k;
}

}  // namespace

EtaResult bisect_eta(const BoxFamily& family, Index p, double tol) {
  if (p < 2) throw std::invalid_argument("bisect_eta: need P >= 2");
  if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("bisect_eta: tolerance must be in (0, 1)");
  validate_family(family, p);

  double lo = 0.0;
  double hi = 1.0;
  while (b_of_k(family_bounds(family, p, hi)) < 1.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) throw std::runtime_error("bisect_eta: B_f(eta) never reaches 1 for " + family.id);
  }
  EtaResult best{lo, family_bounds(family, p, lo), b_of_k(family_bounds(family, p, lo))};
  for (int it = 0; it < 200 && best.bound < 1.0 - tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const VecR k = family_bounds(family, p, mid);
    const double b = b_of_k(k);
    if (b < 1.0) {
      lo = mid;
      best = EtaResult{mid, k, b};
    } else {
      hi = mid;
    }
  }
  if (!(best.bound >= 1.0 - tol && best.bound < 1.0)) {
    throw std::runtime_error("bisect_eta: failed to bracket B_f(eta) for " + family.id);
  }
  return best;
}

BoxSpec::BoxSpec(VecR k, std::string family_id, double eta)
    : k_(std::move(k)), family_id_(std::move(family_id)), eta_(eta) {
  for (Index i = 0; i < k_.size(); ++i) {
    if (!(k_(i) > 0.0)) throw std::invalid_argument("BoxSpec: every K_i must be > 0");
  }
  bound_ = b_of_k(k_);
  if (!(bound_ < 1.0)) throw std::invalid_argument("BoxSpec: B(K) >= 1, no positive definiteness certificate");
}

BoxSpec BoxSpec::from_family(const BoxFamily& family, Index p, double tol) {
  EtaResult r = bisect_eta(family, p, tol);
  return BoxSpec(std::move(r.k), family.id, r.eta);
}

FrobConstraint frob_constraint(const GsParams<double>& alpha, double eps_f, const std::vector<Index>& support,
                               double rel_step) {
  FrobConstraint out;
  out.value = frob_constraint_value(alpha, eps_f);
  out.gradient = VecR::Zero(static_cast<Index>(support.size()));
  const VecR base = alpha.full();
  for (size_t n = 0; n < support.size(); ++n) {
    const Index i = support[n];
    VecR x = base;
    const double h = rel_step * std::max(alpha.alpha0(), std::abs(base(i)));
    x(i) += h;
    out.gradient(static_cast<Index>(n)) = (frob_constraint_value(GsParams<double>::from_full(x), eps_f) - out.value) / h;
  }
  return out;
}

}  // namespace gstoep
