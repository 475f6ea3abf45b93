#include "gstoep/processes.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <random>
#include <sstream>

namespace gstoep {

ProcessSpec ProcessSpec::ar(VecR a, double sigma2, Index p) {
  ProcessSpec s;
  s.kind = Kind::AR;
  s.a = std::move(a);
  s.sigma2 = sigma2;
  s.dim = p;
  s.validate();
  return s;
}

ProcessSpec ProcessSpec::ma(VecR b, double sigma2, Index p) {
  ProcessSpec s;
  s.kind = Kind::MA;
  s.b = std::move(b);
  s.sigma2 = sigma2;
  s.dim = p;
  s.validate();
  return s;
}

ProcessSpec ProcessSpec::arma(VecR a, VecR b, double sigma2, Index p) {
  ProcessSpec s;
  s.kind = Kind::ARMA;
  s.a = std::move(a);
  s.b = std::move(b);
  s.sigma2 = sigma2;
  s.dim = p;
  s.validate();
  return s;
}

ProcessSpec ProcessSpec::fbm(double hurst, Index p) {
  ProcessSpec s;
  s.kind = Kind::FBM;
  s.hurst = hurst;
  s.dim = p;
  s.validate();
  return s;
}

void ProcessSpec::validate() const {
  if (dim < 1) throw std::invalid_argument("process: dimension must be >= 1");
  if (kind == Kind::FBM) {
    if (!(hurst >= 0.5 && hurst <= 1.0)) throw std::invalid_argument("process: Hurst parameter must lie in [0.5, 1]");
    return;
  }
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw std::invalid_argument("process: sigma2 must be > 0");
  if (!a.allFinite() || !b.allFinite()) throw std::invalid_argument("process: coefficients must be finite");
  if (kind != Kind::MA && a.size() > 0) step_down<double>(a);
}

std::string ProcessSpec::describe() const {
  std::ostringstream os;
  auto list = [&](const VecR& v) {
    os << "[";
    for (Index i = 0; i < v.size(); ++i) os << (i ? "," : "") << v(i);
    os << "]";
  };
  switch (kind) {
    case Kind::AR: os << "ar a="; list(a); os << " sigma2=" << sigma2; break;
    case Kind::MA: os << "ma b="; list(b); os << " sigma2=" << sigma2; break;
    case Kind::ARMA: os << "arma a="; list(a); os << " b="; list(b); os << " sigma2=" << sigma2; break;
    case Kind::FBM: os << "fbm h=" << hurst; break;
  }
  os << " P=" << dim;
  return os.str();
}

namespace {

VecR ma_autocov(const VecR& b, double sigma2, Index p) {
  VecR psi(b.size() + 1);
  psi(0) = 1.0;
  psi.tail(b.size()) = b;
  VecR c = VecR::Zero(p);
  for (Index k = 0; k < p && k < psi.size(); ++k) {
    double s = 0.0;
    for (Index j = 0; j + k < psi.size(); ++j) s += psi(j) * psi(j + k);
    c(k) = sigma2 * s;
  }
  return c;
}

// c(0), c(1) explicit, then c(k) = a c(k-1).
VecR arma11_autocov(double a, double b, double sigma2, Index p) {
  VecR c(p);
  const double den = 1.0 - a * a;
  c(0) = sigma2 * (1.0 + 2.0 * a * b + b * b) / den;
  if (p > 1) c(1) = sigma2 * (1.0 + a * b) * (a + b) / den;
  for (Index k = 2; k < p; ++k) c(k) = a * c(k - 1);
  return c;
}

// General ARMA through the psi weights of its MA(infinity) form, truncated
// once they are negligible.
VecR arma_autocov(const VecR& a, const VecR& b, double sigma2, Index p) {
  std::vector<double> psi{1.0};
  double tail = 1.0;
  for (Index j = 1; j < 100000 && !(j > b.size() && tail < 1e-17); ++j) {
    double v = j <= b.size() ? b(j - 1) : 0.0;
    for (Index i = 1; i <= a.size() && i <= j; ++i) v += a(i - 1) * psi[static_cast<size_t>(j - i)];
    psi.push_back(v);
    tail = 0.0;
    for (Index i = 0; i < a.size() + 1 && i <= j; ++i) tail += std::abs(psi[static_cast<size_t>(j - i)]);
  }
  const VecR w = Eigen::Map<const VecR>(psi.data() + 1, static_cast<Index>(psi.size()) - 1);
  return ma_autocov(w, sigma2, p);
}

}  // namespace

HermitianToeplitz<double> true_cm(const ProcessSpec& spec) {
  spec.validate();
  const Index p = spec.dim;
  switch (spec.kind) {
    case ProcessSpec::Kind::AR:
      return ar_to_autocov<double>(spec.a, spec.sigma2, p);
    case ProcessSpec::Kind::MA:
      return HermitianToeplitz<double>(ma_autocov(spec.b, spec.sigma2, p));
    case ProcessSpec::Kind::ARMA:
      if (spec.a.size() == 1 && spec.b.size() == 1) {
        return HermitianToeplitz<double>(arma11_autocov(spec.a(0), spec.b(0), spec.sigma2, p));
      }
      return HermitianToeplitz<double>(arma_autocov(spec.a, spec.b, spec.sigma2, p));
    case ProcessSpec::Kind::FBM: {
      VecR c(p);
      const double e = 2.0 * spec.hurst;
      for (Index d = 0; d < p; ++d) {
        const double x = static_cast<double>(d);
        c(d) = 0.5 * (std::pow(x + 1.0, e) - 2.0 * std::pow(x, e) + std::pow(std::abs(x - 1.0), e));
      }
      return HermitianToeplitz<double>(c);
    }
  }
  throw std::logic_error("true_cm: unknown process kind");
}

MatR cholesky_factor(const HermitianToeplitz<double>& c) {
  Eigen::LLT<MatR> llt(c.dense());
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("true covariance is not positive definite");
  return llt.matrixL();
}

MatR sample_with_factor(const MatR& chol_lower, Index n, std::uint64_t seed) {
  const Index p = chol_lower.rows();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  MatR z(p, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < p; ++i) z(i, j) = normal(rng);
  return (chol_lower.triangularView<Eigen::Lower>() * z).transpose();
}

MatR sample(const ProcessSpec& spec, Index n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample: need N >= 1");
  return sample_with_factor(cholesky_factor(true_cm(spec)), n, seed);
}

double nmse(const MatR& estimate, const MatR& truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
    throw std::invalid_argument("nmse: shape mismatch");
  }
  const double den = truth.squaredNorm();
  if (!(den > 0.0)) throw std::invalid_argument("nmse: truth has zero norm");
  return (estimate - truth).squaredNorm() / den;
}

}  // namespace gstoep
