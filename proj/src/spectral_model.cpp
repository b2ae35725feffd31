#include "rlab/spectral_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <boost/math/quadrature/gauss.hpp>

#include "rlab/error.hpp"
#include "rlab/linear_map.hpp"

namespace rlab {

using detail::require;

FiniteMeasureSpace::FiniteMeasureSpace(RVector weights) : weights_(std::move(weights)) {
  require(weights_.size() >= 1, "measure space needs at least one point");
  for (Index i = 0; i < weights_.size(); ++i) {
    require(std::isfinite(weights_(i)) && weights_(i) > 0.0, "point masses must be positive and finite");
  }
}

FiniteMeasureSpace FiniteMeasureSpace::uniform(Index size, double weight) {
  return FiniteMeasureSpace(RVector::Constant(size, weight));
}

Complex FiniteMeasureSpace::inner(const CVector& u, const CVector& v) const {
  require(u.size() == size() && v.size() == size(), "vector length does not match the space");
  Complex acc = 0.0;
  for (Index i = 0; i < size(); ++i) acc += weights_(i) * u(i) * std::conj(v(i));
  return acc;
}

bool operator==(const FiniteMeasureSpace& a, const FiniteMeasureSpace& b) {
  return &a == &b || (a.size() == b.size() && a.weights_ == b.weights_);
}

RMatrix EigenBasis::squared_moduli() const { return matrix().cwiseAbs2(); }

RVector EigenBasis::row_energy(const RVector& m2) const { return squared_moduli() * m2; }

CMatrix EigenBasis::columns(const std::vector<Index>& idx) const {
  const CMatrix all = matrix();
  CMatrix out(all.rows(), static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Index>(k)) = all.col(idx[k]);
  return out;
}

bool EigenBasis::preserves_real(const CVector& m) const {
  return real_vectors() && (m.size() == 0 || m.imag().cwiseAbs().maxCoeff() == 0.0);
}

DenseBasis::DenseBasis(FiniteMeasureSpace space, CMatrix vectors, bool homogeneous)
    : space_(std::move(space)), vectors_(std::move(vectors)), homogeneous_(homogeneous) {
  require(vectors_.rows() == space_.size(), "eigenvector length does not match the space");
  weighted_adjoint_ = vectors_.adjoint() * space_.weights().cast<Complex>().asDiagonal();
  real_ = vectors_.size() == 0 || vectors_.imag().cwiseAbs().maxCoeff() == 0.0;
}

CVector DenseBasis::analyze(const CVector& u) const { return weighted_adjoint_ * u; }

CVector DenseBasis::synthesize(const CVector& c) const { return vectors_ * c; }

CMatrix DenseBasis::columns(const std::vector<Index>& idx) const {
  CMatrix out(vectors_.rows(), static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    require(idx[k] >= 0 && idx[k] < rank(), "basis column index out of range");
    out.col(static_cast<Index>(k)) = vectors_.col(idx[k]);
  }
  return out;
}

RMatrix DenseBasis::squared_moduli() const { return vectors_.cwiseAbs2(); }

double DenseBasis::orthonormality_residual() const {
  if (rank() == 0) return 0.0;
  const CMatrix gram = weighted_adjoint_ * vectors_;
  return (gram - CMatrix::Identity(rank(), rank())).cwiseAbs().maxCoeff();
}

SpectralWindow::SpectralWindow(double a_, double b_) : a(a_), b(b_) {
  require(a < b, "spectral window requires a < b");
}

ResolventQuery::ResolventQuery(double lambda_, double mu_, double beta_, std::optional<SpectralWindow> cutoff_)
    : lambda(lambda_), mu(mu_), beta(beta_), cutoff(cutoff_) {
  require(lambda >= 1.0, "resolvent queries need lambda >= 1");
  require(mu > 0.0, "resolvent queries need mu > 0");
  require(beta >= 1.0, "resolvent power must satisfy beta >= 1");
}

// ---------------------------------------------------------------------------

SpectralOperator::SpectralOperator(std::shared_ptr<const EigenBasis> basis, RVector eigenvalues,
                                   std::string label)
    : basis_(std::move(basis)), eigenvalues_(std::move(eigenvalues)), label_(std::move(label)) {
  require(basis_ != nullptr, "operator needs a basis");
  require(eigenvalues_.size() == basis_->rank(), "one eigenvalue per basis vector is required");
  for (Index i = 0; i < eigenvalues_.size(); ++i) {
    require(std::isfinite(eigenvalues_(i)) && eigenvalues_(i) >= 0.0, "eigenvalues of A must be nonnegative");
    require(i == 0 || eigenvalues_(i) >= eigenvalues_(i - 1), "eigenvalues must be sorted ascending");
  }
}

SpectralOperator SpectralOperator::from_weighted_square(const FiniteMeasureSpace& space, const CMatrix& a_squared,
                                                        std::string label, double negative_tolerance) {
  const Index n = space.size();
  require(a_squared.rows() == n && a_squared.cols() == n, "operator matrix does not match the space");
  const RVector sw = space.weights().cwiseSqrt();
  const RVector isw = sw.cwiseInverse();
  CMatrix h = sw.cast<Complex>().asDiagonal() * a_squared * isw.cast<Complex>().asDiagonal();
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw NumericalError("operator is not self-adjoint in the weighted inner product");
  }
  h = 0.5 * (h + h.adjoint()).eval();

  RVector evals;
  CMatrix evecs;
  if (h.imag().cwiseAbs().maxCoeff() == 0.0) {
    Eigen::SelfAdjointEigenSolver<RMatrix> es(h.real());
    if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed");
    evals = es.eigenvalues();
    evecs = es.eigenvectors().cast<Complex>();
  } else {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed");
    evals = es.eigenvalues();
    evecs = es.eigenvectors();
  }
  const double tol = negative_tolerance * scale;
  for (Index i = 0; i < n; ++i) {
    if (evals(i) < -tol) throw NumericalError("operator has a negative eigenvalue " + std::to_string(evals(i)));
  }
  RVector tau = evals.cwiseMax(0.0).cwiseSqrt();
  CMatrix vectors = isw.cast<Complex>().asDiagonal() * evecs;
  return SpectralOperator(std::make_shared<DenseBasis>(space, std::move(vectors)), std::move(tau),
                          std::move(label));
}

SpectralOperator SpectralOperator::from_eigenpairs(const FiniteMeasureSpace& space, const RVector& eigenvalues,
                                                   const CMatrix& eigenvectors, std::string label) {
  require(eigenvectors.cols() == eigenvalues.size(), "one eigenvector per eigenvalue is required");
  std::vector<Index> order(eigenvalues.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return eigenvalues(a) < eigenvalues(b); });
  RVector tau(eigenvalues.size());
  CMatrix vecs(eigenvectors.rows(), eigenvectors.cols());
  for (std::size_t k = 0; k < order.size(); ++k) {
    tau(static_cast<Index>(k)) = eigenvalues(order[k]);
    vecs.col(static_cast<Index>(k)) = eigenvectors.col(order[k]);
  }
  auto basis = std::make_shared<DenseBasis>(space, std::move(vecs));
  if (basis->orthonormality_residual() > 1e-10) {
    throw NumericalError("eigenvectors are not orthonormal in the weighted inner product");
  }
  return SpectralOperator(std::move(basis), std::move(tau), std::move(label));
}

CVector SpectralOperator::eigen_action(const std::function<Complex(double)>& m) const {
  CVector out(rank());
  for (Index i = 0; i < rank(); ++i) {
    const Complex v = m(eigenvalues_(i));
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw DomainError("multiplier is not finite at eigenvalue " + std::to_string(eigenvalues_(i)));
    }
    out(i) = v;
  }
  return out;
}

std::vector<Index> SpectralOperator::indices_in(const SpectralWindow& window) const {
  std::vector<Index> out;
  for (Index i = 0; i < rank(); ++i) {
    if (window.contains(eigenvalues_(i))) out.push_back(i);
  }
  return out;
}

// ---------------------------------------------------------------------------

LinearMap project(const SpectralOperator& op, const SpectralWindow& window) {
  return multiplier(op, [&](double t) { return window.contains(t) ? Complex(1.0) : Complex(0.0); });
}

LinearMap multiplier(const SpectralOperator& op, const std::function<Complex(double)>& m) {
  return LinearMap::spectral(op.basis(), op.eigen_action(m));
}

LinearMap multiplier_on(const SpectralOperator& op, const std::vector<Index>& idx,
                        const std::function<Complex(double)>& m) {
  auto sub = std::make_shared<DenseBasis>(op.space(), op.basis()->columns(idx), op.basis()->homogeneous());
  CVector values(static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const Complex v = m(op.eigenvalues()(idx[k]));
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw DomainError("multiplier is not finite");
    values(static_cast<Index>(k)) = v;
  }
  return LinearMap::spectral(std::move(sub), std::move(values));
}

Complex resolvent_symbol(double tau, double lambda, double mu, double power) {
  const Complex z(lambda, mu);
  const Complex d = tau * tau - z * z;
  if (power == std::round(power) && std::abs(power) <= 64) {
    Complex base = 1.0 / d;
    Complex out = 1.0;
    for (int k = 0; k < static_cast<int>(std::abs(power)); ++k) out *= base;
    return power >= 0 ? out : 1.0 / out;
  }
  return std::pow(d, -power);
}

double im_resolvent_symbol(double tau, double lambda, double mu) {
  // Im 1/d = -Im d / |d|^2 with Im d = -2 lambda mu.
  const double re = tau * tau - lambda * lambda + mu * mu;
  const double im = -2.0 * lambda * mu;
  return -im / (re * re + im * im);
}

LinearMap resolvent_sq(const SpectralOperator& op, const ResolventQuery& query) {
  return multiplier(op, [&](double t) {
    if (query.cutoff && !query.cutoff->contains(t)) return Complex(0.0);
    return resolvent_symbol(t, query.lambda, query.mu, query.beta);
  });
}

LinearMap im_resolvent(const SpectralOperator& op, const ResolventQuery& query) {
  return multiplier(op, [&](double t) {
    if (query.cutoff && !query.cutoff->contains(t)) return Complex(0.0);
    return Complex(im_resolvent_symbol(t, query.lambda, query.mu));
  });
}

namespace {

struct CosinePlan {
  double truncation;
  double step;
};

CosinePlan plan_cosine(double lambda, double eps, const CosineQuadrature& quad, double tau_max) {
  require(eps > 0.0, "cosine transform needs eps > 0");
  require(lambda > 0.0, "cosine transform needs lambda > 0");
  require(quad.tail_tolerance > 0.0 && quad.tail_tolerance < 1.0, "tail tolerance must lie in (0, 1)");
  CosinePlan plan{};
  // The automatic choice carries a little slack so that rounding cannot trip the tail check.
  plan.truncation = quad.truncation > 0.0 ? quad.truncation : -std::log(quad.tail_tolerance) / eps * (1.0 + 1e-9);
  if (std::exp(-eps * plan.truncation) > quad.tail_tolerance) {
    throw DomainError("cosine transform truncation is too short: exp(-eps T) exceeds the tail tolerance");
  }
  const double fastest = std::max({lambda, tau_max, 1e-300});
  plan.step = quad.step > 0.0 ? quad.step : M_PI / (8.0 * fastest);
  return plan;
}

// Composite Gauss-Legendre over panels short enough that each panel sees at
// most a small fraction of an oscillation.
Complex cosine_integral(double tau, double lambda, double eps, const CosinePlan& plan) {
  using GL = boost::math::quadrature::gauss<double, 10>;
  const auto& abscissa = GL::abscissa();
  const auto& weights = GL::weights();
  const Complex w(lambda, eps);
  const auto panels = static_cast<long>(std::ceil(plan.truncation / plan.step));
  const double h = plan.truncation / static_cast<double>(panels);
  Complex total = 0.0;
  for (long p = 0; p < panels; ++p) {
    const double mid = (static_cast<double>(p) + 0.5) * h;
    Complex panel = 0.0;
    auto eval = [&](double l) { return std::exp(Complex(0.0, 1.0) * w * l) * std::cos(l * tau); };
    for (std::size_t k = 0; k < abscissa.size(); ++k) {
      const double x = abscissa[k] * 0.5 * h;
      if (abscissa[k] == 0.0) {
        panel += weights[k] * eval(mid);
      } else {
        panel += weights[k] * (eval(mid - x) + eval(mid + x));
      }
    }
    total += 0.5 * h * panel;
  }
  return total / (Complex(0.0, 1.0) * w);
}

}  // namespace

Complex cosine_resolvent_symbol(double tau, double lambda, double eps, const CosineQuadrature& quad,
                                double tau_max) {
  return cosine_integral(tau, lambda, eps, plan_cosine(lambda, eps, quad, std::max(tau_max, tau)));
}

LinearMap cosine_resolvent(const SpectralOperator& op, double lambda, double eps, const CosineQuadrature& quad) {
  const double tau_max = op.rank() > 0 ? op.eigenvalues().maxCoeff() : 0.0;
  const CosinePlan plan = plan_cosine(lambda, eps, quad, tau_max);
  std::map<double, Complex> cache;
  return multiplier(op, [&](double t) {
    auto it = cache.find(t);
    if (it != cache.end()) return it->second;
    const Complex v = cosine_integral(t, lambda, eps, plan);
    cache.emplace(t, v);
    return v;
  });
}

LinearMap flattened_sobolev(const SpectralOperator& op, double lambda, double s) {
  require(lambda >= 1.0, "flattened Sobolev weights need lambda >= 1");
  return multiplier(op, [&](double t) { return Complex(std::pow(lambda * lambda + t * t, 0.5 * s)); });
}

SpectralOperator fractional_power(const SpectralOperator& op, double alpha) {
  require(alpha > 0.0, "fractional power needs alpha > 0");
  RVector tau = op.eigenvalues().unaryExpr([&](double t) { return std::pow(t, alpha); });
  return SpectralOperator(op.basis(), std::move(tau), op.label() + "^" + std::to_string(alpha));
}

}  // namespace rlab
