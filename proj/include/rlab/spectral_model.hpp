#pragma once

// Weighted finite measure spaces, orthonormal eigenbases and self-adjoint
// operators stored by eigendecomposition.
//
// Convention: the operator A is nonnegative and the Laplacian is recovered as
// Delta = -A^2, so a Delta-based formula is evaluated on an eigenvalue tau of
// A by substituting -tau^2.

#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rlab {

using Complex = std::complex<double>;
using Index = Eigen::Index;
using RVector = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;

class LinearMap;

/// Point masses w_i > 0 on {0, ..., N-1}.
class FiniteMeasureSpace {
 public:
  explicit FiniteMeasureSpace(RVector weights);
  static FiniteMeasureSpace uniform(Index size, double weight = 1.0);

  Index size() const { return weights_.size(); }
  const RVector& weights() const { return weights_; }
  double total_mass() const { return weights_.sum(); }
  /// <u, v> = sum_i w_i u_i conj(v_i).
  Complex inner(const CVector& u, const CVector& v) const;

  friend bool operator==(const FiniteMeasureSpace& a, const FiniteMeasureSpace& b);

 private:
  RVector weights_;
};

/// An orthonormal family e_1..e_r in L^2(X, w). It may span a proper subspace
/// (band-limited models); all spectral maps then live on that subspace.
class EigenBasis {
 public:
  virtual ~EigenBasis() = default;

  virtual const FiniteMeasureSpace& space() const = 0;
  virtual Index rank() const = 0;
  /// Coefficients c_i = <u, e_i>.
  virtual CVector analyze(const CVector& u) const = 0;
  /// sum_i c_i e_i.
  virtual CVector synthesize(const CVector& c) const = 0;
  /// N x r matrix of sampled eigenvectors.
  virtual CMatrix matrix() const = 0;
  /// Selected columns of matrix().
  virtual CMatrix columns(const std::vector<Index>& idx) const;
  /// |e_i(x)|^2 for all x, i (N x r). Used by exact 2 -> inf norms.
  virtual RMatrix squared_moduli() const;
  /// sum_i m2_i |e_i(x)|^2 for every x.
  virtual RVector row_energy(const RVector& m2) const;
  /// True when every e_i is real-valued.
  virtual bool real_vectors() const = 0;
  /// True when the spectral map with multiplier m sends real vectors to real vectors.
  virtual bool preserves_real(const CVector& m) const;
  /// True when translations of the sample grid commute with every spectral
  /// map, so that all sample points are equivalent (flat tori).
  virtual bool homogeneous() const { return false; }
};

/// Eigenvectors stored explicitly as columns.
class DenseBasis final : public EigenBasis {
 public:
  /// `homogeneous` is inherited from a parent basis when the columns are a subset of it.
  DenseBasis(FiniteMeasureSpace space, CMatrix vectors, bool homogeneous = false);

  const FiniteMeasureSpace& space() const override { return space_; }
  Index rank() const override { return vectors_.cols(); }
  CVector analyze(const CVector& u) const override;
  CVector synthesize(const CVector& c) const override;
  CMatrix matrix() const override { return vectors_; }
  CMatrix columns(const std::vector<Index>& idx) const override;
  RMatrix squared_moduli() const override;
  bool real_vectors() const override { return real_; }
  bool homogeneous() const override { return homogeneous_; }

  /// max |G - I| for the weighted Gram matrix G.
  double orthonormality_residual() const;

 private:
  FiniteMeasureSpace space_;
  CMatrix vectors_;
  CMatrix weighted_adjoint_;  // E^H W
  bool real_;
  bool homogeneous_;
};

/// Closed window [a, b], a < b.
struct SpectralWindow {
  SpectralWindow(double a, double b);
  bool contains(double tau) const { return tau >= a && tau <= b; }
  double a;
  double b;
};

/// Parameters of (A^2 - (lambda + i mu)^2)^{-beta}, optionally localized by a window.
struct ResolventQuery {
  ResolventQuery(double lambda, double mu, double beta = 1.0,
                 std::optional<SpectralWindow> cutoff = std::nullopt);
  double lambda;
  double mu;
  double beta;
  std::optional<SpectralWindow> cutoff;
  Complex z() const { return {lambda, mu}; }
};

/// Self-adjoint nonnegative operator A = sum tau_i e_i <., e_i>.
class SpectralOperator {
 public:
  SpectralOperator(std::shared_ptr<const EigenBasis> basis, RVector eigenvalues,
                   std::string label = {});

  /// Diagonalizes a matrix representing A^2 in the point basis, self-adjoint
  /// in the weighted inner product. Eigenvalues below -tol are rejected;
  /// the rest are clipped at zero before taking square roots.
  static SpectralOperator from_weighted_square(const FiniteMeasureSpace& space,
                                               const CMatrix& a_squared, std::string label = {},
                                               double negative_tolerance = 1e-9);

  /// Builds from explicit eigenpairs; sorts and validates orthonormality.
  static SpectralOperator from_eigenpairs(const FiniteMeasureSpace& space, const RVector& eigenvalues,
                                          const CMatrix& eigenvectors, std::string label = {});

  const FiniteMeasureSpace& space() const { return basis_->space(); }
  const std::shared_ptr<const EigenBasis>& basis() const { return basis_; }
  const RVector& eigenvalues() const { return eigenvalues_; }
  Index rank() const { return eigenvalues_.size(); }
  Index size() const { return space().size(); }
  const std::string& label() const { return label_; }

  /// m(tau_i) for every eigenvalue; throws DomainError if any value is not finite.
  CVector eigen_action(const std::function<Complex(double)>& m) const;

  /// Indices i with tau_i in the closed window.
  std::vector<Index> indices_in(const SpectralWindow& window) const;

 private:
  std::shared_ptr<const EigenBasis> basis_;
  RVector eigenvalues_;
  std::string label_;
};

// Functional calculus ------------------------------------------------------

LinearMap project(const SpectralOperator& op, const SpectralWindow& window);
LinearMap multiplier(const SpectralOperator& op, const std::function<Complex(double)>& m);
/// m(A) restricted to the span of the listed eigenvectors (zero on the rest),
/// stored on a reduced basis so that applying it costs O(N |idx|).
LinearMap multiplier_on(const SpectralOperator& op, const std::vector<Index>& idx,
                        const std::function<Complex(double)>& m);
/// (A^2 - (lambda + i mu)^2)^{-beta}, principal branch for non-integer beta.
LinearMap resolvent_sq(const SpectralOperator& op, const ResolventQuery& query);
/// Im[(A^2 - (lambda + i mu)^2)^{-1}], positive for mu > 0.
LinearMap im_resolvent(const SpectralOperator& op, const ResolventQuery& query);

/// Scalar multipliers shared with the inequality checks.
Complex resolvent_symbol(double tau, double lambda, double mu, double power);
double im_resolvent_symbol(double tau, double lambda, double mu);

struct CosineQuadrature {
  /// Truncation point; 0 selects T with exp(-eps T) < tail_tolerance.
  double truncation = 0.0;
  /// Panel length; 0 selects min(pi/(8 lambda), pi/(8 tau_max)).
  double step = 0.0;
  double tail_tolerance = 1e-12;
  double panel_tolerance = 1e-13;
};

/// Eigenvalue action of (1/(i(lambda+i eps))) int_0^T e^{i l lambda - l eps} cos(l tau) dl.
Complex cosine_resolvent_symbol(double tau, double lambda, double eps, const CosineQuadrature& quad,
                                double tau_max);

/// Quadrature representation of (Delta + (lambda + i eps)^2)^{-1}.
LinearMap cosine_resolvent(const SpectralOperator& op, double lambda, double eps,
                           const CosineQuadrature& quad = {});

/// (lambda^2 + A^2)^{s/2}, the symbol of (lambda^2 - Delta)^{s/2}.
LinearMap flattened_sobolev(const SpectralOperator& op, double lambda, double s);

/// Same eigenvectors, eigenvalues tau_i^alpha.
SpectralOperator fractional_power(const SpectralOperator& op, double alpha);

}  // namespace rlab
