#pragma once

// Model operators: flat tori (exact Fourier diagonalization), the round
// 2-sphere (real spherical harmonics on a Gauss-Legendre grid), periodic
// divergence-form operators with rough coefficients, and random models.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "rlab/spectral_model.hpp"

namespace rlab {

/// e^{i k.x} / (2 pi)^{n/2} for max_i |k_i| <= K, sampled on a uniform G^n grid with
/// weights (2 pi / G)^n. Never materialized; analysis and synthesis use FFTs.
class FourierBasis final : public EigenBasis {
 public:
  FourierBasis(int n, int K, int G);
  ~FourierBasis() override;
  FourierBasis(const FourierBasis&) = delete;
  FourierBasis& operator=(const FourierBasis&) = delete;

  const FiniteMeasureSpace& space() const override { return space_; }
  Index rank() const override { return static_cast<Index>(modes_.size()); }
  CVector analyze(const CVector& u) const override;
  CVector synthesize(const CVector& c) const override;
  CMatrix matrix() const override;
  CMatrix columns(const std::vector<Index>& idx) const override;
  RVector row_energy(const RVector& m2) const override;
  bool real_vectors() const override { return false; }
  bool preserves_real(const CVector& m) const override;
  bool homogeneous() const override { return true; }

  int dimension() const { return n_; }
  int cutoff() const { return K_; }
  int grid() const { return G_; }
  const std::vector<std::vector<int>>& modes() const { return modes_; }
  /// |k| for each mode, ascending.
  RVector frequencies() const;
  /// <v e_j, e_i> = G^{-n} sum_x v(x) e^{-i (k_i - k_j).x}, from one FFT of v.
  CMatrix multiplication_matrix(const RVector& v) const;

 private:
  Index flat_index(const std::vector<int>& k) const;  // position of k mod G in the grid

  int n_, K_, G_;
  FiniteMeasureSpace space_;
  std::vector<std::vector<int>> modes_;
  std::vector<Index> slot_;     // grid slot of each mode
  std::vector<Index> partner_;  // index of -k
  mutable std::mutex mutex_;
  void* buffer_ = nullptr;
  void* forward_ = nullptr;
  void* backward_ = nullptr;
};

enum class Geometry { Torus, Sphere, Abstract };

/// A model operator together with the geometry of its sample points.
struct Model {
  std::shared_ptr<const SpectralOperator> op;
  Geometry geometry = Geometry::Abstract;
  int dimension = 1;
  /// Torus: angles in [0, 2 pi)^n. Sphere: unit vectors in R^3. Abstract: index.
  RMatrix points;
  /// Largest lambda at which discretization error does not pollute scaling.
  double trusted_lambda = 1.0;
  std::string label;

  double distance(Index i, const RVector& x0) const;
  /// Length scale of one grid cell.
  double cell() const;
};

Model make_torus(int n, int K, int G);
SpectralOperator build_torus(int n, int K, int G);

struct GaussLegendre {
  RVector nodes;    // ascending in (-1, 1)
  RVector weights;
};
GaussLegendre gauss_legendre(int count);

/// Normalized associated Legendre functions Pbar_lm(x) for 0 <= m <= l <= L,
/// scaled so that Pbar_lm(cos theta) e^{i m phi} has unit L^2 norm on S^2.
/// Returned as a flat table indexed by l (l+1)/2 + m.
std::vector<double> normalized_legendre(int L, double x);

/// Legendre polynomial P_l(x).
double legendre_p(int l, double x);

struct SphereGrid {
  int L_max = 16;
  int n_theta = 17;
  int n_phi = 33;
  /// Retained degree band [l_min, l_max]; defaults to [0, L_max].
  int l_min = 0;
  int l_max = -1;
};

Model make_sphere(const SphereGrid& grid);
SpectralOperator build_sphere(int L_max, int n_theta, int n_phi);

/// Degree-l projector kernel ((2l+1)/4 pi) P_l(cos d(x,y)) as a dense map on the sphere grid.
CMatrix zonal_projector(const Model& sphere, int l);

struct CoefficientField {
  RVector values;  // on the grid, row-major in 2D
  double lipschitz_quotient = 0.0;
  double holder_quotient = 0.0;
  double second_difference_quotient = 0.0;
};

/// a(x) = 1 + delta sum_{j=1..J} 2^{-js} cos(2^j x.e_j) with axes alternating,
/// sampled on the N^d periodic grid shifted by `offset` cells along `axis`.
CoefficientField weierstrass_coefficient(double s, double delta, int J, int N, int dim, int axis = -1,
                                         double offset = 0.0);

struct RoughMetricModel {
  int dim = 1;
  int N = 64;
  double s = 2.0;
  double delta = 0.1;
  int J = 4;
  /// Multiplies the coefficient; a constant field when delta = 0.
  double scale = 1.0;
};

Model make_rough(const RoughMetricModel& model);
SpectralOperator build_rough(const RoughMetricModel& model);

/// Random weights in [1/2, 2], random weighted-orthonormal real eigenvectors,
/// eigenvalues uniform in [0, tau_max].
Model make_random(Index dim, double tau_max, std::uint64_t seed);

enum class PotentialKind { SingleBump, InversePower, Random, Constant };

struct PotentialSpec {
  PotentialKind kind = PotentialKind::SingleBump;
  double height = 1.0;      // bump height / constant value / random amplitude
  double radius = 0.5;      // bump radius
  double gamma = 1.0;       // inverse-power exponent
  double p = 2.0;           // integrability exponent for the reported norm
  Index center = 0;         // grid index of x0
  std::uint64_t seed = 3;
};

struct Potential {
  RVector values;
  double p = 2.0;
  double norm = 0.0;  // ||V||_{L^p} on the model measure
};

PotentialKind parse_potential_kind(const std::string& key);
Potential build_potential(const PotentialSpec& spec, const Model& model);

}  // namespace rlab
