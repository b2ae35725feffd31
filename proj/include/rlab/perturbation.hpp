#pragma once

// Stability of resolvent bounds under potential perturbations.
//
// Everything is Galerkin: V acts on the span of the model eigenbasis through
// the matrix <V e_j, e_i>, so perturbed resolvents are modal maps on the same
// basis as the free one.

#include <optional>
#include <utility>
#include <vector>

#include "rlab/inequality_lab.hpp"
#include "rlab/linear_map.hpp"
#include "rlab/lp_norms.hpp"
#include "rlab/manifolds.hpp"

namespace rlab {

/// Matrix of multiplication by v in the eigenbasis, <v e_j, e_i>.
CMatrix galerkin_matrix(const SpectralOperator& op, const RVector& v);

/// (Delta + (lambda + i)^2)^{-1}.
LinearMap free_resolvent(const SpectralOperator& op, double lambda);

/// Upper bracket of ||R(lambda)||_{X'(lambda) -> X(lambda)} maximized over the grid.
double c0_estimate(const Model& model, double q, const std::vector<double>& lambda_grid,
                   const IterationConfig& cfg = {});

struct MEstimate {
  double lambda = 1.0;
  double lower = 0.0;
  double upper = 0.0;
  /// lambda^{2 sigma(q) - 1} ||V||_{L^p}, 1/p = 1 - 2/q.
  double surrogate = 0.0;
  double l2_pair = 0.0;  // exact ||V||_{W^{1/2,2} -> W^{-1/2,2}}
  double lq_pair = 0.0;  // Riesz-Thorin bound for ||V||_{W^{s,q} -> W^{-s,q'}}
};

/// Bracket for ||V||_{X(lambda) -> X'(lambda)}.
MEstimate m_of_lambda(const Model& model, const RVector& v, double lambda, double q);

/// max(1, (C0 ||V|| / c)^{1/(1 - 2 sigma)}); requires 2 sigma < 1.
double lambda0(double C0, double c, double v_norm, double sigma_q);

/// V = big + small with big = V 1_{|V| > alpha0}.
std::pair<RVector, RVector> potential_split(const RVector& v, double alpha0);

/// Smallest alpha0 >= 0 with ||V 1_{|V| > alpha0}||_{L^p} <= target (exact search over |V| levels).
double critical_split(const RVector& v, const FiniteMeasureSpace& space, double p, double target);

struct ResolventMethod {
  enum class Kind { Direct, Neumann };
  Kind kind = Kind::Direct;
  int terms = 0;  // k for Neumann

  static ResolventMethod direct() { return {}; }
  static ResolventMethod neumann(int k) { return {Kind::Neumann, k}; }
};

struct NeumannDiagnostics {
  double contraction = 0.0;   // M C0
  bool certified = false;     // M C0 < 1
  double r_norm = 0.0;        // upper bracket of ||R||_{X' -> X}
  /// ||R|| (M C0)^j / (1 - M C0), j = 0..k; empty unless certified.
  std::vector<double> geometric_bound;
  /// ||neumann(j) - direct||_{W^{-1/2,2} -> W^{1/2,2}}, j = 0..k.
  std::vector<double> observed_error;
  /// Least-squares ratio of consecutive observed errors.
  double observed_ratio = 0.0;
};

struct PerturbedResolvent {
  LinearMap map;         // the direct solve
  std::optional<LinearMap> neumann;
  std::optional<NeumannDiagnostics> diagnostics;
};

/// Bounds entering the Neumann diagnostics.
struct NeumannInputs {
  double M = 0.0;
  double C0 = 0.0;
  double r_norm = 0.0;
};

PerturbedResolvent perturbed_resolvent(const SpectralOperator& op, const RVector& v, double lambda,
                                       const ResolventMethod& method,
                                       const std::optional<NeumannInputs>& inputs = std::nullopt);

struct StabilityOptions {
  double c = 0.5;
  double tolerance = 1e-6;
  /// Also rebuild A_V and check the cluster estimate of the first item on it.
  bool cluster_transfer = true;
  IterationConfig cfg;
};

struct StabilityReport {
  double C0 = 0.0;
  double c = 0.5;
  std::vector<MEstimate> M_of_Lambda;  // per grid point
  /// sup_{grid lambda >= Lambda} M(lambda) for each grid Lambda.
  std::vector<double> M_sup;
  double Lambda0 = 1.0;  // +inf when no grid point qualifies
  double neumann_bound = 0.0;
  bool verified = false;
  std::vector<CheckResult> checks;
};

StabilityReport stability_check(const Model& model, const RVector& v, double q, const std::vector<double>& lambda_grid,
                                const StabilityOptions& options = {});

/// The self-adjoint operator with A_V^2 = A^2 - V on the model band (negative part clipped).
SpectralOperator perturbed_operator(const SpectralOperator& op, const RVector& v);

// Fractional variant ----------------------------------------------------------

/// (A^alpha + V - (lambda + i)^alpha)^{-1}.
LinearMap fractional_resolvent(const SpectralOperator& op, const RVector& v, double alpha, double lambda);

struct FractionalPoint {
  double lambda = 1.0;
  NormBracket norm;  // L^{q'} -> L^q
};

struct FractionalReport {
  double alpha = 1.0;
  double expected_exponent = 0.0;  // 2 sigma(q) + 1 - alpha
  std::vector<FractionalPoint> points;
};

FractionalReport fractional_scan(const Model& model, const RVector& v, double alpha, double q,
                                 const std::vector<double>& lambda_grid, const IterationConfig& cfg = {});

}  // namespace rlab
