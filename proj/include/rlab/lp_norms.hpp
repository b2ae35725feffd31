#pragma once

// Weighted L^p norms and operator-norm estimation between L^p spaces and
// composite (flattened / intersection / sum) spaces.
//
// Exponents are doubles here; +inf is std::numeric_limits<double>::infinity().

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "rlab/linear_map.hpp"
#include "rlab/spectral_model.hpp"

namespace rlab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Dual exponent p' with 1/p + 1/p' = 1.
double dual_exponent(double p);

struct NormBracket {
  double lower = 0.0;
  double upper = 0.0;
  std::string method;

  double mid() const { return 0.5 * (lower + upper); }
};

struct IterationConfig {
  int restarts = 6;
  int max_iters = 400;
  double tolerance = 1e-12;
  std::uint64_t seed = 20240611;
  /// Extra deterministic starting vectors tried before the random ones.
  std::vector<CVector> starts;
  /// Also start from T^* delta_j for up to this many evenly spaced codomain
  /// points. Extremizers of 2 -> q norms tend to concentrate near a point, and
  /// random starts alone often settle on a smaller local maximum.
  int point_starts = 32;
};

double lp_norm(const CVector& v, const RVector& weights, double p);
double lp_norm(const CVector& v, const FiniteMeasureSpace& space, double p);

/// u_i = |v_i|^{p-1} v_i/|v_i|, so that sum_i w_i v_i conj(u_i) = ||v||_p^p.
CVector duality_map(const CVector& v, double p);

struct PowerTrace {
  std::vector<std::vector<double>> objective;  // one sequence per restart
};

/// Multistart duality-map power iteration for ||T||_{p->q}, 1 < p <= 2 <= q < inf.
NormBracket op_norm_power(const LinearMap& t, double p, double q, const IterationConfig& cfg = {},
                          PowerTrace* trace = nullptr);

struct BruteForceResult {
  double value = 0.0;
  double error_bound = 0.0;
};

/// Grid search over the weighted l^p unit sphere of a domain of dimension <= 3.
BruteForceResult op_norm_bruteforce(const LinearMap& t, double p, double q, int resolution = 720);

/// Exact norms available in closed form.
double norm_2_to_2(const LinearMap& t);
double norm_2_to_inf(const LinearMap& t);
double norm_1_to_inf(const LinearMap& t);

/// Dispatches to an exact formula when one exists, otherwise to op_norm_power.
NormBracket op_norm(const LinearMap& t, double p, double q, const IterationConfig& cfg = {});

struct SpaceSpec {
  enum class Kind { Lebesgue, Flattened, Intersection, Sum };

  static SpaceSpec lebesgue(double p);
  /// ||u|| = ||(lambda^2 + A^2)^{s/2} u||_p.
  static SpaceSpec flattened(std::shared_ptr<const SpectralOperator> op, double lambda, double s, double p);
  static SpaceSpec intersection(std::vector<SpaceSpec> parts);
  static SpaceSpec sum(std::vector<SpaceSpec> parts);

  bool simple() const { return kind == Kind::Lebesgue || kind == Kind::Flattened; }
  std::string str() const;

  Kind kind = Kind::Lebesgue;
  double p = 2.0;
  double s = 0.0;
  double lambda = 1.0;
  std::shared_ptr<const SpectralOperator> op;
  std::vector<SpaceSpec> parts;
};

/// X(lambda) = W^{1/2,2} cap W^{s(q),q} and its dual X'(lambda) = W^{-1/2,2} + W^{-s(q),q'}.
SpaceSpec x_space(std::shared_ptr<const SpectralOperator> op, double lambda, double q, double s_q);
SpaceSpec x_dual_space(std::shared_ptr<const SpectralOperator> op, double lambda, double q, double s_q);

struct CompositeNorm {
  NormBracket total;
  /// components[a][b]: source part a to target part b.
  std::vector<std::vector<NormBracket>> components;
};

/// ||T||_{from -> to} for a sum (or simple) source and an intersection (or simple) target.
CompositeNorm op_norm_composite(const LinearMap& t, const SpaceSpec& from, const SpaceSpec& to,
                                const IterationConfig& cfg = {});

}  // namespace rlab
