#pragma once

// Concrete instances of the abstract multiplier, cluster/resolvent and
// quasimode estimates on finite spectral models.
//
// Every check pairs the lower bracket of its left-hand side with the upper
// bracket of its right-hand side, so a pass never rests on an underestimated
// majorant.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rlab/lp_norms.hpp"
#include "rlab/spectral_model.hpp"

namespace rlab {

/// <x> = 2 + |x|.
double japanese(double x);

/// tau_k = eps k, k = 0..N+1, N = ceil(2 lambda / eps).
struct Partition {
  static Partition uniform(double lambda, double eps);

  double epsilon = 1.0;
  Index N = 0;
  std::vector<double> tau;

  Index windows() const { return N + 1; }
  double end() const { return tau.back(); }
  /// Window index of t: [tau_k, tau_k+1) for k < N, [tau_N, tau_N+1] for k = N; -1 outside.
  Index window_of(double t) const;
};

/// A scalar multiplier with the points where |m| may have an interior extremum.
struct ScalarMultiplier {
  std::function<Complex(double)> f;
  std::vector<double> critical;
  std::string label;
};

/// (tau^2 - (lambda + i mu)^2)^{-alpha}; |m| peaks at sqrt(lambda^2 - mu^2).
ScalarMultiplier resolvent_multiplier(double lambda, double mu, double alpha);
ScalarMultiplier constant_multiplier(Complex c);

struct MultiplierPair {
  ScalarMultiplier m1;
  ScalarMultiplier m2;
  double M1 = 0.0;
  double M2 = 0.0;
};

struct CheckResult {
  std::string estimate_id;
  NormBracket lhs;
  double rhs = 0.0;
  double ratio = 0.0;
  double threshold = 1.0;
  bool pass = false;
  std::map<std::string, double> context;
  std::string label;
};

/// Finalizes ratio and pass from lhs.lower, rhs and threshold.
CheckResult make_check(std::string id, NormBracket lhs, double rhs, double threshold,
                       std::map<std::string, double> context, std::string label);

struct WindowProfile {
  std::vector<NormBracket> norms;  // q' -> 2 norm of each window projector
  double sup_upper() const;
};

/// ||Pi_k||_{q'->2} for the half-open windows of the partition.
WindowProfile window_norm_profile(const SpectralOperator& op, const Partition& partition, double q,
                                  const IterationConfig& cfg = {});

/// sup of |m| over the closed window [a, b]: 64 samples, endpoints and interior critical points.
double window_sup(const ScalarMultiplier& m, double a, double b);
double window_inf(const ScalarMultiplier& m, double a, double b);

MultiplierPair multiplier_constants(const SpectralOperator& op, const Partition& partition, double q,
                                    const ScalarMultiplier& m1, const ScalarMultiplier& m2,
                                    const IterationConfig& cfg = {});
/// Same, reusing a precomputed window profile.
MultiplierPair multiplier_constants(const WindowProfile& profile, const Partition& partition,
                                    const ScalarMultiplier& m1, const ScalarMultiplier& m2);

/// ||1_J(A) m1 m2(A)||_{q'->q} <= M1 M2 with constant exactly one.
CheckResult check_multiplier_lemma(const SpectralOperator& op, const Partition& partition, double q,
                                   const ScalarMultiplier& m1, const ScalarMultiplier& m2,
                                   const IterationConfig& cfg = {});

enum class Prop32Item { I33, I34, I35, I36, I37, I38 };
Prop32Item parse_prop32(const std::string& id);
std::string prop32_id(Prop32Item item);
/// Regression-locked ratio threshold for each item.
double prop32_threshold(Prop32Item item);

struct Prop32Params {
  double lambda = 10.0;
  double eps = 1.0;
  double mu = 1.0;
  double beta = 2.0;
  double q = 4.0;
};

CheckResult check_prop32(const SpectralOperator& op, Prop32Item item, const Prop32Params& params,
                         const IterationConfig& cfg = {});
/// Variant that reuses the window profile of Partition::uniform(lambda, eps).
CheckResult check_prop32(const SpectralOperator& op, Prop32Item item, const Prop32Params& params,
                         const WindowProfile& profile, const IterationConfig& cfg = {});

enum class Cor34Variant { AB, BC, CA, C310, C311 };
Cor34Variant parse_cor34(const std::string& id);
std::string cor34_id(Cor34Variant v);

struct Cor34Params {
  double lambda = 10.0;
  double eps = 1.0;
  double delta = 1.0;
  double mu = 1.0;
  double q = 4.0;
  std::uint64_t seed = 7;
};

CheckResult check_cor34(const SpectralOperator& op, Cor34Variant variant, const Cor34Params& params,
                        const IterationConfig& cfg = {});

struct DarbouxSums {
  double lower = 0.0;
  double upper = 0.0;
  double integral = 0.0;
};

/// Lower/upper Darboux sums of |m|^2 with spacing eps, and the integral over [0, (N+1) eps].
DarbouxSums darboux(const ScalarMultiplier& m, const Partition& partition);

/// (lambda+mu)^{-2 alpha} mu^{1-2 alpha} ln^nu<lambda/mu>, nu = 1 for alpha = 1/2 and 0 above.
double integral_majorant(double lambda, double mu, double alpha);
/// int_0^{4 lambda} |tau^2 - (lambda + i mu)^2|^{-2 alpha} d tau.
double integral_quadrature(double lambda, double mu, double alpha);

/// min over a uniform tau-grid of [lambda, lambda+eps] of (eps lambda) Im[(tau^2-(lambda+i eps)^2)^{-1}].
double scalar_im_scan(double lambda, double eps, int density = 257);

}  // namespace rlab
