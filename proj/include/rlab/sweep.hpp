#pragma once

// Experiment orchestration: model declarations, parameter sweeps, scaling-law
// fits and report emission.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rlab/inequality_lab.hpp"
#include "rlab/lp_norms.hpp"
#include "rlab/manifolds.hpp"
#include "rlab/perturbation.hpp"

namespace rlab {

struct ModelSpec {
  std::string kind = "torus";  // torus | sphere | rough | random | file
  // torus
  int n = 2;
  int K = 8;
  int G = 0;  // 0 selects 4K + 1
  // sphere
  SphereGrid sphere;
  /// Build one degree band per sweep point instead of the full model (cluster sweeps).
  bool sphere_bands = true;
  // rough
  RoughMetricModel rough;
  // random
  Index dim = 20;
  double tau_max = 30.0;
  std::uint64_t seed = 1;
  // file
  std::string path;

  /// Stable cache key.
  std::string key() const;
};

Model build_model(const ModelSpec& spec);

/// A positive function of lambda: value, scale lambda^rho, or scale / ln<lambda>.
struct Schedule {
  enum class Kind { Constant, Power, InverseLog };
  Kind kind = Kind::Constant;
  double value = 1.0;  // constant value, or the scale of the other kinds
  double rho = 0.0;

  double operator()(double lambda) const;
  std::string str() const;
};

enum class Quantity { Cluster2q, ResolventQpQ, Resolvent2q, ImResolvent };
Quantity parse_quantity(const std::string& key);
std::string quantity_key(Quantity q);

struct SweepConfig {
  ModelSpec model;
  std::vector<double> qs{6.0};
  std::vector<double> lambdas;  // explicit grid; empty selects the dyadic range
  int dyadic_from = 0;
  int dyadic_to = 3;
  /// Sphere sweeps: move each lambda to the nearest sqrt(l(l+1)).
  bool snap_sphere = true;
  Schedule eps;
  Schedule mu;
  Quantity quantity = Quantity::Cluster2q;
  std::uint64_t seed = 20240611;
  int restarts = 6;
  int max_iters = 400;

  std::vector<double> lambda_grid() const;
  IterationConfig iteration() const;
};

SweepConfig load_sweep_config(const std::string& path);
SweepConfig parse_sweep_config(const std::string& text);
/// Canonical JSON rendering (used in reports).
std::string sweep_config_json(const SweepConfig& cfg);

struct SweepRecord {
  std::string model;
  std::string quantity;
  double q = 2.0;
  double lambda = 1.0;
  double eps = 1.0;
  double mu = 1.0;
  NormBracket norm;
  double seconds = 0.0;
};

std::vector<SweepRecord> run_sweep(const SweepConfig& cfg);

/// The quantity at one point.
NormBracket measure(const Model& model, Quantity quantity, double q, double lambda, double eps, double mu,
                    const IterationConfig& cfg = {});

struct FitResult {
  std::string model;
  std::string quantity;
  double q = 2.0;
  std::size_t points = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;
  int nu = 0;  // log power from the joint fit
  double slope_lower = 0.0;
  double slope_upper = 0.0;
  /// Slope after dropping the largest lambda (NaN with fewer than 4 points).
  double slope_without_last = 0.0;
};

/// Least squares in (ln lambda, ln y) with y the bracket midpoint.
FitResult fit_slope(const std::vector<SweepRecord>& records);
/// Best nu in {0..3} for y lambda^{-slope} ~ C (ln lambda)^nu; ties go to the smaller nu.
int detect_log(const std::vector<SweepRecord>& records, double assumed_slope);

/// Records grouped by (model, quantity, q) in first-appearance order.
std::vector<std::vector<SweepRecord>> series(const std::vector<SweepRecord>& records);

struct Report {
  std::string config_json = "{}";
  std::vector<SweepRecord> records;
  std::vector<FitResult> fits;
  std::vector<CheckResult> checks;
};

enum class ReportFormat { Csv, Json, Plotdata };
ReportFormat parse_format(const std::string& key);

inline constexpr const char* kCsvHeader = "model,quantity,q,lambda,eps,mu,lower,upper,method,seconds";

std::string records_csv(const std::vector<SweepRecord>& records);
std::string report_json(const Report& report);
Report report_from_json(const std::string& text);
Report load_report(const std::string& path);

/// Writes report files and returns their paths. Csv and Json write to `path`;
/// Plotdata writes one file per series into the directory `path`.
std::vector<std::string> emit(const Report& report, ReportFormat format, const std::string& path);

// Configured perturbation runs ------------------------------------------------

struct PerturbConfig {
  ModelSpec model;
  PotentialSpec potential;
  double q = 6.0;
  std::vector<double> lambdas{1.0, 1.5, 2.0};
  double c = 0.5;
  int neumann_terms = 12;
  /// Fractional order; 2 is the Laplacian pipeline.
  double alpha = 2.0;
  std::uint64_t seed = 20240611;
  int restarts = 6;
};

PerturbConfig parse_perturb_config(const std::string& text);
PerturbConfig load_perturb_config(const std::string& path);
/// Runs the stability pipeline and returns the report document plus the verdict.
std::pair<std::string, bool> run_perturb(const PerturbConfig& cfg);

// Verification corpus ----------------------------------------------------------

struct CorpusSpec {
  int models = 8;
  Index min_dim = 12;
  Index max_dim = 40;
  std::uint64_t seed = 1;
  std::vector<double> qs{4.0, 6.0};
};

/// Runs one estimate family ("3.3".."3.8", "L3.1", "C3.4", or "all") over seeded random models.
std::vector<CheckResult> verify_corpus(const std::string& estimate, const CorpusSpec& spec,
                                       const IterationConfig& cfg = {});

}  // namespace rlab
