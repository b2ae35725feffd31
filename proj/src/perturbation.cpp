#include "rlab/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rlab/error.hpp"
#include "rlab/exponents.hpp"

namespace rlab {

using detail::require;

namespace {

void require_trusted(const Model& model, const std::vector<double>& grid) {
  require(!grid.empty(), "lambda grid is empty");
  for (double l : grid) {
    require(l >= 1.0, "lambda grid must lie in [1, inf)");
    require(l <= model.trusted_lambda + 1e-12,
            "lambda " + std::to_string(l) + " beyond the trusted range " + std::to_string(model.trusted_lambda));
  }
}

double flattened_index(const Model& model, double q) {
  return exponents::s_of_q(model.dimension, exponents::Exponent::approximate(q));
}

RVector flattened_weights(const SpectralOperator& op, double lambda, double s) {
  return (lambda * lambda + op.eigenvalues().array().square()).pow(0.5 * s).matrix();
}

// max_x sum_y |T_xy|, the L^inf -> L^inf norm of a self-adjoint map.
double inf_to_inf(const LinearMap& t, bool translation_invariant) {
  const Index n = t.cols();
  const RVector& w = t.domain().weights();
  double best = 0.0;
  const Index rows = translation_invariant ? 1 : n;
  for (Index x = 0; x < rows; ++x) {
    CVector delta = CVector::Zero(n);
    delta(x) = 1.0;
    // T_xy = conj((T* delta_x)_y) w_y / w_x for the weighted adjoint.
    const CVector col = t.apply_adjoint(delta);
    best = std::max(best, (col.cwiseAbs().array() * w.array()).sum() / w(x));
  }
  return best;
}

CMatrix invert_checked(const CMatrix& d) {
  Eigen::PartialPivLU<CMatrix> lu(d);
  CMatrix inv = lu.inverse();
  const double residual = (d * inv - CMatrix::Identity(d.rows(), d.cols())).cwiseAbs().maxCoeff();
  if (!inv.allFinite() || residual > 1e-8) throw NumericalError("perturbed resolvent system is singular");
  return inv;
}

// ||diag(g) X diag(g)||_2 with g = (lambda^2 + tau^2)^{1/4}: the W^{-1/2,2} -> W^{1/2,2} norm.
double energy_norm(const CMatrix& x, const RVector& g) {
  const CMatrix y = g.asDiagonal() * x * g.asDiagonal();
  return Eigen::JacobiSVD<CMatrix>(y).singularValues()(0);
}

}  // namespace

CMatrix galerkin_matrix(const SpectralOperator& op, const RVector& v) {
  require(v.size() == op.size(), "potential length does not match the model grid");
  require(v.allFinite(), "potential values must be finite");
  if (const auto* fb = dynamic_cast<const FourierBasis*>(op.basis().get())) return fb->multiplication_matrix(v);
  const CMatrix e = op.basis()->matrix();
  const RVector wv = op.space().weights().cwiseProduct(v);
  CMatrix m = e.adjoint() * (wv.asDiagonal() * e);
  return 0.5 * (m + m.adjoint());
}

LinearMap free_resolvent(const SpectralOperator& op, double lambda) {
  const Complex z = Complex(lambda, 1.0) * Complex(lambda, 1.0);
  return multiplier(op, [z](double tau) { return 1.0 / (z - tau * tau); });
}

double c0_estimate(const Model& model, double q, const std::vector<double>& lambda_grid,
                   const IterationConfig& cfg) {
  require_trusted(model, lambda_grid);
  const double s = flattened_index(model, q);
  double best = 0.0;
  for (double lambda : lambda_grid) {
    const auto norm = op_norm_composite(free_resolvent(*model.op, lambda), x_dual_space(model.op, lambda, q, s),
                                        x_space(model.op, lambda, q, s), cfg);
    best = std::max(best, norm.total.upper);
  }
  return best;
}

MEstimate m_of_lambda(const Model& model, const RVector& v, double lambda, double q) {
  require(q > 2.0 && std::isfinite(q), "m_of_lambda needs 2 < q < inf");
  const SpectralOperator& op = *model.op;
  const double s = flattened_index(model, q);
  const double r = q / (q - 2.0);
  const double sigma_q = exponents::sigma(model.dimension, exponents::Exponent::approximate(q));

  MEstimate out;
  out.lambda = lambda;
  const double v_r = lp_norm(v.cast<Complex>(), op.space(), r);
  out.surrogate = std::pow(lambda, 2.0 * sigma_q - 1.0) * v_r;
  if (v.cwiseAbs().maxCoeff() == 0.0) return out;

  // W^{1/2,2} -> W^{-1/2,2}: exact, the largest eigenvalue of f V f with f = (lambda^2 + tau^2)^{-1/4}.
  const CMatrix vm = galerkin_matrix(op, v);
  const RVector f = flattened_weights(op, lambda, -0.5);
  const CMatrix h = f.asDiagonal() * vm * f.asDiagonal();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (h + h.adjoint()));
  const RVector& ev = es.eigenvalues();
  out.l2_pair = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));

  // W^{s,q} -> W^{-s,q'}: ||F_{-s}||_{q->q}^2 ||V||_{L^r}, with the F factor by Riesz-Thorin
  // between its exact 2 -> 2 and inf -> inf norms.
  const LinearMap fs = flattened_sobolev(op, lambda, -s);
  const double f22 = flattened_weights(op, lambda, -s).maxCoeff();
  const double finf = inf_to_inf(fs, dynamic_cast<const FourierBasis*>(op.basis().get()) != nullptr);
  const double fqq = std::pow(f22, 2.0 / q) * std::pow(finf, 1.0 - 2.0 / q);
  out.lq_pair = fqq * fqq * v_r;
  out.upper = std::min(out.l2_pair, out.lq_pair);

  // Lower bound |<V u, u>| / ||u||_X^2 over a few band-limited test functions.
  const LinearMap fhalf = flattened_sobolev(op, lambda, 0.5);
  const LinearMap fsq = flattened_sobolev(op, lambda, s);
  std::vector<CVector> tests;
  for (Index k : {Index{0}, ev.size() - 1}) tests.push_back(op.basis()->synthesize(f.cwiseProduct(es.eigenvectors().col(k))));
  tests.push_back(op.basis()->synthesize(op.basis()->analyze(v.cast<Complex>())));
  const RVector& w = op.space().weights();
  for (const auto& u : tests) {
    const double xnorm = lp_norm(fhalf.apply(u), op.space(), 2.0) + lp_norm(fsq.apply(u), op.space(), q);
    if (xnorm == 0.0) continue;
    const double pairing = std::abs((w.array() * v.array() * u.cwiseAbs2().array()).sum());
    out.lower = std::max(out.lower, pairing / (xnorm * xnorm));
  }
  out.lower = std::min(out.lower, out.upper);
  return out;
}

double lambda0(double C0, double c, double v_norm, double sigma_q) {
  require(2.0 * sigma_q < 1.0, "lambda0 needs 2 sigma(q) < 1; use the splitting path at the Sobolev exponent");
  require(C0 > 0.0, "C0 must be positive");
  require(c > 0.0 && c < 1.0, "contraction parameter must lie in (0, 1)");
  require(v_norm >= 0.0, "potential norm must be nonnegative");
  if (v_norm == 0.0) return 1.0;
  return std::max(1.0, std::pow(C0 * v_norm / c, 1.0 / (1.0 - 2.0 * sigma_q)));
}

std::pair<RVector, RVector> potential_split(const RVector& v, double alpha0) {
  require(alpha0 >= 0.0, "split level must be nonnegative");
  RVector big = RVector::Zero(v.size()), small = RVector::Zero(v.size());
  for (Index i = 0; i < v.size(); ++i) (std::abs(v(i)) > alpha0 ? big : small)(i) = v(i);
  return {big, small};
}

double critical_split(const RVector& v, const FiniteMeasureSpace& space, double p, double target) {
  require(target >= 0.0, "split target must be nonnegative");
  std::vector<double> levels(v.size() + 1, 0.0);
  for (Index i = 0; i < v.size(); ++i) levels[static_cast<std::size_t>(i) + 1] = std::abs(v(i));
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  // ||V 1_{|V| > a}||_p is a nonincreasing step function, constant between consecutive levels.
  for (double a : levels) {
    if (lp_norm(potential_split(v, a).first.cast<Complex>(), space, p) <= target) return a;
  }
  return levels.back();
}

PerturbedResolvent perturbed_resolvent(const SpectralOperator& op, const RVector& v, double lambda,
                                       const ResolventMethod& method, const std::optional<NeumannInputs>& inputs) {
  require(lambda >= 1.0, "lambda must be >= 1");
  require(method.kind == ResolventMethod::Kind::Direct || method.terms >= 0, "Neumann term count must be >= 0");
  const Complex z = Complex(lambda, 1.0) * Complex(lambda, 1.0);
  const CMatrix vm = galerkin_matrix(op, v);
  const CVector r0 = (z - op.eigenvalues().array().square().cast<Complex>()).inverse().matrix();
  CMatrix d = vm;
  d.diagonal() += (z - op.eigenvalues().array().square().cast<Complex>()).matrix();
  const CMatrix direct = invert_checked(d);

  PerturbedResolvent out{LinearMap::modal(op.basis(), direct), std::nullopt, std::nullopt};
  if (method.kind == ResolventMethod::Kind::Direct) return out;

  NeumannDiagnostics diag;
  if (inputs) {
    diag.contraction = inputs->M * inputs->C0;
    diag.certified = diag.contraction < 1.0;
    diag.r_norm = inputs->r_norm;
  }
  const RVector g = flattened_weights(op, lambda, 0.5);
  const CMatrix rv = r0.asDiagonal() * vm;
  CMatrix current = r0.asDiagonal();
  CMatrix base = current;
  for (int j = 0; j <= method.terms; ++j) {
    if (j > 0) current = base - rv * current;
    diag.observed_error.push_back(energy_norm(current - direct, g));
    if (diag.certified) {
      diag.geometric_bound.push_back(diag.r_norm * std::pow(diag.contraction, j) / (1.0 - diag.contraction));
    }
  }
  // Fit ln(error_j) ~ a + j ln(ratio) on the errors above roundoff.
  const double floor = 1e-13 * std::max(diag.observed_error.front(), energy_norm(direct, g));
  std::vector<double> xs, ys;
  for (std::size_t j = 0; j < diag.observed_error.size(); ++j) {
    if (diag.observed_error[j] > floor) {
      xs.push_back(static_cast<double>(j));
      ys.push_back(std::log(diag.observed_error[j]));
    }
  }
  if (xs.size() >= 2) {
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    diag.observed_ratio = std::exp(sxy / sxx);
  }
  out.neumann = LinearMap::modal(op.basis(), current);
  out.diagnostics = std::move(diag);
  return out;
}

SpectralOperator perturbed_operator(const SpectralOperator& op, const RVector& v) {
  CMatrix h = -galerkin_matrix(op, v);
  h.diagonal() += op.eigenvalues().array().square().matrix().cast<Complex>();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (h + h.adjoint()));
  const RVector tau = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const CMatrix vectors = op.basis()->matrix() * es.eigenvectors();
  return SpectralOperator::from_eigenpairs(op.space(), tau, vectors, op.label() + "+V");
}

StabilityReport stability_check(const Model& model, const RVector& v, double q, const std::vector<double>& lambda_grid,
                                const StabilityOptions& options) {
  require(options.c > 0.0 && options.c < 1.0, "contraction parameter must lie in (0, 1)");
  std::vector<double> grid = lambda_grid;
  std::sort(grid.begin(), grid.end());
  require_trusted(model, grid);
  const double s = flattened_index(model, q);

  StabilityReport rep;
  rep.c = options.c;
  rep.C0 = c0_estimate(model, q, grid, options.cfg);
  rep.neumann_bound = rep.C0 / (1.0 - options.c);
  for (double lambda : grid) rep.M_of_Lambda.push_back(m_of_lambda(model, v, lambda, q));
  rep.M_sup.assign(grid.size(), 0.0);
  double running = 0.0;
  for (std::size_t i = grid.size(); i-- > 0;) {
    running = std::max(running, rep.M_of_Lambda[i].upper);
    rep.M_sup[i] = running;
  }
  rep.Lambda0 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (rep.M_sup[i] <= options.c / rep.C0) {
      rep.Lambda0 = std::max(1.0, grid[i]);
      break;
    }
  }

  std::optional<SpectralOperator> perturbed;
  if (options.cluster_transfer && std::isfinite(rep.Lambda0)) perturbed = perturbed_operator(*model.op, v);
  for (std::size_t i = 0; i < grid.size() && std::isfinite(rep.Lambda0); ++i) {
    const double lambda = grid[i];
    if (lambda < rep.Lambda0) continue;
    const auto rv = perturbed_resolvent(*model.op, v, lambda, ResolventMethod::direct());
    const auto norm =
        op_norm_composite(rv.map, x_dual_space(model.op, lambda, q, s), x_space(model.op, lambda, q, s), options.cfg);
    rep.checks.push_back(make_check("P4.4", norm.total, rep.neumann_bound, 1.0 + options.tolerance,
                                    {{"lambda", lambda}, {"M", rep.M_of_Lambda[i].upper}, {"C0", rep.C0}, {"q", q}},
                                    model.label));
    if (perturbed) {
      Prop32Params params;
      params.lambda = lambda;
      params.eps = 1.0;
      params.mu = 1.0;
      params.q = q;
      auto check = check_prop32(*perturbed, Prop32Item::I33, params, options.cfg);
      check.label = perturbed->label();
      rep.checks.push_back(std::move(check));
    }
  }
  rep.verified = std::isfinite(rep.Lambda0) && !rep.checks.empty() &&
                 std::all_of(rep.checks.begin(), rep.checks.end(), [](const CheckResult& c) { return c.pass; });
  return rep;
}

LinearMap fractional_resolvent(const SpectralOperator& op, const RVector& v, double alpha, double lambda) {
  require(alpha > 0.0 && alpha <= 2.0, "fractional order must lie in (0, 2]");
  require(lambda >= 1.0, "lambda must be >= 1");
  const Complex shift = std::pow(Complex(lambda, 1.0), alpha);
  CMatrix d = galerkin_matrix(op, v);
  d.diagonal() += (op.eigenvalues().array().pow(alpha).cast<Complex>() - shift).matrix();
  return LinearMap::modal(op.basis(), invert_checked(d));
}

FractionalReport fractional_scan(const Model& model, const RVector& v, double alpha, double q,
                                 const std::vector<double>& lambda_grid, const IterationConfig& cfg) {
  require_trusted(model, lambda_grid);
  FractionalReport rep;
  rep.alpha = alpha;
  rep.expected_exponent = 2.0 * exponents::sigma(model.dimension, exponents::Exponent::approximate(q)) + 1.0 - alpha;
  for (double lambda : lambda_grid) {
    rep.points.push_back({lambda, op_norm(fractional_resolvent(*model.op, v, alpha, lambda), dual_exponent(q), q, cfg)});
  }
  return rep;
}

}  // namespace rlab
