#include "rlab/inequality_lab.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rlab/error.hpp"

namespace rlab {

using detail::require;

double japanese(double x) { return 2.0 + std::abs(x); }

Partition Partition::uniform(double lambda, double eps) {
  require(eps > 0.0 && lambda > 0.0, "partition needs lambda, eps > 0");
  Partition p;
  p.epsilon = eps;
  p.N = static_cast<Index>(std::ceil(2.0 * lambda / eps - 1e-12));
  p.tau.resize(static_cast<std::size_t>(p.N + 2));
  for (Index k = 0; k <= p.N + 1; ++k) p.tau[static_cast<std::size_t>(k)] = eps * static_cast<double>(k);
  return p;
}

Index Partition::window_of(double t) const {
  if (t < 0.0 || t > end()) return -1;
  auto k = static_cast<Index>(std::floor(t / epsilon));
  // Guard against rounding in t / eps near the grid points.
  while (k > 0 && t < tau[static_cast<std::size_t>(k)]) --k;
  while (k < N && t >= tau[static_cast<std::size_t>(k + 1)]) ++k;
  return std::min(k, N);
}

ScalarMultiplier resolvent_multiplier(double lambda, double mu, double alpha) {
  require(mu > 0.0, "resolvent multipliers need mu > 0");
  ScalarMultiplier m;
  m.f = [=](double t) { return resolvent_symbol(t, lambda, mu, alpha); };
  if (lambda > mu) m.critical.push_back(std::sqrt(lambda * lambda - mu * mu));
  m.label = "resolvent(alpha=" + std::to_string(alpha) + ")";
  return m;
}

ScalarMultiplier constant_multiplier(Complex c) {
  ScalarMultiplier m;
  m.f = [=](double) { return c; };
  m.label = "constant";
  return m;
}

CheckResult make_check(std::string id, NormBracket lhs, double rhs, double threshold,
                       std::map<std::string, double> context, std::string label) {
  CheckResult r;
  r.estimate_id = std::move(id);
  r.lhs = std::move(lhs);
  r.rhs = rhs;
  r.threshold = threshold;
  r.context = std::move(context);
  r.label = std::move(label);
  if (r.lhs.lower == 0.0) {
    r.ratio = 0.0;
  } else if (rhs <= 0.0) {
    r.ratio = std::numeric_limits<double>::infinity();
  } else {
    r.ratio = r.lhs.lower / rhs;
  }
  r.pass = r.ratio <= threshold;
  return r;
}

double WindowProfile::sup_upper() const {
  double s = 0.0;
  for (const auto& b : norms) s = std::max(s, b.upper);
  return s;
}

namespace {

std::vector<Index> indices_where(const SpectralOperator& op, const std::function<bool(double)>& keep) {
  std::vector<Index> out;
  for (Index i = 0; i < op.rank(); ++i) {
    if (keep(op.eigenvalues()(i))) out.push_back(i);
  }
  return out;
}

// ||P||_{2->q} for the orthogonal projector onto the listed eigenvectors,
// which equals its q'->2 norm by duality.
NormBracket projector_norm(const SpectralOperator& op, const std::vector<Index>& idx, double q,
                           const IterationConfig& cfg) {
  if (idx.empty()) return {0.0, 0.0, "empty"};
  if (q == 2.0) return {1.0, 1.0, "exact-2-2"};
  if (idx.size() == 1) {
    const CMatrix e = op.basis()->columns(idx);
    const double v = lp_norm(e.col(0), op.space(), q);
    return {v, v, "rank-one"};
  }
  return op_norm(multiplier_on(op, idx, [](double) { return Complex(1.0); }), 2.0, q, cfg);
}

std::vector<double> window_samples(const ScalarMultiplier& m, double a, double b) {
  std::vector<double> t;
  constexpr int kSamples = 64;
  for (int i = 0; i <= kSamples + 1; ++i) t.push_back(a + (b - a) * i / (kSamples + 1.0));
  for (double c : m.critical) {
    if (c > a && c < b) t.push_back(c);
  }
  return t;
}

// q'->q norm of a map that is (complex) self-adjoint up to the adjoint flip.
NormBracket dual_pair_norm(const LinearMap& t, double q, const IterationConfig& cfg) {
  return op_norm(t, dual_exponent(q), q, cfg);
}

// q'->2 norm of T equals the 2->q norm of T*.
NormBracket q_prime_to_2(const LinearMap& t, double q, const IterationConfig& cfg) {
  return op_norm(t.adjoint(), 2.0, q, cfg);
}

}  // namespace

WindowProfile window_norm_profile(const SpectralOperator& op, const Partition& partition, double q,
                                  const IterationConfig& cfg) {
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(partition.windows()));
  for (Index i = 0; i < op.rank(); ++i) {
    const Index k = partition.window_of(op.eigenvalues()(i));
    if (k >= 0) members[static_cast<std::size_t>(k)].push_back(i);
  }
  WindowProfile out;
  for (const auto& idx : members) out.norms.push_back(projector_norm(op, idx, q, cfg));
  return out;
}

double window_sup(const ScalarMultiplier& m, double a, double b) {
  double s = 0.0;
  for (double t : window_samples(m, a, b)) s = std::max(s, std::abs(m.f(t)));
  if (!std::isfinite(s)) throw DomainError("multiplier is unbounded on the window");
  return s;
}

double window_inf(const ScalarMultiplier& m, double a, double b) {
  double s = std::numeric_limits<double>::infinity();
  for (double t : window_samples(m, a, b)) s = std::min(s, std::abs(m.f(t)));
  return s;
}

MultiplierPair multiplier_constants(const WindowProfile& profile, const Partition& partition,
                                    const ScalarMultiplier& m1, const ScalarMultiplier& m2) {
  require(static_cast<Index>(profile.norms.size()) == partition.windows(), "profile does not match the partition");
  MultiplierPair out{m1, m2, 0.0, 0.0};
  double s1 = 0.0, s2 = 0.0;
  for (Index k = 0; k < partition.windows(); ++k) {
    const double a = partition.tau[static_cast<std::size_t>(k)];
    const double b = partition.tau[static_cast<std::size_t>(k + 1)];
    const double pn = profile.norms[static_cast<std::size_t>(k)].upper;
    if (pn == 0.0) continue;
    s1 += std::pow(window_sup(m1, a, b) * pn, 2);
    s2 += std::pow(window_sup(m2, a, b) * pn, 2);
  }
  out.M1 = std::sqrt(s1);
  out.M2 = std::sqrt(s2);
  return out;
}

MultiplierPair multiplier_constants(const SpectralOperator& op, const Partition& partition, double q,
                                    const ScalarMultiplier& m1, const ScalarMultiplier& m2,
                                    const IterationConfig& cfg) {
  return multiplier_constants(window_norm_profile(op, partition, q, cfg), partition, m1, m2);
}

CheckResult check_multiplier_lemma(const SpectralOperator& op, const Partition& partition, double q,
                                   const ScalarMultiplier& m1, const ScalarMultiplier& m2,
                                   const IterationConfig& cfg) {
  require(q >= 2.0, "multiplier lemma needs q >= 2");
  const MultiplierPair mp = multiplier_constants(op, partition, q, m1, m2, cfg);
  const auto idx = indices_where(op, [&](double t) { return t >= 0.0 && t <= partition.end(); });
  NormBracket lhs{0.0, 0.0, "empty"};
  if (!idx.empty()) {
    const auto t = multiplier_on(op, idx, [&](double tau) { return m1.f(tau) * m2.f(tau); });
    lhs = dual_pair_norm(t, q, cfg);
  }
  return make_check("L3.1", lhs, mp.M1 * mp.M2, 1.0 + 1e-9,
                    {{"q", q}, {"eps", partition.epsilon}, {"M1", mp.M1}, {"M2", mp.M2}}, op.label());
}

// ---------------------------------------------------------------------------

Prop32Item parse_prop32(const std::string& id) {
  if (id == "3.3") return Prop32Item::I33;
  if (id == "3.4") return Prop32Item::I34;
  if (id == "3.5") return Prop32Item::I35;
  if (id == "3.6") return Prop32Item::I36;
  if (id == "3.7") return Prop32Item::I37;
  if (id == "3.8") return Prop32Item::I38;
  throw DomainError("unknown estimate id '" + id + "'");
}

std::string prop32_id(Prop32Item item) {
  switch (item) {
    case Prop32Item::I33: return "3.3";
    case Prop32Item::I34: return "3.4";
    case Prop32Item::I35: return "3.5";
    case Prop32Item::I36: return "3.6";
    case Prop32Item::I37: return "3.7";
    case Prop32Item::I38: return "3.8";
  }
  return "?";
}

double prop32_threshold(Prop32Item item) {
  // 3.3 and 3.5 follow from Im m >= (1/10)(eps lambda)^{-1} on [lambda, lambda+eps].
  // The others were frozen from the reference corpus (max observed ratio, rounded up).
  switch (item) {
    case Prop32Item::I33: return 10.0;
    case Prop32Item::I34: return 4.0;
    case Prop32Item::I35: return 10.0;
    case Prop32Item::I36: return 8.0;
    case Prop32Item::I37: return 8.0;
    case Prop32Item::I38: return 16.0;
  }
  return 0.0;
}

CheckResult check_prop32(const SpectralOperator& op, Prop32Item item, const Prop32Params& pr,
                         const IterationConfig& cfg) {
  require(pr.eps > 0.0 && pr.eps <= pr.lambda, "estimates need 0 < eps <= lambda");
  return check_prop32(op, item, pr, window_norm_profile(op, Partition::uniform(pr.lambda, pr.eps), pr.q, cfg), cfg);
}

CheckResult check_prop32(const SpectralOperator& op, Prop32Item item, const Prop32Params& pr,
                         const WindowProfile& profile, const IterationConfig& cfg) {
  const double lambda = pr.lambda, eps = pr.eps, mu = pr.mu, q = pr.q;
  require(eps > 0.0 && eps <= lambda, "estimates need 0 < eps <= lambda");
  require(lambda >= 1.0, "estimates need lambda >= 1");
  require(q >= 2.0, "estimates need q >= 2");
  if (item == Prop32Item::I37 || item == Prop32Item::I38) require(mu >= eps, "this estimate needs mu >= eps");
  if (item == Prop32Item::I38) require(pr.beta > 1.0, "this estimate needs beta > 1");
  require(static_cast<Index>(profile.norms.size()) == Partition::uniform(lambda, eps).windows(),
          "window profile does not match the partition");

  const auto cluster = indices_where(op, [&](double t) { return t >= lambda && t <= lambda + eps; });
  const auto low = indices_where(op, [&](double t) { return t <= 2.0 * lambda; });
  const double sup_k = profile.sup_upper();
  const double el = eps * lambda;
  std::map<std::string, double> ctx{{"lambda", lambda}, {"eps", eps}, {"q", q}, {"sup_window", sup_k}};

  auto resolvent_low = [&](double m_, double beta) {
    return multiplier_on(op, low, [=](double t) { return resolvent_symbol(t, lambda, m_, beta); });
  };
  auto im_low = [&]() {
    return multiplier_on(op, low, [=](double t) { return Complex(im_resolvent_symbol(t, lambda, eps)); });
  };
  auto empty_or = [&](const std::vector<Index>& idx, auto&& compute) {
    return idx.empty() ? NormBracket{0.0, 0.0, "empty"} : compute();
  };
  const double thr = prop32_threshold(item);

  switch (item) {
    case Prop32Item::I33: {
      const NormBracket lhs = projector_norm(op, cluster, q, cfg);
      const NormBracket r = empty_or(low, [&] { return q_prime_to_2(im_low(), q, cfg); });
      return make_check("3.3", lhs, el * r.upper, thr, ctx, op.label());
    }
    case Prop32Item::I34: {
      const NormBracket lhs = empty_or(low, [&] { return q_prime_to_2(resolvent_low(eps, 1.0), q, cfg); });
      return make_check("3.4", lhs, sup_k / el, thr, ctx, op.label());
    }
    case Prop32Item::I35: {
      NormBracket lhs = projector_norm(op, cluster, q, cfg);
      lhs = {lhs.lower * lhs.lower, lhs.upper * lhs.upper, lhs.method};
      const NormBracket r = empty_or(low, [&] { return dual_pair_norm(im_low(), q, cfg); });
      return make_check("3.5", lhs, el * r.upper, thr, ctx, op.label());
    }
    case Prop32Item::I36: {
      const NormBracket lhs = empty_or(low, [&] { return dual_pair_norm(resolvent_low(eps, 1.0), q, cfg); });
      const double rhs = std::log(japanese(lambda / eps)) * sup_k * sup_k / el;
      return make_check("3.6", lhs, rhs, thr, ctx, op.label());
    }
    case Prop32Item::I37: {
      ctx["mu"] = mu;
      const NormBracket lhs = empty_or(low, [&] { return dual_pair_norm(resolvent_low(mu, 1.0), q, cfg); });
      const double rhs = std::log(japanese(lambda / mu)) / japanese(mu / lambda) * sup_k * sup_k / el;
      return make_check("3.7", lhs, rhs, thr, ctx, op.label());
    }
    case Prop32Item::I38: {
      ctx["mu"] = mu;
      ctx["beta"] = pr.beta;
      const double b = pr.beta;
      const NormBracket lhs = empty_or(low, [&] { return dual_pair_norm(resolvent_low(mu, b), q, cfg); });
      const double rhs = std::pow(el, -b) * std::pow(eps / mu, b - 1.0) * std::pow(japanese(mu / lambda), -b) *
                         sup_k * sup_k;
      return make_check("3.8", lhs, rhs, thr, ctx, op.label());
    }
  }
  throw DomainError("unknown estimate");
}

// ---------------------------------------------------------------------------

Cor34Variant parse_cor34(const std::string& id) {
  if (id == "a<->b" || id == "ab") return Cor34Variant::AB;
  if (id == "b->c" || id == "bc") return Cor34Variant::BC;
  if (id == "c->a" || id == "ca") return Cor34Variant::CA;
  if (id == "3.10") return Cor34Variant::C310;
  if (id == "3.11") return Cor34Variant::C311;
  throw DomainError("unknown corollary variant '" + id + "'");
}

std::string cor34_id(Cor34Variant v) {
  switch (v) {
    case Cor34Variant::AB: return "a<->b";
    case Cor34Variant::BC: return "b->c";
    case Cor34Variant::CA: return "c->a";
    case Cor34Variant::C310: return "3.10";
    case Cor34Variant::C311: return "3.11";
  }
  return "?";
}

CheckResult check_cor34(const SpectralOperator& op, Cor34Variant variant, const Cor34Params& pr,
                        const IterationConfig& cfg) {
  const double lambda = pr.lambda, eps = pr.eps, q = pr.q;
  require(lambda >= 1.0, "estimates need lambda >= 1");
  require(eps > 0.0 && eps <= lambda && pr.delta > 0.0 && pr.delta <= lambda, "estimates need 0 < delta, eps <= lambda");
  require(q >= 2.0, "estimates need q >= 2");
  const double el = eps * lambda;
  std::map<std::string, double> ctx{{"lambda", lambda}, {"eps", eps}, {"delta", pr.delta}, {"q", q}};
  const std::string id = "C3.4:" + cor34_id(variant);
  const auto low = indices_where(op, [&](double t) { return t <= 2.0 * lambda; });
  const auto cluster = indices_where(op, [&](double t) { return t >= lambda && t <= lambda + eps; });
  auto localized_resolvent = [&](double mu) {
    return multiplier_on(op, low, [=](double t) { return resolvent_symbol(t, lambda, mu, 1.0); });
  };

  switch (variant) {
    case Cor34Variant::AB: {
      // 1_[lambda,lambda+eps] <= sqrt(20) eps lambda |m| pointwise, so (a) <= sqrt(20) (b).
      const NormBracket a = projector_norm(op, cluster, q, cfg);
      const NormBracket b = low.empty() ? NormBracket{} : op_norm(localized_resolvent(eps), 2.0, q, cfg);
      const Partition part = Partition::uniform(lambda, eps);
      const double sup_a = window_norm_profile(op, part, q, cfg).sup_upper();
      ctx["a"] = a.lower;
      ctx["b_scaled"] = el * b.upper;
      ctx["reverse_ratio"] = sup_a > 0.0 ? el * b.lower / sup_a : 0.0;
      return make_check(id, a, el * b.upper, std::sqrt(20.0), ctx, op.label());
    }
    case Cor34Variant::BC: {
      // ||u||_q <= B ||(A^2 - (lambda+i eps)^2) u||_2 <= B (||(A^2-lambda^2)u||_2 + sqrt(5) eps lambda ||u||_2).
      if (low.empty()) return make_check(id, {}, 0.0, 1.0, ctx, op.label());
      const NormBracket b = op_norm(localized_resolvent(eps), 2.0, q, cfg);
      const CMatrix e = op.basis()->columns(low);
      const RVector tau = op.eigenvalues()(Eigen::Map<const Eigen::Matrix<Index, -1, 1>>(low.data(), low.size()));
      std::mt19937_64 rng(pr.seed);
      std::normal_distribution<double> g(0.0, 1.0);
      std::vector<CVector> coeffs;
      for (int k = 0; k < 8; ++k) {
        CVector c(static_cast<Index>(low.size()));
        for (Index i = 0; i < c.size(); ++i) c(i) = Complex(g(rng), 0.0);
        coeffs.push_back(c);
      }
      for (std::size_t i = 0; i < low.size(); ++i) {
        if (std::abs(tau(static_cast<Index>(i)) - lambda) <= eps) {
          CVector c = CVector::Zero(static_cast<Index>(low.size()));
          c(static_cast<Index>(i)) = 1.0;
          coeffs.push_back(c);
        }
      }
      double worst = 0.0, worst_lhs = 0.0, worst_rhs = 0.0;
      for (const auto& c : coeffs) {
        const CVector u = e * c;
        const double l2 = c.norm();
        const CVector shifted = (tau.array().square() - lambda * lambda).matrix().cast<Complex>().cwiseProduct(c);
        const double lhs = lp_norm(u, op.space(), q);
        const double rhs = b.upper * (shifted.norm() + std::sqrt(5.0) * el * l2);
        if (rhs > 0.0 && lhs / rhs > worst) {
          worst = lhs / rhs;
          worst_lhs = lhs;
          worst_rhs = rhs;
        }
      }
      ctx["test_vectors"] = static_cast<double>(coeffs.size());
      return make_check(id, {worst_lhs, worst_lhs, "test-vectors"}, worst_rhs, 1.0 + 1e-9, ctx, op.label());
    }
    case Cor34Variant::CA: {
      // ||(A^2 - lambda^2) Pi_[lambda,lambda+eps]||_{2->2} = max over the window of |tau^2 - lambda^2|.
      double top = 0.0;
      for (Index i : cluster) {
        const double t = op.eigenvalues()(i);
        top = std::max(top, std::abs(t * t - lambda * lambda));
      }
      return make_check(id, {top, top, "exact-2-2"}, el, 3.0, ctx, op.label());
    }
    case Cor34Variant::C310: {
      require(pr.mu >= eps, "this estimate needs mu >= eps");
      ctx["mu"] = pr.mu;
      const auto wide = indices_where(op, [&](double t) { return t >= lambda && t <= lambda + pr.mu; });
      const NormBracket lhs = projector_norm(op, wide, q, cfg);
      // Windows of length eps covering [lambda, lambda+mu]; the last one is closed.
      const auto pieces = static_cast<Index>(std::ceil(pr.mu / eps - 1e-12));
      double sup = 0.0;
      for (Index k = 0; k < pieces; ++k) {
        const double a = lambda + eps * static_cast<double>(k);
        const double b = std::min(lambda + pr.mu, a + eps);
        const bool last = k + 1 == pieces;
        const auto idx = indices_where(op, [&](double t) { return t >= a && (last ? t <= b : t < b); });
        sup = std::max(sup, projector_norm(op, idx, q, cfg).upper);
      }
      ctx["pieces"] = static_cast<double>(pieces);
      return make_check(id, lhs, std::sqrt(static_cast<double>(pieces)) * sup, 1.0 + 1e-9, ctx, op.label());
    }
    case Cor34Variant::C311: {
      require(pr.mu >= eps, "this estimate needs mu >= eps");
      ctx["mu"] = pr.mu;
      const NormBracket lhs =
          low.empty() ? NormBracket{} : op_norm(localized_resolvent(pr.mu), dual_exponent(q), q, cfg);
      const double sup = window_norm_profile(op, Partition::uniform(lambda, eps), q, cfg).sup_upper();
      const double rhs = std::log(japanese(lambda / pr.mu)) / japanese(pr.mu / lambda) * sup * sup / el;
      return make_check(id, lhs, rhs, prop32_threshold(Prop32Item::I37), ctx, op.label());
    }
  }
  throw DomainError("unknown corollary variant");
}

// ---------------------------------------------------------------------------

namespace {

double integrate_abs2(const ScalarMultiplier& m, double a, double b) {
  std::vector<double> cuts{a};
  for (double c : m.critical) {
    if (c > a && c < b) cuts.push_back(c);
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  auto f = [&](double t) { return std::norm(m.f(t)); };
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, cuts[i], cuts[i + 1], 20, 1e-13);
  }
  return total;
}

}  // namespace

DarbouxSums darboux(const ScalarMultiplier& m, const Partition& partition) {
  DarbouxSums d;
  for (Index k = 0; k < partition.windows(); ++k) {
    const double a = partition.tau[static_cast<std::size_t>(k)];
    const double b = partition.tau[static_cast<std::size_t>(k + 1)];
    d.lower += partition.epsilon * std::pow(window_inf(m, a, b), 2);
    d.upper += partition.epsilon * std::pow(window_sup(m, a, b), 2);
  }
  d.integral = integrate_abs2(m, 0.0, partition.end());
  const double slack = 1e-10 * std::max(1.0, d.integral);
  if (!(d.lower <= d.integral + slack && d.integral <= d.upper + slack)) {
    throw NumericalError("Darboux sums do not bracket the integral");
  }
  return d;
}

double integral_majorant(double lambda, double mu, double alpha) {
  require(mu > 0.0, "integral majorant needs mu > 0");
  require(alpha >= 0.5, "integral majorant needs alpha >= 1/2");
  const double nu = alpha == 0.5 ? 1.0 : 0.0;
  return std::pow(lambda + mu, -2.0 * alpha) * std::pow(mu, 1.0 - 2.0 * alpha) *
         std::pow(std::log(japanese(lambda / mu)), nu);
}

double integral_quadrature(double lambda, double mu, double alpha) {
  require(mu > 0.0, "integral needs mu > 0");
  return integrate_abs2(resolvent_multiplier(lambda, mu, alpha), 0.0, 4.0 * lambda);
}

double scalar_im_scan(double lambda, double eps, int density) {
  require(eps > 0.0 && eps <= lambda, "scan needs 0 < eps <= lambda");
  require(density >= 2, "scan density must be at least 2");
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < density; ++i) {
    const double t = lambda + eps * i / (density - 1.0);
    best = std::min(best, eps * lambda * im_resolvent_symbol(t, lambda, eps));
  }
  return best;
}

}  // namespace rlab
