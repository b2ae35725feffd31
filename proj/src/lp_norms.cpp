#include "rlab/lp_norms.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "rlab/error.hpp"

namespace rlab {

using detail::require;

double dual_exponent(double p) {
  require(p >= 1.0, "Lebesgue exponent must be >= 1");
  if (p == 1.0) return kInf;
  if (std::isinf(p)) return 1.0;
  return p / (p - 1.0);
}

double lp_norm(const CVector& v, const RVector& weights, double p) {
  require(v.size() == weights.size(), "vector length does not match the weights");
  require(p >= 1.0, "Lebesgue exponent must be >= 1");
  if (v.size() == 0) return 0.0;
  const double top = v.cwiseAbs().maxCoeff();
  if (std::isinf(p)) return top;
  if (top == 0.0) return 0.0;
  double acc = 0.0;
  for (Index i = 0; i < v.size(); ++i) acc += weights(i) * std::pow(std::abs(v(i)) / top, p);
  return top * std::pow(acc, 1.0 / p);
}

double lp_norm(const CVector& v, const FiniteMeasureSpace& space, double p) {
  return lp_norm(v, space.weights(), p);
}

CVector duality_map(const CVector& v, double p) {
  require(p > 1.0 && std::isfinite(p), "duality map needs 1 < p < inf");
  require(v.size() > 0 && v.cwiseAbs().maxCoeff() > 0.0, "duality map needs a nonzero vector");
  CVector u(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    u(i) = a == 0.0 ? Complex(0.0) : std::pow(a, p - 1.0) * (v(i) / a);
  }
  return u;
}

namespace {

// J_p(v) rescaled to unit L^{p'} norm; overflow-safe for large p.
CVector unit_dual(const CVector& v, const FiniteMeasureSpace& space, double p) {
  const double top = v.cwiseAbs().maxCoeff();
  CVector u = duality_map(v / top, p);
  return u / lp_norm(u, space, dual_exponent(p));
}

CVector random_start(std::mt19937_64& rng, Index n, bool real) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  CVector x(n);
  for (Index i = 0; i < n; ++i) x(i) = real ? Complex(gauss(rng), 0.0) : Complex(gauss(rng), gauss(rng));
  return x;
}

struct RestartOutcome {
  double value = 0.0;
  double last_increment = 0.0;
};

RestartOutcome run_restart(const LinearMap& t, double p, double q, const IterationConfig& cfg, CVector x,
                           std::vector<double>* trace) {
  const auto& dom = t.domain();
  const auto& cod = t.codomain();
  const double pd = dual_exponent(p);
  RestartOutcome out;
  double nx = lp_norm(x, dom, p);
  if (nx == 0.0) return out;
  x /= nx;
  CVector y = t.apply(x);
  double r = lp_norm(y, cod, q);
  if (!std::isfinite(r)) throw NumericalError("power iteration produced a non-finite value");
  if (trace) trace->push_back(r);
  for (int it = 0; it < cfg.max_iters && r > 0.0; ++it) {
    const CVector g = unit_dual(y, cod, q);
    const CVector z = t.apply_adjoint(g);
    if (z.cwiseAbs().maxCoeff() == 0.0) break;
    x = unit_dual(z, dom, pd);
    y = t.apply(x);
    const double r_new = lp_norm(y, cod, q);
    if (!std::isfinite(r_new)) throw NumericalError("power iteration produced a non-finite value");
    if (trace) trace->push_back(r_new);
    if (r_new < r * (1.0 - 1e-9)) {
      throw NumericalError("power iteration objective decreased (" + std::to_string(r) + " -> " +
                           std::to_string(r_new) + ")");
    }
    const double inc = r_new - r;
    r = std::max(r, r_new);
    out.last_increment = std::max(inc, 0.0);
    if (inc <= cfg.tolerance * r) break;
  }
  out.value = r;
  return out;
}

}  // namespace

NormBracket op_norm_power(const LinearMap& t, double p, double q, const IterationConfig& cfg, PowerTrace* trace) {
  require(p > 1.0 && p <= 2.0 && q >= 2.0 && std::isfinite(q), "power iteration needs 1 < p <= 2 <= q < inf");
  require(cfg.restarts >= 1, "at least one restart is required");
  require(cfg.tolerance > 0.0, "iteration tolerance must be positive");
  const Index n = t.cols();
  const bool real = t.real_preserving();
  std::mt19937_64 rng(cfg.seed);

  std::vector<RestartOutcome> outcomes;
  auto run = [&](CVector x0) {
    std::vector<double>* tr = nullptr;
    if (trace) {
      trace->objective.emplace_back();
      tr = &trace->objective.back();
    }
    outcomes.push_back(run_restart(t, p, q, cfg, std::move(x0), tr));
  };
  for (const auto& s : cfg.starts) {
    require(s.size() == n, "starting vector length does not match the domain");
    run(s);
  }
  const Index m = t.rows();
  Index points = std::min<Index>(m, std::max(cfg.point_starts, 0));
  // On a homogeneous grid every point start of a spectral map is a translate of the first.
  if (t.spectral_multiplier() && t.basis()->homogeneous()) points = std::min<Index>(points, 1);
  for (Index k = 0; k < points; ++k) {
    CVector e = CVector::Zero(m);
    e(k * m / points) = 1.0;
    CVector x = t.apply_adjoint(e);
    if (x.cwiseAbs().maxCoeff() > 0.0) run(std::move(x));
  }
  for (int k = 0; k < cfg.restarts; ++k) run(random_start(rng, n, real));

  std::vector<double> values;
  double stall = 0.0;
  for (const auto& o : outcomes) values.push_back(o.value);
  std::sort(values.begin(), values.end(), std::greater<>());
  const double best = values.front();
  for (const auto& o : outcomes) {
    if (o.value == best) stall = std::max(stall, o.last_increment);
  }
  NormBracket b;
  b.lower = best;
  b.method = "power";
  if (best == 0.0) {
    b.upper = 0.0;
    return b;
  }
  // Gap between the best restart and the runner-up, plus the last increment
  // of the best restart: zero when two restarts confirm the same maximum.
  const double second = values.size() > 1 ? values[1] : 0.0;
  const double gap = (best - second) / best + stall / best;
  b.upper = best * (1.0 + gap);
  return b;
}

// ---------------------------------------------------------------------------

namespace {

struct AngleBox {
  int dims;                    // number of angle parameters
  std::vector<double> lo, hi;  // parameter box
};

CVector sphere_point(const std::vector<double>& a, Index n, bool real) {
  CVector x(n);
  if (n == 1) {
    x(0) = 1.0;
  } else if (n == 2 && real) {
    x << std::cos(a[0]), std::sin(a[0]);
  } else if (n == 2) {
    x << std::cos(a[0]), std::polar(std::sin(a[0]), a[1]);
  } else {
    x << std::sin(a[0]) * std::cos(a[1]), std::sin(a[0]) * std::sin(a[1]), std::cos(a[0]);
  }
  return x;
}

}  // namespace

BruteForceResult op_norm_bruteforce(const LinearMap& t, double p, double q, int resolution) {
  const Index n = t.cols();
  require(n >= 1 && n <= 3, "brute-force norms support domain dimension <= 3");
  require(p >= 1.0 && q >= 1.0, "Lebesgue exponents must be >= 1");
  require(resolution >= 16, "brute-force resolution must be at least 16");
  const bool real = t.real_preserving();
  require(real || n <= 2, "complex brute-force norms support dimension <= 2");

  const CMatrix m = t.to_dense();
  const auto& dom = t.domain();
  const auto& cod = t.codomain();
  auto f = [&](const std::vector<double>& a) {
    const CVector x = sphere_point(a, n, real);
    return lp_norm(m * x, cod, q) / lp_norm(x, dom, p);
  };

  if (n == 1) return {f({}), 0.0};

  AngleBox box;
  if (n == 2 && real) {
    box = {1, {0.0}, {M_PI}};
  } else if (n == 2) {
    box = {2, {0.0, 0.0}, {0.5 * M_PI, 2.0 * M_PI}};
  } else {
    box = {2, {0.0, 0.0}, {M_PI, 2.0 * M_PI}};
  }
  std::vector<int> counts = box.dims == 1 ? std::vector<int>{resolution}
                                          : std::vector<int>{resolution / 4, resolution / 2};

  struct Sample {
    double value;
    std::vector<double> at;
  };

  // Evaluates a tensor grid (endpoints included) and returns all samples and
  // the largest observed difference quotient per axis.
  auto scan = [&](const std::vector<double>& lo, const std::vector<double>& hi, const std::vector<int>& cnt,
                  std::vector<double>& lipschitz) {
    std::vector<Sample> samples;
    lipschitz.assign(box.dims, 0.0);
    std::vector<double> h(box.dims);
    for (int d = 0; d < box.dims; ++d) h[d] = (hi[d] - lo[d]) / (cnt[d] - 1);
    const int ny = box.dims == 2 ? cnt[1] : 1;
    std::vector<double> prev_row;
    for (int i = 0; i < cnt[0]; ++i) {
      std::vector<double> row(ny);
      for (int j = 0; j < ny; ++j) {
        std::vector<double> a{lo[0] + i * h[0]};
        if (box.dims == 2) a.push_back(lo[1] + j * h[1]);
        row[j] = f(a);
        samples.push_back({row[j], a});
        if (j > 0) lipschitz[1] = std::max(lipschitz[1], std::abs(row[j] - row[j - 1]) / h[1]);
        if (i > 0) lipschitz[0] = std::max(lipschitz[0], std::abs(row[j] - prev_row[j]) / h[0]);
      }
      prev_row = std::move(row);
    }
    return samples;
  };

  std::vector<double> lip;
  auto coarse = scan(box.lo, box.hi, counts, lip);
  std::vector<double> step(box.dims);
  for (int d = 0; d < box.dims; ++d) step[d] = (box.hi[d] - box.lo[d]) / (counts[d] - 1);
  std::sort(coarse.begin(), coarse.end(), [](const Sample& a, const Sample& b) { return a.value > b.value; });

  double best = coarse.front().value;
  double error = 0.0;
  const std::size_t candidates = std::min<std::size_t>(4, coarse.size());
  const int fine = box.dims == 1 ? 64 : 24;
  for (std::size_t c = 0; c < candidates; ++c) {
    std::vector<double> centre = coarse[c].at;
    std::vector<double> radius = step;
    for (int pass = 0; pass < 2; ++pass) {
      std::vector<double> lo(box.dims), hi(box.dims), local_lip;
      for (int d = 0; d < box.dims; ++d) {
        lo[d] = centre[d] - radius[d];
        hi[d] = centre[d] + radius[d];
      }
      auto local = scan(lo, hi, std::vector<int>(box.dims, fine + 1), local_lip);
      auto top = std::max_element(local.begin(), local.end(),
                                  [](const Sample& a, const Sample& b) { return a.value < b.value; });
      best = std::max(best, top->value);
      centre = top->at;
      double e = 0.0;
      for (int d = 0; d < box.dims; ++d) {
        radius[d] = 2.0 * radius[d] / fine;
        e += 0.5 * lip[d] * radius[d];
      }
      if (pass == 1) error = std::max(error, e);
    }
  }
  // Candidates far from every refined peak are controlled by the coarse grid.
  double coarse_err = 0.0;
  for (int d = 0; d < box.dims; ++d) coarse_err += 0.5 * lip[d] * step[d];
  const double unrefined = candidates < coarse.size() ? coarse[candidates].value + coarse_err : 0.0;
  if (unrefined > best + error) error = unrefined - best;
  return {best, error};
}

// ---------------------------------------------------------------------------

double norm_2_to_2(const LinearMap& t) {
  if (const auto* m = t.spectral_multiplier()) return m->size() == 0 ? 0.0 : m->cwiseAbs().maxCoeff();
  const CMatrix a = t.to_dense();
  const CMatrix b = t.codomain().weights().cwiseSqrt().cast<Complex>().asDiagonal() * a *
                    t.domain().weights().cwiseSqrt().cwiseInverse().cast<Complex>().asDiagonal();
  Eigen::BDCSVD<CMatrix> svd(b);
  return svd.singularValues().size() == 0 ? 0.0 : svd.singularValues()(0);
}

double norm_2_to_inf(const LinearMap& t) {
  const auto basis = t.basis();
  if (const auto* m = t.spectral_multiplier()) {
    const RVector m2 = m->cwiseAbs2();
    const RVector rows = basis->row_energy(m2);
    return std::sqrt(rows.maxCoeff());
  }
  if (const auto* mm = t.modal_matrix()) {
    const CMatrix em = basis->matrix() * (*mm);
    return std::sqrt(em.rowwise().squaredNorm().maxCoeff());
  }
  const CMatrix a = t.to_dense();
  const RVector inv_w = t.domain().weights().cwiseInverse();
  return std::sqrt((a.cwiseAbs2() * inv_w).maxCoeff());
}

double norm_1_to_inf(const LinearMap& t) {
  const CMatrix a = t.to_dense();
  const RVector inv_w = t.domain().weights().cwiseInverse();
  return (a.cwiseAbs() * inv_w.asDiagonal()).maxCoeff();
}

NormBracket op_norm(const LinearMap& t, double p, double q, const IterationConfig& cfg) {
  if (p == 2.0 && q == 2.0) {
    const double v = norm_2_to_2(t);
    return {v, v, "exact-2-2"};
  }
  if (p == 2.0 && std::isinf(q)) {
    const double v = norm_2_to_inf(t);
    return {v, v, "exact-2-inf"};
  }
  if (p == 1.0 && std::isinf(q)) {
    const double v = norm_1_to_inf(t);
    return {v, v, "exact-1-inf"};
  }
  return op_norm_power(t, p, q, cfg);
}

// ---------------------------------------------------------------------------

SpaceSpec SpaceSpec::lebesgue(double p) {
  require(p >= 1.0, "Lebesgue exponent must be >= 1");
  SpaceSpec s;
  s.kind = Kind::Lebesgue;
  s.p = p;
  return s;
}

SpaceSpec SpaceSpec::flattened(std::shared_ptr<const SpectralOperator> op, double lambda, double s_, double p) {
  require(p >= 1.0, "Lebesgue exponent must be >= 1");
  require(lambda >= 1.0, "flattened spaces need lambda >= 1");
  require(op != nullptr, "flattened spaces need a reference operator");
  SpaceSpec s;
  s.kind = Kind::Flattened;
  s.p = p;
  s.s = s_;
  s.lambda = lambda;
  s.op = std::move(op);
  return s;
}

SpaceSpec SpaceSpec::intersection(std::vector<SpaceSpec> parts) {
  require(!parts.empty(), "intersection needs at least one space");
  for (const auto& part : parts) require(part.simple(), "intersection parts must be simple spaces");
  SpaceSpec s;
  s.kind = Kind::Intersection;
  s.parts = std::move(parts);
  return s;
}

SpaceSpec SpaceSpec::sum(std::vector<SpaceSpec> parts) {
  require(!parts.empty(), "sum needs at least one space");
  for (const auto& part : parts) require(part.simple(), "sum parts must be simple spaces");
  SpaceSpec s;
  s.kind = Kind::Sum;
  s.parts = std::move(parts);
  return s;
}

std::string SpaceSpec::str() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Lebesgue: os << "L^" << p; break;
    case Kind::Flattened: os << "W^{" << s << "," << p << "}_" << lambda; break;
    case Kind::Intersection:
    case Kind::Sum:
      os << '(';
      for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) os << (kind == Kind::Sum ? " + " : " cap ");
        os << parts[i].str();
      }
      os << ')';
      break;
  }
  return os.str();
}

SpaceSpec x_space(std::shared_ptr<const SpectralOperator> op, double lambda, double q, double s_q) {
  return SpaceSpec::intersection({SpaceSpec::flattened(op, lambda, 0.5, 2.0), SpaceSpec::flattened(op, lambda, s_q, q)});
}

SpaceSpec x_dual_space(std::shared_ptr<const SpectralOperator> op, double lambda, double q, double s_q) {
  return SpaceSpec::sum(
      {SpaceSpec::flattened(op, lambda, -0.5, 2.0), SpaceSpec::flattened(op, lambda, -s_q, dual_exponent(q))});
}

CompositeNorm op_norm_composite(const LinearMap& t, const SpaceSpec& from, const SpaceSpec& to,
                                const IterationConfig& cfg) {
  require(from.simple() || from.kind == SpaceSpec::Kind::Sum, "source space must be simple or a sum");
  require(to.simple() || to.kind == SpaceSpec::Kind::Intersection, "target space must be simple or an intersection");
  const std::vector<SpaceSpec> sources = from.simple() ? std::vector<SpaceSpec>{from} : from.parts;
  const std::vector<SpaceSpec> targets = to.simple() ? std::vector<SpaceSpec>{to} : to.parts;

  CompositeNorm out;
  out.total.method = "composite";
  for (const auto& a : sources) {
    std::vector<NormBracket> row;
    double lower = 0.0, upper = 0.0;
    for (const auto& b : targets) {
      std::vector<LinearMap> chain;
      if (b.kind == SpaceSpec::Kind::Flattened) chain.push_back(flattened_sobolev(*b.op, b.lambda, b.s));
      chain.push_back(t);
      if (a.kind == SpaceSpec::Kind::Flattened) chain.push_back(flattened_sobolev(*a.op, a.lambda, -a.s));
      const NormBracket nb = op_norm(compose(chain), a.p, b.p, cfg);
      lower = std::max(lower, nb.lower);
      upper += nb.upper;
      row.push_back(nb);
    }
    // ||T||_{A1+A2 -> Y} = max over the parts; the intersection norm is the
    // sum of component norms, bracketed between their max and their sum.
    out.total.lower = std::max(out.total.lower, lower);
    out.total.upper = std::max(out.total.upper, upper);
    out.components.push_back(std::move(row));
  }
  return out;
}

}  // namespace rlab
