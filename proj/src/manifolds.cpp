#include "rlab/manifolds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fftw3.h>

#include "rlab/error.hpp"
#include "rlab/lp_norms.hpp"

namespace rlab {

using detail::require;

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

Index ipow(Index base, int e) {
  Index r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

double periodic_gap(double a, double b) {
  double d = std::fmod(std::abs(a - b), kTwoPi);
  return std::min(d, kTwoPi - d);
}

RMatrix periodic_points(int n, int G) {
  const Index total = ipow(G, n);
  RMatrix pts(total, n);
  for (Index idx = 0; idx < total; ++idx) {
    Index rest = idx;
    for (int d = n - 1; d >= 0; --d) {
      pts(idx, d) = kTwoPi * static_cast<double>(rest % G) / G;
      rest /= G;
    }
  }
  return pts;
}

}  // namespace

// ---------------------------------------------------------------------------
// FourierBasis

FourierBasis::FourierBasis(int n, int K, int G)
    : n_(n), K_(K), G_(G), space_(FiniteMeasureSpace::uniform(ipow(G, n), std::pow(kTwoPi / G, n))) {
  require(n >= 1 && n <= 3, "torus dimension must be 1, 2 or 3");
  require(K >= 0, "lattice cutoff must be nonnegative");
  require(G >= 4 * K + 1, "grid too small: need G >= 4K + 1");

  std::vector<int> k(n, -K);
  // Every mode of the cube |k|_inf <= K is kept, so the spectrum is complete up to K.
  while (true) {
    modes_.push_back(k);
    int d = n - 1;
    while (d >= 0 && k[d] == K) k[d--] = -K;
    if (d < 0) break;
    ++k[d];
  }
  auto norm2 = [](const std::vector<int>& v) {
    int s = 0;
    for (int x : v) s += x * x;
    return s;
  };
  std::stable_sort(modes_.begin(), modes_.end(),
                   [&](const auto& a, const auto& b) { return norm2(a) < norm2(b); });
  for (const auto& m : modes_) slot_.push_back(flat_index(m));
  partner_.resize(modes_.size());
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    std::vector<int> neg(modes_[i]);
    for (int& v : neg) v = -v;
    const Index target = flat_index(neg);
    partner_[i] = static_cast<Index>(std::find(slot_.begin(), slot_.end(), target) - slot_.begin());
  }

  const Index total = space_.size();
  auto* buf = fftw_alloc_complex(static_cast<std::size_t>(total));
  std::vector<int> dims(n, G);
  buffer_ = buf;
  forward_ = fftw_plan_dft(n, dims.data(), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  backward_ = fftw_plan_dft(n, dims.data(), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
}

FourierBasis::~FourierBasis() {
  fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  fftw_destroy_plan(static_cast<fftw_plan>(backward_));
  fftw_free(buffer_);
}

Index FourierBasis::flat_index(const std::vector<int>& k) const {
  Index idx = 0;
  for (int d = 0; d < n_; ++d) idx = idx * G_ + ((k[d] % G_) + G_) % G_;
  return idx;
}

CVector FourierBasis::analyze(const CVector& u) const {
  require(u.size() == space_.size(), "vector length does not match the torus grid");
  std::lock_guard<std::mutex> lock(mutex_);
  auto* buf = static_cast<fftw_complex*>(buffer_);
  for (Index i = 0; i < u.size(); ++i) {
    buf[i][0] = u(i).real();
    buf[i][1] = u(i).imag();
  }
  fftw_execute(static_cast<fftw_plan>(forward_));
  const double scale = std::pow(kTwoPi / G_, n_) / std::pow(kTwoPi, 0.5 * n_);
  CVector c(rank());
  for (Index i = 0; i < rank(); ++i) c(i) = scale * Complex(buf[slot_[i]][0], buf[slot_[i]][1]);
  return c;
}

CVector FourierBasis::synthesize(const CVector& c) const {
  require(c.size() == rank(), "coefficient length does not match the basis");
  std::lock_guard<std::mutex> lock(mutex_);
  auto* buf = static_cast<fftw_complex*>(buffer_);
  const Index total = space_.size();
  std::fill(&buf[0][0], &buf[0][0] + 2 * total, 0.0);
  for (Index i = 0; i < rank(); ++i) {
    buf[slot_[i]][0] = c(i).real();
    buf[slot_[i]][1] = c(i).imag();
  }
  fftw_execute(static_cast<fftw_plan>(backward_));
  const double scale = 1.0 / std::pow(kTwoPi, 0.5 * n_);
  CVector u(total);
  for (Index i = 0; i < total; ++i) u(i) = scale * Complex(buf[i][0], buf[i][1]);
  return u;
}

CMatrix FourierBasis::columns(const std::vector<Index>& idx) const {
  const RMatrix pts = periodic_points(n_, G_);
  const double scale = 1.0 / std::pow(kTwoPi, 0.5 * n_);
  CMatrix out(pts.rows(), static_cast<Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c) {
    require(idx[c] >= 0 && idx[c] < rank(), "mode index out of range");
    const auto& k = modes_[static_cast<std::size_t>(idx[c])];
    for (Index x = 0; x < pts.rows(); ++x) {
      double phase = 0.0;
      for (int d = 0; d < n_; ++d) phase += k[d] * pts(x, d);
      out(x, static_cast<Index>(c)) = scale * std::polar(1.0, phase);
    }
  }
  return out;
}

CMatrix FourierBasis::matrix() const {
  require(static_cast<double>(space_.size()) * static_cast<double>(rank()) <= 6e7,
          "torus basis too large to materialize");
  std::vector<Index> all(static_cast<std::size_t>(rank()));
  std::iota(all.begin(), all.end(), Index{0});
  return columns(all);
}

RVector FourierBasis::row_energy(const RVector& m2) const {
  return RVector::Constant(space_.size(), m2.sum() / std::pow(kTwoPi, n_));
}

bool FourierBasis::preserves_real(const CVector& m) const {
  for (Index i = 0; i < m.size(); ++i) {
    if (m(partner_[i]) != std::conj(m(i))) return false;
  }
  return true;
}

RVector FourierBasis::frequencies() const {
  RVector f(rank());
  for (Index i = 0; i < rank(); ++i) {
    int s = 0;
    for (int v : modes_[static_cast<std::size_t>(i)]) s += v * v;
    f(i) = std::sqrt(static_cast<double>(s));
  }
  return f;
}

CMatrix FourierBasis::multiplication_matrix(const RVector& v) const {
  require(v.size() == space_.size(), "potential length does not match the torus grid");
  CVector hat(space_.size());
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto* buf = static_cast<fftw_complex*>(buffer_);
    for (Index i = 0; i < v.size(); ++i) {
      buf[i][0] = v(i);
      buf[i][1] = 0.0;
    }
    fftw_execute(static_cast<fftw_plan>(forward_));
    for (Index i = 0; i < v.size(); ++i) hat(i) = Complex(buf[i][0], buf[i][1]);
  }
  hat /= static_cast<double>(space_.size());
  const Index r = rank();
  CMatrix out(r, r);
  std::vector<int> diff(static_cast<std::size_t>(n_));
  for (Index i = 0; i < r; ++i) {
    for (Index j = 0; j < r; ++j) {
      for (int d = 0; d < n_; ++d) diff[d] = modes_[i][d] - modes_[j][d];
      out(i, j) = hat(flat_index(diff));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model geometry

double Model::distance(Index i, const RVector& x0) const {
  switch (geometry) {
    case Geometry::Torus: {
      double s = 0.0;
      for (Index d = 0; d < points.cols(); ++d) s += std::pow(periodic_gap(points(i, d), x0(d)), 2);
      return std::sqrt(s);
    }
    case Geometry::Sphere:
      return std::acos(std::clamp(points.row(i).dot(x0), -1.0, 1.0));
    case Geometry::Abstract:
      return std::abs(points(i, 0) - x0(0));
  }
  return 0.0;
}

double Model::cell() const {
  const double n = static_cast<double>(op->size());
  switch (geometry) {
    case Geometry::Torus: return kTwoPi / std::round(std::pow(n, 1.0 / dimension));
    case Geometry::Sphere: return std::sqrt(4.0 * M_PI / n);
    case Geometry::Abstract: return 1.0;
  }
  return 1.0;
}

Model make_torus(int n, int K, int G) {
  auto basis = std::make_shared<FourierBasis>(n, K, G);
  Model m;
  m.op = std::make_shared<SpectralOperator>(basis, basis->frequencies(),
                                            "torus(n=" + std::to_string(n) + ",K=" + std::to_string(K) + ")");
  m.geometry = Geometry::Torus;
  m.dimension = n;
  m.points = periodic_points(n, G);
  m.trusted_lambda = K / 4.0;
  m.label = m.op->label();
  return m;
}

SpectralOperator build_torus(int n, int K, int G) { return *make_torus(n, K, G).op; }

// ---------------------------------------------------------------------------
// Sphere

GaussLegendre gauss_legendre(int count) {
  require(count >= 1, "Gauss-Legendre rule needs at least one node");
  // P_count and P_{count-1} at x.
  auto legendre_pair = [count](double x) {
    double p0 = 1.0, p1 = x;
    for (int l = 2; l <= count; ++l) {
      const double p2 = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / l;
      p0 = p1;
      p1 = p2;
    }
    return std::pair{p1, p0};
  };
  GaussLegendre gl{RVector(count), RVector(count)};
  for (int i = 0; i < count; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (count + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [pn, prev] = legendre_pair(x);
      const double dx = pn / (count * (x * pn - prev) / (x * x - 1.0));
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const auto [pn, prev] = legendre_pair(x);
    const double dp = count * (x * pn - prev) / (x * x - 1.0);
    gl.nodes(count - 1 - i) = x;
    gl.weights(count - 1 - i) = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return gl;
}

std::vector<double> normalized_legendre(int L, double x) {
  require(L >= 0, "degree cutoff must be nonnegative");
  auto at = [](int l, int m) { return static_cast<std::size_t>(l * (l + 1) / 2 + m); };
  std::vector<double> p(at(L, L) + 1, 0.0);
  const double s = std::sqrt(std::max(0.0, 1.0 - x * x));
  p[at(0, 0)] = 1.0 / std::sqrt(4.0 * M_PI);
  for (int m = 1; m <= L; ++m) p[at(m, m)] = std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s * p[at(m - 1, m - 1)];
  for (int m = 0; m < L; ++m) p[at(m + 1, m)] = std::sqrt(2.0 * m + 3.0) * x * p[at(m, m)];
  for (int m = 0; m <= L; ++m) {
    for (int l = m + 2; l <= L; ++l) {
      const double l2 = static_cast<double>(l) * l, m2 = static_cast<double>(m) * m;
      const double a = std::sqrt((4.0 * l2 - 1.0) / (l2 - m2));
      const double b = std::sqrt(((l - 1.0) * (l - 1.0) - m2) / (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
      p[at(l, m)] = a * (x * p[at(l - 1, m)] - b * p[at(l - 2, m)]);
    }
  }
  return p;
}

double legendre_p(int l, double x) {
  require(l >= 0, "Legendre degree must be nonnegative");
  if (l == 0) return 1.0;
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= l; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

Model make_sphere(const SphereGrid& g) {
  const int l_max = g.l_max < 0 ? g.L_max : g.l_max;
  require(g.L_max >= 0, "degree cutoff must be nonnegative");
  require(g.n_theta >= g.L_max + 1 && g.n_phi >= 2 * g.L_max + 1,
          "sphere quadrature too coarse: need n_theta >= L_max+1 and n_phi >= 2 L_max+1");
  require(0 <= g.l_min && g.l_min <= l_max && l_max <= g.L_max, "degree band must lie in [0, L_max]");
  const GaussLegendre gl = gauss_legendre(g.n_theta);
  const Index total = static_cast<Index>(g.n_theta) * g.n_phi;
  const Index rank = static_cast<Index>(l_max + 1) * (l_max + 1) - static_cast<Index>(g.l_min) * g.l_min;
  require(static_cast<double>(total) * static_cast<double>(rank) <= 6e7, "sphere basis too large; narrow the degree band");

  RVector weights(total);
  RMatrix pts(total, 3);
  CMatrix vectors(total, rank);
  RVector tau(rank);
  {
    Index col = 0;
    for (int l = g.l_min; l <= l_max; ++l) {
      for (int k = 0; k < 2 * l + 1; ++k) tau(col++) = std::sqrt(static_cast<double>(l) * (l + 1));
    }
  }
  auto at = [](int l, int m) { return static_cast<std::size_t>(l * (l + 1) / 2 + m); };
  for (int i = 0; i < g.n_theta; ++i) {
    const double x = gl.nodes(i);
    const double st = std::sqrt(std::max(0.0, 1.0 - x * x));
    const auto p = normalized_legendre(l_max, x);
    for (int j = 0; j < g.n_phi; ++j) {
      const Index row = static_cast<Index>(i) * g.n_phi + j;
      const double phi = kTwoPi * j / g.n_phi;
      weights(row) = gl.weights(i) * kTwoPi / g.n_phi;
      pts.row(row) << st * std::cos(phi), st * std::sin(phi), x;
      Index col = 0;
      for (int l = g.l_min; l <= l_max; ++l) {
        vectors(row, col++) = p[at(l, 0)];
        for (int m = 1; m <= l; ++m) {
          vectors(row, col++) = std::sqrt(2.0) * p[at(l, m)] * std::cos(m * phi);
          vectors(row, col++) = std::sqrt(2.0) * p[at(l, m)] * std::sin(m * phi);
        }
      }
    }
  }
  FiniteMeasureSpace space(std::move(weights));
  Model m;
  m.op = std::make_shared<SpectralOperator>(std::make_shared<DenseBasis>(space, std::move(vectors)), std::move(tau),
                                            "sphere(L=" + std::to_string(g.L_max) + ",l=" + std::to_string(g.l_min) +
                                                ".." + std::to_string(l_max) + ")");
  m.geometry = Geometry::Sphere;
  m.dimension = 2;
  m.points = std::move(pts);
  m.trusted_lambda = g.L_max / 2.0;
  m.label = m.op->label();
  return m;
}

SpectralOperator build_sphere(int L_max, int n_theta, int n_phi) {
  SphereGrid g;
  g.L_max = L_max;
  g.n_theta = n_theta;
  g.n_phi = n_phi;
  return *make_sphere(g).op;
}

CMatrix zonal_projector(const Model& sphere, int l) {
  require(sphere.geometry == Geometry::Sphere, "zonal kernels need a sphere model");
  const Index n = sphere.points.rows();
  require(n <= 4096, "zonal kernel matrix too large");
  const RVector& w = sphere.op->space().weights();
  const double c = (2.0 * l + 1.0) / (4.0 * M_PI);
  CMatrix k(n, n);
  for (Index x = 0; x < n; ++x) {
    for (Index y = 0; y < n; ++y) {
      const double cd = std::clamp(sphere.points.row(x).dot(sphere.points.row(y)), -1.0, 1.0);
      k(x, y) = c * legendre_p(l, cd) * w(y);
    }
  }
  return k;
}

// ---------------------------------------------------------------------------
// Rough coefficients

CoefficientField weierstrass_coefficient(double s, double delta, int J, int N, int dim, int axis, double offset) {
  require(dim == 1 || dim == 2, "rough models are one- or two-dimensional");
  require(N >= 4, "grid must have at least 4 points per axis");
  require(J >= 0 && s >= 0.0 && s <= 2.0, "need J >= 0 and s in [0, 2]");
  double amp = 0.0;
  for (int j = 1; j <= J; ++j) amp += std::pow(2.0, -j * s);
  require(std::abs(delta) * amp < 0.5, "ellipticity violated: delta * sum 2^{-js} must be < 1/2");

  const double h = kTwoPi / N;
  const Index total = ipow(N, dim);
  auto eval = [&](const std::vector<double>& x) {
    double a = 1.0;
    for (int j = 1; j <= J; ++j) {
      const int e = dim == 1 ? 0 : (j - 1) % 2;  // alternating axes
      a += delta * std::pow(2.0, -j * s) * std::cos(std::ldexp(1.0, j) * x[e]);
    }
    return a;
  };
  auto coords = [&](Index idx) {
    std::vector<double> x(dim);
    Index rest = idx;
    for (int d = dim - 1; d >= 0; --d) {
      x[d] = h * static_cast<double>(rest % N);
      rest /= N;
    }
    return x;
  };

  CoefficientField f;
  f.values.resize(total);
  for (Index i = 0; i < total; ++i) {
    auto x = coords(i);
    if (axis >= 0) x[axis] += offset * h;
    f.values(i) = eval(x);
  }

  // Difference quotients along every axis at all dyadic shifts below the period.
  const double hs = std::min(s, 1.0);
  for (int d = 0; d < dim; ++d) {
    const Index stride = ipow(N, dim - 1 - d);
    auto shifted = [&](Index i, int steps) {
      const Index coord = (i / stride) % N;
      const Index moved = ((coord + steps) % N + N) % N;
      return i + (moved - coord) * stride;
    };
    for (Index i = 0; i < total; ++i) {
      const double a0 = f.values(i);
      const double ap = f.values(shifted(i, 1));
      const double am = f.values(shifted(i, -1));
      f.lipschitz_quotient = std::max(f.lipschitz_quotient, std::abs(ap - a0) / h);
      f.second_difference_quotient = std::max(f.second_difference_quotient, std::abs(ap - 2.0 * a0 + am) / (h * h));
      for (int step = 1; step < N / 2; step *= 2) {
        const double t = step * h;
        f.holder_quotient = std::max(f.holder_quotient, std::abs(f.values(shifted(i, step)) - a0) / std::pow(t, hs));
      }
    }
  }
  return f;
}

Model make_rough(const RoughMetricModel& r) {
  require(r.N >= 4 && (r.N & (r.N - 1)) == 0, "rough grid size must be a power of two");
  require(r.dim == 1 || r.dim == 2, "rough models are one- or two-dimensional");
  require(r.dim == 1 || r.N <= 64, "two-dimensional rough grids are capped at 64^2");
  require(r.scale > 0.0, "coefficient scale must be positive");
  const Index total = ipow(r.N, r.dim);
  const double h = kTwoPi / r.N;
  RMatrix m = RMatrix::Zero(total, total);
  for (int d = 0; d < r.dim; ++d) {
    // Coefficient on the edge between x and x + h e_d, sampled at the midpoint.
    const CoefficientField edge = weierstrass_coefficient(r.s, r.delta, r.J, r.N, r.dim, d, 0.5);
    const Index stride = ipow(r.N, r.dim - 1 - d);
    for (Index i = 0; i < total; ++i) {
      const Index coord = (i / stride) % r.N;
      const Index j = i + (((coord + 1) % r.N) - coord) * stride;
      const double a = r.scale * edge.values(i) / (h * h);
      m(i, i) += a;
      m(j, j) += a;
      m(i, j) -= a;
      m(j, i) -= a;
    }
  }
  if ((m - m.transpose()).cwiseAbs().maxCoeff() != 0.0) throw NumericalError("divergence-form assembly is not symmetric");
  const FiniteMeasureSpace space = FiniteMeasureSpace::uniform(total, std::pow(h, r.dim));
  Model model;
  model.op = std::make_shared<SpectralOperator>(SpectralOperator::from_weighted_square(
      space, m.cast<Complex>(),
      "rough(d=" + std::to_string(r.dim) + ",N=" + std::to_string(r.N) + ",s=" + std::to_string(r.s) + ")"));
  model.geometry = Geometry::Torus;
  model.dimension = r.dim;
  model.points = periodic_points(r.dim, r.N);
  model.trusted_lambda = r.N / 8.0;
  model.label = model.op->label();
  return model;
}

SpectralOperator build_rough(const RoughMetricModel& model) { return *make_rough(model).op; }

// ---------------------------------------------------------------------------

Model make_random(Index dim, double tau_max, std::uint64_t seed) {
  require(dim >= 1, "random models need dimension >= 1");
  require(tau_max > 0.0, "random spectra need tau_max > 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uw(0.5, 2.0), ut(0.0, tau_max);
  std::normal_distribution<double> g(0.0, 1.0);
  RVector w(dim), tau(dim);
  RMatrix a(dim, dim);
  for (Index i = 0; i < dim; ++i) w(i) = uw(rng);
  for (Index i = 0; i < dim; ++i) tau(i) = ut(rng);
  for (Index i = 0; i < dim; ++i) {
    for (Index j = 0; j < dim; ++j) a(i, j) = g(rng);
  }
  const RMatrix q = Eigen::HouseholderQR<RMatrix>(a).householderQ();
  const RMatrix e = w.cwiseSqrt().cwiseInverse().asDiagonal() * q;
  const FiniteMeasureSpace space(w);
  Model m;
  m.op = std::make_shared<SpectralOperator>(
      SpectralOperator::from_eigenpairs(space, tau, e.cast<Complex>(), "random(seed=" + std::to_string(seed) + ")"));
  m.geometry = Geometry::Abstract;
  m.dimension = 1;
  m.points.resize(dim, 1);
  for (Index i = 0; i < dim; ++i) m.points(i, 0) = static_cast<double>(i);
  m.trusted_lambda = tau_max / 2.0;
  m.label = m.op->label();
  return m;
}

// ---------------------------------------------------------------------------

PotentialKind parse_potential_kind(const std::string& key) {
  if (key == "single-bump" || key == "bump") return PotentialKind::SingleBump;
  if (key == "inverse-power") return PotentialKind::InversePower;
  if (key == "random") return PotentialKind::Random;
  if (key == "constant") return PotentialKind::Constant;
  throw DomainError("unknown potential kind '" + key + "'");
}

Potential build_potential(const PotentialSpec& spec, const Model& model) {
  require(spec.p >= 1.0, "integrability exponent must be >= 1");
  const Index n = model.op->size();
  require(spec.center >= 0 && spec.center < n, "potential centre outside the grid");
  const RVector x0 = model.points.row(spec.center).transpose();
  Potential v;
  v.p = spec.p;
  v.values.resize(n);
  switch (spec.kind) {
    case PotentialKind::SingleBump:
      require(spec.radius > 0.0, "bump radius must be positive");
      for (Index i = 0; i < n; ++i) v.values(i) = model.distance(i, x0) < spec.radius ? spec.height : 0.0;
      break;
    case PotentialKind::InversePower: {
      require(spec.gamma > 0.0, "inverse-power exponent must be positive");
      require(spec.gamma * spec.p < model.dimension, "inverse power is not integrable: need gamma p < n");
      const double cell = model.cell();
      for (Index i = 0; i < n; ++i) v.values(i) = spec.height * std::pow(std::max(model.distance(i, x0), cell), -spec.gamma);
      break;
    }
    case PotentialKind::Random: {
      std::mt19937_64 rng(spec.seed);
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      for (Index i = 0; i < n; ++i) v.values(i) = spec.height * u(rng);
      break;
    }
    case PotentialKind::Constant:
      v.values.setConstant(spec.height);
      break;
  }
  v.norm = lp_norm(v.values.cast<Complex>(), model.op->space(), spec.p);
  return v;
}

}  // namespace rlab
