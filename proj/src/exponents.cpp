#include "rlab/exponents.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>

#include "rlab/error.hpp"

namespace rlab::exponents {

using detail::require;

namespace {

std::atomic<std::int64_t> g_sobolev_stand_in{100};

const Rational kHalf(1, 2);

void check_dimension(int n) { require(n >= 2, "dimension must be an integer >= 2"); }

void check_q(const Exponent& q) {
  require(q.is_infinite() || q.value() >= Rational(2), "exponent q must satisfy q >= 2");
}

}  // namespace

double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

// ---------------------------------------------------------------------------
// Exponent

Exponent::Exponent(std::int64_t num, std::int64_t den) : Exponent(Rational(num, den)) {}

Exponent::Exponent(const Rational& value) : value_(value) {
  require(value >= Rational(1), "Lebesgue exponent must be >= 1");
}

Exponent Exponent::infinity() {
  Exponent e;
  e.infinite_ = true;
  e.value_ = Rational(0);
  return e;
}

Exponent Exponent::from_reciprocal(const Rational& x) {
  require(x >= Rational(0) && x <= Rational(1), "reciprocal exponent must lie in [0, 1]");
  if (x == Rational(0)) return infinity();
  return Exponent(Rational(1) / x);
}

Exponent Exponent::approximate(double q, std::int64_t max_den) {
  if (std::isinf(q) && q > 0) return infinity();
  require(std::isfinite(q) && q >= 1.0, "exponent must lie in [1, inf]");
  // Convergents h/k of the continued fraction of q.
  std::int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double x = q;
  for (int i = 0; i < 40; ++i) {
    const double a = std::floor(x);
    const auto ai = static_cast<std::int64_t>(a);
    if (k1 * ai + k0 > max_den) break;
    const std::int64_t h2 = ai * h1 + h0, k2 = ai * k1 + k0;
    h0 = h1;
    h1 = h2;
    k0 = k1;
    k1 = k2;
    if (x - a < 1e-12) break;
    x = 1.0 / (x - a);
  }
  return Exponent(Rational(h1, k1));
}

const Rational& Exponent::value() const {
  if (infinite_) throw DomainError("exponent is infinite");
  return value_;
}

Rational Exponent::reciprocal() const { return infinite_ ? Rational(0) : Rational(1) / value_; }

Exponent Exponent::dual() const {
  if (infinite_) return Exponent(1);
  if (value_ == Rational(1)) return infinity();
  return from_reciprocal(Rational(1) - reciprocal());
}

double Exponent::to_double() const {
  return infinite_ ? std::numeric_limits<double>::infinity() : exponents::to_double(value_);
}

std::string Exponent::str() const {
  if (infinite_) return "inf";
  std::ostringstream os;
  os << value_.numerator();
  if (value_.denominator() != 1) os << '/' << value_.denominator();
  return os.str();
}

bool operator==(const Exponent& a, const Exponent& b) {
  return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
}

bool operator<(const Exponent& a, const Exponent& b) {
  return a.reciprocal() > b.reciprocal();
}

QExponent::QExponent(int n_, Exponent q_) : n(n_), q(q_) {
  check_dimension(n);
  check_q(q);
}

// ---------------------------------------------------------------------------

void set_sobolev_stand_in(std::int64_t value) {
  require(value > 2, "Sobolev stand-in must exceed 2");
  g_sobolev_stand_in.store(value);
}

std::int64_t sobolev_stand_in() { return g_sobolev_stand_in.load(); }

Rational sigma_exact(int n, const Exponent& q) {
  QExponent qe(n, q);
  const Rational gap = kHalf - q.reciprocal();
  const Rational upper = Rational(n) * gap - kHalf;
  const Rational lower = Rational(n - 1, 2) * gap;
  // Maximum, not minimum: only the maximum vanishes at q = 2 and equals 1/2 at 2n/(n-2).
  return std::max(upper, lower);
}

double sigma(int n, const Exponent& q) { return to_double(sigma_exact(n, q)); }

Exponent critical_q(int n) {
  check_dimension(n);
  return Exponent(Rational(2 * (n + 1), n - 1));
}

Exponent sobolev_q(int n) {
  check_dimension(n);
  if (n == 2) return Exponent(sobolev_stand_in());
  return Exponent(Rational(2 * n, n - 2));
}

Rational s_of_q_exact(int n, const Exponent& q) {
  QExponent qe(n, q);
  require(q >= critical_q(n) && q <= sobolev_q(n), "s(q) requires q_n <= q <= 2*");
  const Rational s = Rational(1) - Rational(n) * (kHalf - q.reciprocal());
  if (s != kHalf - sigma_exact(n, q)) throw NumericalError("s(q) and 1/2 - sigma(q) disagree");
  return s;
}

double s_of_q(int n, const Exponent& q) { return to_double(s_of_q_exact(n, q)); }

// ---------------------------------------------------------------------------
// ExponentProfile

ExponentProfile::ExponentProfile(std::vector<Breakpoint> breakpoints, double log_power,
                                 std::string label)
    : breakpoints_(std::move(breakpoints)), log_power_(log_power), label_(std::move(label)) {
  require(!breakpoints_.empty(), "profile needs at least one breakpoint");
  for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
    require(breakpoints_[i].inv_q < breakpoints_[i - 1].inv_q,
            "profile breakpoints must be strictly decreasing in 1/q");
  }
}

bool ExponentProfile::in_domain(const Exponent& q) const {
  const Rational x = q.reciprocal();
  return x <= breakpoints_.front().inv_q && x >= breakpoints_.back().inv_q;
}

double ExponentProfile::operator()(const Exponent& q) const {
  require(in_domain(q), "exponent " + q.str() + " outside the domain of profile " + label_);
  const Rational x = q.reciprocal();
  for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
    if (breakpoints_[i].inv_q == x) return breakpoints_[i].value;
    if (i + 1 < breakpoints_.size() && breakpoints_[i + 1].inv_q < x) {
      const auto& a = breakpoints_[i];
      const auto& b = breakpoints_[i + 1];
      const double t = to_double((a.inv_q - x) / (a.inv_q - b.inv_q));
      return a.value + t * (b.value - a.value);
    }
  }
  throw NumericalError("profile lookup fell through");
}

// ---------------------------------------------------------------------------
// Catalogs

Catalog parse_catalog(const std::string& key) {
  if (key == "smooth") return Catalog::Smooth;
  if (key == "Cs" || key == "cs") return Catalog::Cs;
  if (key == "boundary-smith-sogge") return Catalog::BoundarySmithSogge;
  if (key == "boundary-concave") return Catalog::BoundaryConcave;
  if (key == "improved-log") return Catalog::ImprovedLog;
  throw DomainError("unknown exponent catalog key '" + key + "'");
}

std::string catalog_key(Catalog c) {
  switch (c) {
    case Catalog::Smooth: return "smooth";
    case Catalog::Cs: return "Cs";
    case Catalog::BoundarySmithSogge: return "boundary-smith-sogge";
    case Catalog::BoundaryConcave: return "boundary-concave";
    case Catalog::ImprovedLog: return "improved-log";
  }
  return "unknown";
}

namespace {

std::vector<Breakpoint> sigma_breakpoints(int n, const Rational& x_min) {
  std::vector<Breakpoint> bps;
  for (const Rational& x : {kHalf, critical_q(n).reciprocal(), x_min}) {
    if (!bps.empty() && !(x < bps.back().inv_q)) continue;
    bps.push_back({x, sigma(n, Exponent::from_reciprocal(x))});
  }
  return bps;
}

}  // namespace

ExponentProfile gamma_catalog(Catalog setting, int n, std::optional<double> s) {
  check_dimension(n);
  const Rational inv_sobolev = sobolev_q(n).reciprocal();
  switch (setting) {
    case Catalog::Smooth:
      return ExponentProfile(sigma_breakpoints(n, Rational(0)), 0.0, "smooth");
    case Catalog::Cs: {
      require(s.has_value(), "Cs catalog requires the regularity s");
      require(*s >= 0.0 && *s <= 2.0, "metric regularity s must lie in [0, 2]");
      const double rho = rho_of_s(*s);
      auto bps = sigma_breakpoints(n, Rational(0));
      for (auto& bp : bps) bp.value += to_double(bp.inv_q) * rho;
      ExponentProfile profile(std::move(bps), 0.0, "Cs");
      profile.metadata()["s"] = std::to_string(*s);
      if (n >= 3 && *s >= 1.0) {
        const double qs = (2.0 * n * (*s + 2.0) + *s - 2.0) / ((n - 2.0) * (*s + 2.0));
        profile.metadata()["q_max"] = std::to_string(qs);
      }
      return profile;
    }
    case Catalog::BoundarySmithSogge: {
      // (4/3) sigma on [2, q_n]; sigma + (1/3)(1/q - eps(q))_+ on [q_n, 2*],
      // eps(q) = (n-1)(1/2-1/q) - 2/q. Both pieces agree at q_n.
      auto gamma = [n](const Rational& x) {
        const Exponent q = Exponent::from_reciprocal(x);
        const Rational sig = sigma_exact(n, q);
        if (x >= critical_q(n).reciprocal()) return to_double(Rational(4, 3) * sig);
        const Rational eps = Rational(n - 1) * (kHalf - x) - Rational(2) * x;
        const Rational loss = std::max(Rational(0), x - eps);
        return to_double(sig + loss / Rational(3));
      };
      std::vector<Breakpoint> bps;
      const Rational perfect_from(n - 1, 2 * (n + 2));
      for (const Rational& x : {kHalf, critical_q(n).reciprocal(), perfect_from, inv_sobolev}) {
        if (x < inv_sobolev) continue;
        if (!bps.empty() && !(x < bps.back().inv_q)) continue;
        bps.push_back({x, gamma(x)});
      }
      return ExponentProfile(std::move(bps), 0.0, "boundary-smith-sogge");
    }
    case Catalog::BoundaryConcave:
      return ExponentProfile(sigma_breakpoints(n, inv_sobolev), 1.0, "boundary-concave");
    case Catalog::ImprovedLog: {
      std::vector<Breakpoint> bps;
      for (const Rational& x : {critical_q(n).reciprocal(), inv_sobolev}) {
        bps.push_back({x, sigma(n, Exponent::from_reciprocal(x))});
      }
      ExponentProfile profile(std::move(bps), 0.0, "improved-log");
      profile.metadata()["epsilon_schedule"] = "1/ln<lambda>";
      profile.metadata()["q_range"] = "q_n < q <= 2*";
      return profile;
    }
  }
  throw DomainError("unknown catalog");
}

double rho_of_s(double s) {
  require(s >= 0.0 && s <= 2.0, "metric regularity s must lie in [0, 2]");
  return (2.0 - s) / (2.0 + s);
}

bool region_contains(double lambda, double mu, const SpectralRegion& region) {
  require(region.rho >= 0.0 && region.rho <= 1.0, "region exponent rho must lie in [0, 1]");
  require(region.constant > 0.0, "region constant must be positive");
  return lambda >= region.lambda_min && std::abs(mu) <= region.constant * std::pow(lambda, region.rho);
}

double interpolate_with_trivial(int n, const Exponent& q1, double e1, const Exponent& q) {
  QExponent a(n, q1), b(n, q);
  require(q <= q1, "interpolation requires 2 <= q <= q1");
  if (q1.reciprocal() == kHalf) return e1;
  const double t = to_double((kHalf - q.reciprocal()) / (kHalf - q1.reciprocal()));
  return -1.0 + t * (e1 + 1.0);
}

double embed_up(int n, const Exponent& q1, double e1, const Exponent& q2) {
  QExponent a(n, q1), b(n, q2);
  require(critical_q(n) <= q1 && q1 <= q2 && q2 <= sobolev_q(n),
          "Sobolev embedding requires q_n <= q1 <= q2 <= 2*");
  return e1 + to_double(Rational(2 * n) * (q1.reciprocal() - q2.reciprocal()));
}

}  // namespace rlab::exponents
