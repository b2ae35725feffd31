#pragma once

// Exponent algebra for spectral cluster and resolvent estimates.
//
// Lebesgue exponents are stored exactly as rationals (with an infinity
// sentinel) so that breakpoints of piecewise-linear profiles in 1/q match
// exactly. Conversion to floating point happens only when a profile value is
// returned.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <boost/rational.hpp>

namespace rlab::exponents {

using Rational = boost::rational<std::int64_t>;

double to_double(const Rational& r);

/// A Lebesgue exponent q in [1, inf].
class Exponent {
 public:
  Exponent(std::int64_t num, std::int64_t den = 1);  // NOLINT(google-explicit-constructor)
  explicit Exponent(const Rational& value);

  static Exponent infinity();
  /// The exponent with 1/q = x; x = 0 gives infinity.
  static Exponent from_reciprocal(const Rational& x);
  /// Closest rational with denominator <= max_den (continued fractions); inf maps to infinity.
  static Exponent approximate(double q, std::int64_t max_den = 1000);

  bool is_infinite() const { return infinite_; }
  /// Throws DomainError when infinite.
  const Rational& value() const;
  /// 1/q, zero for q = inf.
  Rational reciprocal() const;
  /// Dual exponent q' with 1/q + 1/q' = 1.
  Exponent dual() const;
  double to_double() const;
  std::string str() const;

  friend bool operator==(const Exponent& a, const Exponent& b);
  friend bool operator<(const Exponent& a, const Exponent& b);
  friend bool operator<=(const Exponent& a, const Exponent& b) { return !(b < a); }
  friend bool operator>(const Exponent& a, const Exponent& b) { return b < a; }
  friend bool operator>=(const Exponent& a, const Exponent& b) { return !(a < b); }

 private:
  Exponent() = default;
  Rational value_{1};
  bool infinite_ = false;
};

/// A dimension/exponent pair with the invariants checked on construction.
struct QExponent {
  QExponent(int n, Exponent q);
  int n;
  Exponent q;
};

/// Stand-in for the Sobolev exponent in dimension two (default 100).
void set_sobolev_stand_in(std::int64_t value);
std::int64_t sobolev_stand_in();

/// sigma(q) as an exact rational (pointwise maximum of the two branches).
Rational sigma_exact(int n, const Exponent& q);
double sigma(int n, const Exponent& q);

/// q_n = 2(n+1)/(n-1).
Exponent critical_q(int n);
/// 2n/(n-2) for n >= 3; the configured stand-in for n = 2.
Exponent sobolev_q(int n);

/// Flattened Sobolev index s(q) = 1 - n(1/2 - 1/q) on [q_n, 2*].
Rational s_of_q_exact(int n, const Exponent& q);
double s_of_q(int n, const Exponent& q);

struct Breakpoint {
  Rational inv_q;
  double value;
};

/// Piecewise-linear function of 1/q, optionally multiplied by ln^nu<lambda>.
class ExponentProfile {
 public:
  ExponentProfile(std::vector<Breakpoint> breakpoints, double log_power, std::string label);

  double operator()(const Exponent& q) const;
  bool in_domain(const Exponent& q) const;

  const std::vector<Breakpoint>& breakpoints() const { return breakpoints_; }
  double log_power() const { return log_power_; }
  const std::string& label() const { return label_; }
  std::map<std::string, std::string>& metadata() { return metadata_; }
  const std::map<std::string, std::string>& metadata() const { return metadata_; }

 private:
  std::vector<Breakpoint> breakpoints_;  // strictly decreasing in inv_q
  double log_power_;
  std::string label_;
  std::map<std::string, std::string> metadata_;
};

enum class Catalog {
  Smooth,              // gamma = sigma
  Cs,                  // gamma = sigma + (1/q)(2-s)/(2+s)
  BoundarySmithSogge,  // (4/3)sigma below q_n, sigma + loss above
  BoundaryConcave,     // gamma = sigma with one logarithm
  ImprovedLog,         // gamma = sigma on (q_n, 2*], window eps(lambda) = 1/ln<lambda>
};

Catalog parse_catalog(const std::string& key);
std::string catalog_key(Catalog c);

ExponentProfile gamma_catalog(Catalog setting, int n, std::optional<double> s = std::nullopt);

/// rho(s) = (2-s)/(2+s).
double rho_of_s(double s);

struct SpectralRegion {
  double rho = 0.0;
  double constant = 1.0;
  double lambda_min = 1.0;
};

/// True iff lambda >= lambda_min and |mu| <= C lambda^rho.
bool region_contains(double lambda, double mu, const SpectralRegion& region);

/// Linear interpolation in 1/q between (1/2, -1) and (1/q1, e1).
double interpolate_with_trivial(int n, const Exponent& q1, double e1, const Exponent& q);

/// Sobolev embedding transfer e1 + 2n(1/q1 - 1/q2), q_n <= q1 <= q2 <= 2*.
double embed_up(int n, const Exponent& q1, double e1, const Exponent& q2);

}  // namespace rlab::exponents
