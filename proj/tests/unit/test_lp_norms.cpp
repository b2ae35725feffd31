#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "rlab/error.hpp"
#include "rlab/exponents.hpp"
#include "rlab/linear_map.hpp"
#include "rlab/lp_norms.hpp"
#include "rlab/manifolds.hpp"

using namespace rlab;
using Catch::Approx;

namespace {

CVector vec(std::initializer_list<Complex> xs) {
  CVector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (auto x : xs) v(i++) = x;
  return v;
}

CMatrix random_matrix(Index rows, Index cols, std::mt19937_64& rng, bool complex) {
  std::normal_distribution<double> g;
  CMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = Complex(g(rng), complex ? g(rng) : 0.0);
  return m;
}

IterationConfig tight() {
  IterationConfig cfg;
  cfg.restarts = 12;
  cfg.max_iters = 4000;
  cfg.tolerance = 1e-15;
  return cfg;
}

}  // namespace

TEST_CASE("weighted L^p norms", "[lp-norms]") {
  CHECK(lp_norm(vec({1, 1}), RVector::Ones(2), 2) == Approx(std::sqrt(2.0)));
  CHECK(lp_norm(vec({3, -4}), RVector::Ones(2), kInf) == 4.0);
  CHECK(lp_norm(vec({1, 1}), RVector::Constant(2, 2.0), 1) == Approx(4.0));
  // homogeneity, including exponents large enough to overflow a naive sum
  const CVector v = vec({1e200, Complex(0, -3e200), 2e199});
  const RVector w = RVector::Constant(3, 0.7);
  for (double p : {1.0, 1.5, 4.0, 60.0, 400.0}) {
    const double n = lp_norm(v, w, p);
    CHECK(std::isfinite(n));
    CHECK(lp_norm(v * 1e-200, w, p) == Approx(n * 1e-200).epsilon(1e-12));
  }
  CHECK_THROWS_AS(lp_norm(vec({1}), RVector::Ones(1), 0.5), DomainError);
  CHECK(dual_exponent(4) == Approx(4.0 / 3.0));
  CHECK(std::isinf(dual_exponent(1)));
}

TEST_CASE("duality map", "[lp-norms]") {
  const CVector a = duality_map(vec({1, -1}), 2);
  CHECK((a - vec({1, -1})).norm() < 1e-15);
  const CVector b = duality_map(vec({2, 0}), 4);
  CHECK((b - vec({8, 0})).norm() < 1e-12);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const CVector v = random_matrix(7, 1, rng, true).col(0);
    RVector w(7);
    for (auto& x : w) x = u(rng);
    const FiniteMeasureSpace space(w);
    for (double p : {1.2, 2.0, 3.0, 7.5}) {
      const Complex pairing = space.inner(v, duality_map(v, p));
      CHECK(pairing.real() == Approx(std::pow(lp_norm(v, w, p), p)).epsilon(1e-12));
      CHECK(std::abs(pairing.imag()) < 1e-10 * std::abs(pairing.real()));
    }
  }
  CHECK_THROWS_AS(duality_map(vec({1}), 1.0), DomainError);
  CHECK_THROWS_AS(duality_map(vec({1}), kInf), DomainError);
  CHECK_THROWS_AS(duality_map(vec({0, 0}), 2.0), DomainError);
}

TEST_CASE("power iteration examples", "[lp-norms]") {
  const auto unit2 = FiniteMeasureSpace::uniform(2);
  const auto id = op_norm_power(LinearMap::dense(CMatrix::Identity(2, 2), unit2), 2, 2);
  CHECK(id.lower == Approx(1.0));
  CHECK(id.upper == Approx(1.0));

  // rank one u v^*: ||T||_{p->q} = ||u||_q ||v||_{p'}
  const CMatrix r1 = vec({1, 0}) * vec({1, 1}).adjoint();
  const auto rank_one = op_norm_power(LinearMap::dense(r1, unit2), 4.0 / 3.0, 4);
  CHECK(rank_one.lower == Approx(std::pow(2.0, 0.25)).epsilon(1e-9));

  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 2.0;
  CHECK(op_norm_power(LinearMap::dense(d, unit2), 2, 2).lower == Approx(2.0));
  CHECK_THROWS_AS(op_norm_power(LinearMap::dense(d, unit2), 2.5, 4), DomainError);
  CHECK_THROWS_AS(op_norm_power(LinearMap::dense(d, unit2), 4.0 / 3.0, 1.5), DomainError);
}

TEST_CASE("power iteration objective never decreases", "[lp-norms]") {
  const Model m = make_random(10, 8.0, 77);
  const LinearMap t = resolvent_sq(*m.op, ResolventQuery(3.0, 0.4));
  PowerTrace trace;
  op_norm_power(t, 1.25, 5.0, tight(), &trace);
  REQUIRE(!trace.objective.empty());
  for (const auto& seq : trace.objective) {
    for (std::size_t k = 1; k < seq.size(); ++k) CHECK(seq[k] >= seq[k - 1] * (1.0 - 1e-9));
  }
}

TEST_CASE("brute force oracle", "[lp-norms]") {
  const auto unit2 = FiniteMeasureSpace::uniform(2);
  for (double p : {1.5, 2.0, 4.0}) {
    const auto bf = op_norm_bruteforce(LinearMap::dense(CMatrix::Identity(2, 2), unit2), p, p);
    CHECK(std::abs(bf.value - 1.0) <= 1e-3);
  }
  const CMatrix r1 = vec({1, 0}) * vec({1, 1}).adjoint();
  const auto bf = op_norm_bruteforce(LinearMap::dense(r1, unit2), 4.0 / 3.0, 4);
  CHECK(std::abs(bf.value - std::pow(2.0, 0.25)) <= 1e-3);
  CHECK_THROWS_AS(op_norm_bruteforce(LinearMap::dense(CMatrix::Identity(4, 4), FiniteMeasureSpace::uniform(4)), 2, 4),
                  DomainError);
}

TEST_CASE("power iteration agrees with brute force on random small maps", "[lp-norms]") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = trial % 2 == 0 ? 2 : 3;
    const bool complex = n == 2 && trial % 4 == 0;
    RVector w(n);
    for (auto& x : w) x = u(rng);
    const LinearMap t = LinearMap::dense(random_matrix(n, n, rng, complex), FiniteMeasureSpace(w));
    const double p = trial % 3 == 0 ? 4.0 / 3.0 : 1.2;
    const double q = trial % 3 == 0 ? 4.0 : 6.0;
    const auto power = op_norm_power(t, p, q, tight());
    const auto bf = op_norm_bruteforce(t, p, q, 720);
    CHECK(power.lower <= bf.value + bf.error_bound + 1e-12);
    worst = std::max(worst, std::abs(power.lower - bf.value) / bf.value);
  }
  CHECK(worst <= 1e-3);
}

TEST_CASE("TT* identity on random models", "[lp-norms]") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10; ++i) {
    const Model m = make_random(10, 12.0, 500 + i);
    const double lambda = 2.0 + 8.0 * u(rng), mu = 0.25 + 2.0 * u(rng);
    const LinearMap t = multiplier(*m.op, [=](double tau) { return resolvent_symbol(tau, lambda, mu, 0.5); });
    for (double q : {4.0, 6.0}) {
      const double a = std::pow(op_norm(t, 2, q, tight()).mid(), 2);
      const double b = op_norm(compose(t, t.adjoint()), dual_exponent(q), q, tight()).mid();
      CHECK(std::abs(a - b) / a <= 1e-6);
    }
  }
}

TEST_CASE("duality of operator norms", "[lp-norms]") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  for (int trial = 0; trial < 10; ++trial) {
    RVector w(8);
    for (auto& x : w) x = u(rng);
    const LinearMap t = LinearMap::dense(random_matrix(8, 8, rng, trial % 2 == 1), FiniteMeasureSpace(w));
    const double p = 1.5, q = 5.0;
    const auto forward = op_norm_power(t, p, q, tight());
    const auto backward = op_norm_power(t.adjoint(), dual_exponent(q), dual_exponent(p), tight());
    CHECK(forward.mid() == Approx(backward.mid()).epsilon(1e-6));
  }
}

// Random starts alone do not reliably agree on these maps (observed spreads of
// several tens of percent); the point starts are what makes the value stable.
TEST_CASE("self-dual positive maps: point starts reach the factorized norm", "[lp-norms]") {
  for (int i = 0; i < 5; ++i) {
    const Model m = make_random(10, 10.0, 900 + i);
    auto symbol = [](double tau) { return 1.0 / (1.0 + std::pow(tau - 4.0, 2)); };
    const LinearMap t = multiplier(*m.op, [&](double tau) { return Complex(symbol(tau)); });
    const LinearMap root = multiplier(*m.op, [&](double tau) { return Complex(std::sqrt(symbol(tau))); });
    const double factorized = std::pow(op_norm(root, 2, 4, tight()).lower, 2);
    PowerTrace trace;
    const auto b = op_norm_power(t, 4.0 / 3.0, 4.0, tight(), &trace);
    CHECK(b.lower == Approx(factorized).epsilon(1e-6));
    double random_best = 0.0;
    for (std::size_t k = trace.objective.size() - 12; k < trace.objective.size(); ++k)
      random_best = std::max(random_best, trace.objective[k].back());
    CHECK(random_best <= b.lower);
  }
}

TEST_CASE("exact norms", "[lp-norms]") {
  const Model m = make_random(9, 7.0, 4);
  const LinearMap t = resolvent_sq(*m.op, ResolventQuery(2.0, 0.5));
  const CMatrix a = t.to_dense();
  const RVector w = m.op->space().weights();
  // 2 -> inf: max_x sqrt(sum_y |a_xy|^2 / w_y)
  double want = 0.0;
  for (Index x = 0; x < a.rows(); ++x) {
    double s = 0.0;
    for (Index y = 0; y < a.cols(); ++y) s += std::norm(a(x, y)) / w(y);
    want = std::max(want, std::sqrt(s));
  }
  CHECK(norm_2_to_inf(t) == Approx(want).epsilon(1e-12));
  CHECK(norm_2_to_inf(LinearMap::dense(a, m.op->space())) == Approx(want).epsilon(1e-12));
  double want1 = 0.0;
  for (Index x = 0; x < a.rows(); ++x)
    for (Index y = 0; y < a.cols(); ++y) want1 = std::max(want1, std::abs(a(x, y)) / w(y));
  CHECK(norm_1_to_inf(t) == Approx(want1).epsilon(1e-12));
  CHECK(op_norm(t, 2, kInf).method == "exact-2-inf");
}

TEST_CASE("composite norms", "[lp-norms]") {
  const auto unit3 = FiniteMeasureSpace::uniform(3);
  const LinearMap id = LinearMap::dense(CMatrix::Identity(3, 3), unit3);
  const auto simple = op_norm_composite(id, SpaceSpec::lebesgue(4.0 / 3.0), SpaceSpec::lebesgue(4));
  CHECK(simple.total.lower == Approx(op_norm_power(id, 4.0 / 3.0, 4).lower));
  const auto from_sum =
      op_norm_composite(id, SpaceSpec::sum({SpaceSpec::lebesgue(2), SpaceSpec::lebesgue(2)}), SpaceSpec::lebesgue(2));
  CHECK(from_sum.total.lower == Approx(1.0));
  CHECK(from_sum.total.upper == Approx(1.0));
  CHECK_THROWS_AS(op_norm_composite(id, SpaceSpec::lebesgue(2),
                                    SpaceSpec::sum({SpaceSpec::lebesgue(2), SpaceSpec::lebesgue(4)})),
                  DomainError);

  // X' -> X norm of a resolvent on a 3-eigenvalue model against the four component norms.
  RVector tau(3);
  tau << 1.0, 2.5, 4.0;
  RMatrix q_basis = Eigen::HouseholderQR<RMatrix>(RMatrix::Random(3, 3)).householderQ();
  const auto op = std::make_shared<SpectralOperator>(
      SpectralOperator::from_eigenpairs(unit3, tau, q_basis.cast<Complex>()));
  const double lambda = 2.0, q = 4.0, s = exponents::s_of_q(3, 4);
  const LinearMap r = resolvent_sq(*op, ResolventQuery(lambda, 1.0));
  const auto comp = op_norm_composite(r, x_dual_space(op, lambda, q, s), x_space(op, lambda, q, s), tight());

  const double src_s[2] = {-0.5, -s}, src_p[2] = {2.0, dual_exponent(q)};
  const double dst_s[2] = {0.5, s}, dst_p[2] = {2.0, q};
  double lower = 0.0, upper = 0.0;
  for (int a = 0; a < 2; ++a) {
    double row_sum = 0.0;
    for (int b = 0; b < 2; ++b) {
      // ||F_{s_b} R F_{-s_a}||_{p_a -> p_b} with the symbol composed by hand.
      const LinearMap direct = multiplier(*op, [&](double t) {
        return std::pow(lambda * lambda + t * t, 0.5 * (dst_s[b] - src_s[a])) * resolvent_symbol(t, lambda, 1.0, 1.0);
      });
      const NormBracket nb = op_norm(direct, src_p[a], dst_p[b], tight());
      CHECK(comp.components[a][b].lower == Approx(nb.lower).epsilon(1e-9));
      lower = std::max(lower, nb.lower);
      row_sum += nb.upper;
    }
    upper = std::max(upper, row_sum);
  }
  CHECK(comp.total.lower == Approx(lower).epsilon(1e-9));
  CHECK(comp.total.upper == Approx(upper).epsilon(1e-9));
  CHECK(comp.total.lower <= comp.total.upper);
}

TEST_CASE("deterministic seeding", "[lp-norms]") {
  const Model m = make_random(12, 9.0, 8);
  const LinearMap t = resolvent_sq(*m.op, ResolventQuery(4.0, 0.3));
  const auto a = op_norm_power(t, 1.3, 4.5);
  const auto b = op_norm_power(t, 1.3, 4.5);
  CHECK(a.lower == b.lower);
  CHECK(a.upper == b.upper);
}
