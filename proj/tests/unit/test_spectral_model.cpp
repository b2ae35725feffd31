#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "rlab/error.hpp"
#include "rlab/linear_map.hpp"
#include "rlab/lp_norms.hpp"
#include "rlab/manifolds.hpp"
#include "rlab/spectral_model.hpp"

using namespace rlab;
using Catch::Approx;

namespace {

// Diagonal model: unit point masses, standard basis, given eigenvalues.
SpectralOperator diagonal_op(std::initializer_list<double> taus) {
  RVector tau(static_cast<Index>(taus.size()));
  Index i = 0;
  for (double t : taus) tau(i++) = t;
  return SpectralOperator::from_eigenpairs(FiniteMeasureSpace::uniform(tau.size()), tau,
                                           CMatrix::Identity(tau.size(), tau.size()));
}

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

CVector random_vector(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  CVector v(n);
  for (auto& x : v) x = Complex(g(rng), g(rng));
  return v;
}

}  // namespace

TEST_CASE("measure spaces validate their weights", "[spectral-model]") {
  RVector w(3);
  w << 1.0, 0.0, 2.0;
  CHECK_THROWS_AS(FiniteMeasureSpace(w), DomainError);
  const auto s = FiniteMeasureSpace::uniform(4, 0.5);
  CHECK(s.total_mass() == Approx(2.0));
  CVector u = CVector::Ones(4);
  CHECK(s.inner(u, u).real() == Approx(2.0));
}

TEST_CASE("projector examples", "[spectral-model]") {
  const auto op = diagonal_op({1, 2, 3});
  CMatrix expected = CMatrix::Zero(3, 3);
  expected(1, 1) = 1.0;
  CHECK(max_abs(project(op, {1.5, 2.5}).to_dense() - expected) < 1e-15);
  CHECK(max_abs(project(op, {0.0, 10.0}).to_dense() - CMatrix::Identity(3, 3)) < 1e-15);
  CHECK(max_abs(project(op, {5.0, 6.0}).to_dense()) == 0.0);
  // closed windows include their endpoints
  CMatrix upper = CMatrix::Identity(3, 3);
  upper(0, 0) = 0.0;
  CHECK(max_abs(project(op, {2.0, 3.0}).to_dense() - upper) < 1e-15);
  CHECK_THROWS_AS(SpectralWindow(2.0, 2.0), DomainError);
}

TEST_CASE("projector algebra on random operators", "[spectral-model]") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Model m = make_random(12, 10.0, seed);
    const auto& op = *m.op;
    const SpectralWindow w1(1.0, 6.0), w2(4.0, 9.0), both(4.0, 6.0);
    const CMatrix p1 = project(op, w1).to_dense();
    const CMatrix p2 = project(op, w2).to_dense();
    const CMatrix p12 = project(op, both).to_dense();
    CHECK(max_abs(p1 * p2 - p12) < 1e-10);
    CHECK(max_abs(p1 * p1 - p1) < 1e-10);
    // weighted self-adjointness: W P = (W P)^H
    const CMatrix wp = op.space().weights().asDiagonal() * p1;
    CHECK(max_abs(wp - wp.adjoint()) < 1e-10);
  }
}

TEST_CASE("multiplier examples and composition law", "[spectral-model]") {
  const auto op = diagonal_op({1, 2});
  CHECK(max_abs(multiplier(op, [](double) { return Complex(1.0); }).to_dense() - CMatrix::Identity(2, 2)) < 1e-15);
  const CMatrix sq = multiplier(op, [](double t) { return Complex(t * t); }).to_dense();
  CHECK(sq(0, 0).real() == Approx(1.0));
  CHECK(sq(1, 1).real() == Approx(4.0));
  CHECK_THROWS_AS(multiplier(op, [](double t) { return Complex(1.0 / (t - 1.0)); }), DomainError);

  const Model m = make_random(10, 8.0, 17);
  auto f = [](double t) { return Complex(std::cos(t), t); };
  auto g = [](double t) { return Complex(1.0 / (1.0 + t), -0.5); };
  const LinearMap fg = compose(multiplier(*m.op, f), multiplier(*m.op, g));
  REQUIRE(fg.spectral_multiplier() != nullptr);
  const LinearMap direct = multiplier(*m.op, [&](double t) { return f(t) * g(t); });
  CHECK(*fg.spectral_multiplier() == *direct.spectral_multiplier());
  // the indicator multiplier is the projector
  const SpectralWindow w(2.0, 5.0);
  const CMatrix ind = multiplier(*m.op, [&](double t) { return Complex(w.contains(t) ? 1.0 : 0.0); }).to_dense();
  CHECK(max_abs(ind - project(*m.op, w).to_dense()) < 1e-12);
}

TEST_CASE("resolvent examples", "[spectral-model]") {
  CHECK(std::abs(resolvent_symbol(2, 1, 1, 1) - Complex(0.2, 0.1)) < 1e-15);
  CHECK(std::abs(resolvent_symbol(0, 1, 1, 1) - Complex(0.0, 0.5)) < 1e-15);
  CHECK(std::abs(resolvent_symbol(2, 1, 1, 2) - Complex(0.03, 0.04)) < 1e-15);
  CHECK(im_resolvent_symbol(2, 1, 1) == Approx(0.1));
  CHECK(im_resolvent_symbol(10, 10, 1) == Approx(20.0 / 401.0));
  CHECK_THROWS_AS(ResolventQuery(1.0, 0.0), DomainError);
  const CMatrix r = resolvent_sq(diagonal_op({2}), ResolventQuery(1.0, 1.0)).to_dense();
  CHECK(std::abs(r(0, 0) - Complex(0.2, 0.1)) < 1e-15);
}

TEST_CASE("resolvent identity and positivity on random operators", "[spectral-model]") {
  const Model m = make_random(15, 12.0, 5);
  const auto& op = *m.op;
  for (double lambda : {1.0, 4.0, 9.5}) {
    for (double mu : {0.1, 1.0, 3.0}) {
      const ResolventQuery query(lambda, mu);
      const CMatrix r = resolvent_sq(op, query).to_dense();
      const CMatrix a2 = multiplier(op, [](double t) { return Complex(t * t); }).to_dense();
      const Complex z = query.z() * query.z();
      const CMatrix id = CMatrix::Identity(op.size(), op.size());
      CHECK(max_abs((a2 - z * id) * r - id) < 1e-9);
      const CVector im = op.eigen_action([&](double t) { return Complex(im_resolvent_symbol(t, lambda, mu)); });
      CHECK(im.real().minCoeff() > 0.0);
    }
  }
}

TEST_CASE("resolvent with a spectral cutoff", "[spectral-model]") {
  const auto op = diagonal_op({1, 2, 5});
  const CMatrix r = resolvent_sq(op, ResolventQuery(2.0, 1.0, 1.0, SpectralWindow(0.0, 4.0))).to_dense();
  CHECK(r(2, 2) == Complex(0.0));
  CHECK(std::abs(r(0, 0) - resolvent_symbol(1, 2, 1, 1)) < 1e-15);
}

TEST_CASE("spectral theorem: 2 -> 2 norm of a multiplier is the sup of its symbol", "[spectral-model]") {
  const Model m = make_random(12, 9.0, 23);
  auto f = [](double t) { return Complex(std::sin(t), 0.3 * t); };
  const CVector act = m.op->eigen_action(f);
  CHECK(norm_2_to_2(multiplier(*m.op, f)) == Approx(act.cwiseAbs().maxCoeff()).epsilon(1e-12));
}

TEST_CASE("cosine-transform resolvent", "[spectral-model]") {
  const CosineQuadrature quad;
  CHECK(std::abs(cosine_resolvent_symbol(2, 1, 1, quad, 2) - Complex(-0.2, -0.1)) < 1e-9);
  CHECK(std::abs(cosine_resolvent_symbol(0, 1, 1, quad, 2) - Complex(0.0, -0.5)) < 1e-9);
  const Complex exact = 1.0 / (std::pow(Complex(4.0, 0.5), 2) - 25.0);
  CHECK(std::abs(cosine_resolvent_symbol(5, 4, 0.5, quad, 5) - exact) / std::abs(exact) < 1e-6);

  // agrees with the resolvent under Delta = -A^2 for all eigenvalues <= 2 lambda
  const Model m = make_random(10, 8.0, 3);
  const double lambda = 4.0, eps = 0.5;
  const CVector c = *cosine_resolvent(*m.op, lambda, eps).spectral_multiplier();
  const auto& tau = m.op->eigenvalues();
  for (Index i = 0; i < tau.size(); ++i) {
    if (tau(i) > 2.0 * lambda) continue;
    const Complex want = -resolvent_symbol(tau(i), lambda, eps, 1.0);
    CHECK(std::abs(c(i) - want) <= 1e-6 * std::abs(want));
  }

  CosineQuadrature short_quad;
  short_quad.truncation = 2.0;
  CHECK_THROWS_AS(cosine_resolvent_symbol(1, 1, 1, short_quad, 1), DomainError);
  CHECK_THROWS_AS(cosine_resolvent_symbol(1, 1, 0.0, quad, 1), DomainError);
}

TEST_CASE("flattened Sobolev weights", "[spectral-model]") {
  const auto op = diagonal_op({3, 7});
  CHECK(max_abs(flattened_sobolev(op, 4, 0).to_dense() - CMatrix::Identity(2, 2)) < 1e-15);
  CHECK(flattened_sobolev(op, 4, 1).to_dense()(0, 0).real() == Approx(5.0));
  const Model m = make_random(10, 8.0, 9);
  const CMatrix id = compose(flattened_sobolev(*m.op, 3, -1), flattened_sobolev(*m.op, 3, 1)).to_dense();
  CHECK(max_abs(id - CMatrix::Identity(10, 10)) < 1e-12);
}

TEST_CASE("fractional powers", "[spectral-model]") {
  const auto op = diagonal_op({1, 2, 3});
  const RVector sq = fractional_power(op, 2).eigenvalues();
  CHECK(sq(0) == Approx(1.0));
  CHECK(sq(1) == Approx(4.0));
  CHECK(sq(2) == Approx(9.0));
  CHECK((fractional_power(op, 1).eigenvalues() - op.eigenvalues()).norm() == 0.0);
  const RVector back = fractional_power(fractional_power(op, 0.7), 1.0 / 0.7).eigenvalues();
  CHECK((back - op.eigenvalues()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(fractional_power(op, 0.0), DomainError);
}

TEST_CASE("operators from matrices and eigenpairs", "[spectral-model]") {
  const Model m = make_random(14, 10.0, 31);
  const auto* dense = dynamic_cast<const DenseBasis*>(m.op->basis().get());
  REQUIRE(dense != nullptr);
  CHECK(dense->orthonormality_residual() < 1e-10);
  const auto& tau = m.op->eigenvalues();
  for (Index i = 1; i < tau.size(); ++i) CHECK(tau(i) >= tau(i - 1));

  // rebuild from the weighted matrix of A^2
  const CMatrix a2 = multiplier(*m.op, [](double t) { return Complex(t * t); }).to_dense();
  const auto rebuilt = SpectralOperator::from_weighted_square(m.op->space(), a2);
  CHECK((rebuilt.eigenvalues() - tau).cwiseAbs().maxCoeff() < 1e-9);

  CMatrix bad = CMatrix::Identity(3, 3);
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(SpectralOperator::from_eigenpairs(FiniteMeasureSpace::uniform(3), RVector::Ones(3), bad),
                  std::exception);
}

TEST_CASE("linear maps: adjoints are weighted", "[spectral-model]") {
  const Model m = make_random(9, 6.0, 41);
  const auto& space = m.op->space();
  const LinearMap t = resolvent_sq(*m.op, ResolventQuery(2.0, 0.5));
  const CVector x = random_vector(9, 1), y = random_vector(9, 2);
  CHECK(std::abs(space.inner(t.apply(x), y) - space.inner(x, t.apply_adjoint(y))) < 1e-12);
  const LinearMap d = LinearMap::dense(random_vector(9, 3) * random_vector(9, 4).transpose(), space);
  CHECK(std::abs(space.inner(d.apply(x), y) - space.inner(x, d.adjoint().apply(y))) < 1e-10);
  CHECK(max_abs(add(t, d).to_dense() - (t.to_dense() + d.to_dense())) < 1e-12);
}
