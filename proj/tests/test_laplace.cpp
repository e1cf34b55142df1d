#include "doctest.h"

#include "cliffsemi/errors.hpp"
#include "cliffsemi/laplace.hpp"
#include "support.hpp"

#include <cmath>
#include <vector>

using namespace cliffsemi;
using cliffsemi::test::dist;
using cliffsemi::test::rel_dist;
using cliffsemi::test::scalar_op;
using cliffsemi::test::scalar_semigroup;

namespace {

ConeElement real_cone(int n, double a) { return ConeElement::from_slice(a, 0.0, CliffordElement::generator(n, 1)); }

}  // namespace

TEST_CASE("gauss-legendre rule integrates polynomials of degree 2N-1") {
  std::vector<double> x, w;
  gauss_legendre(16, x, w);
  for (int k = 0; k <= 31; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * std::pow(x[i], k);
    const double exact = (k % 2 == 0) ? 2.0 / (k + 1) : 0.0;
    CHECK(s == doctest::Approx(exact).epsilon(1e-14));
  }
}

TEST_CASE("tail bound certifies truncation") {
  // |t e^{-t}| <= (1 + t) e^{-t}: tail of int_T^inf (1 + t) e^{-(1-omega) t} dt
  const Envelope env{1.0, 1, 1.0};
  const double omega = -0.5;
  const double c = 1.5;
  for (double T : {0.0, 1.0, 7.5, 30.0}) {
    const double exact = std::exp(-c * T) * ((T / c + 1.0 / (c * c)) + 1.0 / c);
    CHECK(tail_bound(env, omega, 1.0, T) == doctest::Approx(exact).epsilon(1e-12));
  }
  const double T = truncation_point(env, omega, 2.0, 1e-10);
  CHECK(tail_bound(env, omega, 2.0, T) <= 1e-10);
  CHECK(tail_bound(env, omega, 2.0, 0.99 * T) > 1e-10);
}

TEST_CASE("lap_apply scalar examples") {
  Rng rng(3);
  const auto x = CliffordVector::random(2, 2, rng);
  SUBCASE("A = 0, k = e^{-t}") {
    const auto s = scalar_semigroup(2, 2, 0.0);
    const auto r = lap_apply(s, ExpPolyKernel::exponential(1.0), x);
    CHECK(dist(r.value, x) <= 1e-10);
    CHECK(r.err_est <= 1e-10);
    CHECK(r.t_max > 0.0);
    CHECK(r.nodes > 0);
  }
  SUBCASE("A = 0, k = g_P for (x-1)(x-2)") {
    const auto s = scalar_semigroup(2, 2, 0.0);
    const auto g = build_gP(RealPolynomial({2.0, -3.0, 1.0})).g;
    CHECK(dist(lap_apply(s, g, x).value, 0.5 * x) <= 1e-10);
  }
  SUBCASE("A = -Id, k = e^{-t}") {
    const auto s = scalar_semigroup(2, 2, -1.0);
    CHECK(dist(lap_apply(s, ExpPolyKernel::exponential(1.0), x).value, 0.5 * x) <= 1e-10);
  }
  SUBCASE("growth bound from the generator itself") {
    const SemigroupEvaluator s(scalar_op(2, 2, -1.0));
    CHECK(s.omega() == doctest::Approx(-0.99));
    CHECK(s.M() == doctest::Approx(1.05));
    CHECK(dist(lap_apply(s, ExpPolyKernel::exponential(1.0), x).value, 0.5 * x) <= 1e-10);
  }
}

TEST_CASE("lap_apply rejects divergent kernels") {
  const auto s = scalar_semigroup(1, 1, 0.0);
  const auto x = CliffordVector::basis(1, 1, 0, 0);
  CHECK_THROWS_AS(lap_apply(s, ExpPolyKernel::exponential(0.005), x), DivergenceError);
  CHECK_THROWS_AS(lap_apply(s, ExpPolyKernel::exponential(-1.0), x), DivergenceError);
}

TEST_CASE("lap_operator") {
  SUBCASE("zero kernel") {
    const auto s = scalar_semigroup(2, 2, 0.0);
    CHECK(upper_norm(lap_operator(s, ExpPolyKernel{})) == 0.0);
  }
  SUBCASE("A = 0, t e^{-t} gives Id") {
    const auto s = scalar_semigroup(3, 2, 0.0);
    const auto g = build_gq(real_cone(3, 1.0));
    CHECK(dist(lap_operator(s, g), CliffordMatrixOperator::identity(3, 2)) <= 1e-10);
  }
  SUBCASE("agrees with lap_apply and is right linear") {
    Rng rng(11);
    const SemigroupEvaluator s(random_stable_operator(2, 2, 0.5, rng));
    const auto k = CliffordKernel::exp_minus(random_cone_element(2, 1.0, 0.7, rng));
    const auto op = lap_operator(s, k);
    for (int trial = 0; trial < 4; ++trial) {
      const auto x = CliffordVector::random(2, 2, rng);
      const auto q = random_element(2, rng);
      CHECK(dist(op.apply(x), lap_apply(s, k, x).value) <= 1e-9);
      CHECK(dist(op.apply(x * q), op.apply(x) * q) <= 1e-12);
    }
  }
}

TEST_CASE("p_inverse_via_laplace") {
  SUBCASE("A = -Id, P = x^2 - 3x + 2") {
    const auto s = scalar_semigroup(2, 1, -1.0);
    const auto r = p_inverse_via_laplace(s, RealPolynomial({2.0, -3.0, 1.0}));
    CHECK(dist(r.value, scalar_op(2, 1, 1.0 / 6.0)) <= 1e-10);
  }
  SUBCASE("A = -Id, P = x^2 + 1") {
    const auto s = scalar_semigroup(2, 1, -1.0);
    CHECK(dist(p_inverse_via_laplace(s, RealPolynomial({1.0, 0.0, 1.0})).value, scalar_op(2, 1, 0.5)) <= 1e-10);
  }
  SUBCASE("random quaternionic generator against the direct inverse") {
    Rng rng(5);
    const auto a = random_stable_operator(2, 2, 0.5, rng);
    const SemigroupEvaluator s(a);
    const std::vector<cplx> rts{{0.2, 1.5}, {0.2, -1.5}, {1.0, 0.0}};
    const auto p = RealPolynomial::from_roots(rts, 2.0);
    const auto x = p_inverse_via_laplace(s, p).value;
    const auto pa = poly_of_operator(p, a);
    CHECK(rel_dist(x, direct_inverse(pa)) <= 1e-8);
    CHECK(dist(pa * x, CliffordMatrixOperator::identity(2, 2)) <= 1e-8);
  }
  SUBCASE("hypothesis violated") {
    const auto s = scalar_semigroup(2, 1, 1.5);
    CHECK_THROWS_AS(p_inverse_via_laplace(s, RealPolynomial({2.0, -3.0, 1.0})), HypothesisError);
    const auto tight = scalar_semigroup(1, 1, 0.9995 - kGrowthSafety);
    CHECK_THROWS_AS(p_inverse_via_laplace(tight, RealPolynomial({2.0, -3.0, 1.0})), HypothesisError);
  }
}

TEST_CASE("combo_via_laplace") {
  Rng rng(17);
  const auto a = random_stable_operator(2, 2, 0.5, rng);
  const SemigroupEvaluator s(a);
  const std::vector<cplx> rts{{0.3, 0.0}, {0.8, 2.0}, {0.8, -2.0}};
  const auto p = RealPolynomial::from_roots(rts, -1.5);
  const auto inv = direct_inverse(poly_of_operator(p, a));

  SUBCASE("all zero") {
    const std::vector<CliffordElement> z(3, CliffordElement(2));
    CHECK(upper_norm(combo_via_laplace(s, p, z).value) == 0.0);
  }
  SUBCASE("p0 = 1 gives the inverse") {
    const std::vector<CliffordElement> c{CliffordElement::scalar(2, 1.0)};
    CHECK(rel_dist(combo_via_laplace(s, p, c).value, p_inverse_via_laplace(s, p).value) <= 1e-9);
  }
  SUBCASE("random constants against sum_j A^j P(A)^{-1} p_j") {
    std::vector<CliffordElement> c;
    CliffordMatrixOperator oracle = CliffordMatrixOperator::zero(2, 2);
    CliffordMatrixOperator aj = CliffordMatrixOperator::identity(2, 2);
    for (int j = 0; j < 3; ++j) {
      c.push_back(random_element(2, rng));
      oracle = oracle + aj * inv.right_factor(c.back());
      aj = aj * a;
    }
    CHECK(rel_dist(combo_via_laplace(s, p, c).value, oracle) <= 1e-8);
  }
  SUBCASE("too many constants") {
    const std::vector<CliffordElement> c(4, CliffordElement::scalar(2, 1.0));
    CHECK_THROWS_AS(combo_via_laplace(s, p, c), ConfigError);
  }
  SUBCASE("Delta_q with p0 = q^c, p1 = -1 reproduces C_q") {
    const auto q = random_cone_element(2, 1.2, 0.9, rng);
    const std::vector<CliffordElement> c{conjugate(q.element()), CliffordElement::scalar(2, -1.0)};
    CHECK(rel_dist(combo_via_laplace(s, RealPolynomial::delta(q), c).value, resolvent(s, q).value) <= 1e-9);
  }
}

TEST_CASE("spherical quasi-resolvent and resolvent: scalar anchors") {
  SUBCASE("A = 0, q = 1") {
    const auto s = scalar_semigroup(2, 1, 0.0);
    const auto q = real_cone(2, 1.0);
    CHECK(dist(quasi_resolvent(s, q).value, scalar_op(2, 1, 1.0)) <= 1e-10);
    CHECK(dist(resolvent(s, q).value, scalar_op(2, 1, 1.0)) <= 1e-10);
    CHECK(upper_norm(a_quasi_resolvent(s, q).value) <= 1e-10);
  }
  SUBCASE("A = -Id, q = e1") {
    const auto s = scalar_semigroup(2, 1, -1.0);
    const auto q = ConeElement::from_slice(0.0, 1.0, CliffordElement::generator(2, 1));
    CHECK(dist(quasi_resolvent(s, q).value, scalar_op(2, 1, 0.5)) <= 1e-10);
  }
  SUBCASE("A = -Id, q = 1") {
    const auto s = scalar_semigroup(2, 1, -1.0);
    const auto q = real_cone(2, 1.0);
    CHECK(dist(quasi_resolvent(s, q).value, scalar_op(2, 1, 0.25)) <= 1e-10);
    CHECK(dist(resolvent(s, q).value, scalar_op(2, 1, 0.5)) <= 1e-10);
    CHECK(dist(a_quasi_resolvent(s, q).value, scalar_op(2, 1, -0.25)) <= 1e-10);
    CHECK(dist(qn_power_via_conv(s, q, 2).value, scalar_op(2, 1, 1.0 / 16.0)) <= 1e-10);
  }
  SUBCASE("hypothesis violated") {
    const auto s = scalar_semigroup(2, 1, 0.0);
    const auto q = ConeElement::from_slice(0.0, 1.0, CliffordElement::generator(2, 1));
    CHECK_THROWS_AS(quasi_resolvent(s, q), HypothesisError);
    CHECK_THROWS_AS(a_quasi_resolvent(s, q), HypothesisError);
    CHECK_THROWS_AS(resolvent(s, q), HypothesisError);
    CHECK_THROWS_AS(qn_power_via_conv(s, q, 2), HypothesisError);
  }
}

TEST_CASE("spherical resolvent constructions against direct algebra") {
  for (int n : {1, 2, 3}) {
    CAPTURE(n);
    Rng rng(100 + static_cast<std::uint64_t>(n));
    const auto a = random_stable_operator(n, 2, 0.3, rng);
    const SemigroupEvaluator s(a);
    const auto q = random_cone_element(n, s.omega() + 1.0, 1.3, rng);
    const auto qinv = direct_inverse(delta_q(a, q));
    const auto qr = quasi_resolvent(s, q).value;
    const auto aq = a_quasi_resolvent(s, q).value;
    CHECK(rel_dist(qr, qinv) <= 1e-8);
    CHECK(rel_dist(aq, a * qr) <= 1e-8);
    CHECK(rel_dist(aq, a * qinv) <= 1e-8);
    CHECK(rel_dist(resolvent(s, q).value, qinv.right_factor(conjugate(q.element())) - a * qinv) <= 1e-8);
    CHECK(rel_dist(qn_power_via_conv(s, q, 1).value, qr) <= 1e-9);
    CHECK(rel_dist(qn_power_via_conv(s, q, 3).value, qinv * qinv * qinv) <= 1e-8);
  }
}

TEST_CASE("real q and the b -> 0 limit") {
  Rng rng(23);
  const auto a = random_stable_operator(2, 2, 0.5, rng);
  const SemigroupEvaluator s(a);
  const double re = s.omega() + 1.5;
  const auto j = random_imaginary_unit(2, rng);
  const auto real_q = ConeElement::from_slice(re, 0.0, j);
  const auto near_q = ConeElement::from_slice(re, 1e-8, j);
  const auto explicit_real = lap_operator(s, ExpPolyKernel::monomial(1, re));
  const auto oracle = direct_inverse(delta_q(a, real_q));
  CHECK(rel_dist(quasi_resolvent(s, real_q).value, explicit_real) <= 1e-9);
  CHECK(rel_dist(quasi_resolvent(s, near_q).value, oracle) <= 1e-8);
  const auto q = ConeElement::from_slice(re, 0.8, j);
  const auto explicit_complex = lap_operator(s, (1.0 / 0.8) * ExpPolyKernel::damped_sin(re, 0.8));
  CHECK(rel_dist(quasi_resolvent(s, q).value, explicit_complex) <= 1e-9);
}

TEST_CASE("Q_q equals minus Lap of the spherical derivative at -t") {
  Rng rng(29);
  const SemigroupEvaluator s(random_stable_operator(3, 1, 0.5, rng));
  const auto q = random_cone_element(3, s.omega() + 1.0, 2.0, rng);
  // sph_deriv_exp(-t, q) as an exp-poly kernel
  const auto kernel = (-1.0 / q.im_norm()) * ExpPolyKernel::damped_sin(q.re(), q.im_norm());
  CHECK(rel_dist(quasi_resolvent(s, q).value, -1.0 * lap_operator(s, kernel)) <= 1e-10);
}

TEST_CASE("norm bounds") {
  const auto q = real_cone(2, 2.0);
  CHECK(bound_Q(q, 0.0, 1.0) == doctest::Approx(0.25));
  CHECK(bound_C(q, 0.0, 1.0) == doctest::Approx(0.5));
  CHECK(bound_Qn(q, 0.0, 1.0, 2) == doctest::Approx(1.0 / 16.0));
  const auto i = ConeElement::from_slice(0.0, 1.0, CliffordElement::generator(2, 1));
  const auto delta_i = RealPolynomial::delta(i);
  CHECK(bound_P(delta_i, -1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bound_P(delta_i, -1.0, 2.0) == doctest::Approx(2.0 * bound_P(delta_i, -1.0, 1.0)));
  CHECK(bound_Q(q, 0.0, 2.0) == doctest::Approx(2.0 * bound_Q(q, 0.0, 1.0)));
  CHECK(bound_C(q, 0.0, 2.0) == doctest::Approx(2.0 * bound_C(q, 0.0, 1.0)));
  CHECK(bound_Qn(q, 0.0, 2.0, 3) == doctest::Approx(2.0 * bound_Qn(q, 0.0, 1.0, 3)));
  CHECK_THROWS_AS(bound_Q(q, 2.0, 1.0), HypothesisError);
  CHECK_THROWS_AS(bound_P(delta_i, 0.0, 1.0), HypothesisError);
}

TEST_CASE("bounds dominate measured norms") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    Rng rng(seed);
    const auto a = random_stable_operator(2, 2, 0.4, rng);
    const SemigroupEvaluator s(a);
    const auto q = random_cone_element(2, s.omega() + 0.7, 1.0, rng);
    const auto qinv = direct_inverse(delta_q(a, q));
    CHECK(lower_norm(qinv) <= bound_Q(q, s.omega(), s.M()));
    CHECK(lower_norm(qinv.right_factor(conjugate(q.element())) - a * qinv) <= bound_C(q, s.omega(), s.M()));
    CHECK(lower_norm(qinv * qinv) <= bound_Qn(q, s.omega(), s.M(), 2));
    const auto p = RealPolynomial::delta(q);
    CHECK(lower_norm(direct_inverse(poly_of_operator(p, a))) <= bound_P(p, s.omega(), s.M()));
  }
}

TEST_CASE("Lap identities") {
  SUBCASE("A = 0, g = e^{-t}") {
    const auto s = scalar_semigroup(2, 1, 0.0);
    const auto rep = verify_lap_identities(s, ExpPolyKernel::exponential(1.0), real_cone(2, 1.0));
    CHECK(rep.m == -1);
    REQUIRE(rep.a);
    CHECK(*rep.a <= 1e-9);
    CHECK_FALSE(rep.b);
    CHECK_FALSE(rep.c);
    REQUIRE(rep.star);
    CHECK(*rep.star <= 1e-9);
  }
  SUBCASE("g = g_q: Delta_q(A) Lap(g_q) = Id with zero corrector") {
    Rng rng(31);
    const SemigroupEvaluator s(random_stable_operator(2, 2, 0.5, rng));
    const auto q = random_cone_element(2, s.omega() + 1.0, 1.1, rng);
    const auto rep = verify_lap_identities(s, build_gq(q), q);
    CHECK(rep.m == 0);
    REQUIRE(rep.c);
    REQUIRE(rep.corrector);
    CHECK(*rep.corrector <= 1e-12);
    CHECK(rep.worst() <= 1e-8);
  }
  SUBCASE("g_P of degree five") {
    Rng rng(37);
    const SemigroupEvaluator s(random_stable_operator(1, 2, 0.5, rng));
    const std::vector<cplx> rts{{0.5, 0.0}, {0.7, 1.0}, {0.7, -1.0}, {1.2, 0.0}, {0.9, 0.0}};
    const auto g = build_gP(RealPolynomial::from_roots(rts)).g;
    const auto rep = verify_lap_identities(s, g, real_cone(1, 1.0));
    CHECK(rep.m == 3);
    REQUIRE(rep.b);
    REQUIRE(rep.e);
    CHECK(rep.worst() <= 1e-8);
  }
}

TEST_CASE("halving tol more than halves the truncation error") {
  GrowthBound g;
  g.alpha = -1.0;
  g.omega = -0.5;
  g.M = 1.0;
  g.certified = true;
  const SemigroupEvaluator s(scalar_op(1, 1, -1.0), g);
  QuadratureScheme scheme;
  scheme.initial_width = 1.0 / 64.0;
  const auto kernel = ExpPolyKernel::exponential(1.0);
  double prev = 0.0;
  for (int i = 0; i < 6; ++i) {
    scheme.tol = 1e-3 * std::pow(0.5, i);
    const double err = dist(lap_operator(s, kernel, scheme), scalar_op(1, 1, 0.5));
    CHECK(err <= scheme.tol);
    if (i > 0) CHECK(prev / err >= 2.0);
    prev = err;
  }
}

TEST_CASE("parallel evaluation is bit-identical") {
  Rng rng(41);
  const auto a = random_stable_operator(2, 2, 0.5, rng);
  const auto q = random_cone_element(2, 1.0, 1.0, rng);
  QuadratureScheme one;
  one.threads = 1;
  QuadratureScheme four;
  four.threads = 4;
  const auto x = resolvent(SemigroupEvaluator(a), q, one).value;
  const auto y = resolvent(SemigroupEvaluator(a), q, four).value;
  CHECK(x == y);
}
