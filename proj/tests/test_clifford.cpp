#include "doctest.h"

#include "cliffsemi/clifford.hpp"
#include "cliffsemi/errors.hpp"
#include "cliffsemi/module_ops.hpp"
#include "cliffsemi/random.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <vector>

using namespace cliffsemi;

namespace {

// Product of basis blades by explicit word reduction: concatenate the
// generator lists, bubble sort (one sign flip per swap), cancel e_k e_k = -1.
std::pair<int, unsigned> word_product(unsigned a, unsigned b, int n) {
  std::vector<int> word;
  for (int k = 0; k < n; ++k)
    if (a & (1u << k)) word.push_back(k);
  for (int k = 0; k < n; ++k)
    if (b & (1u << k)) word.push_back(k);
  int sign = 1;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i + 1 < word.size(); ++i) {
      if (word[i] > word[i + 1]) {
        std::swap(word[i], word[i + 1]);
        sign = -sign;
        changed = true;
      } else if (word[i] == word[i + 1]) {
        word.erase(word.begin() + static_cast<long>(i), word.begin() + static_cast<long>(i) + 2);
        sign = -sign;
        changed = true;
        break;
      }
    }
  }
  unsigned mask = 0;
  for (int k : word) mask |= 1u << k;
  return {sign, mask};
}

CliffordElement oracle_mul(const CliffordElement& p, const CliffordElement& q) {
  std::vector<double> c(p.dim(), 0.0);
  for (unsigned a = 0; a < p.dim(); ++a)
    for (unsigned b = 0; b < q.dim(); ++b) {
      const auto [sign, mask] = word_product(a, b, p.n());
      c[mask] += sign * p[a] * q[b];
    }
  return CliffordElement(p.n(), c);
}

CliffordElement random_integer_element(int n, Rng& rng) {
  std::vector<double> c(std::size_t{1} << n);
  for (double& x : c) x = rng.integer(-5, 5);
  return CliffordElement(n, c);
}

double brute_spectral_norm(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.transpose() * m);
  return std::sqrt(es.eigenvalues().maxCoeff());
}

CliffordElement e(int n, unsigned mask) { return CliffordElement::blade(n, mask); }
CliffordElement one(int n) { return CliffordElement::scalar(n, 1.0); }

}  // namespace

TEST_CASE("blade sign agrees with word reduction") {
  for (int n = 1; n <= kMaxSignature; ++n)
    for (unsigned a = 0; a < (1u << n); ++a)
      for (unsigned b = 0; b < (1u << n); ++b) {
        const auto [sign, mask] = word_product(a, b, n);
        REQUIRE(blade_sign(a, b) == sign);
        REQUIRE((a ^ b) == mask);
      }
}

TEST_CASE("mul examples") {
  CHECK(e(3, 0b001) * e(3, 0b010) == e(3, 0b011));
  CHECK(e(3, 0b001) * e(3, 0b001) == CliffordElement::scalar(3, -1.0));
  CHECK((one(3) - e(3, 0b111)) * (one(3) + e(3, 0b111)) == CliffordElement(3));
  CHECK(e(2, 0b10) * e(2, 0b01) == -e(2, 0b11));
}

TEST_CASE("mixed signatures are rejected") {
  CHECK_THROWS_AS(one(2) * one(3), DimensionError);
  CHECK_THROWS_AS(one(2) + one(3), DimensionError);
  CHECK_THROWS_AS(CliffordElement(7), DimensionError);
  CHECK_THROWS_AS(CliffordElement(0), DimensionError);
  CHECK_THROWS_AS(CliffordElement(2, {1.0, 2.0}), DimensionError);
  CHECK_THROWS_AS(CliffordElement(1, {1.0, std::nan("")}), Error);
}

TEST_CASE("conjugate examples") {
  CHECK(conjugate(CliffordElement(2, {1.0, 2.0, 3.0, 4.0})) == CliffordElement(2, {1.0, -2.0, -3.0, -4.0}));
  CHECK(conjugate(one(3)) == one(3));
  CHECK(conjugate(e(2, 0b11)) == -e(2, 0b11));
  CHECK(conjugate(e(3, 0b111)) == e(3, 0b111));
}

TEST_CASE("real and imaginary parts") {
  const auto r = CliffordElement::scalar(2, 4.0);
  CHECK(real_part(r) == r);
  CHECK(imag_part(r) == CliffordElement(2));
  CHECK(real_part(e(2, 1)) == CliffordElement(2));
  CHECK(imag_part(e(2, 1)) == e(2, 1));
  const auto q = CliffordElement(1, {2.0, 3.0});
  CHECK(real_part(q) == CliffordElement::scalar(1, 2.0));
  CHECK(imag_part(q) == CliffordElement(1, {0.0, 3.0}));
  Rng rng(1);
  for (int n = 1; n <= 4; ++n) {
    const auto p = random_element(n, rng);
    CHECK(max_abs_diff(real_part(p) + imag_part(p), p) <= 1e-15);
    CHECK(real_part(real_part(p)) == real_part(p));
  }
}

TEST_CASE("euclidean norm examples") {
  const auto u = one(3) + e(3, 0b111);
  CHECK(euclidean_norm(u) == doctest::Approx(std::sqrt(2.0)));
  CHECK(euclidean_norm(u * u) == std::sqrt(8.0));
  CHECK(euclidean_norm(CliffordElement(3)) == 0.0);
}

TEST_CASE("regular representations") {
  CHECK(left_rep(one(3)).isIdentity());
  Eigen::Matrix2d rot;
  rot << 0, -1, 1, 0;
  CHECK(left_rep(e(1, 1)).isApprox(rot));
  Rng rng(2);
  for (int n = 1; n <= 4; ++n)
    for (int trial = 0; trial < 20; ++trial) {
      const auto p = random_element(n, rng);
      const auto q = random_element(n, rng);
      CHECK((left_rep(p) * left_rep(q) - left_rep(p * q)).cwiseAbs().maxCoeff() <= 1e-14);
      CHECK((right_rep(q) * right_rep(p) - right_rep(p * q)).cwiseAbs().maxCoeff() <= 1e-14);
    }
}

TEST_CASE("clifford operator norm") {
  const auto q = CliffordElement(2, {1.0, -2.0, 0.5, 3.0});
  CHECK(clifford_operator_norm(q) == doctest::Approx(euclidean_norm(q)).epsilon(1e-14));
  CHECK(clifford_operator_norm(one(3) + e(3, 0b111)) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(brute_spectral_norm(left_rep(one(3) + e(3, 0b111))) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(clifford_operator_norm(CliffordElement(4)) == 0.0);
  Rng rng(3);
  for (int n = 1; n <= 4; ++n)
    for (int trial = 0; trial < 20; ++trial) {
      const auto p = random_element(n, rng);
      CHECK(clifford_operator_norm(p) == doctest::Approx(brute_spectral_norm(left_rep(p))).epsilon(1e-12));
      CHECK(two_sided_norm(p) >= clifford_operator_norm(p));
    }
}

TEST_CASE("quadratic cone membership") {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) CHECK(in_quadratic_cone(random_element(2, rng)).has_value());
  for (int trial = 0; trial < 50; ++trial) CHECK(in_quadratic_cone(random_element(1, rng)).has_value());

  // brute force of the two conditions for e_12 + e_3 (only e_123 squares to +1)
  const auto q = e(3, 0b011) + e(3, 0b100);
  const auto qe = oracle_mul(q, e(3, 0b111));
  const bool expected = q[0b111] == 0.0 && inner(q, qe) == 0.0;
  CHECK(in_quadratic_cone(q).has_value() == expected);
  CHECK_FALSE(expected);

  CHECK_FALSE(in_quadratic_cone(one(3) + e(3, 0b111)).has_value());
  CHECK_THROWS_AS(to_cone(one(3) + e(3, 0b111)), ConeError);
  CHECK(in_quadratic_cone(one(3) + e(3, 0b011)).has_value());
}

TEST_CASE("cone decomposition") {
  {
    const auto d = cone_decompose(to_cone(CliffordElement(2, {3.0, 4.0, 0.0, 0.0})));
    CHECK(d.a == 3.0);
    CHECK(d.b == doctest::Approx(4.0));
    CHECK(max_abs_diff(d.unit, e(2, 1)) <= 1e-15);
  }
  {
    const auto d = cone_decompose(to_cone(CliffordElement::scalar(2, 5.0)));
    CHECK(d.a == 5.0);
    CHECK(d.b == 0.0);
    CHECK(d.unit == e(2, 1));
  }
  {
    const auto d = cone_decompose(to_cone(CliffordElement(2, {1.0, 1.0, 1.0, 0.0})));
    CHECK(d.a == 1.0);
    CHECK(d.b == doctest::Approx(std::sqrt(2.0)));
    CHECK(max_abs_diff(d.unit, (1.0 / std::sqrt(2.0)) * (e(2, 1) + e(2, 2))) <= 1e-15);
  }
  Rng rng(5);
  for (int n = 1; n <= 5; ++n)
    for (int trial = 0; trial < 10; ++trial) {
      const auto c = random_cone_element(n, rng.uniform(-2, 2), rng.uniform(0, 3), rng);
      const auto round = to_cone(c.element());
      CHECK(round.re() == doctest::Approx(c.re()));
      CHECK(round.im_norm() == doctest::Approx(c.im_norm()));
      const auto j = round.unit();
      CHECK(max_abs_diff(j * j, CliffordElement::scalar(n, -1.0)) <= 1e-12);
      CHECK(max_abs_diff(conjugate(j), -j) <= 1e-15);
      CHECK(max_abs_diff(CliffordElement::scalar(n, round.re()) + round.im_norm() * j, c.element()) <= 1e-12);
    }
}

TEST_CASE("exp on the cone") {
  const auto i = ConeElement::from_slice(0.0, 1.0, e(2, 1));
  CHECK(exp_cone(0.0, i) == one(2));
  CHECK(max_abs_diff(exp_cone(std::numbers::pi, i), CliffordElement::scalar(2, -1.0)) <= 1e-15);
  const auto r = ConeElement::from_slice(0.7, 0.0, e(2, 1));
  CHECK(max_abs_diff(exp_cone(2.0, r), CliffordElement::scalar(2, std::exp(1.4))) <= 1e-14);
  Rng rng(6);
  for (int n = 1; n <= 4; ++n)
    for (int trial = 0; trial < 10; ++trial) {
      const auto q = random_cone_element(n, rng.uniform(-1, 1), rng.uniform(0, 2), rng);
      const double t = rng.uniform(0, 2);
      const double s = rng.uniform(0, 2);
      CHECK(max_abs_diff(exp_cone(t, q), exp_series(t, q.element())) <= 1e-12);
      CHECK(max_abs_diff(exp_cone(t, q) * exp_cone(s, q), exp_cone(t + s, q)) <= 1e-10);
    }
}

TEST_CASE("algebra invariants") {
  Rng rng(7);
  for (int n = 1; n <= 4; ++n) {
    CAPTURE(n);
    for (int trial = 0; trial < 500; ++trial) {
      const auto p = random_element(n, rng);
      const auto q = random_element(n, rng);
      const auto r = random_element(n, rng);
      REQUIRE(max_abs_diff(p * q, oracle_mul(p, q)) <= 1e-14);
      REQUIRE(max_abs_diff((p * q) * r, p * (q * r)) <= 1e-12);
      REQUIRE(conjugate(conjugate(p)) == p);
      REQUIRE(clifford_operator_norm(p * q) <= clifford_operator_norm(p) * clifford_operator_norm(q) + 1e-10);
      const auto pi = random_integer_element(n, rng);
      const auto qi = random_integer_element(n, rng);
      REQUIRE(conjugate(pi * qi) == conjugate(qi) * conjugate(pi));
    }
  }
}

TEST_CASE("cone norm identity") {
  Rng rng(8);
  for (int n = 1; n <= 4; ++n)
    for (int trial = 0; trial < 50; ++trial) {
      const auto q = random_cone_element(n, rng.uniform(-3, 3), rng.uniform(0, 3), rng);
      const double lhs = std::pow(clifford_operator_norm(q.element()), 2);
      const double rhs = (q.element() * conjugate(q.element())).scalar_part();
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
      CHECK(max_abs_diff(q.element() * conjugate(q.element()), CliffordElement::scalar(n, q.norm_sq())) <=
            1e-12 * q.norm_sq() + 1e-15);
      CHECK(two_sided_norm(q.element()) == doctest::Approx(q.norm()).epsilon(1e-12));
    }
}

TEST_CASE("distinct slices meet only on the reals") {
  Rng rng(9);
  for (int n = 2; n <= 4; ++n)
    for (int trial = 0; trial < 20; ++trial) {
      const auto j = random_imaginary_unit(n, rng);
      const auto k = random_imaginary_unit(n, rng);
      if (max_abs_diff(j, k) < 1e-6 || max_abs_diff(j, -k) < 1e-6) continue;
      // a + b J = c + d K  <=>  [1 J -1 -K] (a b c d)^T = 0; the solution space is (a, 0, a, 0)
      Eigen::MatrixXd m(j.dim(), 4);
      for (unsigned i = 0; i < j.dim(); ++i) {
        m(i, 0) = i == 0 ? 1.0 : 0.0;
        m(i, 1) = j[i];
        m(i, 2) = i == 0 ? -1.0 : 0.0;
        m(i, 3) = -k[i];
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
      lu.setThreshold(1e-10);
      REQUIRE(lu.dimensionOfKernel() == 1);
      const Eigen::VectorXd v = lu.kernel().col(0);
      CHECK(std::abs(v(1)) <= 1e-12);
      CHECK(std::abs(v(3)) <= 1e-12);
      CHECK(v(0) == doctest::Approx(v(2)));
    }
}
