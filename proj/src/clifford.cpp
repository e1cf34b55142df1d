#include "cliffsemi/clifford.hpp"

#include "cliffsemi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cliffsemi {

namespace {

void check_signature(int n) {
  if (n < 1 || n > kMaxSignature)
    throw DimensionError("signature size n=" + std::to_string(n) + " outside [1, " +
                         std::to_string(kMaxSignature) + "]");
}

void check_same(const CliffordElement& p, const CliffordElement& q) {
  if (p.n() != q.n())
    throw DimensionError("mixed Clifford signatures: n=" + std::to_string(p.n()) +
                         " and n=" + std::to_string(q.n()));
}

}  // namespace

CliffordElement::CliffordElement(int n) : n_(n) {
  check_signature(n);
  coeffs_.assign(std::size_t{1} << n, 0.0);
}

CliffordElement::CliffordElement(int n, std::vector<double> coeffs)
    : n_(n), coeffs_(std::move(coeffs)) {
  check_signature(n);
  if (coeffs_.size() != (std::size_t{1} << n))
    throw DimensionError("expected " + std::to_string(std::size_t{1} << n) +
                         " coefficients, got " + std::to_string(coeffs_.size()));
  for (double c : coeffs_)
    if (!std::isfinite(c)) throw Error("non-finite Clifford coefficient");
}

CliffordElement CliffordElement::scalar(int n, double value) {
  CliffordElement q(n);
  q.coeffs_[0] = value;
  return q;
}

CliffordElement CliffordElement::blade(int n, unsigned mask, double value) {
  CliffordElement q(n);
  if (mask >= q.dim()) throw DimensionError("blade mask out of range");
  q.coeffs_[mask] = value;
  return q;
}

CliffordElement CliffordElement::generator(int n, int k) {
  if (k < 1 || k > n) throw DimensionError("generator index out of range");
  return blade(n, 1u << (k - 1));
}

bool CliffordElement::is_real(double tol) const noexcept {
  for (std::size_t k = 1; k < coeffs_.size(); ++k)
    if (std::abs(coeffs_[k]) > tol) return false;
  return true;
}

CliffordElement operator+(const CliffordElement& p, const CliffordElement& q) {
  check_same(p, q);
  CliffordElement r = p;
  for (std::size_t k = 0; k < r.coeffs_.size(); ++k) r.coeffs_[k] += q.coeffs_[k];
  return r;
}

CliffordElement operator-(const CliffordElement& p, const CliffordElement& q) {
  check_same(p, q);
  CliffordElement r = p;
  for (std::size_t k = 0; k < r.coeffs_.size(); ++k) r.coeffs_[k] -= q.coeffs_[k];
  return r;
}

CliffordElement operator-(const CliffordElement& p) { return -1.0 * p; }

CliffordElement operator*(double r, const CliffordElement& q) {
  CliffordElement s = q;
  for (double& c : s.coeffs_) c *= r;
  return s;
}

CliffordElement operator*(const CliffordElement& p, const CliffordElement& q) {
  check_same(p, q);
  CliffordElement r(p.n());
  const auto dim = static_cast<unsigned>(p.dim());
  for (unsigned a = 0; a < dim; ++a) {
    const double pa = p.coeffs_[a];
    if (pa == 0.0) continue;
    for (unsigned b = 0; b < dim; ++b) {
      const double qb = q.coeffs_[b];
      if (qb == 0.0) continue;
      r.coeffs_[a ^ b] += blade_sign(a, b) * pa * qb;
    }
  }
  return r;
}

CliffordElement mul(const CliffordElement& p, const CliffordElement& q) { return p * q; }

CliffordElement conjugate(const CliffordElement& q) {
  std::vector<double> c(q.coeffs().begin(), q.coeffs().end());
  for (unsigned k = 0; k < c.size(); ++k) c[k] *= conjugation_sign(k);
  return CliffordElement(q.n(), std::move(c));
}

CliffordElement real_part(const CliffordElement& q) { return 0.5 * (q + conjugate(q)); }

CliffordElement imag_part(const CliffordElement& q) { return 0.5 * (q - conjugate(q)); }

double euclidean_norm(const CliffordElement& q) { return std::sqrt(inner(q, q)); }

double inner(const CliffordElement& p, const CliffordElement& q) {
  check_same(p, q);
  double s = 0.0;
  for (std::size_t k = 0; k < p.dim(); ++k) s += p.coeffs()[k] * q.coeffs()[k];
  return s;
}

double max_abs_diff(const CliffordElement& p, const CliffordElement& q) {
  check_same(p, q);
  double m = 0.0;
  for (std::size_t k = 0; k < p.dim(); ++k)
    m = std::max(m, std::abs(p.coeffs()[k] - q.coeffs()[k]));
  return m;
}

Eigen::MatrixXd left_rep(const CliffordElement& q) {
  const auto dim = static_cast<unsigned>(q.dim());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  // column b holds q e_b
  for (unsigned b = 0; b < dim; ++b)
    for (unsigned a = 0; a < dim; ++a)
      if (q[a] != 0.0) m(a ^ b, b) += blade_sign(a, b) * q[a];
  return m;
}

Eigen::MatrixXd right_rep(const CliffordElement& q) {
  const auto dim = static_cast<unsigned>(q.dim());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  // column b holds e_b q
  for (unsigned b = 0; b < dim; ++b)
    for (unsigned a = 0; a < dim; ++a)
      if (q[a] != 0.0) m(a ^ b, b) += blade_sign(b, a) * q[a];
  return m;
}

double clifford_operator_norm(const CliffordElement& q) {
  if (q.n() <= 2) return euclidean_norm(q);  // left_rep(q) = |q| times an orthogonal matrix
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(left_rep(q));
  return svd.singularValues()(0);
}

double two_sided_norm(const CliffordElement& q) {
  if (q.n() <= 2) return euclidean_norm(q);
  const double left = Eigen::JacobiSVD<Eigen::MatrixXd>(left_rep(q)).singularValues()(0);
  const double right = Eigen::JacobiSVD<Eigen::MatrixXd>(right_rep(q)).singularValues()(0);
  return std::max(left, right);
}

double ConeElement::norm() const noexcept { return std::hypot(a_, b_); }

ConeElement ConeElement::from_slice(double a, double b, const CliffordElement& unit) {
  if (b < 0.0) return from_slice(a, -b, -unit);
  const CliffordElement sq = unit * unit;
  const CliffordElement minus_one = CliffordElement::scalar(unit.n(), -1.0);
  if (max_abs_diff(sq, minus_one) > 1e-10 ||
      max_abs_diff(conjugate(unit), -unit) > 1e-10)
    throw ConeError("from_slice: unit is not an imaginary unit");
  CliffordElement q = CliffordElement::scalar(unit.n(), a) + b * unit;
  return ConeElement(std::move(q), a, b, unit);
}

std::optional<ConeElement> in_quadratic_cone(const CliffordElement& q, double tol) {
  const double scale = euclidean_norm(q);
  const auto dim = static_cast<unsigned>(q.dim());
  for (unsigned k = 1; k < dim; ++k) {
    if (square_sign(k) != 1) continue;
    if (std::abs(q[k]) > tol * scale) return std::nullopt;
    const double ip = inner(q, q * CliffordElement::blade(q.n(), k));
    if (std::abs(ip) > tol * scale * scale) return std::nullopt;
  }
  const double a = q.scalar_part();
  const CliffordElement im = q - CliffordElement::scalar(q.n(), a);
  const double b = clifford_operator_norm(im);
  CliffordElement j = b > 0.0 ? im / b : CliffordElement::generator(q.n(), 1);
  return ConeElement(q, a, b, std::move(j));
}

ConeElement to_cone(const CliffordElement& q, double tol) {
  auto c = in_quadratic_cone(q, tol);
  if (!c) throw ConeError("element is not on the quadratic cone");
  return *std::move(c);
}

SliceDecomposition cone_decompose(const ConeElement& q) {
  return {q.re(), q.im_norm(), q.unit()};
}

CliffordElement exp_cone(double t, const ConeElement& q) {
  const double scale = std::exp(t * q.re());
  const double tb = t * q.im_norm();
  return CliffordElement::scalar(q.n(), scale * std::cos(tb)) + (scale * std::sin(tb)) * q.unit();
}

CliffordElement exp_series(double t, const CliffordElement& q, int terms) {
  CliffordElement sum = CliffordElement::scalar(q.n(), 1.0);
  CliffordElement term = sum;
  const CliffordElement tq = t * q;
  for (int k = 1; k < terms; ++k) {
    term = (term * tq) / static_cast<double>(k);
    sum = sum + term;
  }
  return sum;
}

}  // namespace cliffsemi
