#pragma once

#include <Eigen/Dense>

#include <bit>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace cliffsemi {

/// Largest supported signature size; keeps 2^n <= 64.
inline constexpr int kMaxSignature = 6;

/// Default relative tolerance of the quadratic-cone membership test.
inline constexpr double kConeTolerance = 1e-9;

/// Sign (+1/-1) of e_A e_B = sign * e_{A xor B} in Cl(0,n).
///
/// Counts the transpositions needed to bring the concatenated ascending
/// factor lists into ascending order, plus one factor -1 for every generator
/// shared by A and B (e_k^2 = -1).
constexpr int blade_sign(unsigned a, unsigned b) noexcept {
  int swaps = 0;
  for (unsigned s = a >> 1; s != 0; s >>= 1) swaps += std::popcount(s & b);
  swaps += std::popcount(a & b);
  return (swaps & 1) ? -1 : 1;
}

/// Sign of the Clifford conjugate of a grade-s blade: (-1)^{s(s+1)/2}.
constexpr int conjugation_sign(unsigned mask) noexcept {
  const int s = std::popcount(mask);
  return ((s * (s + 1) / 2) & 1) ? -1 : 1;
}

/// Sign of e_K^2 (the blade squares to +-1).
constexpr int square_sign(unsigned mask) noexcept {
  return blade_sign(mask, mask);
}

/// Multivector of Cl(0,n); coefficient index K is the bitmask of the blade
/// e_K = e_{k1}...e_{ks}, k1 < ... < ks.
class CliffordElement {
public:
  CliffordElement() = default;
  explicit CliffordElement(int n);
  CliffordElement(int n, std::vector<double> coeffs);

  static CliffordElement scalar(int n, double value);
  static CliffordElement blade(int n, unsigned mask, double value = 1.0);
  /// e_k with 1-based k.
  static CliffordElement generator(int n, int k);

  int n() const noexcept { return n_; }
  std::size_t dim() const noexcept { return coeffs_.size(); }
  std::span<const double> coeffs() const noexcept { return coeffs_; }
  double operator[](unsigned mask) const { return coeffs_.at(mask); }
  double scalar_part() const noexcept { return coeffs_.empty() ? 0.0 : coeffs_[0]; }

  /// True when every non-scalar coefficient is within tol of zero.
  bool is_real(double tol = 0.0) const noexcept;

  friend CliffordElement operator+(const CliffordElement& p, const CliffordElement& q);
  friend CliffordElement operator-(const CliffordElement& p, const CliffordElement& q);
  friend CliffordElement operator-(const CliffordElement& p);
  friend CliffordElement operator*(const CliffordElement& p, const CliffordElement& q);
  friend CliffordElement operator*(double r, const CliffordElement& q);
  friend CliffordElement operator*(const CliffordElement& q, double r) { return r * q; }
  friend CliffordElement operator/(const CliffordElement& q, double r) { return (1.0 / r) * q; }
  friend bool operator==(const CliffordElement&, const CliffordElement&) = default;

private:
  int n_ = 1;
  std::vector<double> coeffs_ = std::vector<double>(2, 0.0);
};

CliffordElement mul(const CliffordElement& p, const CliffordElement& q);
CliffordElement conjugate(const CliffordElement& q);
CliffordElement real_part(const CliffordElement& q);
CliffordElement imag_part(const CliffordElement& q);

double euclidean_norm(const CliffordElement& q);
/// Standard scalar product of R^{2^n}.
double inner(const CliffordElement& p, const CliffordElement& q);
/// Largest absolute coefficient difference.
double max_abs_diff(const CliffordElement& p, const CliffordElement& q);

/// Matrix of a -> q a in the blade basis.
Eigen::MatrixXd left_rep(const CliffordElement& q);
/// Matrix of a -> a q in the blade basis.
Eigen::MatrixXd right_rep(const CliffordElement& q);

/// sup{|q a| : |a| = 1}, the spectral norm of left_rep(q).
double clifford_operator_norm(const CliffordElement& q);

/// max(|left_rep(q)|_2, |right_rep(q)|_2); bounds both |q a| and |a q|.
/// Equals clifford_operator_norm(q) for n <= 2 and on the quadratic cone.
double two_sided_norm(const CliffordElement& q);

/// Element of the quadratic cone, cached as a + b J.
class ConeElement {
public:
  const CliffordElement& element() const noexcept { return q_; }
  int n() const noexcept { return q_.n(); }
  double re() const noexcept { return a_; }
  /// |im(q)|, always >= 0.
  double im_norm() const noexcept { return b_; }
  const CliffordElement& unit() const noexcept { return j_; }
  /// |q| = sqrt(a^2 + b^2).
  double norm() const noexcept;
  double norm_sq() const noexcept { return a_ * a_ + b_ * b_; }
  bool is_real() const noexcept { return b_ == 0.0; }

  /// Builds a + b J directly; J must be an imaginary unit of Cl(0,n).
  static ConeElement from_slice(double a, double b, const CliffordElement& unit);

private:
  friend std::optional<ConeElement> in_quadratic_cone(const CliffordElement&, double);
  ConeElement(CliffordElement q, double a, double b, CliffordElement j)
      : q_(std::move(q)), a_(a), b_(b), j_(std::move(j)) {}

  CliffordElement q_;
  double a_ = 0.0;
  double b_ = 0.0;
  CliffordElement j_;
};

/// Membership test on the quadratic cone; for n <= 2 every element belongs.
///
/// For every K != {} with e_K^2 = 1 requires |a_K| <= tol |q| and
/// |<q, q e_K>| <= tol |q|^2 (Euclidean norms).
std::optional<ConeElement> in_quadratic_cone(const CliffordElement& q,
                                             double tol = kConeTolerance);

/// Same as in_quadratic_cone but throws ConeError on failure.
ConeElement to_cone(const CliffordElement& q, double tol = kConeTolerance);

struct SliceDecomposition {
  double a;
  double b;
  CliffordElement unit;
};

/// q = a + b J with b >= 0; the real case returns J = e_1.
SliceDecomposition cone_decompose(const ConeElement& q);

/// e^{t q} = e^{t a} (cos(t b) + sin(t b) J).
CliffordElement exp_cone(double t, const ConeElement& q);

/// Truncated power series sum_k (t q)^k / k!, used as an independent check.
CliffordElement exp_series(double t, const CliffordElement& q, int terms = 60);

}  // namespace cliffsemi
