#pragma once

#include "cliffsemi/clifford.hpp"
#include "cliffsemi/kernels.hpp"
#include "cliffsemi/random.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

namespace cliffsemi {

/// Element of the two-sided module Cl(0,n)^d.
class CliffordVector {
public:
  CliffordVector(int n, int d);
  CliffordVector(int n, std::vector<CliffordElement> entries);

  /// e_K placed in slot j.
  static CliffordVector basis(int n, int d, int slot, unsigned mask);
  static CliffordVector random(int n, int d, Rng& rng);
  static CliffordVector from_flat(int n, int d, const Eigen::VectorXd& flat);

  int n() const noexcept { return n_; }
  int d() const noexcept { return static_cast<int>(entries_.size()); }
  const CliffordElement& operator[](int i) const { return entries_.at(static_cast<std::size_t>(i)); }
  std::span<const CliffordElement> entries() const noexcept { return entries_; }

  /// Block i holds the coefficients of entry i.
  Eigen::VectorXd flatten() const;

  friend CliffordVector operator+(const CliffordVector& x, const CliffordVector& y);
  friend CliffordVector operator-(const CliffordVector& x, const CliffordVector& y);
  friend CliffordVector operator*(double r, const CliffordVector& x);
  /// Left and right scalar multiplication.
  friend CliffordVector operator*(const CliffordElement& q, const CliffordVector& x);
  friend CliffordVector operator*(const CliffordVector& x, const CliffordElement& q);
  friend bool operator==(const CliffordVector&, const CliffordVector&) = default;

private:
  int n_;
  std::vector<CliffordElement> entries_;
};

/// d x d Clifford matrix acting by (A x)_i = sum_j A_ij x_j; right linear.
class CliffordMatrixOperator {
public:
  CliffordMatrixOperator(int n, int d);
  /// Row-major entries.
  CliffordMatrixOperator(int n, int d, std::vector<CliffordElement> entries);

  static CliffordMatrixOperator identity(int n, int d) { return scalar(n, d, 1.0); }
  static CliffordMatrixOperator zero(int n, int d) { return CliffordMatrixOperator(n, d); }
  static CliffordMatrixOperator scalar(int n, int d, double c);
  /// Reads the first column of every 2^n block.
  static CliffordMatrixOperator from_real_representation(int n, int d, const Eigen::MatrixXd& r);

  int n() const noexcept { return n_; }
  int d() const noexcept { return d_; }
  const CliffordElement& operator()(int i, int j) const {
    return entries_.at(static_cast<std::size_t>(i * d_ + j));
  }
  std::span<const CliffordElement> entries() const noexcept { return entries_; }

  CliffordVector apply(const CliffordVector& x) const;
  /// Block matrix with blocks left_rep(A_ij); size d 2^n.
  Eigen::MatrixXd real_representation() const;

  /// x -> A(p x): every entry right-multiplied by p.
  CliffordMatrixOperator right_factor(const CliffordElement& p) const;
  /// x -> p A(x): every entry left-multiplied by p.
  CliffordMatrixOperator left_factor(const CliffordElement& p) const;

  friend CliffordMatrixOperator operator+(const CliffordMatrixOperator& a, const CliffordMatrixOperator& b);
  friend CliffordMatrixOperator operator-(const CliffordMatrixOperator& a, const CliffordMatrixOperator& b);
  friend CliffordMatrixOperator operator*(double r, const CliffordMatrixOperator& a);
  /// Composition a o b.
  friend CliffordMatrixOperator operator*(const CliffordMatrixOperator& a, const CliffordMatrixOperator& b);
  friend bool operator==(const CliffordMatrixOperator&, const CliffordMatrixOperator&) = default;

private:
  int n_;
  int d_;
  std::vector<CliffordElement> entries_;
};

inline CliffordVector apply(const CliffordMatrixOperator& a, const CliffordVector& x) { return a.apply(x); }
inline CliffordMatrixOperator compose(const CliffordMatrixOperator& a, const CliffordMatrixOperator& b) {
  return a * b;
}
inline Eigen::MatrixXd real_representation(const CliffordMatrixOperator& a) {
  return a.real_representation();
}

/// nu(p) = max(|left_rep(p)|_2, |right_rep(p)|_2).
inline double nu(const CliffordElement& p) { return two_sided_norm(p); }

/// |x| = max_i nu(x_i).
double module_norm(const CliffordVector& x);

struct NormBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Upper bracket max_i sum_j nu(A_ij).
double upper_norm(const CliffordMatrixOperator& a);
/// max |A x| / |x| over the basis vectors and `probes` seeded random vectors.
double lower_norm(const CliffordMatrixOperator& a, int probes = 64, std::uint64_t seed = 0);
NormBounds operator_norm_bounds(const CliffordMatrixOperator& a, int probes = 64,
                                std::uint64_t seed = 0);

/// Horner evaluation of sum_k coeffs[k] A^k.
CliffordMatrixOperator poly_of_operator(std::span<const double> coeffs, const CliffordMatrixOperator& a);
inline CliffordMatrixOperator poly_of_operator(const RealPolynomial& p, const CliffordMatrixOperator& a) {
  return poly_of_operator(p.coeffs(), a);
}

/// A^2 - 2 re(q) A + |q|^2 Id.
CliffordMatrixOperator delta_q(const CliffordMatrixOperator& a, const ConeElement& q);

inline constexpr double kInvertibilityThreshold = 1e-9;

/// sigma_min / sigma_max of the real representation.
double inverse_condition(const CliffordMatrixOperator& b);

/// Inverse through the real representation; throws NotInvertibleError when
/// sigma_min <= threshold sigma_max.
CliffordMatrixOperator direct_inverse(const CliffordMatrixOperator& b,
                                      double threshold = kInvertibilityThreshold);

bool is_in_spherical_resolvent(const CliffordMatrixOperator& a, const ConeElement& q,
                               double threshold = kInvertibilityThreshold);

/// Spectral abscissa: max real part of the eigenvalues of R(A).
double spectral_abscissa(const CliffordMatrixOperator& a);

inline constexpr double kGrowthSafety = 0.01;

/// |T(t)| <= M e^{omega t} with omega = alpha + epsilon.
struct GrowthBound {
  double omega = 0.0;
  double M = 1.0;
  double alpha = 0.0;
  /// Horizon of the sampled sup; beyond it the Schur bound stays below 1.
  double t_M = 0.0;
  bool certified = false;
};

GrowthBound growth_bound(const CliffordMatrixOperator& a, double epsilon = kGrowthSafety);

/// T(t) = exp(t A) with growth data and a cache of node exponentials.
///
/// Copies share the cache; every member is safe to call concurrently.
class SemigroupEvaluator {
public:
  explicit SemigroupEvaluator(CliffordMatrixOperator a, double epsilon = kGrowthSafety);
  SemigroupEvaluator(CliffordMatrixOperator a, GrowthBound growth);

  const CliffordMatrixOperator& generator() const noexcept { return a_; }
  const Eigen::MatrixXd& real_generator() const noexcept { return r_; }
  const GrowthBound& growth() const noexcept { return growth_; }
  double omega() const noexcept { return growth_.omega; }
  double M() const noexcept { return growth_.M; }
  int n() const noexcept { return a_.n(); }
  int d() const noexcept { return a_.d(); }
  /// Largest |Im| over the eigenvalues of R(A).
  double max_frequency() const noexcept { return max_frequency_; }
  /// Largest |lambda| over the eigenvalues of R(A).
  double spectral_radius() const noexcept { return spectral_radius_; }

  /// exp(t R(A)), cached by t.
  std::shared_ptr<const Eigen::MatrixXd> real_at(double t) const;
  CliffordMatrixOperator at(double t) const;

  std::size_t cached_nodes() const;

private:
  struct Cache {
    std::mutex mutex;
    std::map<double, std::shared_ptr<const Eigen::MatrixXd>> entries;
    std::size_t bytes = 0;
  };

  CliffordMatrixOperator a_;
  Eigen::MatrixXd r_;
  GrowthBound growth_;
  double max_frequency_ = 0.0;
  double spectral_radius_ = 0.0;
  std::shared_ptr<Cache> cache_;
};

inline CliffordMatrixOperator semigroup_at(const SemigroupEvaluator& s, double t) { return s.at(t); }

/// Entries with U(-1,1) coefficients shifted by -(alpha + margin) Id, so the
/// spectral abscissa of the result is -margin.
CliffordMatrixOperator random_stable_operator(int n, int d, double margin, Rng& rng);

CliffordElement random_element(int n, Rng& rng);
/// Random J with J^2 = -1 and J^c = -J.
CliffordElement random_imaginary_unit(int n, Rng& rng);
ConeElement random_cone_element(int n, double a, double b, Rng& rng);

}  // namespace cliffsemi
