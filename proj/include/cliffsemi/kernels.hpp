#pragma once

#include "cliffsemi/clifford.hpp"
#include "cliffsemi/random.hpp"

#include <complex>
#include <limits>
#include <span>
#include <vector>

namespace cliffsemi {

using cplx = std::complex<double>;

/// P(x) = sum_k a_k x^k with real coefficients, degree >= 2 and a_deg != 0.
class RealPolynomial {
public:
  /// coeffs[k] multiplies x^k.
  explicit RealPolynomial(std::vector<double> coeffs);

  /// x^2 - 2 a x + (a^2 + b^2), the polynomial whose operator is Delta_q.
  static RealPolynomial delta(const ConeElement& q);
  /// a * prod (x - root); complex roots must come in conjugate pairs.
  static RealPolynomial from_roots(std::span<const cplx> roots, double leading = 1.0);

  int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
  double leading() const noexcept { return coeffs_.back(); }
  double operator[](int k) const { return coeffs_.at(static_cast<std::size_t>(k)); }
  std::span<const double> coeffs() const noexcept { return coeffs_; }

  cplx operator()(cplx z) const;
  /// k-th derivative divided by k!, i.e. the k-th Taylor coefficient at z.
  cplx taylor(cplx z, int k) const;

private:
  std::vector<double> coeffs_;
};

/// Random P of the given degree with roots in re in [min_re, max_re],
/// |im| <= max_im (conjugate pairs) and leading coefficient +-[0.5, 2].
RealPolynomial random_polynomial(int degree, double min_re, double max_re, double max_im, Rng& rng);

struct Root {
  cplx value;
  int multiplicity = 1;
};

struct RootSet {
  std::vector<Root> roots;
  double r_P = 0.0;
  /// Clusters were close enough that the multiplicity assignment is uncertain.
  bool ambiguous = false;

  int total_multiplicity() const;
};

/// Default single-linkage radius: 1e-7 (1 + max |lambda|).
double default_cluster_tol(const RealPolynomial& p);

/// Roots of P from the companion matrix, clustered into multiple roots.
/// cluster_tol <= 0 selects default_cluster_tol.
RootSet roots(const RealPolynomial& p, double cluster_tol = 0.0);

/// c^{(j)}_{-k} for root j, stored at [j][k-1]: the coefficient of
/// (z + lambda_j)^{-k} in the partial fractions of 1 / P(-z).
using ResidueTable = std::vector<std::vector<cplx>>;

ResidueTable residues(const RealPolynomial& p, const RootSet& rs);

/// One summand (sum_k poly[k] t^k) e^{-lambda t}.
struct KernelTerm {
  cplx lambda;
  std::vector<cplx> poly;
};

/// Real-valued exp-polynomial g(t) = sum_j Q_j(t) e^{-lambda_j t}.
///
/// Construction merges terms with coincident rates, pairs every non-real
/// rate with its conjugate and symmetrizes the pair; a kernel that is not
/// real-valued is rejected.
class ExpPolyKernel {
public:
  ExpPolyKernel() = default;
  explicit ExpPolyKernel(std::vector<KernelTerm> terms);

  /// t^power e^{-rate t}.
  static ExpPolyKernel monomial(int power, double rate, double coeff = 1.0);
  static ExpPolyKernel exponential(double rate, double coeff = 1.0) {
    return monomial(0, rate, coeff);
  }
  /// e^{-a t} cos(b t) and e^{-a t} sin(b t).
  static ExpPolyKernel damped_cos(double a, double b);
  static ExpPolyKernel damped_sin(double a, double b);

  std::span<const KernelTerm> terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }

  double operator()(double t) const { return evaluate(t).real(); }
  /// Full complex sum; the imaginary part is round-off only.
  cplx evaluate(double t) const;

  /// min Re(lambda) over the terms; +infinity for the zero kernel.
  double decay_rate() const noexcept;
  /// Largest |coefficient| over all terms.
  double max_coefficient() const noexcept;
  /// max |Im lambda| over the terms.
  double max_frequency() const noexcept;

  friend ExpPolyKernel operator+(const ExpPolyKernel& f, const ExpPolyKernel& g);
  friend ExpPolyKernel operator-(const ExpPolyKernel& f, const ExpPolyKernel& g);
  friend ExpPolyKernel operator*(double c, const ExpPolyKernel& f);

private:
  std::vector<KernelTerm> terms_;
};

inline double eval(const ExpPolyKernel& k, double t) { return k(t); }

/// Term-wise d/dt: poly' - lambda poly.
ExpPolyKernel derivative(const ExpPolyKernel& k);
ExpPolyKernel derivative(const ExpPolyKernel& k, int order);

/// (f * g)(t) = int_0^t f(t - s) g(s) ds in closed form.
ExpPolyKernel convolve(const ExpPolyKernel& f, const ExpPolyKernel& g);
ExpPolyKernel conv_power(const ExpPolyKernel& g, int n);

/// |k(t)| <= C t^K e^{-r t} + C e^{-r t} for t >= 0.
struct Envelope {
  double C = 0.0;
  int K = 0;
  double r = std::numeric_limits<double>::infinity();
};

Envelope envelope(const ExpPolyKernel& k);

/// Unnormalized sinc with sinc(0) = 1.
double sinc(double r);

/// Result of building g_P; `flagged` marks the linear-system fallback.
struct PolynomialKernel {
  ExpPolyKernel g;
  RootSet roots;
  ResidueTable residues;
  bool flagged = false;
};

/// Solution of P(-d/dt) g = 0, g(0) = ... = g^(m)(0) = 0, g^(m+1)(0) = (-1)^m / a_top,
/// with deg P = m + 2.
PolynomialKernel build_gP(const RealPolynomial& p);

/// Same kernel obtained by solving the confluent Vandermonde system for the
/// initial conditions in the exp-poly basis of the given roots.
ExpPolyKernel build_gP_linear_system(const RealPolynomial& p, const RootSet& rs);

/// Symbolic expansion of sum_k (-1)^k a_k g^(k).
ExpPolyKernel ode_residual(const RealPolynomial& p, const ExpPolyKernel& g);

/// g(0), g'(0), ..., g^(count-1)(0).
std::vector<double> initial_values(const ExpPolyKernel& g, int count);

/// g_q(t) = t e^{-re(q) t} sinc(t |im(q)|).
ExpPolyKernel build_gq(const ConeElement& q);

/// Spherical derivative of exp at q: e^{t a} sin(t b) / b, and t e^{t a} when b = 0.
double sph_deriv_exp(double t, const ConeElement& q);

/// e^{t re(q)} sum_{k < terms} t^{2k+1} im(q)^{2k} / (2k+1)!, computed in Cl(0,n).
CliffordElement sph_deriv_exp_series(double t, const ConeElement& q, int terms = 30);

/// Finite sum of (real kernel) x (Clifford constant), valued in Cl(0,n).
class CliffordKernel {
public:
  struct Part {
    ExpPolyKernel g;
    CliffordElement p;
  };

  explicit CliffordKernel(int n) : n_(n) {}
  CliffordKernel(int n, std::vector<Part> parts);
  /// Real kernel times the unit.
  static CliffordKernel real(int n, const ExpPolyKernel& g);
  /// t -> e^{-t q} = e^{-t a} cos(t b) - e^{-t a} sin(t b) J.
  static CliffordKernel exp_minus(const ConeElement& q);

  int n() const noexcept { return n_; }
  std::span<const Part> parts() const noexcept { return parts_; }

  CliffordElement operator()(double t) const;

  double decay_rate() const noexcept;
  double max_frequency() const noexcept;
  /// Majorant with C scaled by the Clifford operator norms of the constants.
  Envelope envelope() const;

private:
  int n_;
  std::vector<Part> parts_;
};

inline CliffordElement eval_clifford(const CliffordKernel& k, double t) { return k(t); }

/// sum_j (-1)^j g_P^(j) p_j.
CliffordKernel combination_kernel(const ExpPolyKernel& gP, std::span<const CliffordElement> p);

}  // namespace cliffsemi
