#pragma once

#include "cliffsemi/kernels.hpp"
#include "cliffsemi/module_ops.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cliffsemi {

/// Composite Gauss-Legendre rule for int_0^inf T(t) k(t) x dt.
struct QuadratureScheme {
  double tol = 1e-10;
  /// Nodes per panel.
  int order = 16;
  /// Starting panel width; 0 picks one from the decay and frequency scales.
  double initial_width = 0.0;
  std::size_t max_panels = 1u << 16;
  int max_refinements = 8;
  /// 0 reads CLIFFSEMI_THREADS, then falls back to the hardware count.
  int threads = 0;
};

template <class Value>
struct LapResult {
  Value value;
  double err_est = 0.0;
  double t_max = 0.0;
  std::size_t nodes = 0;
  std::vector<std::string> warnings;
};

using LapVector = LapResult<CliffordVector>;
using LapOperator = LapResult<CliffordMatrixOperator>;

/// Rate gap below which a hypothesis r > omega is treated as violated.
inline constexpr double kHypothesisMargin = 1e-3;

/// M C [Gamma(K+1, cT) / c^{K+1} + e^{-cT} / c] with c = r - omega.
double tail_bound(const Envelope& env, double omega, double M, double T);
/// Smallest T (to 0.1% relative) with tail_bound <= target.
double truncation_point(const Envelope& env, double omega, double M, double target);

/// requested > 0 wins; otherwise CLIFFSEMI_THREADS, then the hardware count.
int worker_threads(int requested = 0);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights);

LapVector lap_apply(const SemigroupEvaluator& s, const CliffordKernel& k, const CliffordVector& x,
                    const QuadratureScheme& scheme = {});
LapVector lap_apply(const SemigroupEvaluator& s, const ExpPolyKernel& k, const CliffordVector& x,
                    const QuadratureScheme& scheme = {});

LapOperator lap_operator_result(const SemigroupEvaluator& s, const CliffordKernel& k,
                                const QuadratureScheme& scheme = {});
LapOperator lap_operator_result(const SemigroupEvaluator& s, const ExpPolyKernel& k,
                                const QuadratureScheme& scheme = {});
inline CliffordMatrixOperator lap_operator(const SemigroupEvaluator& s, const CliffordKernel& k,
                                           const QuadratureScheme& scheme = {}) {
  return lap_operator_result(s, k, scheme).value;
}
inline CliffordMatrixOperator lap_operator(const SemigroupEvaluator& s, const ExpPolyKernel& k,
                                           const QuadratureScheme& scheme = {}) {
  return lap_operator_result(s, k, scheme).value;
}

/// P(A)^{-1} = Lap(g_P).
LapOperator p_inverse_via_laplace(const SemigroupEvaluator& s, const RealPolynomial& p,
                                  const QuadratureScheme& scheme = {});

/// sum_j A^j P(A)^{-1} p_j = Lap(sum_j (-1)^j g_P^(j) p_j), j <= deg P - 1.
LapOperator combo_via_laplace(const SemigroupEvaluator& s, const RealPolynomial& p,
                              std::span<const CliffordElement> coeffs, const QuadratureScheme& scheme = {});

/// Q_q(A) = Lap(g_q).
LapOperator quasi_resolvent(const SemigroupEvaluator& s, const ConeElement& q,
                            const QuadratureScheme& scheme = {});
/// A Q_q(A) = -Lap(g_q').
LapOperator a_quasi_resolvent(const SemigroupEvaluator& s, const ConeElement& q,
                              const QuadratureScheme& scheme = {});
/// C_q(A) = Lap(t -> e^{-t q}).
LapOperator resolvent(const SemigroupEvaluator& s, const ConeElement& q, const QuadratureScheme& scheme = {});
/// Q_q(A)^n = (-1)^n Lap((-g_q)^{*n}).
LapOperator qn_power_via_conv(const SemigroupEvaluator& s, const ConeElement& q, int power,
                              const QuadratureScheme& scheme = {});

double bound_P(const RealPolynomial& p, double omega, double M);
double bound_Q(const ConeElement& q, double omega, double M);
double bound_C(const ConeElement& q, double omega, double M);
double bound_Qn(const ConeElement& q, double omega, double M, int power);

/// Residuals (upper bracket norm) of the Lap identities for one real kernel.
///
/// An identity whose hypotheses fail for the kernel is reported as nullopt.
struct LapIdentityReport {
  /// A Lap(g) = -g(0) - Lap(g').
  std::optional<double> a;
  /// A^k Lap(g) = (-1)^k Lap(g^(k)), k <= m+1, and the A^{m+2} formula.
  std::optional<double> b;
  /// Largest m with g(0) = ... = g^(m)(0) = 0; -1 when g(0) != 0.
  int m = -1;
  /// Delta_q(A) Lap(g) = Id + Lap(g'' + 2 re(q) g' + |q|^2 g).
  std::optional<double> c;
  /// Largest coefficient of the corrector kernel g'' + 2 re(q) g' + |q|^2 g.
  std::optional<double> corrector;
  /// A Lap(g) = Lap(g) A.
  std::optional<double> d;
  /// A^k Lap(g) = Lap(g) A^k for k = 1..m+2.
  std::optional<double> e;
  /// Lap(f) Lap(g) = Lap(f * g).
  std::optional<double> star;

  double worst() const;
};

/// f defaults to g in the convolution identity.
LapIdentityReport verify_lap_identities(const SemigroupEvaluator& s, const ExpPolyKernel& g,
                                        const ConeElement& q, const QuadratureScheme& scheme = {},
                                        const ExpPolyKernel* f = nullptr);

}  // namespace cliffsemi
