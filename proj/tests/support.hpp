#pragma once

#include "cliffsemi/laplace.hpp"
#include "cliffsemi/module_ops.hpp"

#include <algorithm>
#include <cmath>

namespace cliffsemi::test {

inline double dist(const CliffordMatrixOperator& a, const CliffordMatrixOperator& b) { return upper_norm(a - b); }

inline double rel_dist(const CliffordMatrixOperator& a, const CliffordMatrixOperator& b) {
  return upper_norm(a - b) / std::max(upper_norm(b), 1e-300);
}

inline double dist(const CliffordVector& x, const CliffordVector& y) { return module_norm(x - y); }

inline CliffordMatrixOperator scalar_op(int n, int d, double c) { return CliffordMatrixOperator::scalar(n, d, c); }

/// A = c Id on Cl(0,n)^d with its exact growth data (omega = c + eps, M = 1).
inline SemigroupEvaluator scalar_semigroup(int n, int d, double c, double eps = kGrowthSafety) {
  GrowthBound g;
  g.alpha = c;
  g.omega = c + eps;
  g.M = 1.0;
  g.t_M = 0.0;
  g.certified = true;
  return SemigroupEvaluator(scalar_op(n, d, c), g);
}

/// x -> p x as an operator.
inline CliffordMatrixOperator left_mult(int n, int d, const CliffordElement& p) {
  return CliffordMatrixOperator::identity(n, d).right_factor(p);
}

}  // namespace cliffsemi::test
