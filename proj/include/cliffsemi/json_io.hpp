#pragma once

#include "cliffsemi/clifford.hpp"
#include "cliffsemi/kernels.hpp"
#include "cliffsemi/laplace.hpp"
#include "cliffsemi/module_ops.hpp"

#include <json.hpp>

namespace cliffsemi {

using json = nlohmann::json;

/// {"n": n, "coeffs": [2^n reals]} in bitmask order.
json element_to_json(const CliffordElement& q);
CliffordElement element_from_json(const json& j);

/// {"terms": [{"lambda": [re, im], "poly": [[re, im], ...]}, ...]}
json kernel_to_json(const ExpPolyKernel& k);
ExpPolyKernel kernel_from_json(const json& j);

/// {"n": n, "d": d, "entries": [[element, ...], ...]} row-major.
json operator_to_json(const CliffordMatrixOperator& a);
CliffordMatrixOperator operator_from_json(const json& j);

/// {"value": operator, "err_est": e, "t_max": T, "nodes": N}
json lap_result_to_json(const LapOperator& r);

/// Either {"a": a, "b": b, "J": [coeffs]} or {"coeffs": [...]} with "n";
/// the latter must pass the cone test.
ConeElement cone_from_json(const json& j, int n);

}  // namespace cliffsemi
