#include "cliffsemi/json_io.hpp"

#include "cliffsemi/errors.hpp"

#include <string>

namespace cliffsemi {

namespace {

template <class T>
T field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string("missing field \"") + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field \"") + key + "\": " + e.what());
  }
}

json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError("complex numbers are [re, im] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

json element_to_json(const CliffordElement& q) {
  return {{"n", q.n()}, {"coeffs", std::vector<double>(q.coeffs().begin(), q.coeffs().end())}};
}

CliffordElement element_from_json(const json& j) {
  try {
    return CliffordElement(field<int>(j, "n"), field<std::vector<double>>(j, "coeffs"));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("Clifford element: ") + e.what());
  }
}

json kernel_to_json(const ExpPolyKernel& k) {
  json terms = json::array();
  for (const auto& t : k.terms()) {
    json poly = json::array();
    for (const auto& c : t.poly) poly.push_back(complex_to_json(c));
    terms.push_back({{"lambda", complex_to_json(t.lambda)}, {"poly", poly}});
  }
  return {{"terms", terms}};
}

ExpPolyKernel kernel_from_json(const json& j) {
  const auto terms = field<json>(j, "terms");
  if (!terms.is_array()) throw ConfigError("kernel terms must be an array");
  std::vector<KernelTerm> out;
  for (const auto& t : terms) {
    KernelTerm term{complex_from_json(field<json>(t, "lambda")), {}};
    const auto poly = field<json>(t, "poly");
    if (!poly.is_array()) throw ConfigError("kernel polynomial must be an array");
    for (const auto& c : poly) term.poly.push_back(complex_from_json(c));
    out.push_back(std::move(term));
  }
  try {
    return ExpPolyKernel(std::move(out));
  } catch (const Error& e) {
    throw ConfigError(std::string("kernel: ") + e.what());
  }
}

json operator_to_json(const CliffordMatrixOperator& a) {
  json rows = json::array();
  for (int i = 0; i < a.d(); ++i) {
    json row = json::array();
    for (int j = 0; j < a.d(); ++j) row.push_back(element_to_json(a(i, j)));
    rows.push_back(row);
  }
  return {{"n", a.n()}, {"d", a.d()}, {"entries", rows}};
}

CliffordMatrixOperator operator_from_json(const json& j) {
  const int n = field<int>(j, "n");
  const int d = field<int>(j, "d");
  const auto rows = field<json>(j, "entries");
  if (d < 1 || !rows.is_array() || rows.size() != static_cast<std::size_t>(d))
    throw ConfigError("operator needs d rows of entries");
  std::vector<CliffordElement> entries;
  for (const auto& row : rows) {
    if (!row.is_array() || row.size() != static_cast<std::size_t>(d)) throw ConfigError("operator rows need d entries");
    for (const auto& e : row) {
      auto q = element_from_json(e);
      if (q.n() != n) throw ConfigError("operator entry has the wrong signature");
      entries.push_back(std::move(q));
    }
  }
  return CliffordMatrixOperator(n, d, std::move(entries));
}

json lap_result_to_json(const LapOperator& r) {
  return {{"value", operator_to_json(r.value)}, {"err_est", r.err_est}, {"t_max", r.t_max}, {"nodes", r.nodes}};
}

ConeElement cone_from_json(const json& j, int n) {
  if (!j.is_object()) throw ConfigError("q must be an object");
  try {
    if (j.contains("coeffs")) {
      const CliffordElement q(j.value("n", n), field<std::vector<double>>(j, "coeffs"));
      if (q.n() != n) throw ConfigError("q has the wrong signature");
      return to_cone(q);
    }
    const double a = field<double>(j, "a");
    const double b = field<double>(j, "b");
    const CliffordElement unit =
        j.contains("J") ? CliffordElement(n, field<std::vector<double>>(j, "J")) : CliffordElement::generator(n, 1);
    return ConeElement::from_slice(a, b, unit);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("q: ") + e.what());
  }
}

}  // namespace cliffsemi
