#pragma once

#include "cliffsemi/json_io.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace cliffsemi {

/// Experiment configuration.  Every field has a default, so "{}" is valid.
///
///   seed, cases        case i uses Rng(seed + i)
///   n, d               signature and module dimension
///   margin, epsilon    stability margin of generated A, growth-bound safety
///   gap, spread        random P roots / q real parts lie in
///                      [omega + gap, omega + gap + spread]
///   degree             [lo, hi] degree range of random P
///   poly               fixed P, ascending coefficients
///   q                  fixed q, {"a","b","J"} or {"coeffs"}
///   operator           fixed A, inline or a path to a gen output file
///   npow               power for Q_q(A)^n
///   tol, check_tol     quadrature tolerance, pass tolerance against oracles
///   samples            random samples per algebra invariant (verify)
///   scheme             {"order","max_panels","initial_width","max_refinements","threads"}
///   out                report path; the CSV mirror goes next to it
///   record_timings     add wall-clock seconds to records
struct ExperimentConfig {
  std::uint64_t seed = 0;
  int cases = 1;
  int n = 2;
  int d = 2;
  double margin = 0.5;
  double epsilon = kGrowthSafety;
  double gap = 0.5;
  double spread = 2.5;
  int degree_lo = 2;
  int degree_hi = 5;
  std::optional<std::vector<double>> poly;
  std::optional<json> q;
  std::optional<CliffordMatrixOperator> op;
  int npow = 2;
  double tol = 1e-10;
  double check_tol = 1e-6;
  int samples = 1000;
  QuadratureScheme scheme;
  std::string out;
  bool record_timings = false;
};

/// Throws ConfigError on unknown keys, wrong types or violated constraints.
/// Relative operator paths are resolved against base_dir.
ExperimentConfig parse_config(const json& j, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);
/// Re-checks constraints after command-line overrides.
void validate(const ExperimentConfig& cfg);
json config_to_json(const ExperimentConfig& cfg);

enum class Status { pass, fail, skipped };
const char* to_string(Status s);

/// value <= limit
struct Check {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool pass = false;
};

struct CaseRecord {
  int index = 0;
  std::uint64_t seed = 0;
  std::string suite;
  Status status = Status::pass;
  std::string reason;
  json hypothesis = json::object();
  std::vector<Check> checks;
  json results = json::object();
  json inputs = json::object();
  std::vector<std::string> warnings;
  std::optional<double> seconds;

  void check(std::string name, double value, double limit);
  const Check* find(const std::string& name) const;
};

struct Report {
  std::string command;
  ExperimentConfig config;
  std::vector<CaseRecord> records;

  bool failed() const;
  /// 0 when every record passed or was skipped, 1 otherwise.
  int exit_code() const { return failed() ? 1 : 0; }
  json to_json() const;
  std::string to_csv() const;
};

/// Random stable operator with its growth data.
json cmd_gen(const ExperimentConfig& cfg);
/// P(A)^{-1} by quadrature against direct inversion and bound_P.
Report cmd_invert(const ExperimentConfig& cfg);
/// Q_q, A Q_q, C_q and Q_q^npow against their oracles and bounds.
Report cmd_resolvent(const ExperimentConfig& cfg);

struct VerifyHooks {
  std::function<CliffordElement(const CliffordElement&)> conjugate = [](const CliffordElement& q) {
    return cliffsemi::conjugate(q);
  };
};

/// Algebra axioms, kernel identities, spherical derivative and the
/// Laplace-transform identities.
Report cmd_verify(const ExperimentConfig& cfg, const VerifyHooks& hooks = {});

/// Writes the JSON report to cfg.out and the CSV mirror beside it
/// (extension replaced by .csv).  Throws ConfigError on I/O failure.
void write_report(const Report& r, const std::string& out);

}  // namespace cliffsemi
