#include "cliffsemi/experiment.hpp"

#include "cliffsemi/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace cliffsemi {

namespace {

namespace fs = std::filesystem;

template <class T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field \"") + key + "\": " + e.what());
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = get<T>(j, key);
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const char* where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be a JSON object");
  const std::set<std::string> known(keys.begin(), keys.end());
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) throw ConfigError(std::string("unknown ") + where + " field \"" + key + "\"");
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

CliffordMatrixOperator operator_entry(const json& j, const fs::path& base) {
  if (j.is_string()) {
    fs::path p = j.get<std::string>();
    if (p.is_relative()) p = base / p;
    return operator_entry(read_json_file(p), base);
  }
  if (j.is_object() && j.contains("operator")) return operator_from_json(j.at("operator"));
  return operator_from_json(j);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel_dev(const CliffordMatrixOperator& x, const CliffordMatrixOperator& ref) {
  const double scale = upper_norm(ref);
  const double diff = upper_norm(x - ref);
  return scale > 0.0 ? diff / scale : diff;
}

QuadratureScheme scheme_of(const ExperimentConfig& cfg) {
  QuadratureScheme s = cfg.scheme;
  s.tol = cfg.tol;
  return s;
}

json growth_json(const SemigroupEvaluator& s) {
  const auto& g = s.growth();
  return {{"alpha", g.alpha}, {"omega", g.omega}, {"M", g.M}, {"certified", g.certified}};
}

constexpr int kNormProbes = 64;

CliffordMatrixOperator case_operator(const ExperimentConfig& cfg, Rng& rng) {
  return cfg.op ? *cfg.op : random_stable_operator(cfg.n, cfg.d, cfg.margin, rng);
}

RealPolynomial case_polynomial(const ExperimentConfig& cfg, double omega, Rng& rng) {
  if (cfg.poly) return RealPolynomial(*cfg.poly);
  const double lo = omega + cfg.gap;
  return random_polynomial(rng.integer(cfg.degree_lo, cfg.degree_hi), lo, lo + cfg.spread, 2.0, rng);
}

ConeElement case_cone(const ExperimentConfig& cfg, double omega, Rng& rng) {
  if (cfg.q) return cone_from_json(*cfg.q, cfg.n);
  const double a = omega + cfg.gap + rng.uniform(0.0, cfg.spread);
  return random_cone_element(cfg.n, a, rng.uniform(0.0, 3.0), rng);
}

json cone_json(const ConeElement& q) {
  return {{"a", q.re()}, {"b", q.im_norm()}, {"J", element_to_json(q.unit())["coeffs"]},
          {"element", element_to_json(q.element())}};
}

void append(std::vector<std::string>& to, const std::vector<std::string>& from) {
  for (const auto& w : from)
    if (std::find(to.begin(), to.end(), w) == to.end()) to.push_back(w);
}

/// Runs body on a fresh record; hypothesis violations become skips and other
/// library errors become failures carrying the message.
template <class Body>
CaseRecord run_case(const ExperimentConfig& cfg, int index, const std::string& suite, Body body) {
  CaseRecord rec;
  rec.index = index;
  rec.seed = cfg.seed + static_cast<std::uint64_t>(index);
  rec.suite = suite;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    Rng rng(rec.seed);
    body(rec, rng);
    if (rec.status != Status::skipped)
      rec.status = std::all_of(rec.checks.begin(), rec.checks.end(), [](const Check& c) { return c.pass; })
                       ? Status::pass
                       : Status::fail;
  } catch (const HypothesisError& e) {
    rec.status = Status::skipped;
    rec.reason = std::string("hypothesis violated: ") + e.what();
  } catch (const Error& e) {
    rec.status = Status::fail;
    rec.reason = e.what();
  }
  if (cfg.record_timings) rec.seconds = seconds_since(t0);
  return rec;
}

void skip_if_close(double rate, double omega, const char* what) {
  if (rate - omega < kHypothesisMargin)
    throw HypothesisError(std::string(what) + " - omega = " + std::to_string(rate - omega) + " is below the margin",
                          rate, omega);
}

std::string csv_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// --- verify suites -----------------------------------------------------------

CliffordElement integer_element(int n, Rng& rng) {
  std::vector<double> c(std::size_t{1} << n);
  for (auto& v : c) v = rng.integer(-3, 3);
  return CliffordElement(n, c);
}

void algebra_suite(CaseRecord& rec, Rng& rng, int samples, const VerifyHooks& hooks) {
  double assoc = 0.0, anti = 0.0, invol = 0.0, submult = -std::numeric_limits<double>::infinity();
  double cone_norm = 0.0, exp_law = 0.0;
  for (int n = 1; n <= 4; ++n) {
    for (int k = 0; k < samples; ++k) {
      const auto p = random_element(n, rng);
      const auto q = random_element(n, rng);
      const auto r = random_element(n, rng);
      assoc = std::max(assoc, max_abs_diff((p * q) * r, p * (q * r)));
      submult = std::max(submult, clifford_operator_norm(p * q) -
                                      clifford_operator_norm(p) * clifford_operator_norm(q));

      const auto pi = integer_element(n, rng);
      const auto qi = integer_element(n, rng);
      anti = std::max(anti, max_abs_diff(hooks.conjugate(pi * qi), hooks.conjugate(qi) * hooks.conjugate(pi)));
      invol = std::max(invol, max_abs_diff(hooks.conjugate(hooks.conjugate(pi)), pi));

      const auto c = random_cone_element(n, rng.uniform(-2.0, 2.0), rng.uniform(0.0, 2.0), rng);
      const double nrm = clifford_operator_norm(c.element());
      const double sq = (c.element() * hooks.conjugate(c.element())).scalar_part();
      cone_norm = std::max(cone_norm, std::abs(nrm * nrm - sq) / std::max(sq, 1e-300));

      const double t = rng.uniform(-1.0, 1.0);
      const double u = rng.uniform(-1.0, 1.0);
      exp_law = std::max(exp_law, max_abs_diff(exp_cone(t, c) * exp_cone(u, c), exp_cone(t + u, c)) /
                                      std::max(1.0, euclidean_norm(exp_cone(t + u, c))));
    }
  }
  rec.check("associativity", assoc, 1e-12);
  rec.check("anti_automorphism", anti, 0.0);
  rec.check("involution", invol, 0.0);
  rec.check("submultiplicativity", submult, 1e-10);
  rec.check("cone_norm_identity", cone_norm, 1e-10);
  rec.check("exp_cone_law", exp_law, 1e-10);

  const auto one = CliffordElement::scalar(3, 1.0);
  const auto e123 = CliffordElement::blade(3, 0b111);
  rec.check("zero_divisor", max_abs_diff((one - e123) * (one + e123), CliffordElement(3)), 0.0);
  const auto sq = (one + e123) * (one + e123);
  rec.check("norm_of_square", std::abs(euclidean_norm(sq) - std::sqrt(8.0)), 1e-15);
  rec.inputs = {{"max_n", 4}, {"samples_per_n", samples}};
}

double grid_diff(const ExpPolyKernel& f, const ExpPolyKernel& g, double t_end, int points) {
  double m = 0.0;
  for (int i = 0; i < points; ++i) {
    const double t = t_end * i / (points - 1);
    m = std::max(m, std::abs(f(t) - g(t)));
  }
  return m;
}

double max_coeff(const ExpPolyKernel& k) {
  double m = 0.0;
  for (const auto& term : k.terms())
    for (const auto& c : term.poly) m = std::max(m, std::abs(c));
  return m;
}

// sum of |c t^k e^{-lambda t}|, the scale of rounding error in evaluating k(t)
double term_magnitude(const ExpPolyKernel& k, double t) {
  double m = 0.0;
  for (const auto& term : k.terms()) {
    double tk = 1.0;
    for (const auto& c : term.poly) {
      m += std::abs(c) * tk * std::exp(-term.lambda.real() * t);
      tk *= t;
    }
  }
  return m;
}

void kernel_suite(CaseRecord& rec, Rng& rng) {
  constexpr int kPolys = 100;
  double ode = 0.0;
  int flagged = 0;
  for (int k = 0; k < kPolys; ++k) {
    const auto p = random_polynomial(rng.integer(2, 6), -2.0, 2.0, 3.0, rng);
    const auto pk = build_gP(p);
    flagged += pk.flagged;
    ode = std::max(ode, max_coeff(ode_residual(p, pk.g)));
  }
  rec.check("ode_residual", ode, 1e-9);

  double gq = 0.0, series = 0.0, corollary = 0.0, corrector = 0.0;
  int violations = 0;
  int unresolved = 0;
  for (int k = 0; k < 20; ++k) {
    const int n = rng.integer(1, 4);
    const auto q = random_cone_element(n, rng.uniform(-0.5, 3.0), rng.uniform(0.0, 3.0), rng);
    const auto g = build_gq(q);
    gq = std::max(gq, grid_diff(build_gP(RealPolynomial::delta(q)).g, g, 10.0, 50));
    const auto corr = derivative(g, 2) + (2.0 * q.re()) * derivative(g) + q.norm_sq() * g;
    corrector = std::max(corrector, max_coeff(corr) / std::max(1.0, q.norm_sq()));
    if (q.re() > 0.0) {
      for (int power = 1; power <= 4; ++power) {
        const auto gn = conv_power(g, power);
        for (int i = 0; i <= 100; ++i) {
          const double t = 0.2 * i;
          const double bound = std::pow(t, 2 * power - 1) * std::exp(-t * q.re()) / std::tgamma(2.0 * power);
          const double rounding = 64 * std::numeric_limits<double>::epsilon() * term_magnitude(gn, t);
          unresolved += rounding > bound;
          violations += std::abs(gn(t)) > bound * (1 + 1e-9) + rounding;
        }
      }
    }
  }
  for (int k = 0; k < 200; ++k) {
    const int n = rng.integer(1, 4);
    const double b = rng.uniform(0.0, 3.0);
    const double t = rng.uniform(-5.0, 5.0) / std::max(b, 1.0);
    const auto q = random_cone_element(n, rng.uniform(-0.5, 0.5), b, rng);
    const double closed = sph_deriv_exp(t, q);
    series = std::max(series, max_abs_diff(sph_deriv_exp_series(t, q), CliffordElement::scalar(n, closed)) /
                                  std::max(1.0, std::abs(closed)));
    const double s = std::abs(t);
    const double g = build_gq(q)(s);
    corollary = std::max(corollary, std::abs(sph_deriv_exp(-s, q) + g) / std::max(1.0, std::abs(g)));
  }
  rec.check("gP_of_delta_equals_gq", gq, 1e-12);
  rec.check("gq_corrector", corrector, 1e-12);
  rec.check("sph_deriv_series", series, 1e-12);
  rec.check("sph_deriv_equals_minus_gq", corollary, 1e-12);
  rec.check("conv_power_bound_violations", violations, 0.0);
  rec.inputs = {{"polynomials", kPolys}, {"flagged", flagged}};
  rec.results = {{"conv_power_points_below_rounding", unresolved}};
}

void lap_suite(const ExperimentConfig& cfg, CaseRecord& rec, Rng& rng) {
  const auto a = case_operator(cfg, rng);
  const SemigroupEvaluator s(a, cfg.epsilon);
  rec.hypothesis = growth_json(s);
  const double lo = s.omega() + cfg.gap;
  const auto p = random_polynomial(rng.integer(cfg.degree_lo, cfg.degree_hi), lo, lo + cfg.spread, 2.0, rng);
  const auto f = random_polynomial(2, lo, lo + cfg.spread, 2.0, rng);
  const auto q = case_cone(cfg, s.omega(), rng);
  const auto pk = build_gP(p);
  const auto fk = build_gP(f).g;
  skip_if_close(std::min(pk.roots.r_P, q.re()), s.omega(), "kernel rate");
  rec.hypothesis["rate"] = std::min(pk.roots.r_P, q.re());

  const auto scheme = scheme_of(cfg);
  const auto rp = verify_lap_identities(s, pk.g, q, scheme, &fk);
  const auto rq = verify_lap_identities(s, build_gq(q), q, scheme);
  const double lim = cfg.check_tol;
  auto put = [&](const char* name, const std::optional<double>& v) {
    if (v) rec.check(name, *v, lim);
  };
  put("a", rp.a);
  put("b", rp.b);
  put("d", rp.d);
  put("e", rp.e);
  put("convolution", rp.star);
  put("gq_a", rq.a);
  put("gq_b", rq.b);
  put("gq_c", rq.c);
  put("gq_d", rq.d);
  put("gq_e", rq.e);
  if (rq.corrector) rec.check("gq_corrector", *rq.corrector, 1e-12 * std::max(1.0, q.norm_sq()));
  rec.results = {{"m", rp.m}, {"gq_m", rq.m}};
  rec.inputs = {{"operator", operator_to_json(a)},
                {"poly", std::vector<double>(p.coeffs().begin(), p.coeffs().end())},
                {"f_poly", std::vector<double>(f.coeffs().begin(), f.coeffs().end())},
                {"q", cone_json(q)}};
  if (!s.growth().certified) rec.warnings.push_back("growth bound not certified");
}

}  // namespace

// --- configuration -------------------------------------------------------------

ExperimentConfig parse_config(const json& j, const std::string& base_dir) {
  reject_unknown(j,
                 {"seed", "cases", "n", "d", "margin", "epsilon", "gap", "spread", "degree", "poly", "q", "operator",
                  "npow", "tol", "check_tol", "samples", "scheme", "out", "record_timings"},
                 "config");
  ExperimentConfig cfg;
  read(j, "seed", cfg.seed);
  read(j, "cases", cfg.cases);
  read(j, "n", cfg.n);
  read(j, "d", cfg.d);
  read(j, "margin", cfg.margin);
  read(j, "epsilon", cfg.epsilon);
  read(j, "gap", cfg.gap);
  read(j, "spread", cfg.spread);
  if (j.contains("degree")) {
    const auto deg = get<std::vector<int>>(j, "degree");
    if (deg.size() != 2) throw ConfigError("degree is a [lo, hi] pair");
    cfg.degree_lo = deg[0];
    cfg.degree_hi = deg[1];
  }
  if (j.contains("poly")) cfg.poly = get<std::vector<double>>(j, "poly");
  read(j, "npow", cfg.npow);
  read(j, "tol", cfg.tol);
  read(j, "check_tol", cfg.check_tol);
  read(j, "samples", cfg.samples);
  read(j, "out", cfg.out);
  read(j, "record_timings", cfg.record_timings);
  if (j.contains("scheme")) {
    const auto& s = j.at("scheme");
    reject_unknown(s, {"order", "max_panels", "initial_width", "max_refinements", "threads"}, "scheme");
    read(s, "order", cfg.scheme.order);
    read(s, "max_panels", cfg.scheme.max_panels);
    read(s, "initial_width", cfg.scheme.initial_width);
    read(s, "max_refinements", cfg.scheme.max_refinements);
    read(s, "threads", cfg.scheme.threads);
  }
  if (j.contains("operator")) {
    cfg.op = operator_entry(j.at("operator"), base_dir);
    if (j.contains("n") && cfg.n != cfg.op->n()) throw ConfigError("n disagrees with the operator");
    if (j.contains("d") && cfg.d != cfg.op->d()) throw ConfigError("d disagrees with the operator");
    cfg.n = cfg.op->n();
    cfg.d = cfg.op->d();
  }
  if (j.contains("q")) cfg.q = j.at("q");
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  const fs::path p(path);
  return parse_config(read_json_file(p), p.parent_path().empty() ? "." : p.parent_path().string());
}

void validate(const ExperimentConfig& cfg) {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(cfg.n >= 1 && cfg.n <= kMaxSignature, "n must be in 1..6");
  require(cfg.d >= 1, "d must be positive");
  require(cfg.cases >= 1, "cases must be positive");
  require(std::isfinite(cfg.margin) && cfg.margin >= 0.0, "margin must be non-negative");
  require(cfg.epsilon > 0.0, "epsilon must be positive");
  require(cfg.gap > 0.0 && cfg.spread >= 0.0, "gap must be positive and spread non-negative");
  require(cfg.degree_lo >= 2 && cfg.degree_lo <= cfg.degree_hi && cfg.degree_hi <= 12, "degree must satisfy 2 <= lo <= hi <= 12");
  if (cfg.poly) {
    require(cfg.poly->size() >= 3, "poly needs degree at least 2");
    require(std::all_of(cfg.poly->begin(), cfg.poly->end(), [](double c) { return std::isfinite(c); }),
            "poly coefficients must be finite");
    require(cfg.poly->back() != 0.0, "leading coefficient of poly must be nonzero");
  }
  if (cfg.q) cone_from_json(*cfg.q, cfg.n);
  require(cfg.npow >= 1, "npow must be positive");
  require(cfg.tol > 0.0 && std::isfinite(cfg.tol), "tol must be positive");
  require(cfg.check_tol > 0.0, "check_tol must be positive");
  require(cfg.samples >= 1, "samples must be positive");
  require(cfg.scheme.order >= 1 && cfg.scheme.order <= 64, "scheme.order must be in 1..64");
  require(cfg.scheme.max_panels >= 1, "scheme.max_panels must be positive");
  require(cfg.scheme.initial_width >= 0.0, "scheme.initial_width must be non-negative");
  require(cfg.scheme.max_refinements >= 0, "scheme.max_refinements must be non-negative");
  require(cfg.scheme.threads >= 0, "scheme.threads must be non-negative");
  require(fs::path(cfg.out).extension() != ".csv", "out names the JSON report, not the CSV mirror");
}

json config_to_json(const ExperimentConfig& cfg) {
  json j = {{"seed", cfg.seed},
            {"cases", cfg.cases},
            {"n", cfg.n},
            {"d", cfg.d},
            {"margin", cfg.margin},
            {"epsilon", cfg.epsilon},
            {"gap", cfg.gap},
            {"spread", cfg.spread},
            {"degree", {cfg.degree_lo, cfg.degree_hi}},
            {"npow", cfg.npow},
            {"tol", cfg.tol},
            {"check_tol", cfg.check_tol},
            {"samples", cfg.samples},
            {"scheme",
             {{"order", cfg.scheme.order},
              {"max_panels", cfg.scheme.max_panels},
              {"initial_width", cfg.scheme.initial_width},
              {"max_refinements", cfg.scheme.max_refinements}}},
            {"record_timings", cfg.record_timings}};
  if (cfg.poly) j["poly"] = *cfg.poly;
  if (cfg.q) j["q"] = *cfg.q;
  if (cfg.op) j["operator"] = operator_to_json(*cfg.op);
  return j;
}

// --- records and reports -------------------------------------------------------

const char* to_string(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::skipped: return "skipped";
  }
  return "?";
}

void CaseRecord::check(std::string name, double value, double limit) {
  checks.push_back({std::move(name), value, limit, value <= limit});
}

const Check* CaseRecord::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

bool Report::failed() const {
  return std::any_of(records.begin(), records.end(), [](const CaseRecord& r) { return r.status == Status::fail; });
}

json Report::to_json() const {
  json recs = json::array();
  int counts[3] = {0, 0, 0};
  for (const auto& r : records) {
    ++counts[static_cast<int>(r.status)];
    json checks = json::array();
    for (const auto& c : r.checks)
      checks.push_back({{"name", c.name}, {"value", c.value}, {"limit", c.limit}, {"pass", c.pass}});
    json j = {{"case", r.index},
              {"seed", r.seed},
              {"suite", r.suite},
              {"status", to_string(r.status)},
              {"hypothesis", r.hypothesis},
              {"checks", checks},
              {"results", r.results},
              {"inputs", r.inputs},
              {"warnings", r.warnings}};
    if (!r.reason.empty()) j["reason"] = r.reason;
    if (r.seconds) j["seconds"] = *r.seconds;
    recs.push_back(std::move(j));
  }
  return {{"schema", 1},
          {"command", command},
          {"config", config_to_json(config)},
          {"records", recs},
          {"summary", {{"pass", counts[0]}, {"fail", counts[1]}, {"skipped", counts[2]}}},
          {"status", failed() ? "fail" : "pass"}};
}

std::string Report::to_csv() const {
  std::ostringstream out;
  out << "case,seed,suite,status,check,value,limit,pass\n";
  for (const auto& r : records) {
    const std::string head = std::to_string(r.index) + "," + std::to_string(r.seed) + "," + csv_field(r.suite) + "," +
                             to_string(r.status) + ",";
    if (r.checks.empty()) out << head << ",,,\n";
    for (const auto& c : r.checks)
      out << head << csv_field(c.name) << "," << csv_number(c.value) << "," << csv_number(c.limit) << ","
          << (c.pass ? "true" : "false") << "\n";
  }
  return out.str();
}

void write_report(const Report& r, const std::string& out) {
  const fs::path json_path(out);
  fs::path csv_path = json_path;
  csv_path.replace_extension(".csv");
  std::ofstream js(json_path);
  if (!js) throw ConfigError("cannot write " + json_path.string());
  js << r.to_json().dump(2) << "\n";
  std::ofstream cs(csv_path);
  if (!cs) throw ConfigError("cannot write " + csv_path.string());
  cs << r.to_csv();
  if (!js || !cs) throw ConfigError("write failed for " + out);
}

// --- commands -----------------------------------------------------------------

json cmd_gen(const ExperimentConfig& cfg) {
  Rng rng(cfg.seed);
  const auto a = case_operator(cfg, rng);
  const auto g = growth_bound(a, cfg.epsilon);
  return {{"schema", 1},
          {"seed", cfg.seed},
          {"n", a.n()},
          {"d", a.d()},
          {"margin", cfg.margin},
          {"spectral_abscissa", g.alpha},
          {"omega", g.omega},
          {"M", g.M},
          {"certified", g.certified},
          {"operator", operator_to_json(a)}};
}

Report cmd_invert(const ExperimentConfig& cfg) {
  Report rep{"invert", cfg, {}};
  const auto scheme = scheme_of(cfg);
  for (int i = 0; i < cfg.cases; ++i) {
    rep.records.push_back(run_case(cfg, i, "invert", [&](CaseRecord& rec, Rng& rng) {
      const auto a = case_operator(cfg, rng);
      const SemigroupEvaluator s(a, cfg.epsilon);
      rec.hypothesis = growth_json(s);
      const auto p = case_polynomial(cfg, s.omega(), rng);
      const auto pk = build_gP(p);
      rec.hypothesis["r_P"] = pk.roots.r_P;
      rec.inputs = {{"operator", operator_to_json(a)},
                    {"poly", std::vector<double>(p.coeffs().begin(), p.coeffs().end())},
                    {"kernel", kernel_to_json(pk.g)}};
      skip_if_close(pk.roots.r_P, s.omega(), "r_P");

      const auto lap = p_inverse_via_laplace(s, p, scheme);
      append(rec.warnings, lap.warnings);
      const auto pa = poly_of_operator(p, a);
      const auto inv = direct_inverse(pa);
      rec.check("rel_dev", rel_dev(lap.value, inv), cfg.check_tol);
      rec.check("residual", upper_norm(pa * lap.value - CliffordMatrixOperator::identity(a.n(), a.d())),
                cfg.check_tol);
      rec.check("err_est", lap.err_est, cfg.tol);
      rec.check("norm_lower<=bound_P", lower_norm(inv, kNormProbes, rec.seed), bound_P(p, s.omega(), s.M()));
      rec.results = {{"X", lap_result_to_json(lap)}};
    }));
  }
  return rep;
}

Report cmd_resolvent(const ExperimentConfig& cfg) {
  Report rep{"resolvent", cfg, {}};
  const auto scheme = scheme_of(cfg);
  for (int i = 0; i < cfg.cases; ++i) {
    rep.records.push_back(run_case(cfg, i, "resolvent", [&](CaseRecord& rec, Rng& rng) {
      const auto a = case_operator(cfg, rng);
      const SemigroupEvaluator s(a, cfg.epsilon);
      rec.hypothesis = growth_json(s);
      const auto q = case_cone(cfg, s.omega(), rng);
      rec.hypothesis["re_q"] = q.re();
      rec.inputs = {{"operator", operator_to_json(a)}, {"q", cone_json(q)}, {"kernel", kernel_to_json(build_gq(q))}};
      skip_if_close(q.re(), s.omega(), "re(q)");

      const auto lq = quasi_resolvent(s, q, scheme);
      const auto laq = a_quasi_resolvent(s, q, scheme);
      const auto lc = resolvent(s, q, scheme);
      const auto lqn = qn_power_via_conv(s, q, cfg.npow, scheme);
      for (const auto* r : {&lq, &laq, &lc, &lqn}) append(rec.warnings, r->warnings);

      const auto dq = delta_q(a, q);
      const auto qo = direct_inverse(dq);
      const auto co = qo.right_factor(conjugate(q.element())) - a * qo;
      auto qno = qo;
      for (int k = 1; k < cfg.npow; ++k) qno = qno * qo;
      const double omega = s.omega();
      const double m = s.M();
      rec.check("Q.rel_dev", rel_dev(lq.value, qo), cfg.check_tol);
      rec.check("Q.residual", upper_norm(dq * lq.value - CliffordMatrixOperator::identity(a.n(), a.d())),
                cfg.check_tol);
      rec.check("AQ.rel_dev", rel_dev(laq.value, a * qo), cfg.check_tol);
      rec.check("C.rel_dev", rel_dev(lc.value, co), cfg.check_tol);
      rec.check("Qn.rel_dev", rel_dev(lqn.value, qno), cfg.check_tol);
      rec.check("norm_lower<=bound_Q", lower_norm(qo, kNormProbes, rec.seed), bound_Q(q, omega, m));
      rec.check("norm_lower<=bound_C", lower_norm(co, kNormProbes, rec.seed), bound_C(q, omega, m));
      rec.check("norm_lower<=bound_Qn", lower_norm(qno, kNormProbes, rec.seed), bound_Qn(q, omega, m, cfg.npow));
      rec.results = {{"Q", lap_result_to_json(lq)},
                     {"AQ", lap_result_to_json(laq)},
                     {"C", lap_result_to_json(lc)},
                     {"Qn", lap_result_to_json(lqn)},
                     {"npow", cfg.npow},
                     {"bounds",
                      {{"Q", bound_Q(q, omega, m)}, {"C", bound_C(q, omega, m)}, {"Qn", bound_Qn(q, omega, m, cfg.npow)}}}};
    }));
  }
  return rep;
}

Report cmd_verify(const ExperimentConfig& cfg, const VerifyHooks& hooks) {
  Report rep{"verify", cfg, {}};
  rep.records.push_back(
      run_case(cfg, 0, "algebra", [&](CaseRecord& rec, Rng& rng) { algebra_suite(rec, rng, cfg.samples, hooks); }));
  rep.records.push_back(run_case(cfg, 0, "kernels", [&](CaseRecord& rec, Rng& rng) { kernel_suite(rec, rng); }));
  for (int i = 0; i < cfg.cases; ++i)
    rep.records.push_back(
        run_case(cfg, i, "lap_identities", [&](CaseRecord& rec, Rng& rng) { lap_suite(cfg, rec, rng); }));
  return rep;
}

}  // namespace cliffsemi
