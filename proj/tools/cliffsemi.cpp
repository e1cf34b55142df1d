#include "cliffsemi/errors.hpp"
#include "cliffsemi/experiment.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace cliffsemi;

namespace {

int summarize(const Report& r) {
  const auto j = r.to_json();
  const auto& s = j["summary"];
  std::cerr << r.command << ": " << s["pass"] << " pass, " << s["fail"] << " fail, " << s["skipped"] << " skipped\n";
  for (const auto& rec : r.records) {
    if (rec.status != Status::fail) continue;
    std::cerr << "  case " << rec.index << " (" << rec.suite << ") failed";
    if (!rec.reason.empty()) std::cerr << ": " << rec.reason;
    for (const auto& c : rec.checks)
      if (!c.pass) std::cerr << "\n    " << c.name << " = " << c.value << " > " << c.limit;
    std::cerr << "\n";
  }
  return r.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polynomial resolvents of Clifford-module semigroup generators"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<std::string> out;
  for (const char* name : {"gen", "invert", "resolvent", "verify"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--tol", tol, "override the quadrature tolerance");
    sub->add_option("--out", out, "report path");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  ExperimentConfig cfg;
  try {
    if (!config_path.empty()) cfg = load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (tol) cfg.tol = *tol;
    if (out) cfg.out = *out;
    validate(cfg);
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (command == "gen") {
      const auto j = cmd_gen(cfg);
      if (cfg.out.empty()) {
        std::cout << j.dump(2) << "\n";
      } else {
        std::ofstream f(cfg.out);
        if (!(f << j.dump(2) << "\n")) throw ConfigError("cannot write " + cfg.out);
      }
      return 0;
    }
    Report r = command == "invert" ? cmd_invert(cfg) : command == "resolvent" ? cmd_resolvent(cfg) : cmd_verify(cfg);
    if (cfg.out.empty())
      std::cout << r.to_json().dump(2) << "\n";
    else
      write_report(r, cfg.out);
    return summarize(r);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
