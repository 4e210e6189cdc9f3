// Experiment runner: reads an INI config, runs every seed, writes results.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qboost/qboost.hpp"

namespace {

void print_status(const nlohmann::json& j) { std::cout << j.dump() << std::endl; }

int fail(int code, const std::string& msg) {
  print_status({{"status", "error"}, {"exit", code}, {"message", msg}});
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum boosting simulator"};
  std::string config_path, oracle, seeds, out, verify, compare;
  double t_multiplier = 0.0;
  app.add_option("--config", config_path, "INI-style key=value config file")->required();
  app.add_option("--oracle", oracle, "exact|synthetic|adversarial-low|adversarial-high|qsim");
  app.add_option("--seeds", seeds, "seed count N (seeds 1..N) or comma list");
  app.add_option("--out", out, "output directory");
  app.add_option("--t-multiplier", t_multiplier, "multiplier for T=auto");
  app.add_option("--verify", verify, "on|off")->check(CLI::IsMember({"on", "off"}));
  app.add_option("--compare", compare, "comma list of oracle modes; writes compare.csv");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail(qboost::kExitParse, e.what());
  }

  qboost::ExperimentConfig cfg;
  try {
    std::ifstream in(config_path);
    if (!in) return fail(qboost::kExitIo, "cannot read " + config_path);
    cfg = qboost::parse_config(in);
    if (!oracle.empty()) cfg.oracle = qboost::parse_oracle_mode(oracle);
    if (!seeds.empty()) cfg.seeds = qboost::parse_seeds(seeds);
    if (!out.empty()) cfg.out = out;
    if (t_multiplier > 0.0) cfg.t_multiplier = t_multiplier;
    if (!verify.empty()) cfg.verify = verify == "on";
  } catch (const qboost::ParseError& e) {
    return fail(qboost::kExitParse, e.what());
  }

  if (!compare.empty()) {
    std::vector<qboost::OracleMode> modes;
    try {
      std::istringstream is(compare);
      std::string m;
      while (std::getline(is, m, ',')) modes.push_back(qboost::parse_oracle_mode(m));
      const auto rows = qboost::compare_modes(cfg, modes);
      std::filesystem::create_directories(cfg.out);
      std::ofstream f(std::filesystem::path(cfg.out) / "compare.csv");
      qboost::write_comparison(f, rows);
      f.close();
      if (!f) return fail(qboost::kExitIo, "cannot write compare.csv");
      print_status({{"status", "ok"}, {"exit", 0}, {"rows", rows.size()}, {"out", cfg.out}});
      return 0;
    } catch (const qboost::ParseError& e) {
      return fail(qboost::kExitParse, e.what());
    } catch (const qboost::WeakLearningViolation& e) {
      return fail(qboost::kExitWeakLearning, e.what());
    } catch (const std::filesystem::filesystem_error& e) {
      return fail(qboost::kExitIo, e.what());
    }
  }

  const auto outcome = qboost::run_experiment(cfg);
  print_status(outcome.status);
  return outcome.exit_code;
}
