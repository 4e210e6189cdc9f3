#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qboost/boostcore.hpp"
#include "qboost/concepts.hpp"
#include "qboost/driver.hpp"
#include "qboost/estimators.hpp"
#include "qboost/verify.hpp"

namespace qboost {

enum ExitCode : int { kExitOk = 0, kExitParse = 2, kExitWeakLearning = 3, kExitIo = 4 };

struct ExperimentConfig {
  std::string concept_spec = "majority";
  int n = 3;
  std::string sampler_spec = "uniform";
  std::size_t M = 8;
  std::optional<int> T;  // nullopt means auto
  int Q = 4;
  double gamma_floor = 0.25;
  OracleMode oracle = OracleMode::qsim;
  WeakLearnerSpec::Mode learner = WeakLearnerSpec::Mode::distribution_aware;
  std::vector<std::uint64_t> seeds = {1};
  std::string out = "out";
  double t_multiplier = 1.0;
  bool verify = true;
  bool amplification_failures = true;
  std::optional<double> delta;
  std::size_t heldout = 0;  // 0 means the full domain when n <= 16
  int threads = 0;          // 0 means hardware concurrency

  int resolved_T() const { return T ? *T : default_rounds(M, gamma_floor, t_multiplier); }

  WeakLearnerSpec learner_spec() const {
    WeakLearnerSpec s;
    s.mode = learner;
    s.Q = Q;
    s.gamma_floor = gamma_floor;
    return s;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  std::istringstream is(v);
  T out{};
  if (!(is >> out) || !is.eof()) throw ParseError("bad value for " + key + ": '" + v + "'");
  return out;
}

inline bool parse_switch(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw ParseError("bad value for " + key + ": '" + v + "' (expected on/off)");
}

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

// A single integer N means seeds 1..N; a comma list gives explicit seeds.
inline std::vector<std::uint64_t> parse_seeds(const std::string& v) {
  std::vector<std::uint64_t> out;
  if (v.find(',') == std::string::npos) {
    const auto n = detail::parse_number<std::uint64_t>("seeds", v);
    if (n == 0) throw ParseError("seeds must be positive");
    for (std::uint64_t i = 1; i <= n; ++i) out.push_back(i);
    return out;
  }
  std::istringstream is(v);
  std::string item;
  while (std::getline(is, item, ',')) out.push_back(detail::parse_number<std::uint64_t>("seeds", detail::trim(item)));
  return out;
}

inline WeakLearnerSpec::Mode parse_learner_mode(const std::string& v) {
  if (v == "distribution-aware") return WeakLearnerSpec::Mode::distribution_aware;
  if (v == "sample-based") return WeakLearnerSpec::Mode::sample_based;
  throw ParseError("unknown learner '" + v + "'");
}

inline const char* to_string(WeakLearnerSpec::Mode m) {
  return m == WeakLearnerSpec::Mode::distribution_aware ? "distribution-aware" : "sample-based";
}

inline void apply_config_key(ExperimentConfig& c, const std::string& key, const std::string& v) {
  using detail::parse_number;
  if (key == "concept") c.concept_spec = v;
  else if (key == "n") c.n = parse_number<int>(key, v);
  else if (key == "sampler") c.sampler_spec = v;
  else if (key == "M") c.M = parse_number<std::size_t>(key, v);
  else if (key == "T") c.T = v == "auto" ? std::nullopt : std::optional<int>(parse_number<int>(key, v));
  else if (key == "Q") c.Q = parse_number<int>(key, v);
  else if (key == "gamma_floor") c.gamma_floor = parse_number<double>(key, v);
  else if (key == "oracle") c.oracle = parse_oracle_mode(v);
  else if (key == "learner") c.learner = parse_learner_mode(v);
  else if (key == "seeds") c.seeds = parse_seeds(v);
  else if (key == "out") c.out = v;
  else if (key == "t_multiplier") c.t_multiplier = parse_number<double>(key, v);
  else if (key == "verify") c.verify = detail::parse_switch(key, v);
  else if (key == "amplification_failures") c.amplification_failures = detail::parse_switch(key, v);
  else if (key == "delta") c.delta = parse_number<double>(key, v);
  else if (key == "heldout") c.heldout = parse_number<std::size_t>(key, v);
  else if (key == "threads") c.threads = parse_number<int>(key, v);
  else throw ParseError("unknown config key '" + key + "'");
}

// Flat key=value lines; '#' and ';' start comments, [section] lines are ignored.
inline ExperimentConfig parse_config(std::istream& is) {
  ExperimentConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("line " + std::to_string(lineno) + ": expected key=value");
    apply_config_key(c, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  return c;
}

inline void validate_config(const ExperimentConfig& c) {
  try {
    (void)parse_concept(c.concept_spec, c.n);
    (void)parse_sampler(c.sampler_spec, c.n);
    if (c.M < 1) throw ParseError("M must be >= 1");
    if (c.T && *c.T < 1) throw ParseError("T must be >= 1");
    if (c.t_multiplier <= 0.0) throw ParseError("t_multiplier must be positive");
    if (c.seeds.empty()) throw ParseError("at least one seed is required");
    c.learner_spec().validate();
    if (c.n < 63 && c.M > (std::uint64_t{1} << c.n)) throw ParseError("M exceeds the number of distinct inputs");
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what());
  }
}

struct SeedResult {
  std::uint64_t seed = 0;
  std::string status = "ok";  // ok | failed | weak-learning
  std::string message;
  TrainingSet training;
  std::optional<QuantumRun> run;
  double train_err = 1.0;
  double heldout_err = 1.0;
};

inline bool is_stump_unlearnable(const Concept& c) {
  return c.kind() == Concept::Kind::parity && std::popcount(c.mask()) >= 2;
}

template <class F>
void parallel_for(std::size_t count, int threads, F&& body) {
  unsigned hw = threads > 0 ? static_cast<unsigned>(threads) : std::max(1u, std::thread::hardware_concurrency());
  hw = static_cast<unsigned>(std::min<std::size_t>(hw, count));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(hw);
  for (unsigned w = 0; w < hw; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < count; i = next++) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline SeedResult run_seed(const ExperimentConfig& c, std::uint64_t seed, OracleMode mode) {
  SeedResult res;
  res.seed = seed;
  DefaultRng rng(seed);
  const Concept concept_fn = parse_concept(c.concept_spec, c.n);
  const Sampler sampler = parse_sampler(c.sampler_spec, c.n);
  res.training = generate_training_set(concept_fn, sampler, c.M, rng);
  QuantumBoostOptions opt;
  opt.mode = mode;
  opt.delta_override = c.delta;
  opt.amplification_failures = c.amplification_failures;
  try {
    res.run = run_quantum_boost(res.training, c.learner_spec(), c.resolved_T(), opt, rng);
  } catch (const WeakLearningViolation& e) {
    res.status = "weak-learning";
    res.message = e.what();
    return res;
  } catch (const Error& e) {
    res.status = "failed";
    res.message = e.what();
    return res;
  }
  res.train_err = training_error(res.run->ensemble, res.training);
  std::vector<Example> held;
  if (c.heldout > 0) {
    for (std::size_t i = 0; i < c.heldout; ++i) {
      const Point x = sampler.draw(rng);
      held.push_back({x, concept_fn(x)});
    }
    res.heldout_err = empirical_error(res.run->ensemble, held);
  } else if (c.n <= 16) {
    const auto dom = full_domain(concept_fn);
    std::vector<double> w;
    for (const auto& e : dom.points) w.push_back(sampler.probability(e.x));
    res.heldout_err = empirical_error(res.run->ensemble, dom.points, w);
  }
  return res;
}

inline const char* kRoundCsvHeader = "t,branch,eps_tilde,eps_prime,eps_true,alpha_prime,Z,sum_Dtilde,fidelity,train_err,queries";

inline void write_round_csv(std::ostream& os, const std::vector<RoundRecord>& rounds) {
  using detail::fmt17;
  os << kRoundCsvHeader << '\n';
  for (const auto& r : rounds) {
    os << r.t << ',' << to_string(r.branch) << ',' << fmt17(r.eps_tilde) << ',' << fmt17(r.eps_prime) << ','
       << fmt17(r.eps_true) << ',' << fmt17(r.alpha_prime) << ',' << fmt17(r.Z) << ',' << fmt17(r.sum_Dtilde) << ','
       << fmt17(r.fidelity) << ',' << fmt17(r.train_err) << ',' << r.queries << '\n';
  }
}

inline nlohmann::json claim_json(const ClaimReport& r) {
  return {{"id", r.id},
          {"checked", r.checked},
          {"failed", r.failed},
          {"passed", r.passed()},
          {"worst_slack", r.checked ? r.worst_slack : 0.0}};
}

inline nlohmann::json ledger_json(const QueryLedger& l) {
  const auto& t = l.totals();
  return {{"qram", t.qram},
          {"amplification", t.amplification},
          {"estimation", t.estimation},
          {"hypothesis", t.hypothesis},
          {"total", t.total()}};
}

inline nlohmann::json config_json(const ExperimentConfig& c) {
  return {{"concept", c.concept_spec},
          {"n", c.n},
          {"sampler", c.sampler_spec},
          {"M", c.M},
          {"T", c.resolved_T()},
          {"Q", c.Q},
          {"gamma_floor", c.gamma_floor},
          {"oracle", to_string(c.oracle)},
          {"learner", to_string(c.learner)},
          {"seeds", c.seeds},
          {"t_multiplier", c.t_multiplier},
          {"verify", c.verify},
          {"amplification_failures", c.amplification_failures}};
}

struct ExperimentOutcome {
  int exit_code = kExitOk;
  nlohmann::json status;
  std::vector<SeedResult> seeds;
};

namespace detail {

inline void open_or_throw(std::ofstream& f, const std::filesystem::path& p) {
  f.open(p, std::ios::binary);
  if (!f) throw std::ios_base::failure("cannot open " + p.string());
}

inline void close_or_throw(std::ofstream& f, const std::filesystem::path& p) {
  f.close();
  if (!f) throw std::ios_base::failure("cannot write " + p.string());
}

}  // namespace detail

// Runs every seed, writes per-seed CSVs, ensembles, training sets,
// summary.json and convergence.dat into config.out.
inline ExperimentOutcome run_experiment(const ExperimentConfig& c) {
  namespace fs = std::filesystem;
  ExperimentOutcome out;
  try {
    validate_config(c);
  } catch (const ParseError& e) {
    out.exit_code = kExitParse;
    out.status = {{"status", "error"}, {"exit", kExitParse}, {"message", e.what()}};
    return out;
  }
  const Concept concept_fn = parse_concept(c.concept_spec, c.n);
  if (is_stump_unlearnable(concept_fn)) {
    out.exit_code = kExitWeakLearning;
    out.status = {{"status", "error"},
                  {"exit", kExitWeakLearning},
                  {"message",
                   "parity over two or more bits is not weakly learnable by decision stumps: every stump and "
                   "constant has weighted error exactly 1/2 under the uniform distribution"}};
    return out;
  }

  out.seeds.resize(c.seeds.size());
  parallel_for(c.seeds.size(), c.threads, [&](std::size_t i) { out.seeds[i] = run_seed(c, c.seeds[i], c.oracle); });

  for (const auto& s : out.seeds) {
    if (s.status == "weak-learning") {
      out.exit_code = kExitWeakLearning;
      out.status = {{"status", "error"}, {"exit", kExitWeakLearning}, {"seed", s.seed}, {"message", s.message}};
      return out;
    }
  }

  const int T = c.resolved_T();
  std::size_t good = 0;
  nlohmann::json seeds_json = nlohmann::json::array();
  try {
    const fs::path dir(c.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::ios_base::failure("cannot create " + dir.string() + ": " + ec.message());

    std::ofstream conv;
    detail::open_or_throw(conv, dir / "convergence.dat");
    conv << "# columns: round measured_training_error bound\n";
    for (const auto& s : out.seeds) {
      nlohmann::json sj = {{"seed", s.seed}, {"status", s.status}};
      const std::string tag = std::to_string(s.seed);
      std::ofstream ts;
      detail::open_or_throw(ts, dir / ("training_set_" + tag + ".txt"));
      write_training_set(ts, s.training);
      detail::close_or_throw(ts, dir / ("training_set_" + tag + ".txt"));
      if (!s.run) {
        sj["message"] = s.message;
        seeds_json.push_back(sj);
        continue;
      }
      const auto& run = *s.run;
      std::ofstream csv;
      detail::open_or_throw(csv, dir / ("round_" + tag + ".csv"));
      write_round_csv(csv, run.rounds);
      detail::close_or_throw(csv, dir / ("round_" + tag + ".csv"));
      std::ofstream ens;
      detail::open_or_throw(ens, dir / ("ensemble_" + tag + ".txt"));
      write_ensemble(ens, run.ensemble);
      detail::close_or_throw(ens, dir / ("ensemble_" + tag + ".txt"));

      conv << "# seed " << s.seed << '\n';
      for (std::size_t i = 0; i < run.rounds.size(); ++i) {
        conv << run.rounds[i].t << ' ' << detail::fmt17(run.rounds[i].train_err) << ' '
             << detail::fmt17(std::exp(log_training_bound(run.rounds, run.budget, i + 1))) << '\n';
      }
      conv << "\n\n";

      if (s.train_err <= 0.1) ++good;
      std::ostringstream es;
      write_ensemble(es, run.ensemble);
      sj["train_err"] = s.train_err;
      sj["heldout_err"] = s.heldout_err;
      sj["rounds"] = run.rounds.size();
      sj["no_rounds"] = run.no_rounds;
      sj["ell_budget_exceeded"] = run.ell_budget_exceeded;
      sj["delta"] = run.budget.delta;
      sj["ledger"] = ledger_json(run.ledger);
      sj["ensemble"] = es.str();
      if (c.verify) {
        const auto gap = check_eps_gap(run.rounds, run.budget.delta);
        const auto fid = check_fidelity(run.rounds, run.budget);
        sj["claims"] = {claim_json(check_subnormalization(run.rounds, run.budget.delta)),
                        claim_json(gap.stated),
                        claim_json(gap.sharp),
                        claim_json(fid.yes_core),
                        claim_json(fid.no_core),
                        claim_json(fid.floor),
                        claim_json(check_training_bound(run.rounds, run.budget))};
      }
      seeds_json.push_back(sj);
    }
    detail::close_or_throw(conv, dir / "convergence.dat");

    const double frac = static_cast<double>(good) / static_cast<double>(out.seeds.size());
    nlohmann::json summary = {{"config", config_json(c)},
                              {"seeds", seeds_json},
                              {"aggregate",
                               {{"runs", out.seeds.size()},
                                {"train_err_le_0.1", good},
                                {"fraction", frac},
                                {"case1_bound", case1_bound(c.gamma_floor, T, c.Q)},
                                {"ell_budget", ell_budget(T, c.Q)}}}};
    std::ofstream sf;
    detail::open_or_throw(sf, dir / "summary.json");
    sf << summary.dump(2) << '\n';
    detail::close_or_throw(sf, dir / "summary.json");
    out.status = {{"status", "ok"}, {"exit", kExitOk}, {"runs", out.seeds.size()}, {"fraction_le_0.1", frac},
                  {"out", c.out}};
  } catch (const std::ios_base::failure& e) {
    out.exit_code = kExitIo;
    out.status = {{"status", "error"}, {"exit", kExitIo}, {"message", e.what()}};
  }
  return out;
}

struct ComparisonRow {
  OracleMode mode = OracleMode::exact;
  std::uint64_t seed = 0;
  int t = 0;
  double z_prime = 0.0;
  double bound = 0.0;
  double train_err = 0.0;
  std::uint64_t cumulative_queries = 0;
};

// Per-round trajectories of several oracle modes on shared seeds.
inline std::vector<ComparisonRow> compare_modes(const ExperimentConfig& c, const std::vector<OracleMode>& modes) {
  validate_config(c);
  if (is_stump_unlearnable(parse_concept(c.concept_spec, c.n))) {
    throw WeakLearningViolation(0, 0.5);
  }
  std::vector<std::vector<ComparisonRow>> per(modes.size() * c.seeds.size());
  parallel_for(per.size(), c.threads, [&](std::size_t i) {
    const OracleMode mode = modes[i / c.seeds.size()];
    const std::uint64_t seed = c.seeds[i % c.seeds.size()];
    SeedResult r = run_seed(c, seed, mode);
    if (r.status == "weak-learning") throw WeakLearningViolation(0, 0.5);
    if (!r.run) return;
    std::uint64_t cum = 0;
    for (std::size_t k = 0; k < r.run->rounds.size(); ++k) {
      const auto& rec = r.run->rounds[k];
      cum += rec.queries;
      per[i].push_back({mode, seed, rec.t, rec.Z, std::exp(log_training_bound(r.run->rounds, r.run->budget, k + 1)),
                        rec.train_err, cum});
    }
  });
  std::vector<ComparisonRow> rows;
  for (auto& v : per) rows.insert(rows.end(), v.begin(), v.end());
  return rows;
}

inline void write_comparison(std::ostream& os, const std::vector<ComparisonRow>& rows) {
  os << "mode,seed,t,Z_prime,bound,train_err,cumulative_queries\n";
  for (const auto& r : rows) {
    os << to_string(r.mode) << ',' << r.seed << ',' << r.t << ',' << detail::fmt17(r.z_prime) << ','
       << detail::fmt17(r.bound) << ',' << detail::fmt17(r.train_err) << ',' << r.cumulative_queries << '\n';
  }
}

}  // namespace qboost
