#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qboost/boostcore.hpp"
#include "qboost/driver.hpp"
#include "qboost/qsim.hpp"

namespace qboost {

// Slack is bound minus measured in the claim's native units; negative means
// the claim failed on that item.
struct ClaimReport {
  ClaimReport() = default;
  ClaimReport(std::string claim_id) : id(std::move(claim_id)) {}

  std::string id;
  std::size_t checked = 0;
  std::size_t failed = 0;
  double worst_slack = std::numeric_limits<double>::infinity();
  std::vector<bool> item_pass;

  bool passed() const { return failed == 0; }

  void record(double slack) {
    ++checked;
    const bool ok = slack >= 0.0;
    if (!ok) ++failed;
    item_pass.push_back(ok);
    worst_slack = std::min(worst_slack, slack);
  }
};

// Floating-point allowance on every bound.
inline constexpr double kSumTolerance = 1e-12;

inline ClaimReport check_subnormalization(std::span<const RoundRecord> records, double delta) {
  ClaimReport rep{"C4.3"};
  for (const auto& r : records) {
    rep.record(std::min(r.sum_Dtilde + kSumTolerance - (1.0 - 30.0 * delta), 1.0 + kSumTolerance - r.sum_Dtilde));
  }
  return rep;
}

struct EpsGapReport {
  ClaimReport stated;  // gap <= 50 delta
  ClaimReport sharp;   // gap <= 4 delta, reported only
};

inline EpsGapReport check_eps_gap(std::span<const RoundRecord> records, double delta) {
  EpsGapReport rep{{"C4.4"}, {"C4.4-sharp"}};
  for (const auto& r : records) {
    const double gap = std::abs(r.eps_tilde - r.eps_true);
    rep.stated.record(50.0 * delta + kSumTolerance - gap);
    rep.sharp.record(4.0 * delta + kSumTolerance - gap);
  }
  return rep;
}

struct FidelityReport {
  ClaimReport yes_core;  // >= 1 - 2 delta on yes rounds
  ClaimReport no_core;   // >= 1 - 3/(2 Q T^2) on no rounds
  ClaimReport floor;     // fidelity minus residual >= 1 - 50 delta, every round

  bool passed() const { return yes_core.passed() && no_core.passed() && floor.passed(); }
};

inline FidelityReport check_fidelity(std::span<const RoundRecord> records, const NoiseBudget& b) {
  FidelityReport rep{{"C4.5-yes"}, {"C4.5-no"}, {"C4.5"}};
  const double delta = b.delta;
  for (const auto& r : records) {
    if (r.branch == Branch::no) {
      rep.no_core.record(r.fidelity - (1.0 - 1.5 / b.qt2()));
    } else {
      rep.yes_core.record(r.fidelity - (1.0 - 2.0 * delta));
    }
    const double residual = std::max(0.0, 1.0 - r.sum_Dtilde);
    rep.floor.record(r.fidelity - residual - (1.0 - 50.0 * delta));
  }
  return rep;
}

inline double case1_bound(double gamma, int T, int Q) {
  return std::exp(-2.0 * T * gamma * gamma + 16.0 / (static_cast<double>(Q) * T));
}

inline double case2_bound(double gamma, int T, int Q, double ell) {
  const double lg = std::log(2.0 * std::sqrt(static_cast<double>(Q)) * T);
  return std::exp(2.0 * ell * (lg + gamma * gamma) - 2.0 * T * gamma * gamma + 1.0);
}

// log of (Q T^2)^ell * prod Z'_t over the first `upto` records.
inline double log_training_bound(std::span<const RoundRecord> records, const NoiseBudget& b,
                                 std::size_t upto = std::numeric_limits<std::size_t>::max()) {
  double acc = 0.0;
  const std::size_t n = std::min(upto, records.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = records[i];
    acc += r.Z > 0.0 ? std::log(r.Z) : -std::numeric_limits<double>::infinity();
    if (r.branch == Branch::no) acc += std::log(b.qt2());
  }
  return acc;
}

// Per-round check of train_err <= (Q T^2)^ell prod Z'.
inline ClaimReport check_training_bound(std::span<const RoundRecord> records, const NoiseBudget& b) {
  ClaimReport rep{"CaseII"};
  for (std::size_t i = 0; i < records.size(); ++i) {
    const double bound = std::exp(log_training_bound(records, b, i + 1));
    rep.record(bound - records[i].train_err);
  }
  return rep;
}

struct Lemma42Point {
  double eps_tilde = 0.0;
  int trials = 0;
  int violations = 0;
  int yes = 0;
  double violation_rate = 0.0;
  double allowed_rate = 0.0;
  std::uint64_t max_queries = 0;
  std::uint64_t query_cap = 0;
  bool queries_ok = true;
  double min_yes_estimate = std::numeric_limits<double>::infinity();
  bool yes_floor_ok = true;

  bool passed() const { return violation_rate <= allowed_rate && queries_ok && yes_floor_ok; }
};

struct Lemma42Report {
  NoiseBudget budget;
  std::vector<Lemma42Point> points;

  bool passed() const {
    return std::all_of(points.begin(), points.end(), [](const auto& p) { return p.passed(); });
  }
};

// Contract violations must not exceed 10 delta / T + 3 sigma.
template <Rng64 G>
Lemma42Report lemma42_trial_harness(const NoiseBudget& b, std::span<const double> eps_grid, int trials, G& rng) {
  detail::require(trials >= 1, "trials must be >= 1");
  Lemma42Report rep{b, {}};
  const MaeSchedule sched = mae_schedule(b);
  const double p = 10.0 * b.delta / b.T;
  const double allowed = p + 3.0 * std::sqrt(p * (1.0 - p) / trials);
  const double yes_floor = (1.0 - b.delta) / (64.0 * b.qt2());
  for (double eps : eps_grid) {
    Lemma42Point pt;
    pt.eps_tilde = eps;
    pt.trials = trials;
    pt.allowed_rate = allowed;
    pt.query_cap = 2 * sched.J_max;
    for (int i = 0; i < trials; ++i) {
      const AEOutcome o = modified_amplitude_estimation(eps, b, rng);
      if (!lemma42_contract_holds(eps, o, b)) ++pt.violations;
      pt.max_queries = std::max(pt.max_queries, o.queries_used);
      if (o.queries_used > pt.query_cap) pt.queries_ok = false;
      if (o.branch == Branch::yes) {
        ++pt.yes;
        pt.min_yes_estimate = std::min(pt.min_yes_estimate, o.estimate);
        if (o.estimate < yes_floor) pt.yes_floor_ok = false;
      }
    }
    pt.violation_rate = static_cast<double>(pt.violations) / trials;
    rep.points.push_back(pt);
  }
  return rep;
}

// Fraction of single amplitude estimates within the additive bound.
template <Rng64 G>
double eq7_frequency(double a, std::uint64_t J, int trials, G& rng) {
  detail::require(trials >= 1, "trials must be >= 1");
  const double bound = ae_error_bound(a, static_cast<double>(J));
  int hits = 0;
  for (int i = 0; i < trials; ++i) {
    if (std::abs(amplitude_estimate(a, J, rng) - a) <= bound) ++hits;
  }
  return static_cast<double>(hits) / trials;
}

}  // namespace qboost
