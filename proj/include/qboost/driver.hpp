#pragma once

#include <bit>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qboost/boostcore.hpp"
#include "qboost/concepts.hpp"
#include "qboost/estimators.hpp"
#include "qboost/learners.hpp"
#include "qboost/qsim.hpp"

namespace qboost {

namespace detail {

// Scales correct points by `right` and misclassified points by `wrong`.
inline std::vector<double> rescale(const WeightVector& d, const Hypothesis& h, const TrainingSet& s, double right,
                                   double wrong) {
  require(d.size() == s.size(), "weight length does not match training set");
  std::vector<double> out(d.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    out[i] = d[i] * (h(s.points[i].x) == s.points[i].y ? right : wrong);
  }
  return out;
}

}  // namespace detail

// D~'_x = D~_x e^{-/+a'} / ((1+2 delta) Z), Z = 2 sqrt(e'(1-e')).
inline WeightVector update_yes(const WeightVector& d_tilde, const Hypothesis& h, const TrainingSet& s,
                               double eps_prime, const NoiseBudget& b) {
  if (!(eps_prime > 0.0 && eps_prime < 1.0)) {
    throw InvalidArgument("update_yes needs eps' in (0, 1), got " + std::to_string(eps_prime));
  }
  const double alpha = alpha_from_eps(eps_prime);
  const double norm = (1.0 + 2.0 * b.delta) * z_factor(eps_prime);
  return WeightVector(detail::rescale(d_tilde, h, s, std::exp(-alpha) / norm, std::exp(alpha) / norm),
                      WeightKind::subnormalized);
}

inline double no_branch_alpha(const NoiseBudget& b) {
  if (!(b.qt2() > 1.0)) throw InvalidArgument("the floor branch needs Q T^2 > 1");
  return 0.5 * std::log(b.qt2() - 1.0);
}

// Floor update with eps' = tau: (2 - tau) e^{-a'} on correct points,
// tau e^{a'} on errors, divided by (1 + 2 tau) 2 sqrt(tau (1 - tau)).
inline WeightVector update_no(const WeightVector& d_tilde, const Hypothesis& h, const TrainingSet& s,
                              const NoiseBudget& b) {
  const double alpha = no_branch_alpha(b);
  const double tau = b.tau;
  const double norm = (1.0 + 2.0 * tau) * z_factor(tau);
  return WeightVector(
      detail::rescale(d_tilde, h, s, (2.0 - tau) * std::exp(-alpha) / norm, tau * std::exp(alpha) / norm),
      WeightKind::subnormalized);
}

// The shadow distribution: D~ e^{-y a' h} renormalized by its empirical sum.
inline WeightVector true_update(const WeightVector& d_tilde, const Hypothesis& h, const TrainingSet& s,
                                double alpha_prime) {
  detail::require(std::isfinite(alpha_prime), "alpha' must be finite");
  return WeightVector::normalize(detail::rescale(d_tilde, h, s, std::exp(-alpha_prime), std::exp(alpha_prime)));
}

// Z'_t including the branch factor.
inline double branch_z(Branch br, double eps_prime, const NoiseBudget& b) {
  if (br == Branch::no) return (1.0 + 2.0 * b.tau) * z_factor(b.tau);
  return (1.0 + 2.0 * b.delta) * z_factor(eps_prime);
}

// No-round budget: T / ln(2 sqrt(Q) T) - 1.
inline double ell_budget(int T, int Q) {
  return static_cast<double>(T) / std::log(2.0 * std::sqrt(static_cast<double>(Q)) * static_cast<double>(T)) - 1.0;
}

struct QuantumBoostOptions {
  OracleMode mode = OracleMode::qsim;
  std::optional<double> delta_override;
  bool amplification_failures = true;
  bool keep_weights = false;
};

struct QuantumRun {
  Ensemble ensemble;
  std::vector<RoundRecord> rounds;
  QueryLedger ledger;
  NoiseBudget budget;
  int no_rounds = 0;
  bool ell_budget_exceeded = false;
  int amplification_retries = 0;
  int learner_retries = 0;
};

template <Rng64 G>
QuantumRun run_quantum_boost(const TrainingSet& s, const WeakLearnerSpec& learner, int T,
                             const QuantumBoostOptions& opt, G& rng) {
  detail::require(T >= 1, "T must be >= 1");
  if (s.empty()) throw InvalidArgument("run_quantum_boost on an empty training set");
  learner.validate();
  const int Q = learner.Q;

  QuantumRun run;
  run.budget = NoiseBudget::make(Q, T, s.size(), opt.delta_override);
  const NoiseBudget& b = run.budget;
  const double ell_max = ell_budget(T, Q);
  const auto qram_cost = static_cast<std::uint64_t>(std::bit_width(s.size() - 1));
  const double fail_p = 1.0 / (3.0 * T);
  const auto q64 = static_cast<std::uint64_t>(Q);

  WeightVector d_tilde = WeightVector::uniform(s.size()).as_subnormalized();
  WeightVector d_true = WeightVector::uniform(s.size());
  Ensemble no_ensemble;

  for (int t = 1; t <= T; ++t) {
    const auto t64 = static_cast<std::uint64_t>(t);
    run.ledger.open_round();
    run.ledger.charge_qram(qram_cost);

    // Q copies of the amplified example state, with one retry on a
    // simulated amplification failure and one on a learner failure.
    std::optional<Hypothesis> h;
    for (int learn_try = 0; learn_try < 2 && !h; ++learn_try) {
      QuantumExampleState state = make_example_state(d_tilde, t);
      for (int amp_try = 0;; ++amp_try) {
        run.ledger.charge_amplification(q64 * state.amplification_queries);
        run.ledger.charge_hypothesis(q64 * state.amplification_queries * (t64 - 1) + q64 * (t64 - 1));
        if (!opt.amplification_failures || !detail::bernoulli(rng, fail_p)) break;
        if (amp_try == 1) throw AmplificationFailure("amplitude amplification failed twice at round " + std::to_string(t));
        ++run.amplification_retries;
      }
      h = run_learner(learner, s, state, rng);
      if (!h && learn_try == 0) ++run.learner_retries;
    }
    if (!h) throw LearnerFailure("weak learner failed twice in a row at round " + std::to_string(t));

    RoundRecord r;
    r.t = t;
    r.eps_tilde = weighted_error(d_tilde, *h, s);
    r.eps_true = weighted_error(d_true, *h, s);
    if (r.eps_tilde >= 0.5) throw WeakLearningViolation(t, r.eps_tilde);

    const AEOutcome est = estimate_from_eps(opt.mode, r.eps_tilde, b, rng, &run.ledger);
    run.ledger.charge_hypothesis(est.queries_used * t64);
    r.branch = est.branch;
    r.eps_prime = est.estimate;

    WeightVector next;
    if (est.branch == Branch::yes) {
      r.alpha_prime = alpha_from_eps(est.estimate);
      next = update_yes(d_tilde, *h, s, est.estimate, b);
      d_true = true_update(d_tilde, *h, s, r.alpha_prime);
    } else {
      r.alpha_prime = no_branch_alpha(b);
      next = update_no(d_tilde, *h, s, b);
      d_true = next.normalized();
      ++run.no_rounds;
      no_ensemble.add(r.alpha_prime, *h);
    }
    d_tilde = std::move(next);
    run.ensemble.add(r.alpha_prime, *h);

    r.Z = branch_z(r.branch, r.eps_prime, b);
    r.sum_Dtilde = d_tilde.sum();
    r.fidelity = fidelity(d_tilde, d_true);
    r.queries = run.ledger.rounds().back().total();
    r.train_err = training_error(run.ensemble, s);
    if (opt.keep_weights) {
      r.d_tilde.assign(d_tilde.values().begin(), d_tilde.values().end());
      r.d_true.assign(d_true.values().begin(), d_true.values().end());
    }
    run.rounds.push_back(std::move(r));

    if (run.no_rounds > ell_max) {
      run.ell_budget_exceeded = true;
      run.ensemble = no_ensemble;
      break;
    }
  }
  return run;
}

}  // namespace qboost
