#pragma once

#include <optional>
#include <vector>

#include "qboost/concepts.hpp"
#include "qboost/qsim.hpp"

namespace qboost {

// Measures the state until Q points are retained (at most 10Q draws) and fits
// the best stump to their empirical distribution. nullopt if every draw hit
// the residual.
template <Rng64 G>
std::optional<Hypothesis> sample_based_stump(const TrainingSet& s, const QuantumExampleState& state, int Q, G& rng) {
  detail::require(Q >= 1, "Q must be >= 1");
  detail::require(state.weights.size() == s.size(), "state does not match training set");
  std::vector<double> counts(s.size(), 0.0);
  int kept = 0;
  const long attempts = 10L * Q;
  for (long i = 0; i < attempts && kept < Q; ++i) {
    if (auto idx = measure_example(state, rng)) {
      counts[*idx] += 1.0;
      ++kept;
    }
  }
  if (kept == 0) return std::nullopt;
  return best_stump(s, counts).h;
}

// Dispatches on the learner mode. The distribution-aware learner reads the
// weights directly; the sample-based one only sees measurement outcomes.
template <Rng64 G>
std::optional<Hypothesis> run_learner(const WeakLearnerSpec& spec, const TrainingSet& s,
                                      const QuantumExampleState& state, G& rng) {
  if (spec.mode == WeakLearnerSpec::Mode::distribution_aware) return best_stump(s, state.weights).h;
  return sample_based_stump(s, state, spec.Q, rng);
}

}  // namespace qboost
