#pragma once

#include <string>

#include "qboost/boostcore.hpp"
#include "qboost/qsim.hpp"

namespace qboost {

enum class OracleMode { exact, synthetic, adversarial_low, adversarial_high, qsim };

inline const char* to_string(OracleMode m) {
  switch (m) {
    case OracleMode::exact: return "exact";
    case OracleMode::synthetic: return "synthetic";
    case OracleMode::adversarial_low: return "adversarial-low";
    case OracleMode::adversarial_high: return "adversarial-high";
    case OracleMode::qsim: return "qsim";
  }
  return "?";
}

inline OracleMode parse_oracle_mode(const std::string& s) {
  if (s == "exact") return OracleMode::exact;
  if (s == "synthetic") return OracleMode::synthetic;
  if (s == "adversarial-low") return OracleMode::adversarial_low;
  if (s == "adversarial-high") return OracleMode::adversarial_high;
  if (s == "qsim") return OracleMode::qsim;
  throw ParseError("unknown oracle mode '" + s + "'");
}

enum class NoiseDirection { low, high };

inline AEOutcome floor_outcome(const NoiseBudget& b) { return {b.tau, Branch::no, 0, 0, 0}; }

// The extreme estimate the contract allows: eps~/(1+delta) or eps~/(1-delta).
inline AEOutcome adversarial_noise_from_eps(double eps_tilde, const NoiseBudget& b, NoiseDirection dir) {
  if (eps_tilde < b.yes_threshold()) return floor_outcome(b);
  const double e = dir == NoiseDirection::high ? eps_tilde / (1.0 - b.delta) : eps_tilde / (1.0 + b.delta);
  return {e, Branch::yes, 0, 0, 0};
}

inline AEOutcome adversarial_noise(const WeightVector& d_tilde, const Hypothesis& h, const TrainingSet& s,
                                   const NoiseBudget& b, NoiseDirection dir) {
  return adversarial_noise_from_eps(weighted_error(d_tilde, h, s), b, dir);
}

template <Rng64 G>
AEOutcome estimate_from_eps(OracleMode mode, double eps_tilde, const NoiseBudget& b, G& rng,
                            QueryLedger* ledger = nullptr) {
  switch (mode) {
    case OracleMode::exact:
      if (eps_tilde >= b.tau) return {eps_tilde, Branch::yes, 0, 0, 0};
      return floor_outcome(b);
    case OracleMode::synthetic: {
      if (eps_tilde < b.yes_threshold()) return floor_outcome(b);
      const double lo = eps_tilde / (1.0 + b.delta);
      const double hi = eps_tilde / (1.0 - b.delta);
      return {lo + (hi - lo) * detail::uniform01(rng), Branch::yes, 0, 0, 0};
    }
    case OracleMode::adversarial_low:
      return adversarial_noise_from_eps(eps_tilde, b, NoiseDirection::low);
    case OracleMode::adversarial_high:
      return adversarial_noise_from_eps(eps_tilde, b, NoiseDirection::high);
    case OracleMode::qsim:
      return modified_amplitude_estimation(eps_tilde, b, rng, ledger);
  }
  return floor_outcome(b);
}

template <Rng64 G>
AEOutcome estimate_error(OracleMode mode, const WeightVector& d_tilde, const Hypothesis& h, const TrainingSet& s,
                         const NoiseBudget& b, G& rng, QueryLedger* ledger = nullptr) {
  return estimate_from_eps(mode, weighted_error(d_tilde, h, s), b, rng, ledger);
}

}  // namespace qboost
