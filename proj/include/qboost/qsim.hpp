#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qboost/boostcore.hpp"
#include "qboost/common.hpp"
#include "qboost/weights.hpp"

namespace qboost {

struct NoiseBudget {
  int Q = 1;
  int T = 1;
  std::size_t M = 1;
  double delta = 0.0;
  double tau = 0.0;

  // delta = 1/(10 Q T^2) unless overridden; tau = 1/(Q T^2) always.
  static NoiseBudget make(int Q, int T, std::size_t M, std::optional<double> delta_override = std::nullopt) {
    detail::require(Q >= 1 && T >= 1 && M >= 1, "budget needs Q, T, M >= 1");
    NoiseBudget b;
    b.Q = Q;
    b.T = T;
    b.M = M;
    b.tau = 1.0 / b.qt2();
    b.delta = delta_override ? *delta_override : b.tau / 10.0;
    detail::require(b.delta >= 0.0 && b.delta < 0.5, "delta must lie in [0, 1/2)");
    return b;
  }

  double qt2() const { return static_cast<double>(Q) * static_cast<double>(T) * static_cast<double>(T); }
  double m() const { return static_cast<double>(M); }

  // Threshold below which a multiplicative estimate is not attempted.
  double yes_threshold() const { return (1.0 - 2.0 * delta) / (64.0 * qt2()); }
};

struct RoundQueries {
  std::uint64_t qram = 0;
  std::uint64_t amplification = 0;
  std::uint64_t estimation = 0;
  std::uint64_t hypothesis = 0;

  std::uint64_t total() const { return qram + amplification + estimation + hypothesis; }
};

// Simulated oracle invocations, one entry per round plus running totals.
class QueryLedger {
 public:
  void open_round() { rounds_.emplace_back(); }

  void charge_qram(std::uint64_t n) { current().qram += n, totals_.qram += n; }
  void charge_amplification(std::uint64_t n) { current().amplification += n, totals_.amplification += n; }
  void charge_estimation(std::uint64_t n) { current().estimation += n, totals_.estimation += n; }
  void charge_hypothesis(std::uint64_t n) { current().hypothesis += n, totals_.hypothesis += n; }

  const std::vector<RoundQueries>& rounds() const { return rounds_; }
  const RoundQueries& totals() const { return totals_; }
  std::uint64_t total() const { return totals_.total(); }

 private:
  RoundQueries& current() {
    if (rounds_.empty()) rounds_.emplace_back();
    return rounds_.back();
  }

  std::vector<RoundQueries> rounds_;
  RoundQueries totals_;
};

inline constexpr int kMaxTableAncillas = 30;
inline constexpr int kMaxSampledAncillas = 52;
inline constexpr std::int64_t kPeWindow = 256;

// max(1, ceil(log2 J)).
inline int ancilla_count(std::uint64_t J) {
  detail::require(J >= 1, "J must be >= 1");
  return std::max(1, static_cast<int>(std::bit_width(J - 1)));
}

namespace detail {

struct PePhase {
  double N = 2.0;
  std::int64_t base = 0;  // floor(N theta / pi)
  double frac = 0.0;      // N theta / pi - base
  double s = 0.0;         // sin^2(pi frac)
};

inline PePhase pe_phase(double theta, int n_anc) {
  PePhase p;
  p.N = std::ldexp(1.0, n_anc);
  const double c = p.N * theta / kPi;
  const double fl = std::floor(c);
  p.base = static_cast<std::int64_t>(fl);
  p.frac = c - fl;
  const double sf = std::sin(kPi * p.frac);
  p.s = sf * sf;
  return p;
}

// Probability of outcome base + k.
inline double pe_offset_probability(const PePhase& p, double k) {
  const double den = std::sin(kPi * (p.frac - k) / p.N);
  if (den == 0.0) return 1.0;
  return p.s / (p.N * p.N * den * den);
}

inline std::uint64_t wrap_outcome(std::int64_t y, double N) {
  const auto n = static_cast<std::int64_t>(N);
  y %= n;
  if (y < 0) y += n;
  return static_cast<std::uint64_t>(y);
}

}  // namespace detail

// Exact outcome table of phase estimation on eigenphase 2*theta.
inline std::vector<double> pe_distribution(double theta, int n_anc) {
  detail::require(n_anc >= 1 && n_anc <= kMaxTableAncillas, "pe_distribution needs n_anc in [1, 30]");
  detail::require(theta >= 0.0 && theta <= kPi / 2 + 1e-15, "theta must lie in [0, pi/2]");
  const auto ph = detail::pe_phase(theta, n_anc);
  const auto n = static_cast<std::size_t>(ph.N);
  std::vector<double> out(n, 0.0);
  if (ph.frac == 0.0) {
    out[detail::wrap_outcome(ph.base, ph.N)] = 1.0;
    return out;
  }
  for (std::size_t y = 0; y < n; ++y) {
    const double k = static_cast<double>(static_cast<std::int64_t>(y) - ph.base);
    out[y] = detail::pe_offset_probability(ph, k);
  }
  return out;
}

// Draws one phase-estimation outcome. Offsets within the window are sampled
// from exact probabilities; the far tail by inverting the integrated density.
template <Rng64 G>
std::uint64_t sample_pe_outcome(double theta, int n_anc, G& rng) {
  detail::require(n_anc >= 1 && n_anc <= kMaxSampledAncillas, "sampled phase estimation needs n_anc in [1, 52]");
  const auto ph = detail::pe_phase(theta, n_anc);
  const double u = detail::uniform01(rng);
  if (ph.frac == 0.0) return detail::wrap_outcome(ph.base, ph.N);

  const auto half = static_cast<std::int64_t>(ph.N / 2);
  const std::int64_t hi = half;       // largest offset in one period
  const std::int64_t lo = -half + 1;  // smallest offset in one period
  detail::CompensatedSum cum;
  const std::int64_t reach = std::min(kPeWindow, hi);
  for (std::int64_t j = 0; j <= reach; ++j) {
    const std::int64_t ks[2] = {j, -j};
    for (int side = 0; side < (j == 0 ? 1 : 2); ++side) {
      const std::int64_t k = ks[side];
      if (k < lo) continue;
      cum.add(detail::pe_offset_probability(ph, static_cast<double>(k)));
      if (u < cum.value()) return detail::wrap_outcome(ph.base + k, ph.N);
    }
  }
  const double inside = cum.value();
  if (hi <= kPeWindow || inside >= 1.0) return detail::wrap_outcome(ph.base, ph.N);

  const double scale = ph.N / kPi;
  auto angle = [&](double x) { return (x - ph.frac) / scale; };
  auto cot = [](double a) { return std::cos(a) / std::sin(a); };
  const double a_pos = angle(static_cast<double>(kPeWindow) + 0.5);
  const double b_pos = angle(static_cast<double>(hi) + 0.5);
  const double a_neg = angle(static_cast<double>(lo) - 0.5);
  const double b_neg = angle(-static_cast<double>(kPeWindow) - 0.5);
  const double mass_pos = cot(a_pos) - cot(b_pos);
  const double mass_neg = lo <= -kPeWindow - 1 ? cot(a_neg) - cot(b_neg) : 0.0;

  const double r = std::min((u - inside) / (1.0 - inside), std::nextafter(1.0, 0.0)) * (mass_pos + mass_neg);
  std::int64_t k;
  if (r < mass_pos) {
    const double target = cot(a_pos) - r;
    const double x = ph.frac + std::atan2(1.0, target) * scale;
    k = std::clamp<std::int64_t>(std::llround(x), kPeWindow + 1, hi);
  } else {
    const double target = cot(a_neg) - (r - mass_pos);
    const double x = ph.frac + (std::atan2(1.0, target) - kPi) * scale;
    k = std::clamp<std::int64_t>(std::llround(x), lo, -kPeWindow - 1);
  }
  return detail::wrap_outcome(ph.base + k, ph.N);
}

// One run of amplitude estimation with J queries: returns sin^2(pi y / 2^n).
template <Rng64 G>
double amplitude_estimate(double a, std::uint64_t J, G& rng, QueryLedger* ledger = nullptr) {
  detail::require(J >= 1, "J must be >= 1");
  detail::require(a >= 0.0 && a <= 1.0, "amplitude must lie in [0, 1]");
  const int n_anc = ancilla_count(J);
  const double theta = std::asin(std::sqrt(a));
  const std::uint64_t y = sample_pe_outcome(theta, n_anc, rng);
  if (ledger) ledger->charge_estimation(J);
  const double sy = std::sin(kPi * static_cast<double>(y) / std::ldexp(1.0, n_anc));
  return sy * sy;
}

// Additive error bound satisfied with probability >= 8/pi^2.
inline double ae_error_bound(double a, double J) {
  return 2.0 * kPi * std::sqrt(a * (1.0 - a)) / J + kPi * kPi / (J * J);
}

struct AEOutcome {
  double estimate = 0.0;
  Branch branch = Branch::no;
  std::uint64_t queries_used = 0;
  std::uint64_t J_final = 0;
  int passes = 0;
};

struct MaeSchedule {
  std::uint64_t J_init = 0;
  std::uint64_t J_max = 0;
  double log_term = 0.0;  // log2(M T / delta)
  int repetitions = 1;    // median-of-K per pass
};

inline MaeSchedule mae_schedule(const NoiseBudget& b) {
  if (!(b.delta > 0.0)) throw InvalidArgument("amplitude-estimation loop needs delta > 0");
  MaeSchedule s;
  const double sqrt_m = std::sqrt(b.m());
  s.J_init = static_cast<std::uint64_t>(std::ceil(2.0 * kPi * sqrt_m / b.delta));
  s.log_term = std::log2(b.m() * static_cast<double>(b.T) / b.delta);
  s.J_max = static_cast<std::uint64_t>(
      std::ceil(16.0 * std::sqrt(2.0) * kPi * sqrt_m / b.delta * std::sqrt(b.qt2()) * s.log_term));
  int k = static_cast<int>(std::floor(s.log_term)) + 1;
  if (k % 2 == 0) ++k;
  s.repetitions = k;
  return s;
}

// The step-3 acceptance test at precision J.
inline bool mae_accepts(double eps_prime, double J, const NoiseBudget& b) {
  const double lhs = 2.0 * std::sqrt(2.0) * kPi * std::sqrt((1.0 - b.delta) * eps_prime) / (J * std::sqrt(b.m())) +
                     kPi * kPi / (J * J);
  return lhs <= b.delta * eps_prime / b.m();
}

// Doubling loop over J. Each pass takes the median of K amplitude estimates
// and charges K*J queries; passes stop once K*J would exceed J_max.
template <Rng64 G>
AEOutcome modified_amplitude_estimation(double eps_tilde, const NoiseBudget& b, G& rng, QueryLedger* ledger = nullptr) {
  detail::require(eps_tilde >= 0.0 && eps_tilde <= 1.0, "eps_tilde must lie in [0, 1]");
  const MaeSchedule sched = mae_schedule(b);
  const double a = std::min(1.0, eps_tilde / b.m());
  const auto K = static_cast<std::uint64_t>(sched.repetitions);
  std::vector<double> draws(K);
  AEOutcome out;
  for (std::uint64_t J = sched.J_init; K * J <= sched.J_max; J *= 2) {
    for (auto& d : draws) d = amplitude_estimate(a, J, rng, ledger);
    std::nth_element(draws.begin(), draws.begin() + static_cast<std::ptrdiff_t>(K / 2), draws.end());
    const double eps_prime = b.m() * draws[K / 2];
    out.queries_used += K * J;
    out.J_final = J;
    ++out.passes;
    if (eps_prime > 0.0 && mae_accepts(eps_prime, static_cast<double>(J), b)) {
      out.estimate = eps_prime;
      out.branch = Branch::yes;
      return out;
    }
  }
  out.estimate = b.tau;
  out.branch = Branch::no;
  return out;
}

// yes: |eps~ - eps'| <= delta eps'; no: |eps~ - eps'| <= tau.
inline bool lemma42_contract_holds(double eps_tilde, const AEOutcome& o, const NoiseBudget& b) {
  constexpr double rel = 1e-12;
  const double gap = std::abs(eps_tilde - o.estimate);
  if (o.branch == Branch::no) return gap <= b.tau * (1.0 + rel);
  return gap <= b.delta * o.estimate * (1.0 + rel) + rel * o.estimate;
}

struct QuantumExampleState {
  WeightVector weights;
  double residual_norm = 0.0;
  int provenance = 0;
  std::uint64_t amplification_queries = 0;
  std::vector<double> cumulative;
};

inline std::uint64_t amplification_iterations(std::size_t m, double mass) {
  return static_cast<std::uint64_t>(std::ceil(std::sqrt(static_cast<double>(m) / std::max(mass, 0.5))));
}

inline QuantumExampleState make_example_state(const WeightVector& weights, int round = 0,
                                              QueryLedger* ledger = nullptr) {
  detail::require(!weights.empty(), "state needs at least one weight");
  const double sum = weights.sum();
  if (sum > 1.0 + kWeightTolerance) throw InvalidArgument("state weights sum above 1");
  if (!(sum > 0.0)) throw DegenerateError("state weights are all zero");
  QuantumExampleState st;
  st.weights = WeightVector(std::vector<double>(weights.values().begin(), weights.values().end()),
                            WeightKind::subnormalized);
  st.residual_norm = std::clamp(1.0 - sum, 0.0, 1.0);
  st.provenance = round;
  st.amplification_queries = amplification_iterations(weights.size(), sum);
  if (ledger) ledger->charge_amplification(st.amplification_queries);
  st.cumulative.resize(weights.size());
  detail::CompensatedSum acc;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc.add(weights[i]);
    st.cumulative[i] = acc.value();
  }
  return st;
}

// Index of the measured training point, or nullopt for the residual flag.
template <Rng64 G>
std::optional<std::size_t> measure_example(const QuantumExampleState& st, G& rng) {
  const double u = detail::uniform01(rng);
  const auto it = std::upper_bound(st.cumulative.begin(), st.cumulative.end(), u);
  if (it == st.cumulative.end()) return std::nullopt;
  return static_cast<std::size_t>(it - st.cumulative.begin());
}

inline double fidelity(std::span<const double> subnorm, std::span<const double> truth) {
  detail::require(subnorm.size() == truth.size(), "fidelity length mismatch");
  detail::CompensatedSum acc;
  for (std::size_t i = 0; i < subnorm.size(); ++i) acc.add(std::sqrt(subnorm[i] * truth[i]));
  return acc.value();
}

inline double fidelity(const WeightVector& subnorm, const WeightVector& truth) {
  return fidelity(subnorm.values(), truth.values());
}

}  // namespace qboost
