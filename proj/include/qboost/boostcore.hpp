#pragma once

#include <cmath>
#include <concepts>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qboost/common.hpp"
#include "qboost/concepts.hpp"
#include "qboost/weights.hpp"

namespace qboost {

inline double weighted_error(std::span<const double> d, const Hypothesis& h, const TrainingSet& s) {
  detail::require(d.size() == s.size(), "weight length does not match training set");
  detail::CompensatedSum acc;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (h(s.points[i].x) != s.points[i].y) acc.add(d[i]);
  }
  return acc.value();
}

inline double weighted_error(const WeightVector& d, const Hypothesis& h, const TrainingSet& s) {
  return weighted_error(d.values(), h, s);
}

inline double alpha_from_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw DegenerateError("alpha undefined for weighted error " + std::to_string(eps));
  }
  return 0.5 * std::log((1.0 - eps) / eps);
}

inline double z_factor(double eps) {
  detail::require(eps >= 0.0 && eps <= 1.0, "z_factor needs eps in [0, 1]");
  return 2.0 * std::sqrt(eps * (1.0 - eps));
}

struct UpdateResult {
  WeightVector d;
  double Z = 0.0;
};

// Multiplies each weight by exp(-y*alpha*h(x)) and renormalizes by the
// empirical Z. Accepts sub-normalized input; the output is a distribution.
inline UpdateResult adaboost_update(const WeightVector& d, const Hypothesis& h, const TrainingSet& s,
                                    double alpha) {
  detail::require(d.size() == s.size(), "weight length does not match training set");
  detail::require(std::isfinite(alpha), "alpha must be finite");
  std::vector<double> out(d.size());
  detail::CompensatedSum z;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double m = std::exp(-static_cast<double>(s.points[i].y * h(s.points[i].x)) * alpha);
    out[i] = d[i] * m;
    z.add(out[i]);
  }
  const double Z = z.value();
  if (!(Z > 0.0)) throw DegenerateError("normalizer Z vanished");
  for (double& w : out) w /= Z;
  return {WeightVector(std::move(out), WeightKind::distribution), Z};
}

struct Term {
  double alpha = 0.0;
  Hypothesis h;
};

class Ensemble {
 public:
  void add(double alpha, const Hypothesis& h) {
    detail::require(std::isfinite(alpha), "ensemble weights must be finite");
    terms_.push_back({alpha, h});
  }

  double margin(Point x) const {
    detail::CompensatedSum acc;
    for (const auto& t : terms_) acc.add(t.alpha * t.h(x));
    return acc.value();
  }

  // sign(0) = +1.
  Label predict(Point x) const {
    if (terms_.empty()) throw InvalidArgument("cannot predict with an empty ensemble");
    return margin(x) >= 0.0 ? 1 : -1;
  }

  Label operator()(Point x) const { return predict(x); }

  const std::vector<Term>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

 private:
  std::vector<Term> terms_;
};

inline double empirical_error(const Ensemble& e, std::span<const Example> points) {
  detail::require(!points.empty(), "empirical_error needs at least one point");
  std::size_t wrong = 0;
  for (const auto& p : points) wrong += e.predict(p.x) != p.y;
  return static_cast<double>(wrong) / static_cast<double>(points.size());
}

inline double empirical_error(const Ensemble& e, std::span<const Example> points, std::span<const double> d) {
  detail::require(!points.empty(), "empirical_error needs at least one point");
  detail::require(d.size() == points.size(), "weight length does not match point list");
  detail::CompensatedSum acc;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (e.predict(points[i].x) != points[i].y) acc.add(d[i]);
  }
  return acc.value();
}

inline double training_error(const Ensemble& e, const TrainingSet& s) { return empirical_error(e, s.points); }

enum class Branch { exact, yes, no };

inline const char* to_string(Branch b) {
  switch (b) {
    case Branch::exact: return "exact";
    case Branch::yes: return "yes";
    case Branch::no: return "no";
  }
  return "?";
}

struct RoundRecord {
  int t = 0;
  Branch branch = Branch::exact;
  double eps_tilde = 0.0;
  double eps_prime = 0.0;
  double eps_true = 0.0;
  double alpha_prime = 0.0;
  double Z = 0.0;
  double sum_Dtilde = 1.0;
  double fidelity = 1.0;
  std::uint64_t queries = 0;
  double train_err = 0.0;
  // Weights after the round's update: D~ and the normalized shadow D.
  std::vector<double> d_tilde;
  std::vector<double> d_true;
};

// Any callable (S, D, rng) -> optional<Hypothesis>; nullopt signals failure.
template <class L, class G>
concept WeakLearner = Rng64<G> && requires(L l, const TrainingSet& s, const WeightVector& d, G& rng) {
  { l(s, d, rng) } -> std::convertible_to<std::optional<Hypothesis>>;
};

struct DistributionAwareLearner {
  template <Rng64 G>
  std::optional<Hypothesis> operator()(const TrainingSet& s, const WeightVector& d, G&) const {
    return best_stump(s, d).h;
  }
};

struct BoostRun {
  Ensemble ensemble;
  std::vector<RoundRecord> rounds;
  bool stopped_early = false;
};

// Default round count ceil(ln M / gamma^2), never below 1.
inline int default_rounds(std::size_t m, double gamma, double multiplier = 1.0) {
  detail::require(gamma > 0.0, "gamma must be positive");
  detail::require(multiplier > 0.0, "round multiplier must be positive");
  const double t = std::ceil(multiplier * std::log(static_cast<double>(m)) / (gamma * gamma));
  return t < 1.0 ? 1 : static_cast<int>(t);
}

// Classical AdaBoost. A learner failure is retried once; a second
// consecutive failure throws LearnerFailure.
template <class L, Rng64 G>
  requires WeakLearner<L, G>
BoostRun run_adaboost(const TrainingSet& s, L&& learner, int T, G& rng, bool keep_weights = false) {
  detail::require(T >= 1, "T must be >= 1");
  if (s.empty()) throw InvalidArgument("run_adaboost on an empty training set");
  BoostRun run;
  WeightVector d = WeightVector::uniform(s.size());
  const double alpha_cap = std::log(static_cast<double>(s.size()) * static_cast<double>(T));
  for (int t = 1; t <= T; ++t) {
    std::optional<Hypothesis> h = learner(s, d, rng);
    if (!h) h = learner(s, d, rng);
    if (!h) throw LearnerFailure("weak learner failed twice in a row at round " + std::to_string(t));
    const double eps = weighted_error(d, *h, s);
    if (eps >= 0.5) throw WeakLearningViolation(t, eps);

    RoundRecord r;
    r.t = t;
    r.branch = Branch::exact;
    r.eps_tilde = r.eps_prime = r.eps_true = eps;
    if (eps <= 0.0) {
      r.alpha_prime = alpha_cap;
      r.Z = 0.0;
      run.ensemble.add(alpha_cap, *h);
      r.train_err = training_error(run.ensemble, s);
      if (keep_weights) r.d_tilde = r.d_true = std::vector<double>(d.values().begin(), d.values().end());
      run.rounds.push_back(std::move(r));
      run.stopped_early = true;
      break;
    }
    const double alpha = alpha_from_eps(eps);
    auto up = adaboost_update(d, *h, s, alpha);
    run.ensemble.add(alpha, *h);
    d = std::move(up.d);
    r.alpha_prime = alpha;
    r.Z = up.Z;
    r.sum_Dtilde = d.sum();
    r.train_err = training_error(run.ensemble, s);
    if (keep_weights) r.d_tilde = r.d_true = std::vector<double>(d.values().begin(), d.values().end());
    run.rounds.push_back(std::move(r));
  }
  return run;
}

// One line per term: `alpha=<%.17g> kind=<stump|const> i=<idx> pol=<+|->`.
// Stumps use 1-based feature indices; constants use i=0 and pol as the value.
inline void write_ensemble(std::ostream& os, const Ensemble& e) {
  char buf[64];
  for (const auto& t : e.terms()) {
    std::snprintf(buf, sizeof buf, "%.17g", t.alpha);
    const bool stump = t.h.kind() == Hypothesis::Kind::stump;
    os << "alpha=" << buf << " kind=" << (stump ? "stump" : "const") << " i=" << (stump ? t.h.feature() + 1 : 0)
       << " pol=" << (t.h.polarity() > 0 ? '+' : '-') << '\n';
  }
}

inline Ensemble read_ensemble(std::istream& is) {
  Ensemble e;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string a, k, i, p;
    if (!(ls >> a >> k >> i >> p) || a.rfind("alpha=", 0) != 0 || k.rfind("kind=", 0) != 0 ||
        i.rfind("i=", 0) != 0 || (p != "pol=+" && p != "pol=-")) {
      throw ParseError("bad ensemble line '" + line + "'");
    }
    double alpha = 0.0;
    int idx = 0;
    try {
      std::size_t used = 0;
      alpha = std::stod(a.substr(6), &used);
      if (used != a.size() - 6) throw ParseError("bad alpha in '" + line + "'");
      idx = std::stoi(i.substr(2));
    } catch (const std::logic_error&) {
      throw ParseError("bad ensemble line '" + line + "'");
    }
    const Label pol = p.back() == '+' ? 1 : -1;
    const std::string kind = k.substr(5);
    if (kind == "stump") {
      if (idx < 1 || idx > kMaxBits) throw ParseError("stump index out of range in '" + line + "'");
      e.add(alpha, Hypothesis::stump(idx - 1, pol));
    } else if (kind == "const") {
      e.add(alpha, Hypothesis::constant(pol));
    } else {
      throw ParseError("unknown hypothesis kind '" + kind + "'");
    }
  }
  return e;
}

}  // namespace qboost
