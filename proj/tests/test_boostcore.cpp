#include <gtest/gtest.h>

#include <cstring>
#include <sstream>

#include "qboost/qboost.hpp"

using namespace qboost;

namespace {

TrainingSet maj3() { return full_domain(Concept::majority_of_first(3, 3)); }

// Four points labelled by x1 except the last, which stump(x1,+) gets wrong.
TrainingSet four_points_one_wrong() {
  TrainingSet s;
  s.n = 2;
  s.points = {{0b00, -1}, {0b01, 1}, {0b10, -1}, {0b11, -1}};
  return s;
}

}  // namespace

TEST(WeightedError, Examples) {
  const auto s = maj3();
  const auto u = WeightVector::uniform(8);
  EXPECT_DOUBLE_EQ(weighted_error(u, Hypothesis::stump(0, 1), s), 0.25);
  const auto d = full_domain(Concept::dictator(3, 1));
  EXPECT_EQ(weighted_error(WeightVector::uniform(8), Hypothesis::stump(1, 1), d), 0.0);
  const WeightVector sub(std::vector<double>(8, 0.9 / 8), WeightKind::subnormalized);
  EXPECT_NEAR(weighted_error(sub, Hypothesis::stump(1, -1), d), 0.9, 1e-15);
}

TEST(Alpha, Examples) {
  EXPECT_EQ(alpha_from_eps(0.5), 0.0);
  EXPECT_NEAR(alpha_from_eps(0.25), 0.5493061, 1e-7);
  EXPECT_NEAR(alpha_from_eps(0.25), 0.5 * std::log(3.0), 1e-15);
  EXPECT_NEAR(alpha_from_eps(1.0 / 400), 2.9944807, 1e-7);
  EXPECT_NEAR(alpha_from_eps(1.0 / 400), std::log(std::sqrt(399.0)), 1e-14);
  EXPECT_THROW(alpha_from_eps(0.0), DegenerateError);
  EXPECT_THROW(alpha_from_eps(1.0), DegenerateError);
}

TEST(ZFactor, Examples) {
  EXPECT_EQ(z_factor(0.5), 1.0);
  EXPECT_NEAR(z_factor(0.25), 0.8660254, 1e-7);
  EXPECT_EQ(z_factor(0.0), 0.0);
  EXPECT_THROW(z_factor(-0.1), InvalidArgument);
}

TEST(AdaboostUpdate, OneWrongOfFour) {
  const auto s = four_points_one_wrong();
  const auto h = Hypothesis::stump(0, 1);
  const auto up = adaboost_update(WeightVector::uniform(4), h, s, 0.5 * std::log(3.0));
  EXPECT_NEAR(up.d[0], 1.0 / 6, 1e-15);
  EXPECT_NEAR(up.d[1], 1.0 / 6, 1e-15);
  EXPECT_NEAR(up.d[2], 1.0 / 6, 1e-15);
  EXPECT_NEAR(up.d[3], 1.0 / 2, 1e-15);
  EXPECT_NEAR(up.Z, z_factor(0.25), 1e-15);
}

TEST(AdaboostUpdate, ZeroAlphaIsIdentity) {
  const std::vector<double> raw = {0.1, 0.2, 0.3, 0.4};
  const WeightVector d(raw, WeightKind::distribution);
  const auto up = adaboost_update(d, Hypothesis::stump(1, -1), four_points_one_wrong(), 0.0);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(up.d[i], raw[i]);
  EXPECT_DOUBLE_EQ(up.Z, 1.0);
}

TEST(AdaboostUpdate, ErrorOfLastHypothesisBecomesHalf) {
  DefaultRng rng(4);
  const auto s = full_domain(Concept::majority_of_first(5, 5));
  std::vector<double> raw(s.size());
  for (auto& w : raw) w = detail::uniform01(rng) + 0.01;
  const auto d = WeightVector::normalize(raw);
  const auto fit = best_stump(s, d);
  const auto up = adaboost_update(d, fit.h, s, alpha_from_eps(fit.error));
  EXPECT_NEAR(weighted_error(up.d, fit.h, s), 0.5, 1e-12);
  EXPECT_NEAR(up.Z, z_factor(fit.error), 1e-12);
}

TEST(Ensemble, PredictionRules) {
  Ensemble one;
  const auto h = Hypothesis::stump(0, -1);
  one.add(1.0, h);
  for (Point x = 0; x < 4; ++x) EXPECT_EQ(one.predict(x), h(x));

  Ensemble tie;
  tie.add(0.7, Hypothesis::constant(1));
  tie.add(0.7, Hypothesis::constant(-1));
  EXPECT_EQ(tie.predict(0), 1);

  Ensemble mix;
  mix.add(0.6, Hypothesis::constant(1));
  mix.add(0.5, Hypothesis::constant(-1));
  EXPECT_EQ(mix.predict(0), 1);

  EXPECT_THROW(Ensemble{}.predict(0), InvalidArgument);
}

TEST(EmpiricalError, Examples) {
  const auto s = maj3();
  Ensemble pos;
  pos.add(1.0, Hypothesis::constant(1));
  EXPECT_DOUBLE_EQ(empirical_error(pos, s.points), 0.5);

  Ensemble exact;
  exact.add(1.0, Hypothesis::stump(0, 1));
  exact.add(1.0, Hypothesis::stump(1, 1));
  exact.add(1.0, Hypothesis::stump(2, 1));
  EXPECT_EQ(empirical_error(exact, s.points), 0.0);
  EXPECT_EQ(empirical_error(exact, s.points, std::vector<double>(8, 0.125)), 0.0);
  EXPECT_THROW(empirical_error(exact, std::vector<Example>{}), InvalidArgument);
}

TEST(RunAdaboost, Maj3ReachesZeroTrainingError) {
  const auto s = maj3();
  DefaultRng rng(1);
  const auto run = run_adaboost(s, DistributionAwareLearner{}, 30, rng);
  EXPECT_EQ(run.rounds.size(), 30u);
  EXPECT_EQ(training_error(run.ensemble, s), 0.0);
  EXPECT_EQ(empirical_error(run.ensemble, full_domain(Concept::majority_of_first(3, 3)).points), 0.0);
}

TEST(RunAdaboost, TrainingErrorBelowProductOfZ) {
  DefaultRng rng(8);
  const auto s = generate_training_set(Concept::majority_of_first(8, 5), Sampler::uniform(8), 100, rng);
  const auto run = run_adaboost(s, DistributionAwareLearner{}, 40, rng);
  double prod = 1.0;
  for (const auto& r : run.rounds) {
    prod *= 2.0 * std::sqrt(r.eps_true * (1.0 - r.eps_true));
    EXPECT_LE(r.train_err, prod + 1e-12);
  }
}

TEST(RunAdaboost, PerfectLearnerStopsAfterOneRound) {
  const auto s = full_domain(Concept::dictator(3, 2));
  DefaultRng rng(1);
  const auto run = run_adaboost(s, DistributionAwareLearner{}, 5, rng);
  EXPECT_TRUE(run.stopped_early);
  ASSERT_EQ(run.ensemble.size(), 1u);
  EXPECT_EQ(training_error(run.ensemble, s), 0.0);
  EXPECT_DOUBLE_EQ(run.ensemble.terms()[0].alpha, std::log(8.0 * 5.0));
}

TEST(RunAdaboost, HalfErrorLearnerAborts) {
  const auto s = maj3();
  DefaultRng rng(1);
  auto coin = [](const TrainingSet&, const WeightVector&, DefaultRng&) -> std::optional<Hypothesis> {
    return Hypothesis::constant(1);
  };
  try {
    (void)run_adaboost(s, coin, 10, rng);
    FAIL() << "expected a weak-learning violation";
  } catch (const WeakLearningViolation& e) {
    EXPECT_EQ(e.round(), 1);
    EXPECT_DOUBLE_EQ(e.eps(), 0.5);
  }
}

TEST(RunAdaboost, LearnerFailureRetriedOnceThenAborts) {
  const auto s = maj3();
  DefaultRng rng(1);
  int calls = 0;
  auto flaky = [&](const TrainingSet& ts, const WeightVector& d, DefaultRng&) -> std::optional<Hypothesis> {
    if (++calls % 2 == 1) return std::nullopt;
    return best_stump(ts, d).h;
  };
  const auto run = run_adaboost(s, flaky, 4, rng);
  EXPECT_EQ(run.rounds.size(), 4u);
  EXPECT_EQ(calls, 8);

  auto dead = [](const TrainingSet&, const WeightVector&, DefaultRng&) -> std::optional<Hypothesis> {
    return std::nullopt;
  };
  EXPECT_THROW(run_adaboost(s, dead, 4, rng), LearnerFailure);
}

TEST(RunAdaboost, KeepWeightsRecordsDistributions) {
  const auto s = maj3();
  DefaultRng rng(1);
  const auto run = run_adaboost(s, DistributionAwareLearner{}, 5, rng, true);
  for (const auto& r : run.rounds) {
    ASSERT_EQ(r.d_true.size(), 8u);
    EXPECT_NEAR(detail::compensated_sum(r.d_true), 1.0, 1e-12);
  }
}

TEST(DefaultRounds, CeilLnMOverGammaSquared) {
  EXPECT_EQ(default_rounds(8, 0.25), static_cast<int>(std::ceil(16.0 * std::log(8.0))));
  EXPECT_EQ(default_rounds(8, 0.25, 2.0), static_cast<int>(std::ceil(32.0 * std::log(8.0))));
  EXPECT_EQ(default_rounds(1, 0.25), 1);
}

TEST(EnsembleText, RoundTripIsBitExact) {
  const auto s = maj3();
  DefaultRng rng(1);
  auto run = run_adaboost(s, DistributionAwareLearner{}, 12, rng);
  run.ensemble.add(0.1 + 0.2, Hypothesis::constant(-1));
  std::stringstream io;
  write_ensemble(io, run.ensemble);
  const auto back = read_ensemble(io);
  ASSERT_EQ(back.size(), run.ensemble.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    const double a = back.terms()[i].alpha, b = run.ensemble.terms()[i].alpha;
    EXPECT_EQ(std::memcmp(&a, &b, sizeof a), 0);
    EXPECT_EQ(back.terms()[i].h, run.ensemble.terms()[i].h);
  }
}

TEST(EnsembleText, LineFormat) {
  Ensemble e;
  e.add(0.5, Hypothesis::stump(2, -1));
  e.add(1.25, Hypothesis::constant(1));
  std::ostringstream os;
  write_ensemble(os, e);
  EXPECT_EQ(os.str(), "alpha=0.5 kind=stump i=3 pol=-\nalpha=1.25 kind=const i=0 pol=+\n");
  std::istringstream bad("alpha=x kind=stump i=1 pol=+\n");
  EXPECT_THROW(read_ensemble(bad), ParseError);
  std::istringstream bad_kind("alpha=1 kind=tree i=1 pol=+\n");
  EXPECT_THROW(read_ensemble(bad_kind), ParseError);
}

TEST(WeightVector, Validation) {
  EXPECT_THROW(WeightVector({0.5, 0.6}, WeightKind::distribution), InvalidArgument);
  EXPECT_THROW(WeightVector({0.5, 0.6}, WeightKind::subnormalized), InvalidArgument);
  EXPECT_NO_THROW(WeightVector({0.5, 0.4}, WeightKind::subnormalized));
  EXPECT_THROW(WeightVector({-0.1, 1.1}, WeightKind::distribution), InvalidArgument);
  EXPECT_THROW(WeightVector::normalize(std::vector<double>{0.0, 0.0}), DegenerateError);
  const auto n = WeightVector::normalize(std::vector<double>{1.0, 3.0});
  EXPECT_DOUBLE_EQ(n[1], 0.75);
}
