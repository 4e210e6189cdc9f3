#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "oracles.hpp"
#include "qboost/qboost.hpp"

using namespace qboost;

namespace {

TrainingSet maj3() { return full_domain(Concept::majority_of_first(3, 3)); }

std::vector<double> uniform_weights(std::size_t m) { return std::vector<double>(m, 1.0 / static_cast<double>(m)); }

}  // namespace

TEST(Bitstrings, FeatureOneIsLeftmostCharacter) {
  EXPECT_EQ(to_bitstring(0b001, 3), "100");
  EXPECT_EQ(from_bitstring("100"), 0b001u);
  for (Point x = 0; x < 64; ++x) EXPECT_EQ(from_bitstring(to_bitstring(x, 6)), x);
  EXPECT_THROW(from_bitstring("10a"), ParseError);
  EXPECT_THROW(from_bitstring(""), ParseError);
}

TEST(Concept, MajorityDictatorConstantParity) {
  const auto maj = Concept::majority_of_first(3, 3);
  EXPECT_EQ(maj(from_bitstring("110")), 1);
  EXPECT_EQ(maj(from_bitstring("100")), -1);
  EXPECT_EQ(Concept::dictator(3, 0)(from_bitstring("100")), 1);
  EXPECT_EQ(Concept::dictator(3, 0)(from_bitstring("011")), -1);
  EXPECT_EQ(Concept::constant(4, -1)(0b1111), -1);
  EXPECT_EQ(Concept::parity(2, 0b11)(0b11), 1);
  EXPECT_EQ(Concept::parity(2, 0b11)(0b01), -1);
  EXPECT_THROW(Concept::majority(3, 0b11), InvalidArgument);
  EXPECT_THROW(Concept::dictator(3, 3), InvalidArgument);
}

TEST(Concept, TableMatchesLabels) {
  const auto t = Concept::table(2, {1, -1, -1, 1});
  EXPECT_EQ(t(0), 1);
  EXPECT_EQ(t(1), -1);
  EXPECT_EQ(t(3), 1);
  EXPECT_THROW(Concept::table(2, {1, -1}), InvalidArgument);
  EXPECT_THROW(Concept::table(1, {1, 0}), InvalidArgument);
}

TEST(Concept, ParseSpecs) {
  EXPECT_EQ(parse_concept("majority", 5).mask(), 0b11111u);
  EXPECT_EQ(parse_concept("majority:3", 5).mask(), 0b111u);
  EXPECT_EQ(parse_concept("dictator:2", 4).mask(), 0b10u);
  EXPECT_EQ(parse_concept("constant:-1", 4)(0), -1);
  EXPECT_EQ(parse_concept("parity:2", 4).kind(), Concept::Kind::parity);
  EXPECT_THROW(parse_concept("majority:2", 4), ParseError);
  EXPECT_THROW(parse_concept("dictator:9", 4), ParseError);
  EXPECT_THROW(parse_concept("xor", 4), ParseError);
  EXPECT_THROW(parse_concept("majority:x", 4), ParseError);
}

TEST(Sampler, ParseAndProbabilities) {
  EXPECT_EQ(parse_sampler("uniform", 3).kind(), Sampler::Kind::uniform);
  const auto b = parse_sampler("bernoulli:0.3", 3);
  EXPECT_DOUBLE_EQ(b.p(), 0.3);
  double total = 0.0;
  for (Point x = 0; x < 8; ++x) total += b.probability(x);
  EXPECT_NEAR(total, 1.0, 1e-15);
  EXPECT_THROW(parse_sampler("bernoulli:1.5", 3), InvalidArgument);
  EXPECT_THROW(parse_sampler("gauss", 3), ParseError);
}

TEST(GenerateTrainingSet, Maj3FullTableWithDedup) {
  DefaultRng rng(7);
  const auto c = Concept::majority_of_first(3, 3);
  const auto s = generate_training_set(c, Sampler::uniform(3), 8, rng);
  EXPECT_EQ(s.points, maj3().points);
}

TEST(GenerateTrainingSet, RejectsEmptyAndOversized) {
  DefaultRng rng(1);
  const auto c = Concept::majority_of_first(3, 3);
  EXPECT_THROW(generate_training_set(c, Sampler::uniform(3), 0, rng), InvalidArgument);
  EXPECT_THROW(generate_training_set(c, Sampler::uniform(3), 9, rng), InvalidArgument);
}

TEST(GenerateTrainingSet, ConstantConceptLabelsAllPositive) {
  DefaultRng rng(3);
  const auto s = generate_training_set(Concept::constant(6, 1), Sampler::bernoulli(6, 0.2), 5, rng);
  ASSERT_EQ(s.size(), 5u);
  for (const auto& e : s.points) EXPECT_EQ(e.y, 1);
}

TEST(GenerateTrainingSet, SameSeedSameSet) {
  const auto c = Concept::majority_of_first(10, 5);
  DefaultRng a(99), b(99);
  EXPECT_EQ(generate_training_set(c, Sampler::uniform(10), 40, a).points,
            generate_training_set(c, Sampler::uniform(10), 40, b).points);
}

TEST(BestStump, Maj3UniformGivesQuarterOnFirstFeature) {
  const auto s = maj3();
  const auto fit = best_stump(s, uniform_weights(8));
  EXPECT_DOUBLE_EQ(fit.error, 0.25);
  EXPECT_EQ(fit.h, Hypothesis::stump(0, 1));
  const auto brute = oracle::candidate_errors(s, uniform_weights(8));
  EXPECT_DOUBLE_EQ(*std::min_element(brute.begin(), brute.end()), 0.25);
}

TEST(BestStump, DictatorIsRealized) {
  const auto s = full_domain(Concept::dictator(4, 0));
  const auto fit = best_stump(s, uniform_weights(s.size()));
  EXPECT_EQ(fit.error, 0.0);
  EXPECT_EQ(fit.h, Hypothesis::stump(0, 1));
}

TEST(BestStump, PointMassIsClassified) {
  const auto s = maj3();
  for (std::size_t j = 0; j < s.size(); ++j) {
    std::vector<double> d(s.size(), 0.0);
    d[j] = 1.0;
    const auto fit = best_stump(s, d);
    EXPECT_EQ(fit.error, 0.0);
    EXPECT_EQ(fit.h(s.points[j].x), s.points[j].y);
  }
}

TEST(BestStump, ConstantWinsOnConstantLabels) {
  const auto s = full_domain(Concept::constant(2, -1));
  const auto fit = best_stump(s, uniform_weights(4));
  EXPECT_EQ(fit.h, Hypothesis::constant(-1));
  EXPECT_EQ(fit.error, 0.0);
}

TEST(BestStump, TieBreakPrefersLowerFeatureThenPositivePolarity) {
  const auto s = full_domain(Concept::parity(2, 0b11));
  const auto fit = best_stump(s, uniform_weights(4));
  EXPECT_EQ(fit.h, Hypothesis::stump(0, 1));
  EXPECT_DOUBLE_EQ(fit.error, 0.5);
}

TEST(BestStump, ExactMinimizerAgainstBruteForce) {
  DefaultRng rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + static_cast<int>(detail::uniform_below(rng, 6));
    const std::size_t cap = std::min<std::size_t>(16, std::size_t{1} << n);
    const std::size_t m = 1 + detail::uniform_below(rng, cap);
    std::vector<Label> labels(std::size_t{1} << n);
    for (auto& y : labels) y = detail::bernoulli(rng, 0.5) ? 1 : -1;
    const auto c = Concept::table(n, labels);
    const auto s = generate_training_set(c, Sampler::uniform(n), m, rng);
    std::vector<double> d(m);
    for (auto& w : d) w = detail::uniform01(rng) * (detail::bernoulli(rng, 0.2) ? 0.0 : 1.0);
    d[0] += 1e-3;
    const auto fit = best_stump(s, d);
    const auto brute = oracle::candidate_errors(s, d);
    const double best = *std::min_element(brute.begin(), brute.end());
    EXPECT_NEAR(fit.error, best, 1e-12);
    EXPECT_LE(fit.error, 0.5 + 1e-12);
    const auto cands = candidate_hypotheses(n);
    const auto first = static_cast<std::size_t>(
        std::find_if(brute.begin(), brute.end(), [&](double e) { return e <= best + 1e-13; }) - brute.begin());
    EXPECT_EQ(fit.h, cands[first]);
  }
}

TEST(BestStump, RejectsBadInput) {
  const auto s = maj3();
  EXPECT_THROW(best_stump(s, std::vector<double>(7, 0.1)), InvalidArgument);
  EXPECT_THROW(best_stump(s, std::vector<double>(8, 0.0)), InvalidArgument);
  EXPECT_THROW(best_stump(TrainingSet{}, std::vector<double>{}), InvalidArgument);
}

TEST(SampleBasedStump, ConvergesToBestStumpError) {
  const auto s = maj3();
  DefaultRng rng(5);
  const std::vector<double> raw = {0.05, 0.2, 0.1, 0.15, 0.02, 0.08, 0.3, 0.1};
  const auto d = WeightVector::normalize(raw);
  const auto state = make_example_state(d);
  const double best = best_stump(s, d).error;
  std::vector<double> mean_gap;
  for (int Q : {100, 1000, 10000}) {
    double gap = 0.0;
    const int reps = 30;
    for (int r = 0; r < reps; ++r) {
      const auto h = sample_based_stump(s, state, Q, rng);
      ASSERT_TRUE(h.has_value());
      gap += weighted_error(d, *h, s) - best;
    }
    mean_gap.push_back(gap / reps);
  }
  EXPECT_LE(mean_gap[2], 0.02);
  EXPECT_LE(mean_gap[2], mean_gap[0] + 1e-12);
}

TEST(SampleBasedStump, Maj3UniformLargeQ) {
  const auto s = maj3();
  DefaultRng rng(11);
  const auto state = make_example_state(WeightVector::uniform(8));
  const auto h = sample_based_stump(s, state, 10000, rng);
  ASSERT_TRUE(h.has_value());
  EXPECT_NEAR(weighted_error(uniform_weights(8), *h, s), 0.25, 0.02);
}

TEST(SampleBasedStump, AllDrawsOnOnePoint) {
  const auto s = maj3();
  DefaultRng rng(12);
  std::vector<double> d(8, 0.0);
  d[3] = 1.0;
  const auto state = make_example_state(WeightVector(d, WeightKind::distribution));
  const auto h = sample_based_stump(s, state, 50, rng);
  ASSERT_TRUE(h.has_value());
  EXPECT_EQ((*h)(s.points[3].x), s.points[3].y);
}

TEST(SampleBasedStump, ResidualOnlyStateSignalsFailure) {
  const auto s = maj3();
  DefaultRng rng(13);
  std::vector<double> d(8, 0.0);
  d[0] = 1e-300;
  const auto state = make_example_state(WeightVector(d, WeightKind::subnormalized));
  EXPECT_NEAR(state.residual_norm, 1.0, 1e-15);
  EXPECT_FALSE(sample_based_stump(s, state, 20, rng).has_value());
}

TEST(VcDimension, ThreeDictatorsShatterOnePoint) {
  const ConceptClass cls({Concept::dictator(3, 0), Concept::dictator(3, 1), Concept::dictator(3, 2)});
  std::vector<Point> dom(8);
  for (Point x = 0; x < 8; ++x) dom[x] = x;
  EXPECT_EQ(vc_dimension_bruteforce(cls, dom), 1);
}

TEST(VcDimension, AllFunctionsOnFourPoints) {
  std::vector<Concept> all;
  for (unsigned f = 0; f < 16; ++f) {
    std::vector<Label> t(4);
    for (unsigned x = 0; x < 4; ++x) t[x] = (f >> x) & 1u ? 1 : -1;
    all.push_back(Concept::table(2, t));
  }
  const std::vector<Point> dom = {0, 1, 2, 3};
  EXPECT_EQ(vc_dimension_bruteforce(ConceptClass(all), dom), 4);
}

TEST(VcDimension, SingleConceptIsZero) {
  const std::vector<Point> dom = {0, 1, 2, 3};
  EXPECT_EQ(vc_dimension_bruteforce(ConceptClass({Concept::dictator(2, 0)}), dom), 0);
}

TEST(VcDimension, MonotoneUnderClassGrowth) {
  DefaultRng rng(17);
  std::vector<Point> dom(8);
  for (Point x = 0; x < 8; ++x) dom[x] = x;
  ConceptClass cls({Concept::constant(3, 1)});
  int prev = vc_dimension_bruteforce(cls, dom);
  for (int i = 0; i < 20; ++i) {
    std::vector<Label> t(8);
    for (auto& y : t) y = detail::bernoulli(rng, 0.5) ? 1 : -1;
    cls = cls.with(Concept::table(3, t));
    const int now = vc_dimension_bruteforce(cls, dom);
    EXPECT_GE(now, prev);
    prev = now;
  }
}

TEST(VcDimension, RejectsLargeDomain) {
  std::vector<Point> dom(25);
  for (Point x = 0; x < 25; ++x) dom[x] = x;
  EXPECT_THROW(vc_dimension_bruteforce(ConceptClass({Concept::dictator(5, 0)}), dom), InvalidArgument);
}

TEST(SampleSize, NaturalLogFormula) {
  EXPECT_EQ(sample_size(10, 0.1, 0.1), 690776u);
  const double r = 1000.0;
  EXPECT_EQ(sample_size(10, 0.1, 0.1), static_cast<std::uint64_t>(std::ceil(r * std::log(r) / 0.01)));
}

TEST(SampleSize, DoublingGammaShrinksMoreThanFourfold) {
  for (double g : {0.01, 0.05, 0.1, 0.2}) {
    EXPECT_GT(sample_size(5, g, 0.1), 4 * sample_size(5, 2 * g, 0.1));
  }
}

TEST(SampleSize, SmallestAdmissibleInputsStayPositive) {
  EXPECT_GE(sample_size(1, 0.4999, 0.999), 1u);
  EXPECT_THROW(sample_size(0, 0.1, 0.1), InvalidArgument);
  EXPECT_THROW(sample_size(1, 0.5, 0.1), InvalidArgument);
  EXPECT_THROW(sample_size(1, 0.1, 1.0), InvalidArgument);
}

TEST(TrainingSetText, RoundTrip) {
  DefaultRng rng(21);
  const auto s = generate_training_set(Concept::majority_of_first(7, 5), Sampler::uniform(7), 30, rng);
  std::stringstream io;
  write_training_set(io, s);
  const auto back = read_training_set(io);
  EXPECT_EQ(back.n, 7);
  EXPECT_EQ(back.points, s.points);
}

TEST(TrainingSetText, HeaderAndLineFormat) {
  std::stringstream io;
  write_training_set(io, maj3());
  std::string header, first;
  std::getline(io, header);
  std::getline(io, first);
  EXPECT_EQ(header, "n=3 M=8");
  EXPECT_EQ(first, "000 -1");
}

TEST(TrainingSetText, MalformedInputThrows) {
  std::istringstream a("n=3\n000 +1\n");
  EXPECT_THROW(read_training_set(a), ParseError);
  std::istringstream b("n=3 M=1\n00 +1\n");
  EXPECT_THROW(read_training_set(b), ParseError);
  std::istringstream c("n=3 M=1\n000 2\n");
  EXPECT_THROW(read_training_set(c), ParseError);
}
