#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support/oracles.hpp"
#include "trinity/metrics.hpp"

namespace trinity {
namespace {

TEST(Auc, PerfectSeparation) {
  const std::vector<int> y = {1, 1, 0, 0};
  const std::vector<double> s = {0.9, 0.8, 0.2, 0.1};
  EXPECT_EQ(auc(y, s), 1.0);
}

TEST(Auc, AllTiesIsHalf) {
  const std::vector<int> y = {1, 0, 1, 0, 0};
  const std::vector<double> s(5, 0.3);
  EXPECT_EQ(auc(y, s), 0.5);
}

TEST(Auc, SingleClassCarriesCounts) {
  const std::vector<int> y = {1, 1, 1};
  const std::vector<double> s = {0.1, 0.2, 0.3};
  try {
    auc(y, s);
    FAIL() << "expected MetricUndefinedError";
  } catch (const MetricUndefinedError& e) {
    EXPECT_EQ(e.positives(), 3);
    EXPECT_EQ(e.negatives(), 0);
  }
}

TEST(Auc, MatchesPairwiseOracle) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    auto [y, s] = testing::random_scored_labels(rng, 200, /*tie_levels=*/trial % 3 == 0 ? 7 : 0);
    EXPECT_NEAR(auc(y, s), testing::pairwise_auc(y, s), 1e-12);
  }
}

TEST(Auc, InvariantUnderIncreasingTransforms) {
  std::mt19937_64 rng(7);
  auto [y, s] = testing::random_scored_labels(rng, 300, 11);
  std::vector<double> e(s.size()), a(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    e[i] = std::exp(s[i]);
    a[i] = 3.0 * s[i] - 2.0;
  }
  EXPECT_NEAR(auc(y, e), auc(y, s), 1e-12);
  EXPECT_NEAR(auc(y, a), auc(y, s), 1e-12);
}

TEST(Auc, NegatedScoresComplement) {
  std::mt19937_64 rng(8);
  auto [y, s] = testing::random_scored_labels(rng, 250, 0);
  std::vector<double> neg(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) neg[i] = -s[i];
  EXPECT_NEAR(auc(y, s) + auc(y, neg), 1.0, 1e-12);
}

TEST(Copc, Examples) {
  EXPECT_EQ(copc(std::vector<int>{1, 0}, std::vector<double>{0.5, 0.5}), 1.0);
  EXPECT_DOUBLE_EQ(copc(std::vector<int>{1, 0, 0, 1}, std::vector<double>{0.2, 0.1, 0.3, 0.4}), 2.0);
  EXPECT_DOUBLE_EQ(copc(std::vector<int>{1, 0, 1}, std::vector<double>{1.0, 1e-7, 1.0}),
                   2.0 / (2.0 + 1e-7));
}

TEST(Copc, ZeroMeanScoreIsUndefined) {
  EXPECT_THROW(copc(std::vector<int>{1, 0}, std::vector<double>{0.0, 0.0}), MetricUndefinedError);
  EXPECT_THROW(copc(std::vector<int>{}, std::vector<double>{}), MetricUndefinedError);
}

TEST(Copc, ScalesInversely) {
  std::mt19937_64 rng(4);
  auto [y, s] = testing::random_scored_labels(rng, 100, 0);
  for (double& v : s) v = 0.5 + 0.5 * v;
  std::vector<double> k(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) k[i] = 2.5 * s[i];
  EXPECT_NEAR(copc(y, k), copc(y, s) / 2.5, 1e-12);
}

TEST(SlicedReport, SingleScenarioLeavesOtherSliceAbsent) {
  const std::vector<Scenario> sc(4, Scenario::kClassic);
  const std::vector<int> y = {1, 0, 0, 1};
  const std::vector<double> s = {0.6, 0.2, 0.3, 0.4};
  const SlicedReport r = sliced_report(sc, y, s);
  ASSERT_TRUE(r[0] && r[1]);
  EXPECT_FALSE(r[2].has_value());
  EXPECT_EQ(r[0]->auc, r[1]->auc);
  EXPECT_EQ(r[0]->copc, r[1]->copc);
  EXPECT_EQ(r[0]->slice, Slice::kGlobal);
  EXPECT_EQ(r[1]->slice, Slice::kClassic);
}

TEST(SlicedReport, PerSliceMatchesDirectComputation) {
  std::mt19937_64 rng(12);
  auto [y, s] = testing::random_scored_labels(rng, 400, 0);
  for (double& v : s) v = 0.5 + 0.5 * v;
  std::vector<Scenario> sc(y.size());
  std::bernoulli_distribution cop(0.3);
  for (auto& v : sc) v = cop(rng) ? Scenario::kCopilot : Scenario::kClassic;
  const SlicedReport r = sliced_report(sc, y, s);
  for (Scenario want : {Scenario::kClassic, Scenario::kCopilot}) {
    std::vector<int> ys;
    std::vector<double> ss;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (sc[i] == want) {
        ys.push_back(y[i]);
        ss.push_back(s[i]);
      }
    }
    const auto& rep = r[static_cast<int>(slice_of(want))];
    ASSERT_TRUE(rep.has_value());
    EXPECT_EQ(*rep->auc, auc(ys, ss));
    EXPECT_EQ(rep->copc, copc(ys, ss));
    EXPECT_EQ(rep->n_samples, static_cast<std::int64_t>(ys.size()));
  }
  // Global realctr is the sample-weighted mean of the slice realctrs.
  const double weighted = (r[1]->realctr * r[1]->n_samples + r[2]->realctr * r[2]->n_samples) /
                          static_cast<double>(r[1]->n_samples + r[2]->n_samples);
  EXPECT_NEAR(r[0]->realctr, weighted, 1e-15);
}

TEST(SlicedReport, SingleClassSliceHasNoAuc) {
  const std::vector<Scenario> sc = {Scenario::kClassic, Scenario::kClassic, Scenario::kCopilot};
  const std::vector<int> y = {1, 0, 0};
  const std::vector<double> s = {0.5, 0.4, 0.1};
  const SlicedReport r = sliced_report(sc, y, s);
  ASSERT_TRUE(r[2].has_value());
  EXPECT_FALSE(r[2]->auc.has_value());
  EXPECT_EQ(r[2]->copc, 0.0);
  EXPECT_EQ(r[2]->n_positives, 0);
}

TEST(MetricsReport, CopcIsRatioOfMeans) {
  const std::vector<int> y = {1, 0, 0, 0, 1};
  const std::vector<double> s = {0.3, 0.2, 0.1, 0.4, 0.25};
  const MetricsReport r = report(Slice::kGlobal, y, s);
  EXPECT_EQ(r.copc, r.realctr / r.pctr);
  EXPECT_LE(r.n_positives, r.n_samples);
}

TEST(Slice, NamesRoundTrip) {
  for (Slice s : {Slice::kGlobal, Slice::kClassic, Slice::kCopilot}) {
    EXPECT_EQ(parse_slice(to_string(s)), s);
  }
  EXPECT_THROW(parse_slice("ruby"), ConfigError);
}

}  // namespace
}  // namespace trinity
