#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "support/oracles.hpp"
#include "trinity/dense2sparse.hpp"

namespace trinity {
namespace {

TEST(Normalizer, TwoPointColumn) {
  Eigen::MatrixXd m(2, 1);
  m << 0.0, 2.0;
  const NormStats s = fit_normalizer(m);
  EXPECT_EQ(s.mean[0], 1.0);
  EXPECT_EQ(s.std[0], 1.0);
}

TEST(Normalizer, ConstantColumnHasZeroStd) {
  const NormStats s = fit_normalizer(Eigen::MatrixXd::Constant(5, 2, 3.0));
  EXPECT_EQ(s.mean[1], 3.0);
  EXPECT_EQ(s.std[1], 0.0);
  EXPECT_EQ(s.normalize(1, 3.0), 0.0);
}

TEST(Normalizer, EmptyMatrixIsConfigError) {
  EXPECT_THROW(fit_normalizer(Eigen::MatrixXd(0, 3)), ConfigError);
}

TEST(Normalizer, MeansMatchSummationOracle) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 50.0);
  Eigen::MatrixXd m(1000, 120);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  const NormStats s = fit_normalizer(m);
  for (int c = 0; c < 120; ++c) {
    long double sum = 0.0L;
    for (int r = 0; r < 1000; ++r) sum += m(r, c);
    EXPECT_NEAR(s.mean[c], static_cast<double>(sum / 1000.0L), 1e-9);
    EXPECT_GE(s.std[c], 0.0);
  }
}

TEST(Normalizer, SampleSetAndMatrixAgree) {
  SampleSet rows(3);
  SampleRow r;
  std::mt19937_64 rng(32);
  std::poisson_distribution<int> p(2.0);
  Eigen::MatrixXd m(50, 3);
  for (int i = 0; i < 50; ++i) {
    r.dense_features = {double(p(rng)), double(p(rng)), double(p(rng))};
    for (int k = 0; k < 3; ++k) m(i, k) = r.dense_features[k];
    rows.push_back(r);
  }
  const NormStats a = fit_normalizer(m), b = fit_normalizer(rows);
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(a.mean[k], b.mean[k], 1e-12);
    EXPECT_NEAR(a.std[k], b.std[k], 1e-12);
  }
}

TEST(FitBins, UniformGridQuartiles) {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  const auto b = fit_bins(v, 4);
  EXPECT_EQ(b, (std::vector<double>{25.0, 50.0, 75.0}));
  std::array<int, 4> pop{};
  for (double x : v) ++pop[bucket_of(b, x)];
  EXPECT_EQ(pop, (std::array<int, 4>{25, 25, 25, 25}));
}

TEST(FitBins, IdenticalValuesGiveOneBucket) {
  EXPECT_TRUE(fit_bins(std::vector<double>(40, 1.5), 8).empty());
}

TEST(FitBins, HeavyZerosCollapse) {
  std::vector<double> v(900, 0.0);
  for (int i = 0; i < 100; ++i) v.push_back(1.0 + i);
  const auto b = fit_bins(v, 8);
  EXPECT_LE(b.size() + 1, 8u);
  for (std::size_t i = 1; i < b.size(); ++i) EXPECT_LT(b[i - 1], b[i]);
}

TEST(FitBins, RejectsFewerThanTwoBuckets) {
  EXPECT_THROW(fit_bins(std::vector<double>{1.0}, 1), ConfigError);
}

TEST(FitBins, BalancedOnDistinctValues) {
  std::mt19937_64 rng(33);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int size = 200 + trial * 37;
    const int buckets = 2 + trial % 15;
    std::vector<double> v(size);
    for (double& x : v) x = n(rng);
    const auto b = fit_bins(v, buckets);
    ASSERT_EQ(static_cast<int>(b.size()), buckets - 1);
    std::vector<int> pop(buckets, 0);
    for (double x : v) ++pop[bucket_of(b, x)];
    const double ideal = static_cast<double>(size) / buckets;
    for (int p : pop) EXPECT_LE(std::abs(p - ideal), 1.0) << size << "/" << buckets;
  }
}

SampleSet count_rows(std::mt19937_64& rng, int n, int features) {
  std::poisson_distribution<int> count(1.2);
  std::bernoulli_distribution zero(0.4);
  SampleSet rows(features);
  SampleRow r;
  r.dense_features.resize(features);
  for (int i = 0; i < n; ++i) {
    for (double& v : r.dense_features) v = zero(rng) ? 0.0 : count(rng) * 1.0;
    rows.push_back(r);
  }
  return rows;
}

TEST(Encode, MatchesLinearScanOracle) {
  std::mt19937_64 rng(34);
  for (bool reserve : {true, false}) {
    const SampleSet train = count_rows(rng, 2000, 12);
    const NormStats stats = fit_normalizer(train);
    const BinBoundaries bins = fit_binning(train, stats, 16, reserve);
    const SampleSet test = count_rows(rng, 1000, 12);
    for (std::size_t i = 0; i < test.size(); ++i) {
      const auto f = test.dense_row(i);
      const std::vector<double> raw(f.begin(), f.end());
      const auto got = encode(raw, stats, bins);
      EXPECT_EQ(got, testing::linear_scan_encode(raw, stats, bins));
      std::vector<int> narrow(raw.size());
      encode_into(f, stats, bins, narrow);
      EXPECT_EQ(narrow, got);
      for (int b : got) {
        EXPECT_GE(b, 0);
        EXPECT_LT(b, bins.table_rows());
      }
    }
  }
}

TEST(Encode, ReservedZeroAndClamping) {
  SampleSet train(1);
  SampleRow r;
  for (double v : {0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0}) {
    r.dense_features = {v};
    train.push_back(r);
  }
  const NormStats stats = fit_normalizer(train);
  const BinBoundaries bins = fit_binning(train, stats, 4, true);
  EXPECT_EQ(encode(std::vector<double>{0.0}, stats, bins)[0], 0);
  EXPECT_EQ(encode(std::vector<double>{0.5}, stats, bins)[0], 1);
  EXPECT_EQ(encode(std::vector<double>{1e6}, stats, bins)[0], 3);
  EXPECT_THROW(encode(std::vector<double>{1.0, 2.0}, stats, bins), ContractError);
}

TEST(Encode, MonotoneAndDeterministic) {
  std::mt19937_64 rng(35);
  const SampleSet train = count_rows(rng, 1000, 4);
  const NormStats stats = fit_normalizer(train);
  const BinBoundaries bins = fit_binning(train, stats, 8, true);
  const NormStats stats_copy = stats;
  const BinBoundaries bins_copy = bins;
  std::uniform_real_distribution<double> u(0.01, 12.0);
  for (int trial = 0; trial < 500; ++trial) {
    double x = u(rng), y = u(rng);
    if (x > y) std::swap(x, y);
    const std::vector<double> rx(4, x), ry(4, y);
    const auto bx = encode(rx, stats, bins), by = encode(ry, stats, bins);
    for (int k = 0; k < 4; ++k) EXPECT_LE(bx[k], by[k]);
    EXPECT_EQ(encode(rx, stats, bins), bx);
  }
  EXPECT_EQ(stats, stats_copy);
  EXPECT_EQ(bins, bins_copy);
}

TEST(Encode, TiesGoToLowerBucket) {
  const std::vector<double> b = {-1.0, 0.0, 1.0};
  EXPECT_EQ(bucket_of(b, -1.0), 0);
  EXPECT_EQ(bucket_of(b, -0.999), 1);
  EXPECT_EQ(bucket_of(b, 1.0), 2);
  EXPECT_EQ(bucket_of(b, 1.001), 3);
}

}  // namespace
}  // namespace trinity
