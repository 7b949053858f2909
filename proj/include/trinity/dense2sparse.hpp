#ifndef TRINITY_DENSE2SPARSE_HPP_
#define TRINITY_DENSE2SPARSE_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "trinity/feature_store.hpp"

namespace trinity {

// Frozen per-column standardization: (x - mean) / (std + epsilon). This is
// batch normalization in inference mode, fitted once on training data.
struct NormStats {
  std::vector<double> mean;
  std::vector<double> std;
  double epsilon = 1e-5;

  std::size_t size() const { return mean.size(); }
  double normalize(std::size_t feature, double x) const {
    return (x - mean[feature]) / (std[feature] + epsilon);
  }
  bool operator==(const NormStats&) const = default;
};

// Population mean/std per column. Throws ConfigError on an empty matrix.
NormStats fit_normalizer(const Eigen::Ref<const Eigen::MatrixXd>& train_matrix);
NormStats fit_normalizer(const SampleSet& rows);

// Equal-frequency boundaries for one normalized column: the k/B quantiles
// (lower order statistic) for k = 1..B-1, with duplicates and values at or
// above the column maximum dropped so the list is strictly increasing.
std::vector<double> fit_bins(std::span<const double> normalized_column, int n_buckets);

struct BinBoundaries {
  std::vector<std::vector<double>> boundaries;
  int n_buckets = 16;
  // When set, bucket 0 is reserved for exact-zero raw counts and fitted
  // buckets start at 1.
  bool reserve_zero = true;

  std::size_t size() const { return boundaries.size(); }
  // Bucket ids lie in [0, n_buckets); the reserved zero bucket counts toward B.
  int table_rows() const { return n_buckets; }
  bool operator==(const BinBoundaries&) const = default;
};

// Fits boundaries for every column of `rows`. With reserve_zero, quantiles are
// taken over the nonzero raw values only.
BinBoundaries fit_binning(const SampleSet& rows, const NormStats& stats, int n_buckets,
                          bool reserve_zero);

// Bucket of a normalized value among `boundaries`; ties go to the lower bucket.
int bucket_of(std::span<const double> boundaries, double normalized);

// Bucket id per feature. Throws ContractError on a width mismatch.
std::vector<int> encode(std::span<const double> raw_row, const NormStats& stats,
                        const BinBoundaries& bins);
void encode_into(std::span<const float> raw_row, const NormStats& stats, const BinBoundaries& bins,
                 std::span<int> out);

}  // namespace trinity

#endif  // TRINITY_DENSE2SPARSE_HPP_
