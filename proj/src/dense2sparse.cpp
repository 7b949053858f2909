#include "trinity/dense2sparse.hpp"

#include <algorithm>
#include <cmath>

namespace trinity {

NormStats fit_normalizer(const Eigen::Ref<const Eigen::MatrixXd>& train_matrix) {
  if (train_matrix.rows() == 0) throw ConfigError("fit_normalizer: empty training matrix");
  const auto n = static_cast<double>(train_matrix.rows());
  NormStats stats;
  stats.mean.resize(train_matrix.cols());
  stats.std.resize(train_matrix.cols());
  for (Eigen::Index c = 0; c < train_matrix.cols(); ++c) {
    const double mean = train_matrix.col(c).sum() / n;
    const double var = (train_matrix.col(c).array() - mean).square().sum() / n;
    stats.mean[c] = mean;
    stats.std[c] = std::sqrt(var);
  }
  return stats;
}

NormStats fit_normalizer(const SampleSet& rows) {
  if (rows.empty()) throw ConfigError("fit_normalizer: empty training matrix");
  const int f = rows.n_features();
  const auto n = static_cast<double>(rows.size());
  std::vector<double> sum(f, 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto r = rows.dense_row(i);
    for (int k = 0; k < f; ++k) sum[k] += r[k];
  }
  NormStats stats;
  stats.mean.resize(f);
  stats.std.resize(f);
  for (int k = 0; k < f; ++k) stats.mean[k] = sum[k] / n;
  std::vector<double> sq(f, 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto r = rows.dense_row(i);
    for (int k = 0; k < f; ++k) {
      const double d = r[k] - stats.mean[k];
      sq[k] += d * d;
    }
  }
  for (int k = 0; k < f; ++k) stats.std[k] = std::sqrt(sq[k] / n);
  return stats;
}

std::vector<double> fit_bins(std::span<const double> normalized_column, int n_buckets) {
  if (n_buckets < 2) throw ConfigError("fit_bins: bucket count must be >= 2");
  if (normalized_column.empty()) return {};
  std::vector<double> sorted(normalized_column.begin(), normalized_column.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double max_value = sorted.back();
  std::vector<double> boundaries;
  for (int k = 1; k < n_buckets; ++k) {
    // Lower k/B order statistic: index ceil(k n / B) - 1.
    const std::size_t idx = (static_cast<std::size_t>(k) * n + n_buckets - 1) / n_buckets - 1;
    const double b = sorted[idx];
    if (b >= max_value) break;
    if (boundaries.empty() || b > boundaries.back()) boundaries.push_back(b);
  }
  return boundaries;
}

BinBoundaries fit_binning(const SampleSet& rows, const NormStats& stats, int n_buckets,
                          bool reserve_zero) {
  if (static_cast<int>(stats.size()) != rows.n_features()) {
    throw ContractError("fit_binning: stats width does not match rows");
  }
  BinBoundaries bins;
  bins.n_buckets = n_buckets;
  bins.reserve_zero = reserve_zero;
  bins.boundaries.resize(rows.n_features());
  std::vector<double> column;
  column.reserve(rows.size());
  for (int k = 0; k < rows.n_features(); ++k) {
    column.clear();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double raw = rows.dense_row(i)[k];
      if (reserve_zero && raw == 0.0) continue;
      column.push_back(stats.normalize(k, raw));
    }
    // With a reserved zero bucket only B - 1 fitted buckets remain.
    bins.boundaries[k] = fit_bins(column, reserve_zero ? n_buckets - 1 : n_buckets);
  }
  return bins;
}

int bucket_of(std::span<const double> boundaries, double normalized) {
  return static_cast<int>(std::lower_bound(boundaries.begin(), boundaries.end(), normalized) -
                          boundaries.begin());
}

namespace {

template <class T>
void encode_impl(std::span<const T> raw_row, const NormStats& stats, const BinBoundaries& bins,
                 std::span<int> out) {
  if (raw_row.size() != stats.size() || raw_row.size() != bins.size() ||
      out.size() != raw_row.size()) {
    throw ContractError("encode: row has " + std::to_string(raw_row.size()) +
                        " features, transforms expect " + std::to_string(bins.size()));
  }
  const int offset = bins.reserve_zero ? 1 : 0;
  for (std::size_t k = 0; k < raw_row.size(); ++k) {
    const double raw = raw_row[k];
    if (bins.reserve_zero && raw == 0.0) {
      out[k] = 0;
      continue;
    }
    out[k] = offset + bucket_of(bins.boundaries[k], stats.normalize(k, raw));
  }
}

}  // namespace

std::vector<int> encode(std::span<const double> raw_row, const NormStats& stats,
                        const BinBoundaries& bins) {
  std::vector<int> out(raw_row.size());
  encode_impl(raw_row, stats, bins, std::span<int>(out));
  return out;
}

void encode_into(std::span<const float> raw_row, const NormStats& stats, const BinBoundaries& bins,
                 std::span<int> out) {
  encode_impl(raw_row, stats, bins, out);
}

}  // namespace trinity
