#ifndef TRINITY_METRICS_HPP_
#define TRINITY_METRICS_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "trinity/common.hpp"

namespace trinity {

enum class Slice : std::uint8_t { kGlobal = 0, kClassic = 1, kCopilot = 2 };
inline constexpr int kNumSlices = 3;
std::string_view to_string(Slice s);
Slice parse_slice(std::string_view s);
inline Slice slice_of(Scenario s) {
  return s == Scenario::kClassic ? Slice::kClassic : Slice::kCopilot;
}

// Area under the ROC curve via the rank-sum statistic with midranks, so tied
// scores contribute one half. Throws MetricUndefinedError on single-class input.
double auc(std::span<const int> labels, std::span<const double> scores);

// Click over predicted click: mean(labels) / mean(scores).
double copc(std::span<const int> labels, std::span<const double> scores);

struct MetricsReport {
  Slice slice = Slice::kGlobal;
  // AUC is absent when the slice holds a single class.
  std::optional<double> auc;
  double copc = 0.0;
  double realctr = 0.0;
  double pctr = 0.0;
  std::int64_t n_samples = 0;
  std::int64_t n_positives = 0;

  bool operator==(const MetricsReport&) const = default;
};

// Index by static_cast<int>(Slice). An empty slice is std::nullopt.
using SlicedReport = std::array<std::optional<MetricsReport>, kNumSlices>;

MetricsReport report(Slice slice, std::span<const int> labels, std::span<const double> scores);

SlicedReport sliced_report(std::span<const Scenario> scenarios, std::span<const int> labels,
                           std::span<const double> scores);

}  // namespace trinity

#endif  // TRINITY_METRICS_HPP_
