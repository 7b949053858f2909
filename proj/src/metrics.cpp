#include "trinity/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace trinity {

std::string_view to_string(Slice s) {
  switch (s) {
    case Slice::kGlobal:
      return "global";
    case Slice::kClassic:
      return "classic";
    case Slice::kCopilot:
      return "copilot";
  }
  return "global";
}

Slice parse_slice(std::string_view s) {
  if (s == "global") return Slice::kGlobal;
  if (s == "classic") return Slice::kClassic;
  if (s == "copilot") return Slice::kCopilot;
  throw ConfigError("unknown slice '" + std::string(s) + "'");
}

double auc(std::span<const int> labels, std::span<const double> scores) {
  if (labels.size() != scores.size()) {
    throw ContractError("auc: labels and scores differ in length");
  }
  const std::size_t n = labels.size();
  std::int64_t positives = 0;
  for (int y : labels) positives += (y != 0);
  const std::int64_t negatives = static_cast<std::int64_t>(n) - positives;
  if (positives == 0 || negatives == 0) {
    throw MetricUndefinedError("auc undefined: " + std::to_string(positives) + " positives, " +
                                   std::to_string(negatives) + " negatives",
                               positives, negatives);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Ranks are 1-based; a run of ties [i, j) shares the midrank (i + j + 1) / 2.
  double positive_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + j + 1);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] != 0) positive_rank_sum += midrank;
    }
    i = j;
  }
  const double p = static_cast<double>(positives);
  const double q = static_cast<double>(negatives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * q);
}

double copc(std::span<const int> labels, std::span<const double> scores) {
  if (labels.size() != scores.size()) {
    throw ContractError("copc: labels and scores differ in length");
  }
  if (labels.empty()) throw MetricUndefinedError("copc undefined: no samples", 0, 0);
  double clicks = 0.0;
  double predicted = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    clicks += labels[i] != 0 ? 1.0 : 0.0;
    predicted += scores[i];
  }
  if (!(predicted > 0.0)) {
    const auto pos = static_cast<std::int64_t>(clicks);
    throw MetricUndefinedError("copc undefined: mean predicted score is zero", pos,
                               static_cast<std::int64_t>(labels.size()) - pos);
  }
  const double n = static_cast<double>(labels.size());
  return (clicks / n) / (predicted / n);
}

MetricsReport report(Slice slice, std::span<const int> labels, std::span<const double> scores) {
  MetricsReport r;
  r.slice = slice;
  r.n_samples = static_cast<std::int64_t>(labels.size());
  for (int y : labels) r.n_positives += (y != 0);
  const double n = static_cast<double>(labels.size());
  double predicted = 0.0;
  for (double s : scores) predicted += s;
  r.realctr = static_cast<double>(r.n_positives) / n;
  r.pctr = predicted / n;
  r.copc = copc(labels, scores);
  if (r.n_positives > 0 && r.n_positives < r.n_samples) r.auc = auc(labels, scores);
  return r;
}

SlicedReport sliced_report(std::span<const Scenario> scenarios, std::span<const int> labels,
                           std::span<const double> scores) {
  if (scenarios.size() != labels.size() || labels.size() != scores.size()) {
    throw ContractError("sliced_report: input lengths differ");
  }
  SlicedReport out;
  if (labels.empty()) return out;
  out[static_cast<int>(Slice::kGlobal)] = report(Slice::kGlobal, labels, scores);
  for (Scenario s : {Scenario::kClassic, Scenario::kCopilot}) {
    std::vector<int> y;
    std::vector<double> p;
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
      if (scenarios[i] != s) continue;
      y.push_back(labels[i]);
      p.push_back(scores[i]);
    }
    if (!y.empty()) out[static_cast<int>(slice_of(s))] = report(slice_of(s), y, p);
  }
  return out;
}

}  // namespace trinity
