#ifndef TRINITY_TESTS_ORACLES_HPP_
#define TRINITY_TESTS_ORACLES_HPP_

// Slow, obviously-correct reference implementations used by the tests.

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "trinity/dense2sparse.hpp"
#include "trinity/feature_store.hpp"
#include "trinity/synthgen.hpp"

namespace trinity::testing {

// Fraction of (positive, negative) pairs ordered correctly, ties counting 1/2.
inline double pairwise_auc(const std::vector<int>& y, const std::vector<double>& s) {
  double good = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 0) continue;
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      if (s[i] > s[j]) {
        good += 1.0;
      } else if (s[i] == s[j]) {
        good += 0.5;
      }
    }
  }
  return good / pairs;
}

// Labels with at least one of each class; scores in [-1, 1], optionally
// rounded onto `tie_levels` values to force ties.
inline std::pair<std::vector<int>, std::vector<double>> random_scored_labels(std::mt19937_64& rng,
                                                                             std::size_t n,
                                                                             int tie_levels) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::bernoulli_distribution coin(0.35);
  std::vector<int> y(n);
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = coin(rng) ? 1 : 0;
    s[i] = u(rng) + 0.3 * y[i];
    if (tie_levels > 0) s[i] = std::round(s[i] * tie_levels) / tie_levels;
  }
  y[0] = 1;
  y[n - 1] = 0;
  return {y, s};
}

// Counts every cell by filtering the raw event list.
inline BehaviorTensor brute_force_tensor(const std::vector<Event>& events, std::int64_t ref) {
  BehaviorTensor t;
  t.ref_time = ref;
  for (int w = 0; w < kNumWindows; ++w) {
    for (int s = 0; s < kNumTensorScenarios; ++s) {
      for (int c = 0; c < kNumCardTypes; ++c) {
        for (int a = 0; a < kNumActions; ++a) {
          std::int32_t n = 0;
          for (const Event& e : events) {
            const bool in_window = e.timestamp >= ref - kWindowSeconds[w] && e.timestamp < ref;
            const bool scenario_ok = s == kAllScenarios || static_cast<int>(e.scenario) == s;
            if (in_window && scenario_ok && static_cast<int>(e.card_type) == c &&
                static_cast<int>(e.action) == a) {
              ++n;
            }
          }
          t.counts[tensor_index(w, s, c, a)] = n;
        }
      }
    }
  }
  return t;
}

// Random event log for a handful of users over `span_seconds` before `end`.
inline std::vector<Event> random_events(std::mt19937_64& rng, std::size_t n, int n_users,
                                        std::int64_t end, std::int64_t span_seconds) {
  std::uniform_int_distribution<std::int64_t> ts(end - span_seconds, end);
  std::uniform_int_distribution<int> user(0, n_users - 1);
  std::uniform_int_distribution<int> card(0, kNumCardTypes - 1);
  std::bernoulli_distribution coin(0.5);
  std::vector<Event> events(n);
  for (Event& e : events) {
    e.user_id = user(rng);
    e.timestamp = ts(rng);
    e.scenario = coin(rng) ? Scenario::kCopilot : Scenario::kClassic;
    e.card_type = static_cast<CardType>(card(rng));
    if (e.scenario == Scenario::kClassic && e.card_type == CardType::kCopilotContent) {
      e.card_type = CardType::kVideo;
    }
    e.action = coin(rng) ? Action::kClick : Action::kView;
    e.item_id = static_cast<std::int64_t>(e.card_type) * 1000;
  }
  std::sort(events.begin(), events.end(),
            [](const Event& a, const Event& b) { return a.timestamp < b.timestamp; });
  return events;
}

// Bucket by scanning boundaries left to right; values equal to a boundary stay
// in the lower bucket.
inline int linear_scan_bucket(const std::vector<double>& boundaries, double v) {
  int b = 0;
  for (double edge : boundaries) {
    if (v > edge) ++b;
  }
  return b;
}

inline std::vector<int> linear_scan_encode(std::span<const double> raw, const NormStats& stats,
                                           const BinBoundaries& bins) {
  std::vector<int> out(raw.size());
  for (std::size_t f = 0; f < raw.size(); ++f) {
    if (bins.reserve_zero && raw[f] == 0.0) {
      out[f] = 0;
      continue;
    }
    const int b = linear_scan_bucket(bins.boundaries[f], stats.normalize(f, raw[f]));
    out[f] = bins.reserve_zero ? b + 1 : b;
  }
  return out;
}

}  // namespace trinity::testing

#endif  // TRINITY_TESTS_ORACLES_HPP_
