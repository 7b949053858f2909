#ifndef TRINITY_FEATURE_STORE_HPP_
#define TRINITY_FEATURE_STORE_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "trinity/common.hpp"
#include "trinity/synthgen.hpp"

namespace trinity {

// Behavior tensor axes.
inline constexpr int kNumWindows = 4;         // 1h, 1d, 7d, 30d
inline constexpr int kNumTensorScenarios = 3; // classic, copilot, all
inline constexpr int kAllScenarios = 2;       // index of the "all" slice
inline constexpr int kTensorSize = kNumWindows * kNumTensorScenarios * kNumCardTypes * kNumActions;
inline constexpr int kTargetFeatureCount = kNumWindows * kNumActions;
inline constexpr std::array<std::int64_t, kNumWindows> kWindowSeconds = {
    kSecondsPerHour, kSecondsPerDay, 7 * kSecondsPerDay, 30 * kSecondsPerDay};
inline constexpr std::array<std::string_view, kNumWindows> kWindowNames = {"1h", "1d", "7d", "30d"};

// Flat index in T-major order: window, then scenario, then card, then action.
constexpr int tensor_index(int window, int scenario, int card, int action) {
  return ((window * kNumTensorScenarios + scenario) * kNumCardTypes + card) * kNumActions + action;
}

// Per-user event counts valid at ref_time over the half-open windows
// [ref_time - w, ref_time).
struct BehaviorTensor {
  std::array<std::int32_t, kTensorSize> counts{};
  std::int64_t ref_time = 0;

  std::int32_t at(int window, int scenario, int card, int action) const {
    return counts[tensor_index(window, scenario, card, action)];
  }
  std::array<double, kTensorSize> flatten() const;
  static BehaviorTensor unflatten(std::span<const double> values, std::int64_t ref_time);

  bool operator==(const BehaviorTensor&) const = default;
};

// Events must be sorted ascending by timestamp; otherwise ContractError.
BehaviorTensor build_tensor(std::span<const Event> user_events, std::int64_t ref_time);

// Name of flattened feature `index`, e.g. "f_7d_copilot_news_click".
std::string feature_name(int index);

struct SampleRow {
  std::int64_t user_id = 0;
  std::int64_t timestamp = 0;
  int label_click = 0;
  int label_duration_class = 0;
  Scenario context_scenario = Scenario::kClassic;
  CardType context_card_type = CardType::kWeather;
  std::vector<double> dense_features;
  std::array<double, kProfileWidth> profile_features{};

  bool operator==(const SampleRow&) const = default;
};

std::array<double, kProfileWidth> profile_features(const UserProfile& user);

// Columnar row storage. Dense counts are held as float, which represents
// every count below 2^24 exactly.
class SampleSet {
 public:
  explicit SampleSet(int n_features = kTensorSize) : n_features_(n_features) {}

  int n_features() const { return n_features_; }
  std::size_t size() const { return user_id.size(); }
  bool empty() const { return user_id.empty(); }

  void reserve(std::size_t n);
  void push_back(const SampleRow& row);
  void append(const SampleSet& other);
  SampleRow row(std::size_t i) const;
  SampleSet subset(std::span<const std::size_t> indices) const;

  std::span<const float> dense_row(std::size_t i) const {
    return {dense.data() + i * static_cast<std::size_t>(n_features_),
            static_cast<std::size_t>(n_features_)};
  }
  std::span<const double> profile_row(std::size_t i) const {
    return {profile.data() + i * kProfileWidth, kProfileWidth};
  }

  std::vector<std::int64_t> user_id;
  std::vector<std::int64_t> timestamp;
  std::vector<int> label_click;
  std::vector<int> label_duration;
  std::vector<Scenario> scenario;
  std::vector<CardType> card;
  std::vector<float> dense;
  std::vector<double> profile;

 private:
  int n_features_;
};

// Events grouped by user, each list sorted by timestamp.
class UserEventIndex {
 public:
  UserEventIndex() = default;
  explicit UserEventIndex(std::span<const Event> log);
  std::span<const Event> events(std::int64_t user_id) const;

 private:
  std::unordered_map<std::int64_t, std::vector<Event>> by_user_;
};

// One row per impression; each row's tensor uses only that user's events
// strictly before the impression and no older than `window_horizon` seconds.
// Users missing from `population` get all-zero profile features, users without
// events get all-zero dense features.
SampleSet snapshot_rows(const UserEventIndex& index, std::span<const Impression> impressions,
                        std::span<const UserProfile> population,
                        std::int64_t window_horizon = kWindowSeconds.back());
SampleSet snapshot_rows(std::span<const Event> log, std::span<const Impression> impressions,
                        std::span<const UserProfile> population,
                        std::int64_t window_horizon = kWindowSeconds.back());

// Keeps the 8 cells matching the row's own scenario and card (window-major,
// then action).
SampleRow restrict_to_target(const SampleRow& row);
SampleSet restrict_to_target(const SampleSet& rows);

}  // namespace trinity

#endif  // TRINITY_FEATURE_STORE_HPP_
