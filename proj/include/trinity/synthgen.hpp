#ifndef TRINITY_SYNTHGEN_HPP_
#define TRINITY_SYNTHGEN_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "trinity/common.hpp"

namespace trinity {

using Affinity = std::array<double, kNumCardTypes>;

struct UserProfile {
  std::int64_t user_id = 0;
  ActivityLevel activity_level = ActivityLevel::kActive;
  Affinity affinity{};
  Membership scenario_membership = Membership::kClassicOnly;

  bool operator==(const UserProfile&) const = default;
};

struct Event {
  std::int64_t user_id = 0;
  std::int64_t timestamp = 0;
  Scenario scenario = Scenario::kClassic;
  CardType card_type = CardType::kWeather;
  Action action = Action::kView;
  std::int64_t item_id = 0;

  bool operator==(const Event&) const = default;
};

using EventLog = std::vector<Event>;

// A served (user, item) pair with its realized outcome. The matching view event
// (and click event when clicked) is in the EventLog at the same timestamp.
struct Impression {
  std::int64_t user_id = 0;
  std::int64_t timestamp = 0;
  Scenario scenario = Scenario::kClassic;
  CardType card_type = CardType::kWeather;
  std::int64_t item_id = 0;
  bool click = false;
  double dwell_seconds = 0.0;
  double p_true = 0.0;

  bool operator==(const Impression&) const = default;
};

// True click probability per impression, aligned with DayLog::impressions.
using GroundTruth = std::vector<double>;

struct DayLog {
  int day = 0;
  EventLog events;
  std::vector<Impression> impressions;
  GroundTruth truth;
};

// Generator configuration. Serialized as JSON (see config.hpp); schema_version
// is checked on load.
struct GenConfig {
  int schema_version = 1;
  std::int64_t n_users = 20000;
  double cold_start_fraction = 0.5;
  // Membership mix {classic_only, copilot_only, both} per activity level.
  std::array<double, 3> active_membership = {0.6, 0.0, 0.4};
  std::array<double, 3> cold_start_membership = {0.0, 0.4, 0.6};
  double active_daily_impressions = 4.5;
  // Cold-start impression rate relative to active users; must be < 1.
  double cold_start_rate_ratio = 0.1;
  // Share of a "both" user's impressions served in the copilot scenario.
  double both_copilot_share = 0.15;
  // Card mix per scenario; copilot_content must be 0 in classic.
  std::array<std::array<double, kNumCardTypes>, kNumScenarios> card_mix = {{
      {0.25, 0.25, 0.30, 0.20, 0.0},
      {0.15, 0.15, 0.15, 0.15, 0.40},
  }};
  // Ground truth: logit = base[s] + card[c] + affinity_scale * a_u . loading[c] + interaction[s][c].
  std::array<double, kNumScenarios> base_logit = {-5.7510, -8.2410};
  std::array<double, kNumCardTypes> card_logit = {-0.3, 0.0, 0.2, 0.1, 0.3};
  std::array<std::array<double, kNumCardTypes>, kNumScenarios> interaction_logit = {{
      {0.0, 0.0, 0.0, 0.0, 0.0},
      {-0.3, 0.2, 0.0, -0.2, 0.4},
  }};
  double affinity_scale = 2.5;
  // Served card mix is tilted toward cards the user likes: weight
  // card_mix[s][c] * exp(exposure_affinity * a_u . loading[c]).
  double exposure_affinity = 1.0;
  // Row c is the card vector v_c that user affinities project onto. Off-diagonal
  // mass plants cross-card preference structure.
  std::array<Affinity, kNumCardTypes> affinity_loading = {{
      {1.0, 0.0, 0.0, 0.0, 0.0},
      {0.0, 0.8, 0.4, 0.0, 0.0},
      {0.0, 0.3, 0.9, 0.0, 0.0},
      {0.0, 0.0, 0.0, 1.0, 0.0},
      {0.0, 0.5, 0.6, 0.0, 0.4},
  }};
  double dwell_mean_seconds = 45.0;
  std::int64_t items_per_card = 1000;
  std::int64_t epoch_start = 1720915200;
};

void validate(const GenConfig& config);

std::vector<UserProfile> generate_population(const GenConfig& config, std::uint64_t seed);

// True click probability for a user seeing a card in a scenario.
double click_probability(const GenConfig& config, const UserProfile& user, Scenario scenario,
                         CardType card);

// Probability of each card type being served to `user` in `scenario`.
std::array<double, kNumCardTypes> card_distribution(const GenConfig& config,
                                                   const UserProfile& user, Scenario scenario);

// Expected impressions per day of `user` in `scenario`.
double expected_daily_impressions(const GenConfig& config, const UserProfile& user,
                                  Scenario scenario);

// Events and labeled impressions for one day. Sorted by (timestamp, user_id,
// item_id, action). Deterministic in (population, day, config, seed)
// independent of thread count.
DayLog simulate_day(std::span<const UserProfile> population, int day_index,
                    const GenConfig& config, std::uint64_t seed);

// Expected per-scenario CTR of the population under `config`, weighting each
// (user, card) by its expected impression volume.
std::array<double, kNumScenarios> expected_ctr(const GenConfig& config,
                                               std::span<const UserProfile> population);

// Bisects base_logit per scenario so expected_ctr hits `targets`.
GenConfig calibrate_base_logits(GenConfig config, std::span<const UserProfile> population,
                                std::array<double, kNumScenarios> targets);

// AUC of the true probabilities against realized labels.
double oracle_auc(std::span<const int> labels, std::span<const double> truth);

// Duration class of a dwell time: 0 below 10 s, 1 below 30 s, 2 below 120 s, else 3.
inline constexpr int kDurationClasses = 4;
int duration_class(double dwell_seconds);

}  // namespace trinity

#endif  // TRINITY_SYNTHGEN_HPP_
