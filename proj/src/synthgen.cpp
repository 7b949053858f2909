#include "trinity/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <tuple>

#include "trinity/metrics.hpp"
#include "trinity/rng.hpp"

namespace trinity {
namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_fraction(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw ConfigError(std::string(name) + " must lie in [0,1], got " + std::to_string(v));
  }
}

template <std::size_t N>
void check_mix(const std::array<double, N>& mix, const char* name) {
  double total = 0.0;
  for (double v : mix) {
    check_fraction(v, name);
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ConfigError(std::string(name) + " must sum to 1");
  }
}

template <std::size_t N>
std::size_t draw_categorical(Engine& rng, const std::array<double, N>& weights) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double r = u(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    acc += weights[i];
    if (r < acc) return i;
  }
  // Rounding slack: the last category with nonzero weight.
  for (std::size_t i = N; i-- > 0;) {
    if (weights[i] > 0.0) return i;
  }
  return N - 1;
}

double copilot_share(const GenConfig& config, Membership m) {
  switch (m) {
    case Membership::kClassicOnly:
      return 0.0;
    case Membership::kCopilotOnly:
      return 1.0;
    case Membership::kBoth:
      return config.both_copilot_share;
  }
  return 0.0;
}

double daily_rate(const GenConfig& config, const UserProfile& user) {
  double rate = config.active_daily_impressions;
  if (user.activity_level == ActivityLevel::kColdStart) rate *= config.cold_start_rate_ratio;
  return rate;
}

}  // namespace

void validate(const GenConfig& config) {
  if (config.schema_version != 1) {
    throw ConfigError("unsupported GenConfig schema_version " +
                      std::to_string(config.schema_version));
  }
  if (config.n_users < 0) throw ConfigError("n_users must be >= 0");
  check_fraction(config.cold_start_fraction, "cold_start_fraction");
  check_mix(config.active_membership, "active_membership");
  check_mix(config.cold_start_membership, "cold_start_membership");
  check_fraction(config.both_copilot_share, "both_copilot_share");
  if (!(config.active_daily_impressions >= 0.0)) {
    throw ConfigError("active_daily_impressions must be >= 0");
  }
  if (!(config.cold_start_rate_ratio >= 0.0 && config.cold_start_rate_ratio < 1.0)) {
    throw ConfigError("cold_start_rate_ratio must lie in [0,1)");
  }
  for (int s = 0; s < kNumScenarios; ++s) check_mix(config.card_mix[s], "card_mix");
  if (config.card_mix[0][static_cast<int>(CardType::kCopilotContent)] != 0.0) {
    throw ConfigError("copilot_content cards cannot be served in the classic scenario");
  }
  if (!(config.dwell_mean_seconds > 0.0)) throw ConfigError("dwell_mean_seconds must be > 0");
  if (config.items_per_card < 1) throw ConfigError("items_per_card must be >= 1");
}

std::vector<UserProfile> generate_population(const GenConfig& config, std::uint64_t seed) {
  validate(config);
  std::vector<UserProfile> users(static_cast<std::size_t>(config.n_users));
  for (std::int64_t id = 0; id < config.n_users; ++id) {
    Engine rng = make_engine(seed, {tag(Stream::kPopulation), static_cast<std::uint64_t>(id)});
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_real_distribution<double> a(-1.0, 1.0);
    UserProfile& p = users[static_cast<std::size_t>(id)];
    p.user_id = id;
    p.activity_level =
        u(rng) < config.cold_start_fraction ? ActivityLevel::kColdStart : ActivityLevel::kActive;
    const auto& mix = p.activity_level == ActivityLevel::kActive ? config.active_membership
                                                                 : config.cold_start_membership;
    p.scenario_membership = static_cast<Membership>(draw_categorical(rng, mix));
    for (double& v : p.affinity) v = a(rng);
  }
  return users;
}

double click_probability(const GenConfig& config, const UserProfile& user, Scenario scenario,
                         CardType card) {
  const int s = static_cast<int>(scenario);
  const int c = static_cast<int>(card);
  double dot = 0.0;
  for (int k = 0; k < kNumCardTypes; ++k) dot += user.affinity[k] * config.affinity_loading[c][k];
  const double logit = config.base_logit[s] + config.card_logit[c] +
                       config.affinity_scale * dot + config.interaction_logit[s][c];
  // Keep strictly inside (0,1) even for extreme configs.
  return std::clamp(logistic(logit), 1e-12, 1.0 - 1e-12);
}

std::array<double, kNumCardTypes> card_distribution(const GenConfig& config,
                                                   const UserProfile& user, Scenario scenario) {
  const int s = static_cast<int>(scenario);
  std::array<double, kNumCardTypes> w{};
  double total = 0.0;
  for (int c = 0; c < kNumCardTypes; ++c) {
    if (config.card_mix[s][c] <= 0.0) continue;
    double dot = 0.0;
    for (int k = 0; k < kNumCardTypes; ++k) dot += user.affinity[k] * config.affinity_loading[c][k];
    w[c] = config.card_mix[s][c] * std::exp(config.exposure_affinity * dot);
    total += w[c];
  }
  for (double& v : w) v /= total;
  return w;
}

double expected_daily_impressions(const GenConfig& config, const UserProfile& user,
                                  Scenario scenario) {
  const double share = copilot_share(config, user.scenario_membership);
  const double rate = daily_rate(config, user);
  return scenario == Scenario::kCopilot ? rate * share : rate * (1.0 - share);
}

int duration_class(double dwell_seconds) {
  if (dwell_seconds < 10.0) return 0;
  if (dwell_seconds < 30.0) return 1;
  if (dwell_seconds < 120.0) return 2;
  return 3;
}

DayLog simulate_day(std::span<const UserProfile> population, int day_index,
                    const GenConfig& config, std::uint64_t seed) {
  validate(config);
  DayLog log;
  log.day = day_index;
  const std::int64_t day_start = config.epoch_start + std::int64_t{day_index} * kSecondsPerDay;

  for (const UserProfile& user : population) {
    Engine rng = make_engine(seed, {tag(Stream::kDay), static_cast<std::uint64_t>(day_index),
                                    static_cast<std::uint64_t>(user.user_id)});
    const double rate = daily_rate(config, user);
    if (rate <= 0.0) continue;
    std::poisson_distribution<int> count_dist(rate);
    std::uniform_int_distribution<std::int64_t> second_dist(0, kSecondsPerDay - 1);
    std::uniform_int_distribution<std::int64_t> item_dist(0, config.items_per_card - 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double share = copilot_share(config, user.scenario_membership);
    const auto classic_cards = card_distribution(config, user, Scenario::kClassic);
    const auto copilot_cards = card_distribution(config, user, Scenario::kCopilot);

    const int n = count_dist(rng);
    for (int i = 0; i < n; ++i) {
      Impression imp;
      imp.user_id = user.user_id;
      imp.timestamp = day_start + second_dist(rng);
      imp.scenario = u(rng) < share ? Scenario::kCopilot : Scenario::kClassic;
      imp.card_type = static_cast<CardType>(
          draw_categorical(rng, imp.scenario == Scenario::kCopilot ? copilot_cards : classic_cards));
      imp.item_id =
          static_cast<std::int64_t>(imp.card_type) * config.items_per_card + item_dist(rng);
      imp.p_true = click_probability(config, user, imp.scenario, imp.card_type);
      imp.click = u(rng) < imp.p_true;
      if (imp.click) {
        // Dwell grows with the user's affinity for the card.
        const double boost = 1.0 + 0.5 * user.affinity[static_cast<int>(imp.card_type)];
        std::exponential_distribution<double> dwell(1.0 / (config.dwell_mean_seconds * boost));
        imp.dwell_seconds = dwell(rng);
      }
      log.impressions.push_back(imp);
    }
  }

  std::sort(log.impressions.begin(), log.impressions.end(),
            [](const Impression& a, const Impression& b) {
              return std::tie(a.timestamp, a.user_id, a.item_id) <
                     std::tie(b.timestamp, b.user_id, b.item_id);
            });
  log.events.reserve(log.impressions.size() * 2);
  log.truth.reserve(log.impressions.size());
  for (const Impression& imp : log.impressions) {
    log.truth.push_back(imp.p_true);
    log.events.push_back(
        {imp.user_id, imp.timestamp, imp.scenario, imp.card_type, Action::kView, imp.item_id});
    if (imp.click) {
      log.events.push_back(
          {imp.user_id, imp.timestamp, imp.scenario, imp.card_type, Action::kClick, imp.item_id});
    }
  }
  return log;
}

std::array<double, kNumScenarios> expected_ctr(const GenConfig& config,
                                               std::span<const UserProfile> population) {
  std::array<double, kNumScenarios> clicks{};
  std::array<double, kNumScenarios> volume{};
  for (const UserProfile& user : population) {
    for (int s = 0; s < kNumScenarios; ++s) {
      const auto scenario = static_cast<Scenario>(s);
      const double w = expected_daily_impressions(config, user, scenario);
      if (w <= 0.0) continue;
      const auto cards = card_distribution(config, user, scenario);
      for (int c = 0; c < kNumCardTypes; ++c) {
        const double mix = cards[c];
        if (mix <= 0.0) continue;
        clicks[s] += w * mix * click_probability(config, user, scenario, static_cast<CardType>(c));
        volume[s] += w * mix;
      }
    }
  }
  std::array<double, kNumScenarios> ctr{};
  for (int s = 0; s < kNumScenarios; ++s) ctr[s] = volume[s] > 0.0 ? clicks[s] / volume[s] : 0.0;
  return ctr;
}

GenConfig calibrate_base_logits(GenConfig config, std::span<const UserProfile> population,
                                std::array<double, kNumScenarios> targets) {
  for (int s = 0; s < kNumScenarios; ++s) {
    if (!(targets[s] > 0.0 && targets[s] < 1.0)) {
      throw ConfigError("calibration target must lie in (0,1)");
    }
    // Expected CTR is increasing in the base logit.
    double lo = -30.0;
    double hi = 10.0;
    for (int iter = 0; iter < 200 && hi - lo > 1e-10; ++iter) {
      const double mid = 0.5 * (lo + hi);
      config.base_logit[s] = mid;
      if (expected_ctr(config, population)[s] < targets[s]) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    config.base_logit[s] = 0.5 * (lo + hi);
  }
  return config;
}

double oracle_auc(std::span<const int> labels, std::span<const double> truth) {
  return auc(labels, truth);
}

}  // namespace trinity
