#include "trinity/common.hpp"

#include <cstdio>

namespace trinity {
namespace {

constexpr std::array<std::string_view, kNumScenarios> kScenarioNames = {"classic", "copilot"};
constexpr std::array<std::string_view, kNumCardTypes> kCardNames = {"weather", "finance", "news",
                                                                     "video", "copilot_content"};
constexpr std::array<std::string_view, kNumActions> kActionNames = {"view", "click"};
constexpr std::array<std::string_view, 2> kActivityNames = {"active", "cold_start"};
constexpr std::array<std::string_view, 3> kMembershipNames = {"classic_only", "copilot_only", "both"};

template <class Enum, std::size_t N>
Enum parse_enum(std::string_view s, const std::array<std::string_view, N>& names,
                const char* what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<Enum>(i);
  }
  throw ConfigError(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

}  // namespace

std::string_view to_string(Scenario s) { return kScenarioNames.at(static_cast<int>(s)); }
std::string_view to_string(CardType c) { return kCardNames.at(static_cast<int>(c)); }
std::string_view to_string(Action a) { return kActionNames.at(static_cast<int>(a)); }
std::string_view to_string(ActivityLevel a) { return kActivityNames.at(static_cast<int>(a)); }
std::string_view to_string(Membership m) { return kMembershipNames.at(static_cast<int>(m)); }

Scenario parse_scenario(std::string_view s) {
  return parse_enum<Scenario>(s, kScenarioNames, "scenario");
}
CardType parse_card_type(std::string_view s) {
  return parse_enum<CardType>(s, kCardNames, "card type");
}
Action parse_action(std::string_view s) { return parse_enum<Action>(s, kActionNames, "action"); }
ActivityLevel parse_activity(std::string_view s) {
  return parse_enum<ActivityLevel>(s, kActivityNames, "activity level");
}
Membership parse_membership(std::string_view s) {
  return parse_enum<Membership>(s, kMembershipNames, "scenario membership");
}

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace trinity
