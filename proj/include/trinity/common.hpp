#ifndef TRINITY_COMMON_HPP_
#define TRINITY_COMMON_HPP_

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace trinity {

// Error kinds. Each carries a short machine-readable kind string that the CLI
// reports in its error record.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "config"; }
};

class ContractError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "contract"; }
};

class NumericError : public Error {
 public:
  NumericError(std::string layer, const std::string& what)
      : Error("non-finite value in " + layer + ": " + what), layer_(std::move(layer)) {}
  const char* kind() const noexcept override { return "numeric"; }
  const std::string& layer() const noexcept { return layer_; }

 private:
  std::string layer_;
};

// Raised when AUC/COPC are not defined for the input (single class, zero mean score).
class MetricUndefinedError : public Error {
 public:
  MetricUndefinedError(const std::string& what, std::int64_t positives, std::int64_t negatives)
      : Error(what), positives_(positives), negatives_(negatives) {}
  const char* kind() const noexcept override { return "metric-undefined"; }
  std::int64_t positives() const noexcept { return positives_; }
  std::int64_t negatives() const noexcept { return negatives_; }

 private:
  std::int64_t positives_;
  std::int64_t negatives_;
};

class IoError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "io"; }
};

enum class Scenario : std::uint8_t { kClassic = 0, kCopilot = 1 };
enum class CardType : std::uint8_t { kWeather = 0, kFinance, kNews, kVideo, kCopilotContent };
enum class Action : std::uint8_t { kView = 0, kClick = 1 };
enum class ActivityLevel : std::uint8_t { kActive = 0, kColdStart = 1 };
enum class Membership : std::uint8_t { kClassicOnly = 0, kCopilotOnly = 1, kBoth = 2 };

inline constexpr int kNumScenarios = 2;
inline constexpr int kNumCardTypes = 5;
inline constexpr int kNumActions = 2;
// Profile features: activity one-hot (2) + membership one-hot (3).
inline constexpr int kProfileWidth = 5;

std::string_view to_string(Scenario s);
std::string_view to_string(CardType c);
std::string_view to_string(Action a);
std::string_view to_string(ActivityLevel a);
std::string_view to_string(Membership m);

Scenario parse_scenario(std::string_view s);
CardType parse_card_type(std::string_view s);
Action parse_action(std::string_view s);
ActivityLevel parse_activity(std::string_view s);
Membership parse_membership(std::string_view s);

// 64-bit FNV-1a, used for config hashes and checkpoint content ids.
std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed = 14695981039346656037ULL);
inline std::uint64_t fnv1a64(std::string_view s) { return fnv1a64(s.data(), s.size()); }
std::string hex64(std::uint64_t v);

inline constexpr std::int64_t kSecondsPerHour = 3600;
inline constexpr std::int64_t kSecondsPerDay = 86400;

}  // namespace trinity

#endif  // TRINITY_COMMON_HPP_
