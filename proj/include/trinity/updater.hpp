#ifndef TRINITY_UPDATER_HPP_
#define TRINITY_UPDATER_HPP_

// Stability-aware daily checkpoint promotion. A candidate trained on day t
// replaces the incumbent only if it strictly improves AUC and its COPC
// deviation |1 - COPC| grows by at most delta.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "trinity/metrics.hpp"

namespace trinity {

enum class EvalMode : std::uint8_t { kLiteralSameDay = 0, kNextDayHoldout = 1 };
enum class UpdatePolicy : std::uint8_t { kGated = 0, kAlwaysAccept = 1 };

struct UpdaterConfig {
  double delta = 0.05;
  EvalMode eval_mode = EvalMode::kLiteralSameDay;
  Slice gating_slice = Slice::kGlobal;
  UpdatePolicy policy = UpdatePolicy::kGated;
  bool operator==(const UpdaterConfig&) const = default;
};

void validate(const UpdaterConfig& config);
void to_json(nlohmann::json& j, const UpdaterConfig& c);
void from_json(const nlohmann::json& j, UpdaterConfig& c);

// Gate inputs on one slice; absent when undefined there.
struct GateMetrics {
  std::optional<double> auc;
  std::optional<double> copc;
};

GateMetrics gate_metrics(const SlicedReport& report, Slice slice);

struct Decision {
  bool accepted = false;
  std::string reason;
};

inline constexpr const char* kReasonAccepted = "accepted";
inline constexpr const char* kReasonAlwaysAccept = "always-accept";
inline constexpr const char* kReasonAucNotImproved = "auc-not-improved";
inline constexpr const char* kReasonCopcDeviation = "copc-deviation";
inline constexpr const char* kReasonMetricUndefined = "metric-undefined";
inline constexpr const char* kReasonEmptyDay = "empty-day";
inline constexpr const char* kReasonNoHoldout = "no-holdout";

// accepted <=> auc_new > auc_old and |1 - copc_new| <= |1 - copc_old| + delta.
Decision decide(const GateMetrics& old_metrics, const GateMetrics& new_metrics, double delta);
inline bool decide(double auc_old, double copc_old, double auc_new, double copc_new,
                   double delta) {
  return decide({auc_old, copc_old}, {auc_new, copc_new}, delta).accepted;
}

struct DecisionRecord {
  int day = 0;
  std::optional<double> auc_old, copc_old, auc_new, copc_new;
  bool accepted = false;
  // True when no decision was taken (empty day, or no holdout for the last day).
  bool skipped = false;
  std::string reason;
  std::string incumbent_id, candidate_id, resulting_id;

  bool operator==(const DecisionRecord&) const = default;
};

void to_json(nlohmann::json& j, const DecisionRecord& r);
void from_json(const nlohmann::json& j, DecisionRecord& r);

// One JSON object per line.
std::string to_ndjson(std::span<const DecisionRecord> records);
std::vector<DecisionRecord> parse_ndjson(const std::string& text);

template <class Model>
struct DailyLoopHooks {
  // Candidate for `day`, warm-started from the incumbent.
  std::function<Model(const Model& incumbent, int day)> train;
  // Gate metrics of a model on the evaluation set of `day`.
  std::function<GateMetrics(const Model& model, int day)> evaluate;
  std::function<std::string(const Model& model)> id;
  // Optional: days without data are skipped.
  std::function<bool(int day)> is_empty;
  // Optional: called with the serving model before day `day` is processed.
  std::function<void(int day, const Model& incumbent)> before_day;
  // Optional: marks a candidate as promoted.
  std::function<void(Model& promoted)> on_accept;
  // Optional: receives the serving model after each day.
  std::function<void(const Model& serving, const DecisionRecord& record)> after_day;
};

template <class Model>
struct LoopResult {
  Model final_model;
  std::vector<DecisionRecord> records;
};

template <class Model>
LoopResult<Model> run_daily_loop(std::span<const int> days, Model initial,
                                 const UpdaterConfig& config, const DailyLoopHooks<Model>& hooks) {
  validate(config);
  LoopResult<Model> result{std::move(initial), {}};
  Model& incumbent = result.final_model;
  for (std::size_t i = 0; i < days.size(); ++i) {
    const int day = days[i];
    DecisionRecord rec;
    rec.day = day;
    rec.incumbent_id = hooks.id(incumbent);
    rec.resulting_id = rec.incumbent_id;

    if (hooks.is_empty && hooks.is_empty(day)) {
      rec.skipped = true;
      rec.reason = kReasonEmptyDay;
    } else {
      if (hooks.before_day) hooks.before_day(day, incumbent);
      std::optional<int> eval_day;
      if (config.eval_mode == EvalMode::kLiteralSameDay) {
        eval_day = day;
      } else if (i + 1 < days.size()) {
        eval_day = days[i + 1];
      }
      if (!eval_day) {
        rec.skipped = true;
        rec.reason = kReasonNoHoldout;
      } else {
        const GateMetrics old_m = hooks.evaluate(incumbent, *eval_day);
        Model candidate = hooks.train(incumbent, day);
        const GateMetrics new_m = hooks.evaluate(candidate, *eval_day);
        rec.auc_old = old_m.auc;
        rec.copc_old = old_m.copc;
        rec.auc_new = new_m.auc;
        rec.copc_new = new_m.copc;
        rec.candidate_id = hooks.id(candidate);
        const Decision d = config.policy == UpdatePolicy::kAlwaysAccept
                               ? Decision{true, kReasonAlwaysAccept}
                               : decide(old_m, new_m, config.delta);
        rec.accepted = d.accepted;
        rec.reason = d.reason;
        if (d.accepted) {
          if (hooks.on_accept) hooks.on_accept(candidate);
          incumbent = std::move(candidate);
          rec.resulting_id = hooks.id(incumbent);
        }
      }
    }
    if (hooks.after_day) hooks.after_day(incumbent, rec);
    result.records.push_back(std::move(rec));
  }
  return result;
}

}  // namespace trinity

#endif  // TRINITY_UPDATER_HPP_
