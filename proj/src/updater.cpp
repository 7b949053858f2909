#include "trinity/updater.hpp"

#include <cmath>
#include <sstream>

namespace trinity {

void validate(const UpdaterConfig& config) {
  if (!(config.delta >= 0.0)) throw ConfigError("updater delta must be >= 0");
}

namespace {

const char* eval_mode_name(EvalMode m) {
  return m == EvalMode::kLiteralSameDay ? "literal_same_day" : "next_day_holdout";
}

const char* policy_name(UpdatePolicy p) {
  return p == UpdatePolicy::kGated ? "gated" : "always_accept";
}

template <class T>
void put_optional(nlohmann::json& j, const char* key, const std::optional<T>& v) {
  j[key] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

template <class T>
std::optional<T> get_optional(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

void to_json(nlohmann::json& j, const UpdaterConfig& c) {
  j = {{"delta", c.delta},
       {"eval_mode", eval_mode_name(c.eval_mode)},
       {"gating_slice", std::string(to_string(c.gating_slice))},
       {"policy", policy_name(c.policy)}};
}

void from_json(const nlohmann::json& j, UpdaterConfig& c) {
  const UpdaterConfig d;
  c.delta = j.value("delta", d.delta);
  const std::string mode = j.value("eval_mode", std::string(eval_mode_name(d.eval_mode)));
  if (mode == "literal_same_day") {
    c.eval_mode = EvalMode::kLiteralSameDay;
  } else if (mode == "next_day_holdout") {
    c.eval_mode = EvalMode::kNextDayHoldout;
  } else {
    throw ConfigError("unknown eval_mode '" + mode + "'");
  }
  c.gating_slice = parse_slice(j.value("gating_slice", std::string("global")));
  const std::string policy = j.value("policy", std::string(policy_name(d.policy)));
  if (policy == "gated") {
    c.policy = UpdatePolicy::kGated;
  } else if (policy == "always_accept") {
    c.policy = UpdatePolicy::kAlwaysAccept;
  } else {
    throw ConfigError("unknown policy '" + policy + "'");
  }
  validate(c);
}

GateMetrics gate_metrics(const SlicedReport& report, Slice slice) {
  const auto& r = report[static_cast<int>(slice)];
  if (!r) return {};
  return {r->auc, r->copc};
}

Decision decide(const GateMetrics& old_m, const GateMetrics& new_m, double delta) {
  if (!old_m.auc || !old_m.copc || !new_m.auc || !new_m.copc) {
    return {false, kReasonMetricUndefined};
  }
  if (!(*new_m.auc > *old_m.auc)) return {false, kReasonAucNotImproved};
  if (!(std::abs(1.0 - *new_m.copc) <= std::abs(1.0 - *old_m.copc) + delta)) {
    return {false, kReasonCopcDeviation};
  }
  return {true, kReasonAccepted};
}

void to_json(nlohmann::json& j, const DecisionRecord& r) {
  j = nlohmann::json::object();
  j["day"] = r.day;
  put_optional(j, "auc_old", r.auc_old);
  put_optional(j, "copc_old", r.copc_old);
  put_optional(j, "auc_new", r.auc_new);
  put_optional(j, "copc_new", r.copc_new);
  j["accepted"] = r.accepted;
  j["skipped"] = r.skipped;
  j["reason"] = r.reason;
  j["incumbent_id"] = r.incumbent_id;
  j["candidate_id"] = r.candidate_id;
  j["resulting_id"] = r.resulting_id;
}

void from_json(const nlohmann::json& j, DecisionRecord& r) {
  r.day = j.at("day").get<int>();
  r.auc_old = get_optional<double>(j, "auc_old");
  r.copc_old = get_optional<double>(j, "copc_old");
  r.auc_new = get_optional<double>(j, "auc_new");
  r.copc_new = get_optional<double>(j, "copc_new");
  r.accepted = j.at("accepted").get<bool>();
  r.skipped = j.value("skipped", false);
  r.reason = j.at("reason").get<std::string>();
  r.incumbent_id = j.at("incumbent_id").get<std::string>();
  r.candidate_id = j.at("candidate_id").get<std::string>();
  r.resulting_id = j.at("resulting_id").get<std::string>();
}

std::string to_ndjson(std::span<const DecisionRecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += nlohmann::json(r).dump();
    out += '\n';
  }
  return out;
}

std::vector<DecisionRecord> parse_ndjson(const std::string& text) {
  std::vector<DecisionRecord> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(nlohmann::json::parse(line).get<DecisionRecord>());
    } catch (const nlohmann::json::exception& e) {
      throw IoError(std::string("malformed decision record: ") + e.what());
    }
  }
  return out;
}

}  // namespace trinity
