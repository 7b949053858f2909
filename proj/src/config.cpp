#include "trinity/config.hpp"

#include <fstream>
#include <sstream>

namespace trinity {

namespace nn {

void to_json(nlohmann::json& j, const AdamConfig& c) {
  j = {{"learning_rate", c.learning_rate},
       {"beta1", c.beta1},
       {"beta2", c.beta2},
       {"epsilon", c.epsilon}};
}

void from_json(const nlohmann::json& j, AdamConfig& c) {
  const AdamConfig d;
  c.learning_rate = j.value("learning_rate", d.learning_rate);
  c.beta1 = j.value("beta1", d.beta1);
  c.beta2 = j.value("beta2", d.beta2);
  c.epsilon = j.value("epsilon", d.epsilon);
}

}  // namespace nn

void to_json(nlohmann::json& j, const GenConfig& c) {
  j = {{"schema_version", c.schema_version},
       {"n_users", c.n_users},
       {"cold_start_fraction", c.cold_start_fraction},
       {"active_membership", c.active_membership},
       {"cold_start_membership", c.cold_start_membership},
       {"active_daily_impressions", c.active_daily_impressions},
       {"cold_start_rate_ratio", c.cold_start_rate_ratio},
       {"both_copilot_share", c.both_copilot_share},
       {"card_mix", c.card_mix},
       {"base_logit", c.base_logit},
       {"card_logit", c.card_logit},
       {"interaction_logit", c.interaction_logit},
       {"affinity_scale", c.affinity_scale},
       {"exposure_affinity", c.exposure_affinity},
       {"affinity_loading", c.affinity_loading},
       {"dwell_mean_seconds", c.dwell_mean_seconds},
       {"items_per_card", c.items_per_card},
       {"epoch_start", c.epoch_start}};
}

void from_json(const nlohmann::json& j, GenConfig& c) {
  const GenConfig d;
  c.schema_version = j.value("schema_version", d.schema_version);
  if (c.schema_version != 1) {
    throw ConfigError("unsupported GenConfig schema_version " + std::to_string(c.schema_version));
  }
  c.n_users = j.value("n_users", d.n_users);
  c.cold_start_fraction = j.value("cold_start_fraction", d.cold_start_fraction);
  c.active_membership = j.value("active_membership", d.active_membership);
  c.cold_start_membership = j.value("cold_start_membership", d.cold_start_membership);
  c.active_daily_impressions = j.value("active_daily_impressions", d.active_daily_impressions);
  c.cold_start_rate_ratio = j.value("cold_start_rate_ratio", d.cold_start_rate_ratio);
  c.both_copilot_share = j.value("both_copilot_share", d.both_copilot_share);
  c.card_mix = j.value("card_mix", d.card_mix);
  c.base_logit = j.value("base_logit", d.base_logit);
  c.card_logit = j.value("card_logit", d.card_logit);
  c.interaction_logit = j.value("interaction_logit", d.interaction_logit);
  c.affinity_scale = j.value("affinity_scale", d.affinity_scale);
  c.exposure_affinity = j.value("exposure_affinity", d.exposure_affinity);
  c.affinity_loading = j.value("affinity_loading", d.affinity_loading);
  c.dwell_mean_seconds = j.value("dwell_mean_seconds", d.dwell_mean_seconds);
  c.items_per_card = j.value("items_per_card", d.items_per_card);
  c.epoch_start = j.value("epoch_start", d.epoch_start);
}

namespace {

const char* input_mode_name(InputMode m) {
  return m == InputMode::kBucketized ? "bucketized" : "standardized_dense";
}

InputMode parse_input_mode(const std::string& s) {
  if (s == "bucketized") return InputMode::kBucketized;
  if (s == "standardized_dense") return InputMode::kStandardizedDense;
  throw ConfigError("unknown input_mode '" + s + "'");
}

}  // namespace

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = {{"field_count", c.field_count},
       {"embedding_dim", c.embedding_dim},
       {"se_reduction", c.se_reduction},
       {"expert_width", c.expert_width},
       {"tower_widths", c.tower_widths},
       {"n_shared_experts", c.n_shared_experts},
       {"n_task_experts", c.n_task_experts},
       {"duration_classes", c.duration_classes},
       {"duration_loss_weight", c.duration_loss_weight},
       {"batch_size", c.batch_size},
       {"context_dim", c.context_dim},
       {"gate_hidden", c.gate_hidden},
       {"n_buckets", c.n_buckets},
       {"reserve_zero_bucket", c.reserve_zero_bucket},
       {"use_scenario_gate", c.use_scenario_gate},
       {"use_profile_adapter", c.use_profile_adapter},
       {"context_as_input", c.context_as_input},
       {"input_mode", input_mode_name(c.input_mode)},
       {"click_bias_init", c.click_bias_init},
       {"adam", c.adam}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  const ModelConfig d;
  c.field_count = j.value("field_count", d.field_count);
  c.embedding_dim = j.value("embedding_dim", d.embedding_dim);
  c.se_reduction = j.value("se_reduction", d.se_reduction);
  c.expert_width = j.value("expert_width", d.expert_width);
  c.tower_widths = j.value("tower_widths", d.tower_widths);
  c.n_shared_experts = j.value("n_shared_experts", d.n_shared_experts);
  c.n_task_experts = j.value("n_task_experts", d.n_task_experts);
  c.duration_classes = j.value("duration_classes", d.duration_classes);
  c.duration_loss_weight = j.value("duration_loss_weight", d.duration_loss_weight);
  c.batch_size = j.value("batch_size", d.batch_size);
  c.context_dim = j.value("context_dim", d.context_dim);
  c.gate_hidden = j.value("gate_hidden", d.gate_hidden);
  c.n_buckets = j.value("n_buckets", d.n_buckets);
  c.reserve_zero_bucket = j.value("reserve_zero_bucket", d.reserve_zero_bucket);
  c.use_scenario_gate = j.value("use_scenario_gate", d.use_scenario_gate);
  c.use_profile_adapter = j.value("use_profile_adapter", d.use_profile_adapter);
  c.context_as_input = j.value("context_as_input", d.context_as_input);
  c.input_mode = parse_input_mode(j.value("input_mode", std::string(input_mode_name(d.input_mode))));
  c.click_bias_init = j.value("click_bias_init", d.click_bias_init);
  c.adam = j.value("adam", d.adam);
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace trinity
