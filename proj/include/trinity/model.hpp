#ifndef TRINITY_MODEL_HPP_
#define TRINITY_MODEL_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "trinity/dense2sparse.hpp"
#include "trinity/feature_store.hpp"
#include "trinity/nn.hpp"

namespace trinity {

using Mat = nn::Matrix<double>;

enum class InputMode : std::uint8_t {
  // Normalized counts -> equal-frequency buckets -> embeddings -> SENet.
  kBucketized = 0,
  // Standardized counts fed straight into the experts.
  kStandardizedDense = 1,
};

inline constexpr int kNumTasks = 2;
inline constexpr int kClickTask = 0;
inline constexpr int kDurationTask = 1;

struct ModelConfig {
  int field_count = kTensorSize;
  int embedding_dim = 8;
  int se_reduction = 16;
  int expert_width = 128;
  std::vector<int> tower_widths = {128, 64};
  int n_shared_experts = 2;
  int n_task_experts = 2;
  int duration_classes = 4;
  double duration_loss_weight = 0.3;
  int batch_size = 1024;
  // Card/scenario embedding width and hidden width of gate/adapter networks.
  int context_dim = 8;
  int gate_hidden = 32;
  int n_buckets = 16;
  bool reserve_zero_bucket = true;
  bool use_scenario_gate = true;
  bool use_profile_adapter = true;
  // Append [card, scenario, profile] to the expert input (plain PLE wiring).
  bool context_as_input = false;
  InputMode input_mode = InputMode::kBucketized;
  // Initial click-head bias (a logit); the harness sets it to the training prior.
  double click_bias_init = 0.0;
  nn::AdamConfig adam;

  int se_hidden() const { return std::max(1, field_count / se_reduction); }
  int compressed_dim() const { return field_count * embedding_dim / 3; }
  // Width of the representation entering the gate/experts.
  int representation_dim() const {
    return input_mode == InputMode::kBucketized ? compressed_dim() : field_count;
  }
  int expert_input_dim() const {
    return representation_dim() + (context_as_input ? 2 * context_dim + kProfileWidth : 0);
  }
  int adapter_input_dim() const { return kProfileWidth + 2 * context_dim; }
  bool operator==(const ModelConfig&) const = default;
};

void validate(const ModelConfig& config);

struct Linear {
  Mat w;  // in x out
  Mat b;  // 1 x out
  bool operator==(const Linear&) const = default;
};

// Two-layer gate network: ELU hidden layer, zero-initialized output layer.
struct GateNet {
  Linear hidden;
  Linear out;
  bool operator==(const GateNet&) const = default;
};

struct Tower {
  std::vector<Linear> layers;
  std::vector<GateNet> adapters;  // one per hidden layer, empty when disabled
  Linear head;
  bool operator==(const Tower&) const = default;
};

struct Parameters {
  Mat field_embeddings;     // (field_count * n_buckets) x embedding_dim
  Mat card_embeddings;      // 5 x context_dim
  Mat scenario_embeddings;  // 2 x context_dim
  Linear se_squeeze;
  Linear se_excite;
  Linear projection;
  GateNet scenario_gate;
  std::vector<Linear> shared_experts;
  std::array<std::vector<Linear>, kNumTasks> task_experts;
  std::array<Linear, kNumTasks> task_gates;
  std::array<Tower, kNumTasks> towers;

  // Calls f(name, matrix) for every non-empty block in a fixed order.
  template <class F>
  void for_each_block(F&& f);
  template <class F>
  void for_each_block(F&& f) const;

  // Same structure with every block zero-filled.
  Parameters zeros_like() const;
  std::size_t parameter_count() const;
  bool operator==(const Parameters&) const = default;
};

struct AdamState {
  long step = 0;
  Parameters m;
  Parameters v;
  bool operator==(const AdamState&) const = default;
};

struct Lineage {
  int created_day = -1;
  std::string parent_id;
  bool accepted = false;
  bool operator==(const Lineage&) const = default;
};

// Complete model state; inference needs nothing else.
struct Checkpoint {
  ModelConfig config;
  Parameters params;
  NormStats norm;
  BinBoundaries bins;
  AdamState adam;
  Lineage lineage;

  std::uint64_t config_hash() const;
  // Content hash over config, lineage and parameters, as 16 hex digits.
  std::string id() const;
  bool operator==(const Checkpoint&) const = default;
};

std::uint64_t config_hash(const ModelConfig& config);

Checkpoint init_model(const ModelConfig& config, std::uint64_t seed);

// Fits NormStats (and BinBoundaries in bucketized mode) on training rows.
void fit_transforms(Checkpoint& checkpoint, const SampleSet& train_rows);

// Encoded model inputs for a batch of rows.
struct Batch {
  nn::IndexMatrix buckets;  // bucketized mode: n x field_count
  Mat dense;                // standardized mode: n x field_count
  nn::IndexMatrix card;     // n x 1
  nn::IndexMatrix scenario; // n x 1
  Mat profile;              // n x kProfileWidth
  std::vector<int> click;
  std::vector<int> duration;

  Eigen::Index size() const { return profile.rows(); }
};

Batch make_batch(const Checkpoint& checkpoint, const SampleSet& rows,
                 std::span<const std::size_t> indices);
Batch make_batch(const Checkpoint& checkpoint, const SampleSet& rows);

struct Prediction {
  double p_click = 0.5;
  std::vector<double> duration_probs;
};

// Activations kept for the backward pass.
struct ForwardCache {
  Mat ctx;  // [card_emb, scenario_emb]
  Mat adapter_input;
  Mat embeddings, field_means, se_hidden_pre, se_hidden, se_scale, se_scale_wide, scaled;
  Mat compressed;
  Mat gate_hidden_pre, gate_hidden, gate;  // gate in (0,2)
  Mat expert_input;
  std::vector<Mat> expert_pre, expert_out;  // task0 experts, task1 experts, shared experts
  std::array<Mat, kNumTasks> mix_weights, task_repr;
  struct LayerCache {
    Mat input, pre, adapter_hidden_pre, adapter_hidden, adapter, modulated, out;
  };
  std::array<std::vector<LayerCache>, kNumTasks> tower;
  std::array<Mat, kNumTasks> head_input;
  Mat click_logit, click_prob, duration_logits, duration_probs;
  bool valid = false;
};

struct ForwardOutput {
  Mat click_prob;      // n x 1
  Mat duration_probs;  // n x duration_classes
};

ForwardOutput forward(const Checkpoint& checkpoint, const Batch& batch,
                      ForwardCache* cache = nullptr);

// Mean BCE(click) + duration_loss_weight * mean CE(duration) for a cached forward.
double loss(const ModelConfig& config, const Batch& batch, const ForwardCache& cache);

// Gradients of `loss` w.r.t. every parameter. Throws ContractError without a cache.
Parameters backward(const Checkpoint& checkpoint, const Batch& batch, const ForwardCache& cache);

// Forward over `rows` (in batches) returning one Prediction per row.
std::vector<Prediction> predict(const Checkpoint& checkpoint, const SampleSet& rows);
std::vector<double> predict_click(const Checkpoint& checkpoint, const SampleSet& rows);

// One Adam step on `checkpoint` with precomputed gradients.
void adam_step(Checkpoint& checkpoint, const Parameters& grads);

struct TrainOptions {
  int epochs = 1;
  std::uint64_t seed = 0;
  int created_day = -1;
  // Per-epoch mean training loss is appended when non-null.
  std::vector<double>* epoch_losses = nullptr;
};

// Minimizes the multi-task loss with Adam over shuffled mini-batches. The
// returned checkpoint's lineage parent is `init`.
Checkpoint train(const SampleSet& rows, const Checkpoint& init, const TrainOptions& options);

// ---- implementation of the block visitor ----

namespace detail {

template <class P, class F>
void visit_blocks(P& p, F&& f) {
  auto visit = [&](const std::string& name, auto& m) {
    if (m.size() > 0) f(name, m);
  };
  auto linear = [&](const std::string& name, auto& l) {
    visit(name + ".w", l.w);
    visit(name + ".b", l.b);
  };
  auto gate = [&](const std::string& name, auto& g) {
    linear(name + ".hidden", g.hidden);
    linear(name + ".out", g.out);
  };
  visit("field_embeddings", p.field_embeddings);
  visit("card_embeddings", p.card_embeddings);
  visit("scenario_embeddings", p.scenario_embeddings);
  linear("se_squeeze", p.se_squeeze);
  linear("se_excite", p.se_excite);
  linear("projection", p.projection);
  gate("scenario_gate", p.scenario_gate);
  for (std::size_t j = 0; j < p.shared_experts.size(); ++j) {
    linear("shared_expert." + std::to_string(j), p.shared_experts[j]);
  }
  for (int k = 0; k < kNumTasks; ++k) {
    const std::string task = "task" + std::to_string(k);
    for (std::size_t j = 0; j < p.task_experts[k].size(); ++j) {
      linear(task + ".expert." + std::to_string(j), p.task_experts[k][j]);
    }
    linear(task + ".mix_gate", p.task_gates[k]);
    auto& tower = p.towers[k];
    for (std::size_t l = 0; l < tower.layers.size(); ++l) {
      linear(task + ".tower." + std::to_string(l), tower.layers[l]);
    }
    for (std::size_t l = 0; l < tower.adapters.size(); ++l) {
      gate(task + ".adapter." + std::to_string(l), tower.adapters[l]);
    }
    linear(task + ".head", tower.head);
  }
}

}  // namespace detail

template <class F>
void Parameters::for_each_block(F&& f) {
  detail::visit_blocks(*this, std::forward<F>(f));
}

template <class F>
void Parameters::for_each_block(F&& f) const {
  detail::visit_blocks(*this, std::forward<F>(f));
}

}  // namespace trinity

#endif  // TRINITY_MODEL_HPP_
