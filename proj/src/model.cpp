#include "trinity/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "trinity/config.hpp"
#include "trinity/rng.hpp"

namespace trinity {
namespace {

using nn::IndexMatrix;

std::vector<Mat*> blocks_of(Parameters& p) {
  std::vector<Mat*> out;
  p.for_each_block([&](const std::string&, Mat& m) { out.push_back(&m); });
  return out;
}

std::vector<const Mat*> blocks_of(const Parameters& p) {
  std::vector<const Mat*> out;
  p.for_each_block([&](const std::string&, const Mat& m) { out.push_back(&m); });
  return out;
}

Linear glorot_linear(int in, int out, Engine& rng) {
  Linear l;
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  std::uniform_real_distribution<double> u(-limit, limit);
  l.w = Mat(in, out);
  for (Eigen::Index i = 0; i < l.w.size(); ++i) l.w.data()[i] = u(rng);
  l.b = Mat::Zero(1, out);
  return l;
}

Linear zero_linear(int in, int out) { return {Mat::Zero(in, out), Mat::Zero(1, out)}; }

Mat normal_table(int rows, int cols, Engine& rng) {
  std::normal_distribution<double> n(0.0, 0.01);
  Mat t(rows, cols);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = n(rng);
  return t;
}

GateNet gate_net(int in, int hidden, int out, Engine& rng) {
  return {glorot_linear(in, hidden, rng), zero_linear(hidden, out)};
}

Mat two_sigmoid(const Mat& pre) { return 2.0 * nn::sigmoid(pre); }

// d/dx 2*sigmoid(x) expressed through g = 2*sigmoid(x): g * (1 - g/2).
Mat two_sigmoid_backward(const Mat& dg, const Mat& g) {
  return (dg.array() * g.array() * (1.0 - 0.5 * g.array())).matrix();
}

bool uses_context(const ModelConfig& c) {
  return c.use_scenario_gate || c.use_profile_adapter || c.context_as_input;
}

// Experts feeding task k, in mixing order: its own experts, then the shared ones.
std::vector<int> expert_slots(const ModelConfig& c, int task) {
  std::vector<int> slots;
  for (int j = 0; j < c.n_task_experts; ++j) slots.push_back(task * c.n_task_experts + j);
  for (int j = 0; j < c.n_shared_experts; ++j) {
    slots.push_back(kNumTasks * c.n_task_experts + j);
  }
  return slots;
}

const Linear& expert_at(const Parameters& p, const ModelConfig& c, int slot) {
  const int task_total = kNumTasks * c.n_task_experts;
  if (slot < task_total) return p.task_experts[slot / c.n_task_experts][slot % c.n_task_experts];
  return p.shared_experts[slot - task_total];
}

Linear& expert_at(Parameters& p, const ModelConfig& c, int slot) {
  return const_cast<Linear&>(expert_at(static_cast<const Parameters&>(p), c, slot));
}

}  // namespace

void validate(const ModelConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("invalid ModelConfig: " + what);
  };
  require(c.field_count >= 1, "field_count >= 1");
  require(c.embedding_dim >= 1, "embedding_dim >= 1");
  require(c.se_reduction >= 1, "se_reduction >= 1");
  require(c.input_mode != InputMode::kBucketized || c.compressed_dim() >= 1,
          "compressed dim >= 1");
  require(c.expert_width >= 1, "expert_width >= 1");
  require(!c.tower_widths.empty(), "at least one tower layer");
  for (int w : c.tower_widths) require(w >= 1, "tower widths >= 1");
  require(c.n_shared_experts + c.n_task_experts >= 1, "at least one expert per task");
  require(c.n_shared_experts >= 0 && c.n_task_experts >= 0, "expert counts >= 0");
  require(c.duration_classes >= 2, "duration_classes >= 2");
  require(c.duration_loss_weight >= 0.0, "duration_loss_weight >= 0");
  require(c.batch_size >= 1, "batch_size >= 1");
  require(c.context_dim >= 1 && c.gate_hidden >= 1, "context_dim, gate_hidden >= 1");
  require(c.n_buckets >= 2, "n_buckets >= 2");
  require(c.adam.learning_rate > 0.0, "learning_rate > 0");
  require(std::isfinite(c.click_bias_init), "click_bias_init finite");
}

Parameters Parameters::zeros_like() const {
  Parameters z = *this;
  for (Mat* m : blocks_of(z)) m->setZero();
  return z;
}

std::size_t Parameters::parameter_count() const {
  std::size_t n = 0;
  for_each_block([&](const std::string&, const Mat& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

std::uint64_t config_hash(const ModelConfig& config) {
  return fnv1a64(nlohmann::json(config).dump());
}

std::uint64_t Checkpoint::config_hash() const { return trinity::config_hash(config); }

std::string Checkpoint::id() const {
  std::uint64_t h = config_hash();
  h = fnv1a64(&lineage.created_day, sizeof(lineage.created_day), h);
  h = fnv1a64(lineage.parent_id.data(), lineage.parent_id.size(), h);
  params.for_each_block([&](const std::string& name, const Mat& m) {
    h = fnv1a64(name.data(), name.size(), h);
    h = fnv1a64(m.data(), static_cast<std::size_t>(m.size()) * sizeof(double), h);
  });
  return hex64(h);
}

Checkpoint init_model(const ModelConfig& c, std::uint64_t seed) {
  validate(c);
  Checkpoint ck;
  ck.config = c;
  Parameters& p = ck.params;
  // Each component draws from its own stream so toggling one module leaves
  // the initialization of the others unchanged.
  auto stream = [&](std::uint64_t component) {
    return make_engine(seed, {tag(Stream::kInit), component});
  };

  if (c.input_mode == InputMode::kBucketized) {
    Engine rng = stream(1);
    p.field_embeddings = normal_table(c.field_count * c.n_buckets, c.embedding_dim, rng);
    p.se_squeeze = glorot_linear(c.field_count, c.se_hidden(), rng);
    p.se_excite = glorot_linear(c.se_hidden(), c.field_count, rng);
    p.projection = glorot_linear(c.field_count * c.embedding_dim, c.compressed_dim(), rng);
  }
  if (uses_context(c)) {
    Engine rng = stream(2);
    p.card_embeddings = normal_table(kNumCardTypes, c.context_dim, rng);
    p.scenario_embeddings = normal_table(kNumScenarios, c.context_dim, rng);
  }
  if (c.use_scenario_gate) {
    Engine rng = stream(3);
    p.scenario_gate = gate_net(2 * c.context_dim, c.gate_hidden, c.representation_dim(), rng);
  }
  {
    Engine rng = stream(4);
    const int in = c.expert_input_dim();
    for (int j = 0; j < c.n_shared_experts; ++j) {
      p.shared_experts.push_back(glorot_linear(in, c.expert_width, rng));
    }
    for (int k = 0; k < kNumTasks; ++k) {
      for (int j = 0; j < c.n_task_experts; ++j) {
        p.task_experts[k].push_back(glorot_linear(in, c.expert_width, rng));
      }
      p.task_gates[k] = glorot_linear(in, c.n_task_experts + c.n_shared_experts, rng);
    }
  }
  for (int k = 0; k < kNumTasks; ++k) {
    Engine rng = stream(5 + static_cast<std::uint64_t>(k));
    Tower& t = p.towers[k];
    int in = c.expert_width;
    for (int width : c.tower_widths) {
      t.layers.push_back(glorot_linear(in, width, rng));
      in = width;
    }
    t.head = glorot_linear(in, k == kClickTask ? 1 : c.duration_classes, rng);
    if (k == kClickTask) t.head.b(0, 0) = c.click_bias_init;
  }
  if (c.use_profile_adapter) {
    for (int k = 0; k < kNumTasks; ++k) {
      Engine rng = stream(7 + static_cast<std::uint64_t>(k));
      for (int width : c.tower_widths) {
        p.towers[k].adapters.push_back(gate_net(c.adapter_input_dim(), c.gate_hidden, width, rng));
      }
    }
  }

  ck.adam.m = p.zeros_like();
  ck.adam.v = p.zeros_like();
  return ck;
}

void fit_transforms(Checkpoint& ck, const SampleSet& train_rows) {
  if (train_rows.n_features() != ck.config.field_count) {
    throw ContractError("fit_transforms: rows carry " + std::to_string(train_rows.n_features()) +
                        " features, model expects " + std::to_string(ck.config.field_count));
  }
  ck.norm = fit_normalizer(train_rows);
  if (ck.config.input_mode == InputMode::kBucketized) {
    ck.bins = fit_binning(train_rows, ck.norm, ck.config.n_buckets, ck.config.reserve_zero_bucket);
  } else {
    ck.bins = BinBoundaries{};
  }
}

Batch make_batch(const Checkpoint& ck, const SampleSet& rows, std::span<const std::size_t> idx) {
  const ModelConfig& c = ck.config;
  if (rows.n_features() != c.field_count) {
    throw ContractError("make_batch: rows carry " + std::to_string(rows.n_features()) +
                        " features, model expects " + std::to_string(c.field_count));
  }
  if (ck.norm.size() != static_cast<std::size_t>(c.field_count)) {
    throw ContractError("make_batch: checkpoint transforms are not fitted");
  }
  const auto n = static_cast<Eigen::Index>(idx.size());
  Batch b;
  b.card.resize(n, 1);
  b.scenario.resize(n, 1);
  b.profile.resize(n, kProfileWidth);
  b.click.resize(idx.size());
  b.duration.resize(idx.size());
  if (c.input_mode == InputMode::kBucketized) {
    b.buckets.resize(n, c.field_count);
  } else {
    b.dense.resize(n, c.field_count);
  }
  for (Eigen::Index r = 0; r < n; ++r) {
    const std::size_t i = idx[static_cast<std::size_t>(r)];
    auto raw = rows.dense_row(i);
    if (c.input_mode == InputMode::kBucketized) {
      encode_into(raw, ck.norm, ck.bins, std::span<int>(b.buckets.row(r).data(), c.field_count));
    } else {
      for (int k = 0; k < c.field_count; ++k) b.dense(r, k) = ck.norm.normalize(k, raw[k]);
    }
    b.card(r, 0) = static_cast<int>(rows.card[i]);
    b.scenario(r, 0) = static_cast<int>(rows.scenario[i]);
    auto prof = rows.profile_row(i);
    for (int k = 0; k < kProfileWidth; ++k) b.profile(r, k) = prof[k];
    b.click[r] = rows.label_click[i];
    b.duration[r] = rows.label_duration[i];
    if (b.duration[r] < 0 || b.duration[r] >= c.duration_classes) {
      throw ContractError("make_batch: duration class out of range");
    }
  }
  return b;
}

Batch make_batch(const Checkpoint& ck, const SampleSet& rows) {
  std::vector<std::size_t> idx(rows.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return make_batch(ck, rows, idx);
}

ForwardOutput forward(const Checkpoint& ck, const Batch& batch, ForwardCache* cache_ptr) {
  const ModelConfig& c = ck.config;
  const Parameters& p = ck.params;
  ForwardCache local;
  ForwardCache& fc = cache_ptr ? *cache_ptr : local;
  fc.valid = false;

  if (uses_context(c)) {
    const Mat card = nn::embedding_lookup(p.card_embeddings, batch.card, kNumCardTypes);
    const Mat scen = nn::embedding_lookup(p.scenario_embeddings, batch.scenario, kNumScenarios);
    fc.ctx = nn::concat<double>({&card, &scen});
  }
  if (c.use_profile_adapter) fc.adapter_input = nn::concat<double>({&batch.profile, &fc.ctx});

  // Representation: SENet-reweighted bucket embeddings projected to one third.
  if (c.input_mode == InputMode::kBucketized) {
    const Eigen::Index d = c.embedding_dim;
    fc.embeddings = nn::embedding_lookup(p.field_embeddings, batch.buckets, c.n_buckets);
    fc.field_means = nn::reduce_mean_per_field(fc.embeddings, d);
    fc.se_hidden_pre = nn::affine(fc.field_means, p.se_squeeze.w, p.se_squeeze.b);
    fc.se_hidden = nn::elu(fc.se_hidden_pre);
    fc.se_scale = nn::sigmoid(nn::affine(fc.se_hidden, p.se_excite.w, p.se_excite.b));
    fc.se_scale_wide = nn::expand_per_field(fc.se_scale, d);
    fc.scaled = nn::elementwise_mul(fc.embeddings, fc.se_scale_wide);
    fc.compressed = nn::affine(fc.scaled, p.projection.w, p.projection.b);
    nn::check_finite(fc.compressed, "senet_compress");
  } else {
    fc.compressed = batch.dense;
  }

  Mat gated;
  if (c.use_scenario_gate) {
    fc.gate_hidden_pre = nn::affine(fc.ctx, p.scenario_gate.hidden.w, p.scenario_gate.hidden.b);
    fc.gate_hidden = nn::elu(fc.gate_hidden_pre);
    fc.gate = two_sigmoid(nn::affine(fc.gate_hidden, p.scenario_gate.out.w, p.scenario_gate.out.b));
    gated = nn::elementwise_mul(fc.compressed, fc.gate);
    nn::check_finite(gated, "scenario_gate");
  } else {
    gated = fc.compressed;
  }
  fc.expert_input =
      c.context_as_input ? nn::concat<double>({&gated, &fc.ctx, &batch.profile}) : std::move(gated);

  // PLE extraction: every expert sees the same input; each task mixes its own
  // experts with the shared ones through a softmax gate.
  const int n_experts = kNumTasks * c.n_task_experts + c.n_shared_experts;
  fc.expert_pre.resize(n_experts);
  fc.expert_out.resize(n_experts);
  for (int slot = 0; slot < n_experts; ++slot) {
    const Linear& e = expert_at(p, c, slot);
    fc.expert_pre[slot] = nn::affine(fc.expert_input, e.w, e.b);
    fc.expert_out[slot] = nn::elu(fc.expert_pre[slot]);
  }
  for (int k = 0; k < kNumTasks; ++k) {
    fc.mix_weights[k] =
        nn::softmax_rows(nn::affine(fc.expert_input, p.task_gates[k].w, p.task_gates[k].b));
    const auto slots = expert_slots(c, k);
    Mat repr = Mat::Zero(batch.size(), c.expert_width);
    for (std::size_t j = 0; j < slots.size(); ++j) {
      repr.array() += fc.expert_out[slots[j]].array().colwise() *
                      fc.mix_weights[k].col(static_cast<Eigen::Index>(j)).array();
    }
    fc.task_repr[k] = std::move(repr);
    nn::check_finite(fc.task_repr[k], "ple_layer");
  }

  // Towers; the profile adapter rescales each hidden pre-activation.
  for (int k = 0; k < kNumTasks; ++k) {
    const Tower& t = p.towers[k];
    auto& layers = fc.tower[k];
    layers.assign(t.layers.size(), {});
    const Mat* h = &fc.task_repr[k];
    for (std::size_t l = 0; l < t.layers.size(); ++l) {
      auto& lc = layers[l];
      lc.input = *h;
      lc.pre = nn::affine(lc.input, t.layers[l].w, t.layers[l].b);
      if (c.use_profile_adapter) {
        const GateNet& a = t.adapters[l];
        lc.adapter_hidden_pre = nn::affine(fc.adapter_input, a.hidden.w, a.hidden.b);
        lc.adapter_hidden = nn::elu(lc.adapter_hidden_pre);
        lc.adapter = two_sigmoid(nn::affine(lc.adapter_hidden, a.out.w, a.out.b));
        lc.modulated = nn::elementwise_mul(lc.pre, lc.adapter);
      } else {
        lc.modulated = lc.pre;
      }
      lc.out = nn::elu(lc.modulated);
      nn::check_finite(lc.out, "task" + std::to_string(k) + ".tower." + std::to_string(l));
      h = &lc.out;
    }
    fc.head_input[k] = *h;
  }
  const Tower& click = p.towers[kClickTask];
  const Tower& dur = p.towers[kDurationTask];
  fc.click_logit = nn::affine(fc.head_input[kClickTask], click.head.w, click.head.b);
  fc.click_prob = nn::sigmoid(fc.click_logit);
  fc.duration_logits = nn::affine(fc.head_input[kDurationTask], dur.head.w, dur.head.b);
  fc.duration_probs = nn::softmax_rows(fc.duration_logits);
  nn::check_finite(fc.click_prob, "click_head");
  nn::check_finite(fc.duration_probs, "duration_head");
  fc.valid = true;
  return {fc.click_prob, fc.duration_probs};
}

double loss(const ModelConfig& c, const Batch& batch, const ForwardCache& fc) {
  if (!fc.valid) throw ContractError("loss: missing forward cache");
  const std::span<const double> p(fc.click_prob.data(), static_cast<std::size_t>(fc.click_prob.size()));
  return nn::bce_loss<double>(p, batch.click) +
         c.duration_loss_weight * nn::softmax_ce_loss<double>(fc.duration_probs, batch.duration);
}

Parameters backward(const Checkpoint& ck, const Batch& batch, const ForwardCache& fc) {
  if (!fc.valid) throw ContractError("backward: missing forward cache");
  const ModelConfig& c = ck.config;
  const Parameters& p = ck.params;
  Parameters g = p.zeros_like();

  Mat d_ctx;
  if (uses_context(c)) d_ctx = Mat::Zero(fc.ctx.rows(), fc.ctx.cols());
  Mat d_adapter_input;
  if (c.use_profile_adapter) {
    d_adapter_input = Mat::Zero(fc.adapter_input.rows(), fc.adapter_input.cols());
  }

  std::array<Mat, kNumTasks> d_head;
  d_head[kClickTask] = nn::bce_logit_grad(fc.click_prob, batch.click);
  d_head[kDurationTask] =
      c.duration_loss_weight * nn::softmax_ce_logit_grad(fc.duration_probs, batch.duration);

  std::array<Mat, kNumTasks> d_repr;
  for (int k = 0; k < kNumTasks; ++k) {
    const Tower& t = p.towers[k];
    Tower& gt = g.towers[k];
    Mat dh = nn::affine_backward(d_head[k], fc.head_input[k], t.head.w, gt.head.w, gt.head.b);
    for (std::size_t l = t.layers.size(); l-- > 0;) {
      const auto& lc = fc.tower[k][l];
      const Mat d_mod = nn::elu_backward(dh, lc.modulated, lc.out);
      Mat d_pre;
      if (c.use_profile_adapter) {
        const GateNet& a = t.adapters[l];
        GateNet& ga = gt.adapters[l];
        Mat d_adapter;
        nn::elementwise_mul_backward(d_mod, lc.pre, lc.adapter, d_pre, d_adapter);
        const Mat d_apre = two_sigmoid_backward(d_adapter, lc.adapter);
        const Mat d_ah = nn::affine_backward(d_apre, lc.adapter_hidden, a.out.w, ga.out.w, ga.out.b);
        const Mat d_ah_pre = nn::elu_backward(d_ah, lc.adapter_hidden_pre, lc.adapter_hidden);
        d_adapter_input +=
            nn::affine_backward(d_ah_pre, fc.adapter_input, a.hidden.w, ga.hidden.w, ga.hidden.b);
      } else {
        d_pre = d_mod;
      }
      dh = nn::affine_backward(d_pre, lc.input, t.layers[l].w, gt.layers[l].w, gt.layers[l].b);
    }
    d_repr[k] = std::move(dh);
  }

  // PLE backward.
  const int n_experts = kNumTasks * c.n_task_experts + c.n_shared_experts;
  Mat d_input = Mat::Zero(fc.expert_input.rows(), fc.expert_input.cols());
  std::vector<Mat> d_expert_out(n_experts);
  for (int slot = 0; slot < n_experts; ++slot) {
    d_expert_out[slot] = Mat::Zero(fc.expert_input.rows(), c.expert_width);
  }
  for (int k = 0; k < kNumTasks; ++k) {
    const auto slots = expert_slots(c, k);
    Mat d_mix(fc.mix_weights[k].rows(), fc.mix_weights[k].cols());
    for (std::size_t j = 0; j < slots.size(); ++j) {
      const auto col = static_cast<Eigen::Index>(j);
      d_expert_out[slots[j]].array() +=
          d_repr[k].array().colwise() * fc.mix_weights[k].col(col).array();
      d_mix.col(col) = (d_repr[k].array() * fc.expert_out[slots[j]].array()).rowwise().sum();
    }
    const Mat d_mix_pre = nn::softmax_backward(d_mix, fc.mix_weights[k]);
    d_input += nn::affine_backward(d_mix_pre, fc.expert_input, p.task_gates[k].w,
                                   g.task_gates[k].w, g.task_gates[k].b);
  }
  for (int slot = 0; slot < n_experts; ++slot) {
    const Linear& e = expert_at(p, c, slot);
    Linear& ge = expert_at(g, c, slot);
    const Mat d_pre = nn::elu_backward(d_expert_out[slot], fc.expert_pre[slot], fc.expert_out[slot]);
    d_input += nn::affine_backward(d_pre, fc.expert_input, e.w, ge.w, ge.b);
  }

  const Eigen::Index rep = c.representation_dim();
  Mat d_gated = d_input.leftCols(rep);
  if (c.context_as_input) d_ctx += d_input.middleCols(rep, 2 * c.context_dim);

  Mat d_compressed;
  if (c.use_scenario_gate) {
    Mat d_gate;
    nn::elementwise_mul_backward(d_gated, fc.compressed, fc.gate, d_compressed, d_gate);
    const Mat d_gpre = two_sigmoid_backward(d_gate, fc.gate);
    const GateNet& sg = p.scenario_gate;
    GateNet& gsg = g.scenario_gate;
    const Mat d_gh = nn::affine_backward(d_gpre, fc.gate_hidden, sg.out.w, gsg.out.w, gsg.out.b);
    const Mat d_gh_pre = nn::elu_backward(d_gh, fc.gate_hidden_pre, fc.gate_hidden);
    d_ctx += nn::affine_backward(d_gh_pre, fc.ctx, sg.hidden.w, gsg.hidden.w, gsg.hidden.b);
  } else {
    d_compressed = std::move(d_gated);
  }

  if (c.input_mode == InputMode::kBucketized) {
    const Eigen::Index d = c.embedding_dim;
    const Mat d_scaled = nn::affine_backward(d_compressed, fc.scaled, p.projection.w,
                                             g.projection.w, g.projection.b);
    Mat d_emb, d_scale_wide;
    nn::elementwise_mul_backward(d_scaled, fc.embeddings, fc.se_scale_wide, d_emb, d_scale_wide);
    const Mat d_scale = nn::expand_per_field_backward(d_scale_wide, d);
    const Mat d_scale_pre = nn::sigmoid_backward(d_scale, fc.se_scale);
    const Mat d_hidden = nn::affine_backward(d_scale_pre, fc.se_hidden, p.se_excite.w,
                                             g.se_excite.w, g.se_excite.b);
    const Mat d_hidden_pre = nn::elu_backward(d_hidden, fc.se_hidden_pre, fc.se_hidden);
    const Mat d_means = nn::affine_backward(d_hidden_pre, fc.field_means, p.se_squeeze.w,
                                            g.se_squeeze.w, g.se_squeeze.b);
    d_emb += nn::reduce_mean_per_field_backward(d_means, d);
    nn::embedding_lookup_backward(d_emb, batch.buckets, c.n_buckets, g.field_embeddings);
  }

  if (c.use_profile_adapter) d_ctx += d_adapter_input.rightCols(2 * c.context_dim);
  if (uses_context(c)) {
    nn::embedding_lookup_backward<double>(d_ctx.leftCols(c.context_dim), batch.card, kNumCardTypes,
                                          g.card_embeddings);
    nn::embedding_lookup_backward<double>(d_ctx.rightCols(c.context_dim), batch.scenario,
                                          kNumScenarios, g.scenario_embeddings);
  }
  return g;
}

std::vector<Prediction> predict(const Checkpoint& ck, const SampleSet& rows) {
  std::vector<Prediction> out;
  out.reserve(rows.size());
  const std::size_t chunk = 1024;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < rows.size(); start += chunk) {
    const std::size_t end = std::min(rows.size(), start + chunk);
    idx.resize(end - start);
    std::iota(idx.begin(), idx.end(), start);
    const Batch b = make_batch(ck, rows, idx);
    const ForwardOutput f = forward(ck, b);
    for (Eigen::Index r = 0; r < b.size(); ++r) {
      Prediction pr;
      pr.p_click = f.click_prob(r, 0);
      pr.duration_probs.assign(f.duration_probs.row(r).data(),
                               f.duration_probs.row(r).data() + f.duration_probs.cols());
      out.push_back(std::move(pr));
    }
  }
  return out;
}

std::vector<double> predict_click(const Checkpoint& ck, const SampleSet& rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  const std::size_t chunk = 1024;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < rows.size(); start += chunk) {
    const std::size_t end = std::min(rows.size(), start + chunk);
    idx.resize(end - start);
    std::iota(idx.begin(), idx.end(), start);
    const ForwardOutput f = forward(ck, make_batch(ck, rows, idx));
    out.insert(out.end(), f.click_prob.data(), f.click_prob.data() + f.click_prob.size());
  }
  return out;
}

void adam_step(Checkpoint& ck, const Parameters& grads) {
  auto params = blocks_of(ck.params);
  auto m = blocks_of(ck.adam.m);
  auto v = blocks_of(ck.adam.v);
  auto g = blocks_of(grads);
  if (params.size() != g.size() || m.size() != params.size() || v.size() != params.size()) {
    throw ContractError("adam_step: parameter structure mismatch");
  }
  ++ck.adam.step;
  for (std::size_t i = 0; i < params.size(); ++i) {
    nn::adam_update(*params[i], *g[i], *m[i], *v[i], ck.adam.step, ck.config.adam);
  }
}

Checkpoint train(const SampleSet& rows, const Checkpoint& init, const TrainOptions& options) {
  if (options.epochs > 0 && rows.empty()) throw ConfigError("train: no training rows");
  Checkpoint ck = init;
  ck.lineage.parent_id = init.id();
  ck.lineage.created_day = options.created_day;
  ck.lineage.accepted = false;

  const std::size_t bs = static_cast<std::size_t>(ck.config.batch_size);
  std::vector<std::size_t> order(rows.size());
  ForwardCache cache;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Engine rng = make_engine(options.seed, {tag(Stream::kShuffle), static_cast<std::uint64_t>(epoch)});
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += bs, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + bs);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      try {
        const Batch b = make_batch(ck, rows, idx);
        forward(ck, b, &cache);
        total += loss(ck.config, b, cache) * static_cast<double>(idx.size());
        adam_step(ck, backward(ck, b, cache));
      } catch (const NumericError& e) {
        throw NumericError(e.layer(), "epoch " + std::to_string(epoch) + " batch " +
                                          std::to_string(batch_index) + ": " + e.what());
      }
    }
    if (options.epoch_losses) options.epoch_losses->push_back(total / static_cast<double>(rows.size()));
  }
  return ck;
}

}  // namespace trinity
