#include "trinity/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "trinity/checkpoint.hpp"
#include "trinity/config.hpp"
#include "trinity/rng.hpp"

namespace trinity {
namespace {

constexpr std::array<std::string_view, 5> kVariantNames = {
    "trinity", "trinity_small", "trinity_wo_check", "trinity_w_ple", "ple_baseline"};

// Row source per variant: the shared full-feature rows, or their
// target-restricted projection.
class VariantRows {
 public:
  VariantRows(const ExperimentData& data, Variant v) : data_(data), restrict_(v == Variant::kTrinitySmall) {
    if (!restrict_) return;
    for (const auto& [day, rows] : data.rows) restricted_.emplace(day, restrict_to_target(rows));
  }
  const SampleSet& day(int d) const {
    const auto& source = restrict_ ? restricted_ : data_.rows;
    auto it = source.find(d);
    if (it == source.end()) throw ContractError("no feature rows for day " + std::to_string(d));
    return it->second;
  }
  bool has(int d) const { return data_.rows.count(d) > 0; }
  SampleSet concat(DayRange range) const {
    SampleSet out(restrict_ ? kTargetFeatureCount : kTensorSize);
    for (int d = range.begin; d < range.end; ++d) {
      if (has(d)) out.append(day(d));
    }
    return out;
  }

 private:
  const ExperimentData& data_;
  bool restrict_;
  std::map<int, SampleSet> restricted_;
};

SlicedReport evaluate_rows(const Checkpoint& ck, const SampleSet& rows) {
  const std::vector<double> scores = predict_click(ck, rows);
  return sliced_report(rows.scenario, rows.label_click, scores);
}

std::string fmt_fixed(const std::optional<double>& v, int precision) {
  if (!v) return "-";
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(precision) << *v;
  return ss.str();
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> json_optional(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

nlohmann::json report_json(const MetricsReport& r) {
  return {{"auc", optional_json(r.auc)},
          {"copc", r.copc},
          {"realctr", r.realctr},
          {"pctr", r.pctr},
          {"n_samples", r.n_samples},
          {"n_positives", r.n_positives}};
}

MetricsReport report_from_json(const nlohmann::json& j, Slice s) {
  MetricsReport r;
  r.slice = s;
  r.auc = json_optional(j, "auc");
  r.copc = j.at("copc").get<double>();
  r.realctr = j.at("realctr").get<double>();
  r.pctr = j.at("pctr").get<double>();
  r.n_samples = j.at("n_samples").get<std::int64_t>();
  r.n_positives = j.at("n_positives").get<std::int64_t>();
  return r;
}

constexpr std::array<Slice, kNumSlices> kSlices = {Slice::kGlobal, Slice::kClassic, Slice::kCopilot};

}  // namespace

std::string_view to_string(Variant v) { return kVariantNames.at(static_cast<int>(v)); }

Variant parse_variant(std::string_view s) {
  for (std::size_t i = 0; i < kVariantNames.size(); ++i) {
    if (kVariantNames[i] == s) return static_cast<Variant>(i);
  }
  throw ConfigError("unknown variant '" + std::string(s) + "'");
}

std::vector<Variant> all_variants() {
  return {Variant::kTrinity, Variant::kTrinitySmall, Variant::kTrinityWoCheck, Variant::kTrinityWPle,
          Variant::kPleBaseline};
}

std::vector<int> ExperimentConfig::loop_days() const {
  std::vector<int> days;
  for (int d = train_days.begin + bootstrap_days; d < train_days.end; ++d) days.push_back(d);
  for (int d = test_days.begin; d < test_days.end; ++d) days.push_back(d);
  return days;
}

void validate(const ExperimentConfig& c) {
  if (c.schema_version != 1) {
    throw ConfigError("unsupported ExperimentConfig schema_version " + std::to_string(c.schema_version));
  }
  validate(c.generator);
  validate(c.model);
  validate(c.updater);
  if (c.train_days.begin < 0 || c.train_days.size() < 1) throw ConfigError("train_days must be non-empty");
  if (c.test_days.size() < 1) throw ConfigError("test_days must be non-empty");
  if (c.test_days.begin < c.train_days.end) {
    throw ConfigError("test days must come after train days");
  }
  if (c.bootstrap_days < 1 || c.bootstrap_days > c.train_days.size()) {
    throw ConfigError("bootstrap_days must lie in [1, number of train days]");
  }
  if (c.bootstrap_epochs < 0 || c.daily_epochs < 0) throw ConfigError("epochs must be >= 0");
  if (!(c.noise_flip_fraction >= 0.0 && c.noise_flip_fraction <= 1.0)) {
    throw ConfigError("noise_flip_fraction must lie in [0,1]");
  }
  if (c.noise_day && !c.train_days.contains(*c.noise_day) && !c.test_days.contains(*c.noise_day)) {
    throw ConfigError("noise_day must be a train or test day");
  }
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  std::vector<std::string> variants;
  for (Variant v : c.variants) variants.emplace_back(to_string(v));
  j = {{"schema_version", c.schema_version},
       {"seed", c.seed},
       {"generator", c.generator},
       {"model", c.model},
       {"updater", c.updater},
       {"variants", variants},
       {"train_days", {{"begin", c.train_days.begin}, {"end", c.train_days.end}}},
       {"test_days", {{"begin", c.test_days.begin}, {"end", c.test_days.end}}},
       {"bootstrap_days", c.bootstrap_days},
       {"bootstrap_epochs", c.bootstrap_epochs},
       {"daily_epochs", c.daily_epochs},
       {"noise_day", c.noise_day ? nlohmann::json(*c.noise_day) : nlohmann::json(nullptr)},
       {"noise_flip_fraction", c.noise_flip_fraction},
       {"output_dir", c.output_dir.string()},
       {"save_checkpoints", c.save_checkpoints}};
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  const ExperimentConfig d;
  c.schema_version = j.value("schema_version", d.schema_version);
  if (c.schema_version != 1) {
    throw ConfigError("unsupported ExperimentConfig schema_version " + std::to_string(c.schema_version));
  }
  c.seed = j.value("seed", d.seed);
  c.generator = j.value("generator", d.generator);
  c.model = j.value("model", d.model);
  c.updater = j.value("updater", d.updater);
  if (j.contains("variants")) {
    c.variants.clear();
    for (const auto& v : j.at("variants")) c.variants.push_back(parse_variant(v.get<std::string>()));
  }
  auto range = [&](const char* key, DayRange def) {
    if (!j.contains(key)) return def;
    return DayRange{j.at(key).at("begin").get<int>(), j.at(key).at("end").get<int>()};
  };
  c.train_days = range("train_days", d.train_days);
  c.test_days = range("test_days", d.test_days);
  c.bootstrap_days = j.value("bootstrap_days", d.bootstrap_days);
  c.bootstrap_epochs = j.value("bootstrap_epochs", d.bootstrap_epochs);
  c.daily_epochs = j.value("daily_epochs", d.daily_epochs);
  if (j.contains("noise_day") && !j.at("noise_day").is_null()) {
    c.noise_day = j.at("noise_day").get<int>();
  } else {
    c.noise_day.reset();
  }
  c.noise_flip_fraction = j.value("noise_flip_fraction", d.noise_flip_fraction);
  c.output_dir = j.value("output_dir", std::string());
  c.save_checkpoints = j.value("save_checkpoints", d.save_checkpoints);
}

void inject_label_noise(SampleSet& rows, double fraction, std::uint64_t seed, int day) {
  Engine rng = make_engine(seed, {tag(Stream::kNoise), static_cast<std::uint64_t>(day)});
  std::bernoulli_distribution flip(fraction);
  for (int& y : rows.label_click) {
    if (flip(rng)) y = 1 - y;
  }
}

namespace {

ExperimentData finish_data(const ExperimentConfig& config, ExperimentData data,
                           const UserEventIndex& index) {
  for (int d = config.train_days.begin; d < config.test_days.end; ++d) {
    if (!config.train_days.contains(d) && !config.test_days.contains(d)) continue;
    const auto& imps =
        d < static_cast<int>(data.days.size()) ? data.days[d].impressions : std::vector<Impression>{};
    data.rows.emplace(d, snapshot_rows(index, imps, data.population));
  }
  if (config.noise_day) {
    inject_label_noise(data.rows.at(*config.noise_day), config.noise_flip_fraction, config.seed,
                       *config.noise_day);
  }
  return data;
}

}  // namespace

ExperimentData generate_data(const ExperimentConfig& config) {
  validate(config);
  ExperimentData data;
  data.population = generate_population(config.generator, config.seed);
  EventLog all_events;
  for (int d = 0; d < config.test_days.end; ++d) {
    data.days.push_back(simulate_day(data.population, d, config.generator, config.seed));
    const auto& ev = data.days.back().events;
    all_events.insert(all_events.end(), ev.begin(), ev.end());
  }
  const UserEventIndex index(all_events);
  return finish_data(config, std::move(data), index);
}

ExperimentData build_data(const ExperimentConfig& config, std::vector<UserProfile> population,
                          const EventLog& events, const std::vector<Impression>& impressions) {
  validate(config);
  ExperimentData data;
  data.population = std::move(population);
  data.days.resize(static_cast<std::size_t>(config.test_days.end));
  for (int d = 0; d < config.test_days.end; ++d) data.days[d].day = d;
  for (const Impression& imp : impressions) {
    const std::int64_t day = (imp.timestamp - config.generator.epoch_start) / kSecondsPerDay;
    if (day < 0 || day >= config.test_days.end) continue;
    data.days[day].impressions.push_back(imp);
    data.days[day].truth.push_back(imp.p_true);
  }
  const UserEventIndex index(events);
  return finish_data(config, std::move(data), index);
}

ModelConfig variant_model_config(const ExperimentConfig& config, Variant v) {
  ModelConfig m = config.model;
  switch (v) {
    case Variant::kTrinity:
    case Variant::kTrinityWoCheck:
      break;
    case Variant::kTrinitySmall:
      m.field_count = kTargetFeatureCount;
      break;
    case Variant::kTrinityWPle:
      m.use_scenario_gate = false;
      m.use_profile_adapter = false;
      m.context_as_input = true;
      break;
    case Variant::kPleBaseline:
      m.use_scenario_gate = false;
      m.use_profile_adapter = false;
      m.context_as_input = true;
      m.input_mode = InputMode::kStandardizedDense;
      break;
  }
  return m;
}

UpdaterConfig variant_updater_config(const ExperimentConfig& config, Variant v) {
  UpdaterConfig u = config.updater;
  if (v == Variant::kTrinityWoCheck || v == Variant::kPleBaseline) {
    u.policy = UpdatePolicy::kAlwaysAccept;
  }
  return u;
}

namespace {

Checkpoint bootstrap_with(const ExperimentConfig& config, const VariantRows& rows, Variant v) {
  ModelConfig mc = variant_model_config(config, v);
  const SampleSet train_all = rows.concat(config.train_days);
  if (train_all.empty()) throw ConfigError("no training rows in train days");
  double clicks = 0.0;
  for (int y : train_all.label_click) clicks += y;
  const double ctr = std::clamp(clicks / static_cast<double>(train_all.size()), 1e-6, 1.0 - 1e-6);
  mc.click_bias_init = std::log(ctr / (1.0 - ctr));

  Checkpoint ck = init_model(mc, config.seed);
  fit_transforms(ck, train_all);
  const DayRange boot{config.train_days.begin, config.train_days.begin + config.bootstrap_days};
  TrainOptions opt;
  opt.epochs = config.bootstrap_epochs;
  opt.seed = derive_seed(config.seed, {tag(Stream::kShuffle), 0});
  opt.created_day = boot.end - 1;
  ck = train(rows.concat(boot), ck, opt);
  ck.lineage.accepted = true;
  return ck;
}

}  // namespace

Checkpoint bootstrap_checkpoint(const ExperimentConfig& config, const ExperimentData& data,
                                Variant v) {
  return bootstrap_with(config, VariantRows(data, v), v);
}

std::array<SliceSummary, kNumSlices> average_slices(const std::vector<DayMetrics>& per_day) {
  std::array<SliceSummary, kNumSlices> out;
  for (int s = 0; s < kNumSlices; ++s) {
    double auc_sum = 0.0;
    double copc_sum = 0.0;
    for (const DayMetrics& dm : per_day) {
      const auto& r = dm.report[s];
      if (!r) continue;
      if (r->auc) {
        auc_sum += *r->auc;
        ++out[s].auc_days;
      }
      copc_sum += r->copc;
      ++out[s].copc_days;
    }
    if (out[s].auc_days > 0) out[s].auc = auc_sum / out[s].auc_days;
    if (out[s].copc_days > 0) out[s].copc = copc_sum / out[s].copc_days;
  }
  return out;
}

VariantResult run_variant(const ExperimentConfig& config, const ExperimentData& data, Variant v) {
  VariantResult result;
  result.variant = v;
  try {
    validate(config);
    const VariantRows rows(data, v);
    Checkpoint m0 = bootstrap_with(config, rows, v);
    const UpdaterConfig uc = variant_updater_config(config, v);

    std::filesystem::path ckpt_dir;
    if (config.save_checkpoints && !config.output_dir.empty()) {
      ckpt_dir = config.output_dir / "checkpoints" / std::string(to_string(v));
      std::filesystem::create_directories(ckpt_dir);
      std::ofstream(ckpt_dir / "decisions.ndjson", std::ios::trunc);
      write_checkpoint(m0, ckpt_dir / ("ckpt_bootstrap_" + hex64(m0.config_hash()).substr(0, 8) + ".bin"));
    }

    DailyLoopHooks<Checkpoint> hooks;
    hooks.id = [](const Checkpoint& ck) { return ck.id(); };
    hooks.is_empty = [&](int day) { return !rows.has(day) || rows.day(day).empty(); };
    // The incumbent's served metrics on a test day double as its gate metrics.
    std::optional<std::pair<std::string, int>> served_key;
    SlicedReport served;
    hooks.evaluate = [&](const Checkpoint& ck, int day) {
      if (!rows.has(day) || rows.day(day).empty()) return GateMetrics{};
      if (served_key && served_key->second == day && served_key->first == ck.id()) {
        return gate_metrics(served, uc.gating_slice);
      }
      return gate_metrics(evaluate_rows(ck, rows.day(day)), uc.gating_slice);
    };
    hooks.train = [&](const Checkpoint& incumbent, int day) {
      TrainOptions opt;
      opt.epochs = config.daily_epochs;
      opt.seed = derive_seed(config.seed, {tag(Stream::kShuffle), static_cast<std::uint64_t>(day) + 1});
      opt.created_day = day;
      return train(rows.day(day), incumbent, opt);
    };
    hooks.on_accept = [](Checkpoint& ck) { ck.lineage.accepted = true; };
    hooks.before_day = [&](int day, const Checkpoint& incumbent) {
      if (!config.test_days.contains(day)) return;
      // Served metrics for a test day must come from a model that never saw it.
      if (incumbent.lineage.created_day >= day) {
        throw ContractError("leakage: checkpoint created on day " +
                            std::to_string(incumbent.lineage.created_day) + " scored day " +
                            std::to_string(day));
      }
      served = evaluate_rows(incumbent, rows.day(day));
      served_key = {incumbent.id(), day};
      result.per_day.push_back({day, served});
    };
    if (!ckpt_dir.empty()) {
      hooks.after_day = [&](const Checkpoint& serving, const DecisionRecord& rec) {
        const std::string name = "ckpt_day" + std::to_string(rec.day) + "_" +
                                 hex64(serving.config_hash()).substr(0, 8) + "_" +
                                 (rec.accepted ? "accepted" : "retained") + ".bin";
        write_checkpoint(serving, ckpt_dir / name);
        std::ofstream log(ckpt_dir / "decisions.ndjson", std::ios::app);
        log << nlohmann::json(rec).dump() << '\n';
      };
    }

    const std::vector<int> days = config.loop_days();
    auto loop = run_daily_loop<Checkpoint>(days, std::move(m0), uc, hooks);
    result.decisions = std::move(loop.records);
    result.slices = average_slices(result.per_day);
  } catch (const std::exception& e) {
    result.ok = false;
    result.error = e.what();
  }
  return result;
}

ReportTable run_experiment(const ExperimentConfig& config, const ExperimentData& data) {
  ReportTable table;
  table.seed = config.seed;
  for (Variant v : config.variants) table.rows.push_back(run_variant(config, data, v));
  return table;
}

ReportTable run_experiment(const ExperimentConfig& config) {
  return run_experiment(config, generate_data(config));
}

const VariantResult* ReportTable::find(Variant v) const {
  for (const auto& r : rows) {
    if (r.variant == v) return &r;
  }
  return nullptr;
}

void to_json(nlohmann::json& j, const ReportTable& t) {
  nlohmann::json variants = nlohmann::json::array();
  for (const VariantResult& r : t.rows) {
    nlohmann::json vr;
    vr["name"] = std::string(to_string(r.variant));
    vr["status"] = r.ok ? "ok" : "failed";
    vr["error"] = r.error;
    nlohmann::json slices = nlohmann::json::object();
    for (Slice s : kSlices) {
      const SliceSummary& ss = r.slices[static_cast<int>(s)];
      slices[std::string(to_string(s))] = {{"auc", optional_json(ss.auc)},
                                           {"copc", optional_json(ss.copc)},
                                           {"auc_days", ss.auc_days},
                                           {"copc_days", ss.copc_days}};
    }
    vr["slices"] = slices;
    nlohmann::json days = nlohmann::json::array();
    for (const DayMetrics& dm : r.per_day) {
      nlohmann::json dj;
      dj["day"] = dm.day;
      for (Slice s : kSlices) {
        const auto& rep = dm.report[static_cast<int>(s)];
        dj[std::string(to_string(s))] = rep ? report_json(*rep) : nlohmann::json(nullptr);
      }
      days.push_back(dj);
    }
    vr["per_day"] = days;
    vr["decisions"] = r.decisions;
    variants.push_back(vr);
  }
  j = {{"schema_version", 1}, {"seed", t.seed}, {"variants", variants}};
}

void from_json(const nlohmann::json& j, ReportTable& t) {
  t.seed = j.at("seed").get<std::uint64_t>();
  t.rows.clear();
  for (const auto& vr : j.at("variants")) {
    VariantResult r;
    r.variant = parse_variant(vr.at("name").get<std::string>());
    r.ok = vr.at("status").get<std::string>() == "ok";
    r.error = vr.value("error", std::string());
    for (Slice s : kSlices) {
      const auto& sj = vr.at("slices").at(std::string(to_string(s)));
      SliceSummary& ss = r.slices[static_cast<int>(s)];
      ss.auc = json_optional(sj, "auc");
      ss.copc = json_optional(sj, "copc");
      ss.auc_days = sj.at("auc_days").get<int>();
      ss.copc_days = sj.at("copc_days").get<int>();
    }
    for (const auto& dj : vr.at("per_day")) {
      DayMetrics dm;
      dm.day = dj.at("day").get<int>();
      for (Slice s : kSlices) {
        const auto& rj = dj.at(std::string(to_string(s)));
        if (!rj.is_null()) dm.report[static_cast<int>(s)] = report_from_json(rj, s);
      }
      r.per_day.push_back(dm);
    }
    r.decisions = vr.at("decisions").get<std::vector<DecisionRecord>>();
    t.rows.push_back(std::move(r));
  }
}

std::string format_text_table(const ReportTable& table, const std::vector<Slice>& slices) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header = {"Model"};
  for (Slice s : slices) {
    header.push_back(std::string(to_string(s)) + " AUC");
    header.push_back(std::string(to_string(s)) + " COPC");
  }
  cells.push_back(header);
  for (const VariantResult& r : table.rows) {
    std::vector<std::string> row = {std::string(to_string(r.variant))};
    for (Slice s : slices) {
      const SliceSummary& ss = r.slices[static_cast<int>(s)];
      row.push_back(r.ok ? fmt_fixed(ss.auc, 3) : "FAILED");
      row.push_back(r.ok ? fmt_fixed(ss.copc, 2) : "FAILED");
    }
    cells.push_back(row);
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t c = 0; c < cells[i].size(); ++c) {
      if (c > 0) out << "  ";
      if (c == 0) {
        out << std::left << std::setw(static_cast<int>(width[c])) << cells[i][c];
      } else {
        out << std::right << std::setw(static_cast<int>(width[c])) << cells[i][c];
      }
    }
    out << '\n';
    if (i == 0) {
      std::size_t total = 0;
      for (std::size_t w : width) total += w;
      out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
    }
  }
  for (const VariantResult& r : table.rows) {
    if (!r.ok) out << "# " << to_string(r.variant) << " failed: " << r.error << '\n';
  }
  return out.str();
}

std::string format_daily_csv(const ReportTable& table) {
  std::ostringstream out;
  out << "variant,day,slice,auc,copc,realctr,pctr,n_samples,n_positives\n";
  out << std::setprecision(17);
  for (const VariantResult& r : table.rows) {
    for (const DayMetrics& dm : r.per_day) {
      for (Slice s : kSlices) {
        const auto& rep = dm.report[static_cast<int>(s)];
        if (!rep) continue;
        out << to_string(r.variant) << ',' << dm.day << ',' << to_string(s) << ',';
        if (rep->auc) out << *rep->auc;
        out << ',' << rep->copc << ',' << rep->realctr << ',' << rep->pctr << ',' << rep->n_samples
            << ',' << rep->n_positives << '\n';
      }
    }
  }
  return out.str();
}

void emit_report(const ReportTable& table, const std::filesystem::path& dir, int formats) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  if (formats & static_cast<int>(ReportFormat::kJson)) {
    write_text_file(dir / "report.json", nlohmann::json(table).dump(2) + "\n");
  }
  if (formats & static_cast<int>(ReportFormat::kText)) {
    write_text_file(dir / "report.txt", format_text_table(table));
  }
  if (formats & static_cast<int>(ReportFormat::kDaily)) {
    write_text_file(dir / "per_day.csv", format_daily_csv(table));
  }
}

}  // namespace trinity
