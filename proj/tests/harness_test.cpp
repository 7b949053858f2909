#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "trinity/checkpoint.hpp"
#include "trinity/config.hpp"
#include "trinity/harness.hpp"

namespace trinity {
namespace {

namespace fs = std::filesystem;

// A few thousand impressions per day and a narrow model: seconds per run.
ExperimentConfig tiny_experiment() {
  ExperimentConfig c;
  c.seed = 5;
  c.generator.n_users = 1500;
  c.generator.base_logit = {-3.5, -5.0};
  c.model.embedding_dim = 3;
  c.model.expert_width = 8;
  c.model.tower_widths = {8, 4};
  c.model.context_dim = 3;
  c.model.gate_hidden = 4;
  c.model.n_buckets = 6;
  c.model.batch_size = 256;
  c.model.adam.learning_rate = 1e-3;
  c.train_days = {14, 17};
  c.test_days = {17, 19};
  c.bootstrap_days = 2;
  c.bootstrap_epochs = 1;
  c.variants = {Variant::kTrinity};
  return c;
}

TEST(Variants, NamesRoundTrip) {
  for (Variant v : all_variants()) EXPECT_EQ(parse_variant(to_string(v)), v);
  EXPECT_EQ(all_variants().size(), 5u);
  EXPECT_THROW(parse_variant("pepnet"), ConfigError);
}

TEST(Variants, WiringPerVariant) {
  const ExperimentConfig c;
  EXPECT_EQ(variant_model_config(c, Variant::kTrinity), c.model);
  EXPECT_EQ(variant_model_config(c, Variant::kTrinitySmall).field_count, kTargetFeatureCount);
  const ModelConfig wple = variant_model_config(c, Variant::kTrinityWPle);
  EXPECT_FALSE(wple.use_scenario_gate || wple.use_profile_adapter);
  EXPECT_EQ(wple.input_mode, InputMode::kBucketized);
  EXPECT_EQ(variant_model_config(c, Variant::kPleBaseline).input_mode, InputMode::kStandardizedDense);
  EXPECT_EQ(variant_updater_config(c, Variant::kTrinity).policy, UpdatePolicy::kGated);
  EXPECT_EQ(variant_updater_config(c, Variant::kTrinityWPle).policy, UpdatePolicy::kGated);
  EXPECT_EQ(variant_updater_config(c, Variant::kTrinityWoCheck).policy, UpdatePolicy::kAlwaysAccept);
  EXPECT_EQ(variant_updater_config(c, Variant::kPleBaseline).policy, UpdatePolicy::kAlwaysAccept);
}

TEST(ExperimentConfigJson, RoundTrip) {
  ExperimentConfig c = tiny_experiment();
  c.noise_day = 15;
  c.variants = {Variant::kTrinitySmall, Variant::kPleBaseline};
  const nlohmann::json j = c;
  const ExperimentConfig back = j.get<ExperimentConfig>();
  EXPECT_EQ(nlohmann::json(back), j);
  EXPECT_EQ(back.noise_day, 15);
  EXPECT_EQ(nlohmann::json::object().get<ExperimentConfig>().loop_days(),
            (std::vector<int>{19, 20, 21, 22, 23}));
}

TEST(ExperimentConfigJson, RejectsOverlappingDays) {
  ExperimentConfig c = tiny_experiment();
  c.test_days = {16, 18};
  EXPECT_THROW(validate(c), ConfigError);
  c = tiny_experiment();
  c.bootstrap_days = 4;
  EXPECT_THROW(validate(c), ConfigError);
  c = tiny_experiment();
  c.noise_day = 3;
  EXPECT_THROW(validate(c), ConfigError);
}

TEST(Data, RowsForEveryTrainAndTestDay) {
  const ExperimentConfig c = tiny_experiment();
  const ExperimentData data = generate_data(c);
  EXPECT_EQ(data.days.size(), 19u);
  for (int d = 14; d < 19; ++d) {
    ASSERT_TRUE(data.rows.count(d)) << d;
    EXPECT_EQ(data.rows.at(d).size(), data.days[d].impressions.size());
  }
  EXPECT_FALSE(data.rows.count(13));
}

TEST(Data, NoiseFlipsAboutHalfTheLabels) {
  ExperimentConfig c = tiny_experiment();
  const ExperimentData clean = generate_data(c);
  c.noise_day = 16;
  const ExperimentData noisy = generate_data(c);
  const auto& a = clean.rows.at(16).label_click;
  const auto& b = noisy.rows.at(16).label_click;
  std::size_t flipped = 0;
  for (std::size_t i = 0; i < a.size(); ++i) flipped += a[i] != b[i];
  EXPECT_NEAR(static_cast<double>(flipped) / static_cast<double>(a.size()), 0.5, 0.03);
  EXPECT_EQ(clean.rows.at(15).label_click, noisy.rows.at(15).label_click);
}

TEST(Experiment, SingleVariantIsDeterministic) {
  const ExperimentConfig c = tiny_experiment();
  const ReportTable a = run_experiment(c);
  const ReportTable b = run_experiment(c);
  ASSERT_EQ(a.rows.size(), 1u);
  EXPECT_TRUE(a.rows[0].ok) << a.rows[0].error;
  EXPECT_EQ(nlohmann::json(a).dump(), nlohmann::json(b).dump());
  EXPECT_EQ(a.rows[0].per_day.size(), 2u);
  EXPECT_EQ(a.rows[0].decisions.size(), c.loop_days().size());
}

TEST(Experiment, ReportRoundTripsThroughJson) {
  const ReportTable t = run_experiment(tiny_experiment());
  const ReportTable back = nlohmann::json::parse(nlohmann::json(t).dump(2)).get<ReportTable>();
  EXPECT_EQ(back, t);
}

TEST(Experiment, ServingCheckpointsNeverSawTheirTestDay) {
  ExperimentConfig c = tiny_experiment();
  c.output_dir = fs::temp_directory_path() / "trinity_harness_test";
  fs::remove_all(c.output_dir);
  c.save_checkpoints = true;
  const ReportTable t = run_experiment(c);
  ASSERT_TRUE(t.rows[0].ok) << t.rows[0].error;
  const fs::path dir = c.output_dir / "checkpoints" / "trinity";
  std::ifstream in(dir / "decisions.ndjson");
  std::stringstream text;
  text << in.rdbuf();
  const auto records = parse_ndjson(text.str());
  EXPECT_EQ(records, t.rows[0].decisions);
  // The checkpoint serving day d is the one saved after day d - 1.
  for (const fs::directory_entry& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("ckpt_day", 0) != 0) continue;
    const int saved_after = std::stoi(name.substr(8));
    const Checkpoint ck = read_checkpoint(e.path());
    EXPECT_LE(ck.lineage.created_day, saved_after);
  }
}

TEST(Experiment, FailureIsRecordedPerVariant) {
  ExperimentConfig c = tiny_experiment();
  c.variants = {Variant::kTrinity, Variant::kPleBaseline};
  ExperimentData empty;
  const ReportTable t = run_experiment(c, empty);
  ASSERT_EQ(t.rows.size(), 2u);
  for (const auto& r : t.rows) {
    EXPECT_FALSE(r.ok);
    EXPECT_FALSE(r.error.empty());
  }
  EXPECT_NE(format_text_table(t).find("FAILED"), std::string::npos);
}

TEST(Report, TextTableLayout) {
  ReportTable t;
  const std::string empty = format_text_table(t);
  EXPECT_EQ(std::count(empty.begin(), empty.end(), '\n'), 2);
  VariantResult r;
  r.slices[1].auc = 0.71234;
  r.slices[1].copc = 0.9876;
  t.rows.push_back(r);
  const std::string text = format_text_table(t, {Slice::kGlobal, Slice::kClassic, Slice::kCopilot});
  std::istringstream lines(text);
  std::string header, rule, row;
  std::getline(lines, header);
  std::getline(lines, rule);
  std::getline(lines, row);
  auto count_words = [](const std::string& line) {
    std::istringstream words(line);
    int n = 0;
    for (std::string w; words >> w;) ++n;
    return n;
  };
  // One column for the model name plus AUC and COPC per slice.
  EXPECT_EQ(count_words(row), 1 + 2 * 3);
  EXPECT_EQ(count_words(header), 1 + 2 * 3 * 2);
  EXPECT_EQ(rule.size(), header.size());
  EXPECT_NE(text.find("0.712"), std::string::npos);
  EXPECT_NE(text.find("0.99"), std::string::npos);
}

TEST(Report, EmitWritesAllFormats) {
  const fs::path dir = fs::temp_directory_path() / "trinity_emit_test";
  fs::remove_all(dir);
  ReportTable t;
  t.seed = 3;
  emit_report(t, dir);
  EXPECT_TRUE(fs::exists(dir / "report.json"));
  EXPECT_TRUE(fs::exists(dir / "report.txt"));
  std::ifstream csv(dir / "per_day.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "variant,day,slice,auc,copc,realctr,pctr,n_samples,n_positives");
  EXPECT_EQ(read_json_file(dir / "report.json").get<ReportTable>(), t);
}

TEST(Report, AverageSkipsUndefinedDays) {
  std::vector<DayMetrics> days(2);
  MetricsReport a;
  a.auc = 0.6;
  a.copc = 1.2;
  MetricsReport b;
  b.copc = 0.8;
  days[0].report[2] = a;
  days[1].report[2] = b;
  const auto s = average_slices(days);
  EXPECT_EQ(s[2].auc, 0.6);
  EXPECT_EQ(s[2].auc_days, 1);
  EXPECT_DOUBLE_EQ(*s[2].copc, 1.0);
  EXPECT_FALSE(s[0].auc.has_value());
}

}  // namespace
}  // namespace trinity
