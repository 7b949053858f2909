#ifndef TRINITY_HARNESS_HPP_
#define TRINITY_HARNESS_HPP_

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "trinity/feature_store.hpp"
#include "trinity/metrics.hpp"
#include "trinity/model.hpp"
#include "trinity/synthgen.hpp"
#include "trinity/updater.hpp"

namespace trinity {

enum class Variant : std::uint8_t {
  kTrinity = 0,
  kTrinitySmall,
  kTrinityWoCheck,
  kTrinityWPle,
  kPleBaseline,
};

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view s);
std::vector<Variant> all_variants();

struct DayRange {
  int begin = 0;  // inclusive
  int end = 0;    // exclusive
  int size() const { return end - begin; }
  bool contains(int d) const { return d >= begin && d < end; }
  bool operator==(const DayRange&) const = default;
};

struct ExperimentConfig {
  int schema_version = 1;
  std::uint64_t seed = 7;
  GenConfig generator;
  ModelConfig model;
  UpdaterConfig updater;
  std::vector<Variant> variants = all_variants();
  // Days before train_days.begin only contribute feature history.
  DayRange train_days{14, 21};
  DayRange test_days{21, 24};
  // The first `bootstrap_days` train days fit the initial checkpoint; the
  // remaining train days and all test days run through the daily loop.
  int bootstrap_days = 5;
  int bootstrap_epochs = 2;
  int daily_epochs = 1;
  // Day whose click labels are flipped with probability noise_flip_fraction.
  std::optional<int> noise_day;
  double noise_flip_fraction = 0.5;
  std::filesystem::path output_dir;
  // Write every day's serving checkpoint under output_dir/checkpoints/<variant>.
  bool save_checkpoints = false;

  std::vector<int> loop_days() const;
};

void validate(const ExperimentConfig& config);
void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

// Generated world plus per-day feature rows for every train and test day.
struct ExperimentData {
  std::vector<UserProfile> population;
  std::vector<DayLog> days;  // index = day
  std::map<int, SampleSet> rows;
};

ExperimentData generate_data(const ExperimentConfig& config);
// Rebuilds rows from a population, event log and impressions (e.g. loaded from files).
ExperimentData build_data(const ExperimentConfig& config, std::vector<UserProfile> population,
                          const EventLog& events, const std::vector<Impression>& impressions);

// Flips each click label of `rows` independently with probability `fraction`.
void inject_label_noise(SampleSet& rows, double fraction, std::uint64_t seed, int day);

struct SliceSummary {
  std::optional<double> auc;
  std::optional<double> copc;
  int auc_days = 0;
  int copc_days = 0;
  bool operator==(const SliceSummary&) const = default;
};

struct DayMetrics {
  int day = 0;
  SlicedReport report;
  bool operator==(const DayMetrics&) const = default;
};

struct VariantResult {
  Variant variant = Variant::kTrinity;
  bool ok = true;
  std::string error;
  std::array<SliceSummary, kNumSlices> slices;
  std::vector<DayMetrics> per_day;
  std::vector<DecisionRecord> decisions;
  bool operator==(const VariantResult&) const = default;
};

struct ReportTable {
  std::uint64_t seed = 0;
  std::vector<VariantResult> rows;

  const VariantResult* find(Variant v) const;
  bool operator==(const ReportTable&) const = default;
};

void to_json(nlohmann::json& j, const ReportTable& t);
void from_json(const nlohmann::json& j, ReportTable& t);

// Model wiring and update policy of a variant on top of the base config.
ModelConfig variant_model_config(const ExperimentConfig& config, Variant v);
UpdaterConfig variant_updater_config(const ExperimentConfig& config, Variant v);

// Bootstrap checkpoint: transforms fitted on all train days, trained on the
// bootstrap days.
Checkpoint bootstrap_checkpoint(const ExperimentConfig& config, const ExperimentData& data,
                                Variant v);

// Full run of one variant: bootstrap, daily loop, per-test-day metrics.
VariantResult run_variant(const ExperimentConfig& config, const ExperimentData& data, Variant v);

ReportTable run_experiment(const ExperimentConfig& config);
ReportTable run_experiment(const ExperimentConfig& config, const ExperimentData& data);

// Averages each slice over test days where it is defined.
std::array<SliceSummary, kNumSlices> average_slices(const std::vector<DayMetrics>& per_day);

enum class ReportFormat : std::uint8_t { kJson = 1, kText = 2, kDaily = 4 };
inline constexpr int kAllReportFormats = 7;

// Aligned text table: one row per variant, AUC and COPC per slice.
std::string format_text_table(const ReportTable& table,
                              const std::vector<Slice>& slices = {Slice::kClassic,
                                                                  Slice::kCopilot});
// Per-day series: variant,day,slice,auc,copc,realctr,pctr,n_samples,n_positives.
std::string format_daily_csv(const ReportTable& table);

// Writes report.json, report.txt and per_day.csv (as selected) into `dir`.
void emit_report(const ReportTable& table, const std::filesystem::path& dir,
                 int formats = kAllReportFormats);

}  // namespace trinity

#endif  // TRINITY_HARNESS_HPP_
