// Command-line front end. Every subcommand takes --config, --seed and --out.
// On failure a single JSON error record is written to stderr and the process
// exits nonzero.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "trinity/checkpoint.hpp"
#include "trinity/config.hpp"
#include "trinity/harness.hpp"
#include "trinity/io.hpp"

namespace fs = std::filesystem;
using namespace trinity;

namespace {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kConfig = 3,
  kIo = 4,
  kNumeric = 5,
  kContract = 6,
  kMetric = 7,
};

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::string data;
  std::string checkpoint;
  std::string input;
  std::string variant = "trinity";
  std::string slices = "classic,copilot";
};

ExperimentConfig load_config(const Options& o) {
  ExperimentConfig c;
  if (!o.config.empty()) c = read_json_file(o.config).get<ExperimentConfig>();
  if (o.seed) c.seed = *o.seed;
  c.output_dir = o.out;
  validate(c);
  return c;
}

// Generated data, or data read back from a `generate` output directory.
ExperimentData load_data(const ExperimentConfig& c, const Options& o) {
  if (o.data.empty()) return generate_data(c);
  const fs::path dir(o.data);
  return build_data(c, read_population(dir / "population.csv"), read_events(dir / "events.csv"),
                    read_impressions(dir / "impressions.csv"));
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

void prepare_out(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory " + out.string() + ": " + ec.message());
}

void cmd_generate(const Options& o) {
  const ExperimentConfig c = load_config(o);
  const fs::path out(o.out);
  prepare_out(out);
  const auto population = generate_population(c.generator, c.seed);
  EventLog events;
  std::vector<Impression> impressions;
  nlohmann::json days = nlohmann::json::array();
  for (int d = 0; d < c.test_days.end; ++d) {
    DayLog log = simulate_day(population, d, c.generator, c.seed);
    days.push_back({{"day", d}, {"events", log.events.size()}, {"impressions", log.impressions.size()}});
    events.insert(events.end(), log.events.begin(), log.events.end());
    impressions.insert(impressions.end(), log.impressions.begin(), log.impressions.end());
  }
  write_population(out / "population.csv", population);
  write_events(out / "events.csv", events);
  write_impressions(out / "impressions.csv", impressions);
  write_json(out / "config.json", c);
  const nlohmann::json summary = {{"users", population.size()}, {"days", days}};
  write_json(out / "generate_summary.json", summary);
  std::cout << nlohmann::json({{"status", "ok"}, {"users", population.size()},
                               {"events", events.size()}, {"impressions", impressions.size()}})
                   .dump()
            << '\n';
}

void cmd_features(const Options& o) {
  const ExperimentConfig c = load_config(o);
  const fs::path out(o.out);
  prepare_out(out);
  const ExperimentData data = load_data(c, o);
  nlohmann::json files = nlohmann::json::array();
  for (const auto& [day, rows] : data.rows) {
    const std::string name = "rows_day" + std::to_string(day) + ".csv";
    write_rows(out / name, rows);
    files.push_back({{"day", day}, {"file", name}, {"rows", rows.size()}});
  }
  write_json(out / "features_manifest.json", files);
  std::cout << nlohmann::json({{"status", "ok"}, {"files", files.size()}}).dump() << '\n';
}

void cmd_train(const Options& o) {
  const ExperimentConfig c = load_config(o);
  const fs::path out(o.out);
  prepare_out(out);
  const Variant v = parse_variant(o.variant);
  const ExperimentData data = load_data(c, o);
  const Checkpoint ck = bootstrap_checkpoint(c, data, v);
  write_checkpoint(ck, out / "checkpoint.bin");
  write_json(out / "config.json", c);
  std::cout << nlohmann::json({{"status", "ok"},
                               {"variant", o.variant},
                               {"checkpoint", (out / "checkpoint.bin").string()},
                               {"id", ck.id()},
                               {"parameters", ck.params.parameter_count()}})
                   .dump()
            << '\n';
}

void cmd_evaluate(const Options& o) {
  if (o.checkpoint.empty()) throw ConfigError("evaluate requires --checkpoint");
  const ExperimentConfig c = load_config(o);
  const fs::path out(o.out);
  prepare_out(out);
  const Checkpoint ck = read_checkpoint(o.checkpoint);
  const ExperimentData data = load_data(c, o);
  const bool restricted = ck.config.field_count == kTargetFeatureCount;
  std::vector<DayMetrics> per_day;
  for (int d = c.test_days.begin; d < c.test_days.end; ++d) {
    const SampleSet& full = data.rows.at(d);
    if (full.empty()) continue;
    const SampleSet rows = restricted ? restrict_to_target(full) : full;
    const auto scores = predict_click(ck, rows);
    per_day.push_back({d, sliced_report(rows.scenario, rows.label_click, scores)});
  }
  VariantResult r;
  r.variant = Variant::kTrinity;
  r.per_day = per_day;
  r.slices = average_slices(per_day);
  nlohmann::json j = nlohmann::json(ReportTable{c.seed, {r}}).at("variants").at(0);
  j.erase("name");
  j.erase("decisions");
  j["checkpoint_id"] = ck.id();
  write_json(out / "metrics.json", j);
  std::cout << j.at("slices").dump() << '\n';
}

void cmd_daily_loop(const Options& o) {
  ExperimentConfig c = load_config(o);
  c.save_checkpoints = true;
  const fs::path out(o.out);
  prepare_out(out);
  const Variant v = parse_variant(o.variant);
  const ExperimentData data = load_data(c, o);
  const VariantResult r = run_variant(c, data, v);
  const ReportTable table{c.seed, {r}};
  write_text_file(out / "decisions.ndjson", to_ndjson(r.decisions));
  emit_report(table, out);
  if (!r.ok) throw Error(r.error);
  std::cout << format_text_table(table);
}

std::vector<Slice> parse_slices(const std::string& s) {
  std::vector<Slice> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = std::min(s.find(',', start), s.size());
    if (comma > start) out.push_back(parse_slice(s.substr(start, comma - start)));
    start = comma + 1;
  }
  if (out.empty()) throw ConfigError("no slices given");
  return out;
}

void cmd_ablate(const Options& o) {
  const ExperimentConfig c = load_config(o);
  const fs::path out(o.out);
  prepare_out(out);
  const ExperimentData data = load_data(c, o);
  const ReportTable table = run_experiment(c, data);
  emit_report(table, out);
  write_json(out / "config.json", c);
  std::cout << format_text_table(table, parse_slices(o.slices));
}

void cmd_report(const Options& o) {
  if (o.input.empty()) throw ConfigError("report requires --input <report.json>");
  const ReportTable table = read_json_file(o.input).get<ReportTable>();
  const fs::path out(o.out);
  emit_report(table, out, static_cast<int>(ReportFormat::kText) | static_cast<int>(ReportFormat::kDaily));
  std::cout << format_text_table(table, parse_slices(o.slices));
}

int exit_code_for(const Error& e) {
  const std::string_view kind = e.kind();
  if (kind == "config") return kConfig;
  if (kind == "io") return kIo;
  if (kind == "numeric") return kNumeric;
  if (kind == "contract") return kContract;
  if (kind == "metric-undefined") return kMetric;
  return kInternal;
}

void emit_error(const std::string& command, std::string_view kind, const std::string& message,
                const nlohmann::json& extra = nlohmann::json::object()) {
  nlohmann::json j = {{"status", "error"}, {"command", command}, {"kind", kind}, {"message", message}};
  j.update(extra);
  std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-scenario cold-start recommendation experiments"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Experiment config (JSON)");
    sub->add_option("--seed", o.seed, "Override the config seed");
    sub->add_option("--out", o.out, "Output directory")->capture_default_str();
  };
  auto add_data = [&](CLI::App* sub) {
    sub->add_option("--data", o.data, "Directory written by `generate` (default: regenerate)");
  };
  auto add_variant = [&](CLI::App* sub) {
    sub->add_option("--variant", o.variant, "trinity | trinity_small | trinity_wo_check | "
                                            "trinity_w_ple | ple_baseline")
        ->capture_default_str();
  };

  struct Command {
    CLI::App* app;
    void (*run)(const Options&);
  };
  std::vector<Command> commands;

  auto* gen = app.add_subcommand("generate", "Write population, events and impressions");
  add_common(gen);
  commands.push_back({gen, cmd_generate});

  auto* feat = app.add_subcommand("features", "Snapshot feature rows per train/test day");
  add_common(feat);
  add_data(feat);
  commands.push_back({feat, cmd_features});

  auto* tr = app.add_subcommand("train", "Fit the bootstrap checkpoint of a variant");
  add_common(tr);
  add_data(tr);
  add_variant(tr);
  commands.push_back({tr, cmd_train});

  auto* ev = app.add_subcommand("evaluate", "Score a checkpoint on the test days");
  add_common(ev);
  add_data(ev);
  ev->add_option("--checkpoint", o.checkpoint, "Checkpoint file")->required();
  commands.push_back({ev, cmd_evaluate});

  auto* loop = app.add_subcommand("daily-loop", "Run the gated daily update loop for one variant");
  add_common(loop);
  add_data(loop);
  add_variant(loop);
  commands.push_back({loop, cmd_daily_loop});

  auto* abl = app.add_subcommand("ablate", "Run every configured variant and write the report");
  add_common(abl);
  add_data(abl);
  abl->add_option("--slices", o.slices, "Slices shown in the text table")->capture_default_str();
  commands.push_back({abl, cmd_ablate});

  auto* rep = app.add_subcommand("report", "Render text and per-day CSV from report.json");
  add_common(rep);
  rep->add_option("--input", o.input, "report.json from `ablate` or `daily-loop`")->required();
  rep->add_option("--slices", o.slices, "Slices shown in the text table")->capture_default_str();
  commands.push_back({rep, cmd_report});

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("", "usage", e.what());
    return kUsage;
  }

  for (const Command& c : commands) {
    if (!c.app->parsed()) continue;
    const std::string name = c.app->get_name();
    try {
      c.run(o);
      return kOk;
    } catch (const NumericError& e) {
      emit_error(name, e.kind(), e.what(), {{"layer", e.layer()}});
      return kNumeric;
    } catch (const MetricUndefinedError& e) {
      emit_error(name, e.kind(), e.what(),
                 {{"positives", e.positives()}, {"negatives", e.negatives()}});
      return kMetric;
    } catch (const Error& e) {
      emit_error(name, e.kind(), e.what());
      return exit_code_for(e);
    } catch (const nlohmann::json::exception& e) {
      emit_error(name, "config", e.what());
      return kConfig;
    } catch (const std::exception& e) {
      emit_error(name, "internal", e.what());
      return kInternal;
    }
  }
  return kUsage;
}
