#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support/gradcheck.hpp"
#include "support/updater_traces.hpp"
#include "trinity/updater.hpp"

namespace trinity {
namespace {

TEST(Decide, EqualAucRejected) {
  const Decision d = decide({0.70, 1.00}, {0.70, 1.00}, 0.05);
  EXPECT_FALSE(d.accepted);
  EXPECT_EQ(d.reason, kReasonAucNotImproved);
}

TEST(Decide, CalibrationRepairAccepted) {
  EXPECT_TRUE(decide(0.584, 0.12, 0.726, 0.95, 0.05));
}

TEST(Decide, CopcDeviationBeyondDeltaRejected) {
  const Decision d = decide({0.70, 1.00}, {0.72, 1.08}, 0.05);
  EXPECT_FALSE(d.accepted);
  EXPECT_EQ(d.reason, kReasonCopcDeviation);
}

TEST(Decide, UndefinedMetricRejected) {
  EXPECT_EQ(decide({0.7, 1.0}, {std::nullopt, 1.0}, 0.05).reason, kReasonMetricUndefined);
  EXPECT_EQ(decide({std::nullopt, 1.0}, {0.8, 1.0}, 0.05).reason, kReasonMetricUndefined);
}

// The predicate itself, swept over random inputs.
TEST(Decide, MatchesPredicateOnRandomInputs) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> auc(0.4, 0.9), copc(0.0, 2.0), delta(0.0, 0.2);
  for (int i = 0; i < 10000; ++i) {
    const double ao = auc(rng), co = copc(rng), an = auc(rng), cn = copc(rng), d = delta(rng);
    const bool expected = an > ao && std::abs(1.0 - cn) <= std::abs(1.0 - co) + d;
    EXPECT_EQ(decide(ao, co, an, cn, d), expected);
  }
}

TEST(UpdaterConfig, NegativeDeltaIsConfigError) {
  UpdaterConfig c;
  c.delta = -0.1;
  EXPECT_THROW(validate(c), ConfigError);
}

TEST(UpdaterConfig, JsonRoundTrip) {
  UpdaterConfig c;
  c.delta = 0.125;
  c.eval_mode = EvalMode::kNextDayHoldout;
  c.gating_slice = Slice::kCopilot;
  c.policy = UpdatePolicy::kAlwaysAccept;
  EXPECT_EQ(nlohmann::json(c).get<UpdaterConfig>(), c);
  EXPECT_THROW((nlohmann::json{{"eval_mode", "weekly"}}.get<UpdaterConfig>()), ConfigError);
}

TEST(DailyLoop, ReferenceTraces) {
  const auto cases = testing::reference_traces();
  ASSERT_EQ(cases.size(), 10u);
  for (const auto& tc : cases) {
    const auto r = testing::run_trace(tc);
    EXPECT_EQ(r.trace, tc.expected_trace) << tc.title;
    EXPECT_EQ(r.final_name, tc.expected_final) << tc.title;
    EXPECT_EQ(r.reasons, tc.expected_reasons) << tc.title;
  }
}

TEST(DailyLoop, RecordsSatisfyInvariants) {
  for (const auto& tc : testing::reference_traces()) {
    std::string serving = "m0";
    for (const DecisionRecord& rec : testing::run_trace(tc).records) {
      EXPECT_EQ(rec.incumbent_id, serving);
      if (rec.accepted) {
        EXPECT_GT(*rec.auc_new, *rec.auc_old);
        EXPECT_LE(std::abs(1.0 - *rec.copc_new), std::abs(1.0 - *rec.copc_old) + tc.delta);
        EXPECT_EQ(rec.resulting_id, rec.candidate_id);
      } else {
        EXPECT_EQ(rec.resulting_id, rec.incumbent_id);
      }
      serving = rec.resulting_id;
    }
  }
}

TEST(DailyLoop, AlwaysAcceptPolicyPromotesEveryCandidate) {
  testing::TraceCase tc = testing::reference_traces()[4];
  UpdaterConfig config;
  config.policy = UpdatePolicy::kAlwaysAccept;
  std::vector<int> days = {1, 2, 3, 4, 5};
  DailyLoopHooks<testing::StubModel> hooks;
  hooks.id = [](const testing::StubModel& m) { return m.name; };
  hooks.evaluate = [](const testing::StubModel& m, int) { return m.metrics; };
  hooks.train = [&](const testing::StubModel&, int day) {
    return testing::StubModel{"d" + std::to_string(day), *tc.days[day - 1]};
  };
  const auto r = run_daily_loop<testing::StubModel>(days, {"m0", tc.initial}, config, hooks);
  EXPECT_EQ(r.final_model.name, "d5");
  for (const auto& rec : r.records) EXPECT_EQ(rec.reason, kReasonAlwaysAccept);
}

TEST(DailyLoop, HooksSeeServingModelInOrder) {
  const testing::TraceCase tc = testing::reference_traces()[3];
  UpdaterConfig config;
  std::vector<int> days = {1, 2, 3};
  std::vector<std::string> before, after;
  DailyLoopHooks<testing::StubModel> hooks;
  hooks.id = [](const testing::StubModel& m) { return m.name; };
  hooks.evaluate = [](const testing::StubModel& m, int) { return m.metrics; };
  hooks.train = [&](const testing::StubModel&, int day) {
    return testing::StubModel{"d" + std::to_string(day), *tc.days[day - 1]};
  };
  hooks.before_day = [&](int, const testing::StubModel& m) { before.push_back(m.name); };
  hooks.after_day = [&](const testing::StubModel& m, const DecisionRecord&) { after.push_back(m.name); };
  run_daily_loop<testing::StubModel>(days, {"m0", tc.initial}, config, hooks);
  EXPECT_EQ(before, (std::vector<std::string>{"m0", "m0", "d2"}));
  EXPECT_EQ(after, (std::vector<std::string>{"m0", "d2", "d2"}));
}

// A real checkpoint with a zero-epoch candidate: identical scores, so the
// strict AUC test rejects and the incumbent survives bit-identically.
TEST(DailyLoop, ZeroEpochCandidateIsRejected) {
  const SampleSet rows = testing::random_rows(400, 6, 42);
  Checkpoint m0 = init_model(testing::tiny_model_config(), 1);
  fit_transforms(m0, rows);
  const Checkpoint before = m0;
  DailyLoopHooks<Checkpoint> hooks;
  hooks.id = [](const Checkpoint& c) { return c.id(); };
  hooks.evaluate = [&](const Checkpoint& c, int) {
    const auto p = predict_click(c, rows);
    return gate_metrics(sliced_report(rows.scenario, rows.label_click, p), Slice::kGlobal);
  };
  hooks.train = [&](const Checkpoint& inc, int day) {
    TrainOptions o;
    o.epochs = 0;
    o.created_day = day;
    return train(rows, inc, o);
  };
  std::vector<int> days = {0};
  const auto r = run_daily_loop<Checkpoint>(days, m0, UpdaterConfig{}, hooks);
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_FALSE(r.records[0].accepted);
  EXPECT_EQ(r.records[0].reason, kReasonAucNotImproved);
  EXPECT_EQ(r.final_model, before);
}

TEST(DecisionLog, NdjsonRoundTrip) {
  const auto records = testing::run_trace(testing::reference_traces()[6]).records;
  const std::string text = to_ndjson(records);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), static_cast<long>(records.size()));
  EXPECT_EQ(parse_ndjson(text), records);
  EXPECT_THROW(parse_ndjson("{not json}\n"), IoError);
}

}  // namespace
}  // namespace trinity
