#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "capgym/eval/runner.hpp"

using namespace capgym;
namespace fs = std::filesystem;

namespace {

const Environment& env() {
  static const Environment e = Environment::make(EnvConfig{});
  return e;
}

InstanceLog fake_log(std::size_t index, ChallengeType t, bool solved, int steps, double wall = 1.0) {
  InstanceLog l;
  l.index = index;
  l.type = t;
  l.seed = 1000 + index;
  l.solved = solved;
  l.status = solved ? "solved" : "failed";
  l.steps = steps;
  l.budget = 5;
  l.wall_ms = wall;
  return l;
}

fs::path scratch(const std::string& name) {
  return fs::temp_directory_path() / ("capgym-eval-" + name + "-" + std::to_string(::getpid()));
}

}  // namespace

TEST(Testset, SeedsFollowTheBase) {
  const auto ts = build_testset(kTestSeedBase, 3);
  ASSERT_EQ(ts.size(), 21u);
  EXPECT_EQ(ts[0], (TestCase{ChallengeType::Text, 1'000'000'000}));
  EXPECT_EQ(ts[2].seed, 1'000'000'002u);
  EXPECT_EQ(ts[3], (TestCase{kAllChallengeTypes[1], 1'000'000'000}));
  EXPECT_EQ(build_testset(5, 2, {ChallengeType::Slider}), (std::vector<TestCase>{{ChallengeType::Slider, 5}, {ChallengeType::Slider, 6}}));
  EXPECT_THROW(build_testset(0, 0), ConfigError);
  EXPECT_GT(kTestSeedBase, kTrainSeedLimit);
}

TEST(Eval, OracleSolvesEverything) {
  const auto ts = build_testset(kTestSeedBase, 4);
  const auto run = run_eval(env(), oracle_agent_factory(), ts, {1, kTestSeedBase, 4});
  EXPECT_DOUBLE_EQ(run.report.overall.sr, 100.0);
  for (const auto& [t, s] : run.report.per_type) {
    EXPECT_DOUBLE_EQ(s.avg_steps, t == ChallengeType::ImageGrid ? 2.0 : 1.0) << to_string(t);
  }
  EXPECT_EQ(run.report.manifest.agent_id, "oracle");
  EXPECT_EQ(run.report.manifest.budgets, (std::vector<int>{5, 5, 5, 5, 8, 5, 8}));
  for (std::size_t i = 0; i < run.logs.size(); ++i) EXPECT_EQ(run.logs[i].index, i);
}

TEST(Eval, EmptyClickReplayNeverSolves) {
  const auto factory = replay_agent_factory({ActionBatch{{LeftClick{{0, 0}}}}});
  const auto ts = build_testset(kTestSeedBase, 2);
  const auto run = run_eval(env(), factory, ts, {1, kTestSeedBase, 2});
  EXPECT_DOUBLE_EQ(run.report.overall.sr, 0.0);
  for (const auto& l : run.logs) {
    EXPECT_EQ(l.steps, l.budget) << to_string(l.type);
    EXPECT_EQ(l.status, "failed");
    EXPECT_EQ(l.batches.size(), static_cast<std::size_t>(l.budget));
  }
}

TEST(Eval, BudgetNeverExceeded) {
  const auto ts = build_testset(kTestSeedBase, 3);
  const auto run = run_eval(env(), random_agent_factory(), ts, {2, kTestSeedBase, 3});
  for (const auto& l : run.logs) {
    EXPECT_LE(l.steps, l.budget);
    EXPECT_EQ(l.batches.size(), static_cast<std::size_t>(l.steps));
    EXPECT_NE(l.status, "in_progress");
  }
}

TEST(Eval, WorkerCountDoesNotChangeOutcomes) {
  const auto ts = build_testset(kTestSeedBase + 50, 2);
  auto a = run_eval(env(), random_agent_factory(), ts, {1, 0, 2});
  auto b = run_eval(env(), random_agent_factory(), ts, {3, 0, 2});
  for (std::size_t i = 0; i < ts.size(); ++i) {
    EXPECT_EQ(a.logs[i].batches, b.logs[i].batches);
    EXPECT_EQ(a.logs[i].solved, b.logs[i].solved);
  }
}

TEST(Eval, AgentFailureIsTagged) {
  ChatOptions opts;
  opts.url = "http://127.0.0.1:1";
  opts.max_retries = 0;
  opts.timeout_s = 1;
  const auto run = run_eval(env(), remote_agent_factory(opts), build_testset(kTestSeedBase, 1, {ChallengeType::Text}));
  const auto& l = run.logs.at(0);
  EXPECT_FALSE(l.solved);
  EXPECT_EQ(l.status, "failed");
  EXPECT_EQ(l.error.rfind("agent_error: ", 0), 0u);
  EXPECT_EQ(run.report.overall.errors, 1u);
}

TEST(Eval, AgentSpecs) {
  EXPECT_EQ(make_agent_factory("oracle").id, "oracle");
  EXPECT_TRUE(make_agent_factory("oracle").privileged);
  EXPECT_FALSE(make_agent_factory("random").privileged);
  EXPECT_EQ(make_agent_factory("remote:http://h:9").id, "remote:http://h:9");
  EXPECT_THROW(make_agent_factory("human"), ConfigError);
  EXPECT_THROW(make_agent_factory("replay:/does/not/exist.json"), ConfigError);

  const auto path = scratch("replay.json");
  std::ofstream(path) << R"({"batches": [{"actions": [{"action": "terminate"}]}]})";
  const auto f = make_agent_factory("replay:" + path.string());
  EXPECT_FALSE(f.privileged);
  fs::remove(path);
}

TEST(Report, SummaryArithmetic) {
  const std::vector<InstanceLog> logs = {fake_log(0, ChallengeType::Text, true, 1, 4.0),
                                         fake_log(1, ChallengeType::Text, true, 3, 2.0),
                                         fake_log(2, ChallengeType::Text, false, 5, 9.0),
                                         fake_log(3, ChallengeType::Slider, false, 5, 1.0)};
  const auto r = aggregate(logs, {});
  const auto* text = r.find(ChallengeType::Text);
  ASSERT_NE(text, nullptr);
  EXPECT_EQ(text->n, 3u);
  EXPECT_NEAR(text->sr, 200.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(text->avg_steps, 2.0);
  EXPECT_DOUBLE_EQ(text->wall_ms_mean, 5.0);
  EXPECT_DOUBLE_EQ(text->wall_ms_p50, 4.0);
  EXPECT_DOUBLE_EQ(text->wall_ms_max, 9.0);
  EXPECT_DOUBLE_EQ(r.find(ChallengeType::Slider)->avg_steps, 0.0);
  EXPECT_EQ(r.find(ChallengeType::Paged), nullptr);
  EXPECT_DOUBLE_EQ(r.overall.sr, 50.0);
  EXPECT_THROW(aggregate({}, {}), Error);
}

TEST(Report, OrderIndependent) {
  std::vector<InstanceLog> logs;
  for (std::size_t i = 0; i < 20; ++i) logs.push_back(fake_log(i, kAllChallengeTypes[i % 7], i % 3 == 0, 1 + i % 4, i * 0.5));
  const auto a = aggregate(logs, {});
  std::reverse(logs.begin(), logs.end());
  EXPECT_EQ(aggregate(logs, {}), a);
}

TEST(Report, Formats) {
  std::vector<InstanceLog> logs;
  for (std::size_t i = 0; i < 7; ++i) logs.push_back(fake_log(i, kAllChallengeTypes[i], true, i == 6 ? 2 : 1));
  const auto r = aggregate(logs, {"oracle", kTestSeedBase, 1, {5, 5, 5, 5, 8, 5, 8}, "abc"});

  const auto text = render_report(r, ReportFormat::Text);
  EXPECT_NE(text.find("Overall"), std::string::npos);
  EXPECT_NE(text.find("100.00"), std::string::npos);
  EXPECT_NE(text.find("agent oracle"), std::string::npos);

  const auto md = render_report(r, ReportFormat::Markdown);
  EXPECT_EQ(md.rfind("| Metric | Text | Compact Text | Icon Match | Icon Selection | Paged | Slider | Image Grid | Overall |", 0), 0u);
  EXPECT_NE(md.find("| SR (%) | 100.00 |"), std::string::npos);
  EXPECT_NE(md.find("| Avg steps | 1.00 |"), std::string::npos);
  EXPECT_NE(md.find("2.00 | 1.14 |"), std::string::npos);

  const auto back = Json::parse(render_report(r, ReportFormat::Json)).get<EvalReport>();
  EXPECT_EQ(back, r);

  EXPECT_EQ(parse_report_format("md"), ReportFormat::Markdown);
  EXPECT_FALSE(parse_report_format("html"));
  EXPECT_THROW(render_report(EvalReport{}, ReportFormat::Text), Error);
}

TEST(Report, MissingTypesRenderAsDash) {
  const auto r = aggregate({fake_log(0, ChallengeType::Slider, true, 1)}, {});
  const auto md = render_report(r, ReportFormat::Markdown);
  EXPECT_NE(md.find("| SR (%) | - |"), std::string::npos);
}

TEST(Logs, RoundTripAndRecompute) {
  const auto ts = build_testset(kTestSeedBase, 2);
  const auto run = run_eval(env(), random_agent_factory(), ts, {1, kTestSeedBase, 2});
  const auto path = scratch("logs.jsonl");
  write_logs(run.logs, path);
  const auto back = read_logs(path);
  EXPECT_EQ(back, run.logs);
  EXPECT_EQ(aggregate(back, run.report.manifest), run.report);
  fs::remove(path);
  EXPECT_THROW(read_logs(path), Error);
}
