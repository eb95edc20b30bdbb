#include <gtest/gtest.h>
#include <httplib.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

#include "capgym/core/rng.hpp"
#include "capgym/trace/export.hpp"
#include "capgym/trace/loss.hpp"
#include "capgym/trace/pipeline.hpp"

using namespace capgym;
namespace fs = std::filesystem;

namespace {

const Environment& env() {
  static const Environment e = Environment::make(EnvConfig{});
  return e;
}

bool has_check(const std::vector<Violation>& v, char check) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.check == check; });
}

TraceRecord solution_record(ChallengeType t, std::uint64_t seed) {
  MockExpert expert;
  auto out = gen_solution_trace(env().generate(t, seed), env(), expert);
  EXPECT_TRUE(out.record) << (out.violations.empty() ? out.error : out.violations.front().message);
  return out.record.value_or(TraceRecord{});
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("capgym-trace-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Direct evaluation of the objective, token by token.
double brute_force_loss(const std::vector<SpanKind>& kinds, const std::vector<double>& logp, double lt, double la) {
  double think = 0, act = 0;
  for (std::size_t i = 0; i < kinds.size(); ++i) (kinds[i] == SpanKind::Think ? think : act) += logp[i];
  return -(lt * think + la * act) / static_cast<double>(kinds.size());
}

}  // namespace

TEST(Record, AssistantTurnSpansTileTheText) {
  const ActionBatch b{{LeftClick{{10, 20}}, Type{"AB"}}};
  const auto t = make_assistant_turn("I see two things.", b);
  ASSERT_EQ(t.spans.size(), 2u);
  EXPECT_EQ(t.spans[0].start, 0u);
  EXPECT_EQ(t.spans[0].end, t.spans[1].start);
  EXPECT_EQ(t.spans[1].end, t.text.size());
  EXPECT_EQ(act_batch(t), b);
  EXPECT_EQ(think_text(t), "I see two things.\n");

  const auto bare = make_assistant_turn("", b);
  ASSERT_EQ(bare.spans.size(), 1u);
  EXPECT_EQ(bare.spans[0].kind, SpanKind::Act);
}

TEST(Record, JsonRoundTripDropsPayloads) {
  auto r = solution_record(ChallengeType::Slider, 3);
  const auto back = Json(r).get<TraceRecord>();
  for (auto& im : r.images) im.png.clear();
  EXPECT_EQ(back, r);
  EXPECT_THROW(Json::parse(R"({"id":"x","kind":"other"})").get<TraceRecord>(), ParseError);
}

TEST(ToolCalls, ParseReasoningAndCalls) {
  const std::string text =
      "Thinking first.\n<tool_call>\n{\"name\": \"computer_use\", \"arguments\": {\"action\": \"left_click\", "
      "\"coordinate\": [5, 6]}}\n</tool_call>";
  const auto p = parse_tool_calls(text);
  EXPECT_EQ(p.reasoning, "Thinking first.");
  ASSERT_EQ(p.batch.actions.size(), 1u);
  EXPECT_EQ(std::get<LeftClick>(p.batch.actions[0]).coordinate, (Point{5, 6}));

  const auto stringified = parse_tool_calls(
      R"(<tool_call>{"name": "computer_use", "arguments": "{\"action\": \"terminate\"}"}</tool_call>)");
  EXPECT_TRUE(std::holds_alternative<Terminate>(stringified.batch.actions.at(0)));
  EXPECT_TRUE(parse_tool_calls("no calls here").batch.actions.empty());
  EXPECT_THROW(parse_tool_calls("<tool_call>{\"name\": \"computer_use\""), ParseError);
  EXPECT_THROW(parse_tool_calls(R"(<tool_call>{"name": "other", "arguments": {}}</tool_call>)"), ParseError);
}

TEST(Loss, EqualWeightsFourTokens) {
  using K = SpanKind;
  const auto w = compute_weights({K::Think, K::Think, K::Act, K::Act}, 0.5, 0.5);
  for (double x : w.weights) EXPECT_DOUBLE_EQ(x, 0.125);
  EXPECT_EQ(w.n_think, 2u);
  EXPECT_EQ(w.n_act, 2u);
}

TEST(Loss, ActOnly) {
  const auto w = compute_weights({SpanKind::Think, SpanKind::Act}, 0.0, 1.0);
  EXPECT_EQ(w.weights, (std::vector<double>{0.0, 0.5}));
  EXPECT_DOUBLE_EQ(reference_loss({-3.0, -2.0}, w), 1.0);
}

TEST(Loss, TwelveTokens) {
  std::vector<SpanKind> kinds(8, SpanKind::Think);
  kinds.insert(kinds.end(), 4, SpanKind::Act);
  const auto w = compute_weights(kinds, 0.5, 0.5);
  EXPECT_DOUBLE_EQ(reference_loss(std::vector<double>(12, -1.0), w), 0.5);
  const auto skewed = compute_weights(kinds, 0.2, 0.8);
  EXPECT_NEAR(reference_loss(std::vector<double>(12, -1.0), skewed), (0.2 * 8 + 0.8 * 4) / 12.0, 1e-15);
}

TEST(Loss, MatchesBruteForce) {
  Rng rng(77, "test/loss");
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(1, 200));
    std::vector<SpanKind> kinds(n);
    std::vector<double> logp(n);
    for (std::size_t i = 0; i < n; ++i) {
      kinds[i] = rng.uniform01() < 0.6 ? SpanKind::Think : SpanKind::Act;
      logp[i] = -rng.uniform(0.0, 12.0);
    }
    const double lt = rng.uniform01(), la = rng.uniform01();
    EXPECT_NEAR(reference_loss(logp, compute_weights(kinds, lt, la)), brute_force_loss(kinds, logp, lt, la), 1e-12);
  }
}

TEST(Loss, Errors) {
  EXPECT_THROW(compute_weights({}, 0.5, 0.5), Error);
  EXPECT_THROW(compute_weights({SpanKind::Act}, -1, 0.5), Error);
  EXPECT_THROW(reference_loss({-1.0}, compute_weights({SpanKind::Act, SpanKind::Act}, 0.5, 0.5)), Error);
}

TEST(Loss, TokenKindsFollowSpans) {
  const auto t = make_assistant_turn("abc", {{Terminate{}}});
  const auto kinds = token_kinds(t, {{0, 2}, {2, 4}, {4, 10}});
  EXPECT_EQ(kinds, (std::vector<SpanKind>{SpanKind::Think, SpanKind::Think, SpanKind::Act}));
  EXPECT_THROW(token_kinds(t, {{t.text.size(), t.text.size() + 1}}), Error);
}

TEST(Validate, SolutionTracesPassForEveryType) {
  for (auto t : kAllChallengeTypes) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const auto r = solution_record(t, seed);
      EXPECT_TRUE(validate_trace(r, env()).empty()) << to_string(t) << " " << seed;
      EXPECT_EQ(r.kind, TraceKind::Solution);
      EXPECT_EQ(r.provenance.expert_model, "mock-expert-v1");
    }
  }
}

TEST(Validate, ForbiddenPhraseIsCheckA) {
  auto r = solution_record(ChallengeType::Text, 1);
  auto& turn = r.turns.back();
  const auto batch = act_batch(turn);
  turn = make_assistant_turn("Per the ground truth, I type it.", batch);
  const auto v = validate_trace(r, env());
  EXPECT_TRUE(has_check(v, 'a'));
}

TEST(Validate, ClickOutsideTargetIsCheckB) {
  const auto inst = env().generate(ChallengeType::IconSelection, 6);
  auto r = solution_record(ChallengeType::IconSelection, 6);
  const auto* target = inst.truth.find(Role::Icon);
  ASSERT_NE(target, nullptr);
  auto& turn = r.turns.back();
  const auto think = think_text(turn);
  const Point off{target->rect.right() + 3, target->rect.center().y};
  turn = make_assistant_turn(think.substr(0, think.size() - 1), {{LeftClick{off}}});
  const auto v = validate_trace(r, env());
  EXPECT_TRUE(has_check(v, 'b'));
  EXPECT_FALSE(has_check(v, 'a'));
}

TEST(Validate, BrokenSpansAreCheckC) {
  auto r = solution_record(ChallengeType::Slider, 2);
  r.turns.back().spans.back().end -= 1;
  EXPECT_TRUE(has_check(validate_trace(r, env()), 'c'));
}

TEST(Validate, ConfigMismatch) {
  auto r = solution_record(ChallengeType::Text, 2);
  r.instance.config_hash = "0000";
  const auto v = validate_trace(r, env());
  ASSERT_FALSE(v.empty());
  EXPECT_EQ(v.front().code, "config_mismatch");
}

TEST(Pipeline, InjectedLeakPhraseRejectsRecord) {
  MockExpert expert({"the annotated image shows the answer", 1});
  const auto out = gen_solution_trace(env().generate(ChallengeType::IconMatch, 4), env(), expert);
  EXPECT_FALSE(out.record);
  EXPECT_TRUE(has_check(out.violations, 'a'));
}

TEST(Pipeline, TextSolutionActsAreTheOracleScript) {
  const auto inst = env().generate(ChallengeType::Text, 12);
  const auto r = solution_record(ChallengeType::Text, 12);
  std::vector<ActionBatch> acts;
  int users = 0;
  for (const auto& t : r.turns) {
    if (t.role == "assistant") acts.push_back(act_batch(t));
    if (t.role == "user") ++users;
  }
  EXPECT_EQ(acts, inst.truth.oracle_script);
  EXPECT_EQ(users, static_cast<int>(acts.size()));
  EXPECT_EQ(r.turns.front().text, kInitialUserPrompt);
  EXPECT_NE(think_text(r.turns.back()).find(inst.truth.answer_label), std::string::npos);
}

TEST(Pipeline, ImageGridSolutionHasTwoTurns) {
  const auto r = solution_record(ChallengeType::ImageGrid, 3);
  ASSERT_EQ(r.turns.size(), 4u);
  EXPECT_EQ(r.turns[2].text, kFollowUpUserPrompt);
  EXPECT_EQ(r.images.size(), 2u);
}

TEST(Pipeline, OracleStudentYieldsNoCorrection) {
  MockExpert expert;
  for (auto t : kAllChallengeTypes) {
    const auto out = gen_correction_trace(env().generate(t, 1), env(), oracle_agent_factory(), expert);
    EXPECT_FALSE(out.record);
    EXPECT_FALSE(out.student_failed);
    EXPECT_TRUE(out.error.empty()) << out.error;
  }
  EXPECT_EQ(expert.calls(), 0);
}

TEST(Pipeline, WrongTypistGetsCorrected) {
  struct Recording : MockExpert {
    std::vector<ExpertRequest> seen;
    std::string reason(const ExpertRequest& req) override {
      seen.push_back(req);
      return MockExpert::reason(req);
    }
  } expert;
  const auto inst = env().generate(ChallengeType::Text, 9);
  const auto out = gen_correction_trace(inst, env(), flawed_oracle_factory("QQQQQQ"), expert);
  ASSERT_TRUE(out.record) << out.error;
  const auto& r = *out.record;
  EXPECT_EQ(r.kind, TraceKind::Correction);
  ASSERT_GE(r.turns.size(), 4u);
  EXPECT_FALSE(r.turns[1].train);
  EXPECT_NE(r.turns[1].text.find("QQQQQQ"), std::string::npos);
  // The expert sees before, after and the annotated solution; the record
  // keeps only the screenshot after the failure.
  ASSERT_FALSE(expert.seen.empty());
  EXPECT_TRUE(expert.seen.front().context.correction);
  EXPECT_EQ(expert.seen.front().images.size(), 3u);
  EXPECT_EQ(r.turns[2].images.size(), 1u);
  const auto& fix = r.turns[3];
  EXPECT_TRUE(fix.train);
  EXPECT_NE(think_text(fix).find("QQQQQQ"), std::string::npos);
  bool retyped = false;
  for (const auto& a : act_batch(fix).actions) {
    if (const auto* ty = std::get_if<Type>(&a)) retyped = retyped || ty->text == inst.truth.answer_label;
  }
  EXPECT_TRUE(retyped);
}

TEST(Pipeline, CorrectionRecordsOnlyForFailures) {
  MockExpert expert;
  std::vector<PipelineJob> jobs;
  for (auto t : kAllChallengeTypes) {
    for (std::uint64_t s = 0; s < 7; ++s) jobs.push_back({t, 500 + s});
  }
  PipelineOptions opts;
  opts.workers = 2;
  const auto run = run_correction_pipeline(env(), jobs, random_agent_factory(), expert, opts);
  EXPECT_EQ(run.count_errors(), 0u);
  EXPECT_EQ(run.count_rejected(), 0u);
  EXPECT_EQ(run.count_records(), run.count_student_failures());
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    EXPECT_EQ(run.outcomes[i].record.has_value(), run.outcomes[i].student_failed) << i;
  }
}

TEST(Pipeline, RequeueOnExpertFailure) {
  struct Flaky : ExpertClient {
    std::atomic<int> n{0};
    std::string model_id() const override { return "flaky"; }
    std::string reason(const ExpertRequest& req) override {
      if (n.fetch_add(1) == 0) throw PipelineError("boom");
      return MockExpert().reason(req);
    }
  } flaky;
  PipelineOptions opts;
  opts.workers = 1;
  const auto run = run_solution_pipeline(env(), {{ChallengeType::Text, 1}}, flaky, opts);
  ASSERT_TRUE(run.outcomes[0].record);
  EXPECT_EQ(run.outcomes[0].attempts, 2);

  struct Dead : ExpertClient {
    std::string model_id() const override { return "dead"; }
    std::string reason(const ExpertRequest&) override { throw PipelineError("down"); }
  } dead;
  const auto failed = run_solution_pipeline(env(), {{ChallengeType::Text, 1}}, dead, opts);
  EXPECT_FALSE(failed.outcomes[0].record);
  EXPECT_NE(failed.outcomes[0].error.find("down"), std::string::npos);
}

TEST(Pipeline, BoundedExpertCapsConcurrency) {
  struct Counting : ExpertClient {
    std::atomic<int> live{0}, peak{0};
    std::string model_id() const override { return "counting"; }
    std::string reason(const ExpertRequest& req) override {
      const int now = ++live;
      int p = peak.load();
      while (now > p && !peak.compare_exchange_weak(p, now)) {
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
      --live;
      return MockExpert().reason(req);
    }
  } inner;
  BoundedExpert bounded(inner, 2);
  parallel_for(24, 6, [&](std::size_t) { bounded.reason({}); });
  EXPECT_LE(inner.peak.load(), 2);
}

TEST(Export, WritesOneLinePerRecordAndIsStable) {
  MockExpert expert;
  std::vector<PipelineJob> jobs;
  for (std::uint64_t s = 0; s < 10; ++s) jobs.push_back({kAllChallengeTypes[s % kAllChallengeTypes.size()], s});
  PipelineOptions opts;
  opts.workers = 1;
  const auto records = run_solution_pipeline(env(), jobs, expert, opts).records();
  ASSERT_EQ(records.size(), 10u);

  const auto a = scratch("a"), b = scratch("b");
  const auto manifest = export_dataset(records, a);
  export_dataset(records, b);
  EXPECT_EQ(manifest.records, 10u);
  EXPECT_EQ(slurp(a / kRecordsFile), slurp(b / kRecordsFile));
  EXPECT_EQ(slurp(a / kManifestFile), slurp(b / kManifestFile));
  const auto lines = slurp(a / kRecordsFile);
  EXPECT_EQ(std::count(lines.begin(), lines.end(), '\n'), 10);

  auto loaded = load_dataset(a);
  EXPECT_EQ(loaded.manifest, manifest);
  ASSERT_EQ(loaded.records.size(), 10u);
  load_images(loaded.records[0], a);
  EXPECT_EQ(loaded.records[0].images, records[0].images);

  // Re-export from disk into a new root.
  const auto c = scratch("c");
  export_dataset(loaded.records, c, a);
  EXPECT_EQ(slurp(c / kRecordsFile), lines);

  fs::remove(a / records[3].images[0].path);
  try {
    export_dataset(load_dataset(a).records, scratch("d"), a);
    FAIL() << "expected a missing-image error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find(records[3].id), std::string::npos);
  }
  for (const auto& p : {a, b, c, scratch("d")}) fs::remove_all(p);
}

TEST(ChatClient, RetriesThenSucceeds) {
  httplib::Server srv;
  std::atomic<int> hits{0};
  std::string seen_body;
  srv.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    const int n = hits++;
    if (n == 0) {
      res.status = 429;
      return;
    }
    if (n == 1) {
      res.status = 503;
      return;
    }
    seen_body = req.body;
    res.set_content(R"({"choices":[{"message":{"content":"  \"I see a star.\"  "}}]})", "application/json");
  });
  const int port = srv.bind_to_any_port("127.0.0.1");
  std::thread th([&] { srv.listen_after_bind(); });
  srv.wait_until_ready();

  ChatOptions opts;
  opts.url = "http://127.0.0.1:" + std::to_string(port);
  opts.model = "m";
  ChatClient client(opts);
  std::vector<long> sleeps;
  client.sleep = [&](std::chrono::milliseconds d) { sleeps.push_back(static_cast<long>(d.count())); };
  const auto text = client.complete({{"user", {ChatPart::of_text("hi"), ChatPart::of_image({1, 2, 3})}}});
  EXPECT_EQ(text, "  \"I see a star.\"  ");
  EXPECT_EQ(client.last_attempts(), 3);
  EXPECT_EQ(sleeps, (std::vector<long>{500, 1000}));
  const auto body = Json::parse(seen_body);
  EXPECT_EQ(body["model"], "m");
  EXPECT_EQ(body["messages"][0]["content"][1]["image_url"]["url"].get<std::string>().rfind("data:image/png;base64,", 0), 0u);

  // The HTTP expert trims quotes and whitespace.
  hits = 2;
  HttpExpert expert(opts);
  EXPECT_EQ(expert.reason({"prompt", {}, {}}), "I see a star.");

  srv.stop();
  th.join();
}

TEST(ChatClient, ClientErrorIsNotRetried) {
  httplib::Server srv;
  std::atomic<int> hits{0};
  srv.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 401;
  });
  const int port = srv.bind_to_any_port("127.0.0.1");
  std::thread th([&] { srv.listen_after_bind(); });
  srv.wait_until_ready();
  ChatOptions opts;
  opts.url = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  ChatClient client(opts);
  client.sleep = [](std::chrono::milliseconds) {};
  EXPECT_THROW(client.complete({{"user", {ChatPart::of_text("hi")}}}), PipelineError);
  EXPECT_EQ(hits.load(), 1);
  srv.stop();
  th.join();
}

TEST(ChatClient, EndpointParsing) {
  EXPECT_EQ(parse_endpoint("http://h:1").path, "/v1/chat/completions");
  EXPECT_EQ(parse_endpoint("http://h:1/custom").path, "/custom");
  EXPECT_EQ(parse_endpoint("http://h:1/custom").scheme_host_port, "http://h:1");
  EXPECT_THROW(parse_endpoint("h:1"), ConfigError);
  EXPECT_THROW(make_expert("http://h:1", [] { ChatOptions o; o.model = ""; return o; }()), ConfigError);
  EXPECT_THROW(make_student_factory("genius"), ConfigError);
}
