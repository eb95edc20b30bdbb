// End-to-end acceptance checks. Prints one line per criterion and exits
// non-zero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "../support/service_fixture.hpp"
#include "capgym/core/rng.hpp"
#include "capgym/eval/runner.hpp"
#include "capgym/trace/loss.hpp"
#include "capgym/trace/pipeline.hpp"

using namespace capgym;

namespace {

using Steady = std::chrono::steady_clock;

double seconds_since(Steady::time_point t0) { return std::chrono::duration<double>(Steady::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

const Environment& env() {
  static const Environment e = Environment::make(EnvConfig{});
  return e;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Shared by criteria 1 and 2.
EvalRun& oracle_run() {
  static EvalRun run = run_eval(env(), oracle_agent_factory(), build_testset(kTestSeedBase, 100),
                                {default_workers(), kTestSeedBase, 100});
  return run;
}
double oracle_seconds = 0;

Outcome oracle_solves_all() {
  Outcome o;
  const auto t0 = Steady::now();
  const auto& run = oracle_run();
  oracle_seconds = seconds_since(t0);
  const auto& r = run.report;
  if (r.overall.n != 700) o.fail("ran " + std::to_string(r.overall.n) + " instances");
  if (r.overall.solved != r.overall.n) o.fail("SR " + fmt("%.2f", r.overall.sr) + "%");
  for (const auto& [t, s] : r.per_type) {
    const bool ok = t == ChallengeType::ImageGrid ? s.avg_steps <= 2.0 : s.avg_steps == 1.0;
    if (!ok) o.fail(std::string(to_string(t)) + " avg steps " + fmt("%.2f", s.avg_steps));
  }
  if (oracle_seconds > 300) o.fail("took " + fmt("%.1f", oracle_seconds) + " s");
  if (o.pass) {
    o.detail = "oracle SR " + fmt("%.2f", r.overall.sr) + "% over 700, Image Grid avg " +
               fmt("%.2f", r.find(ChallengeType::ImageGrid)->avg_steps) + " steps, others 1.00, " +
               fmt("%.1f", oracle_seconds) + " s";
  }
  return o;
}

Outcome budgets_enforced() {
  Outcome o;
  const std::vector<int> expected = {5, 5, 5, 5, 8, 5, 8};
  for (std::size_t i = 0; i < kAllChallengeTypes.size(); ++i) {
    if (env().cfg.budget(kAllChallengeTypes[i]) != expected[i]) o.fail("budget mismatch for " + std::string(to_string(kAllChallengeTypes[i])));
  }
  for (const auto& l : oracle_run().logs) {
    if (l.steps > l.budget) o.fail("log " + std::to_string(l.index) + " used " + std::to_string(l.steps) + " steps");
  }
  // A script that never solves: a click on the top-left pixel, repeated.
  const auto never = replay_agent_factory({ActionBatch{{LeftClick{{0, 0}}}}});
  const auto run = run_eval(env(), never, build_testset(kTestSeedBase, 10));
  for (const auto& l : run.logs) {
    if (l.solved || l.status != "failed" || l.steps != l.budget) {
      o.fail(std::string(to_string(l.type)) + " seed " + std::to_string(l.seed) + " ended " + l.status + " after " +
             std::to_string(l.steps));
    }
  }
  if (o.pass) o.detail = "budgets {5,5,5,5,8,5,8}; 700 oracle logs within budget; 70 failing replays end Failed at budget";
  return o;
}

Outcome deterministic_generation() {
  Outcome o;
  std::size_t checked = 0;
  for (auto t : kAllChallengeTypes) {
    std::set<std::vector<std::uint8_t>> shots;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto a = env().generate(t, seed);
      const auto b = env().generate(t, seed);
      const auto pa = encode_png(render(a.scene, *env().bank));
      const auto pb = encode_png(render(b.scene, *env().bank));
      if (pa != pb) o.fail(std::string(to_string(t)) + " seed " + std::to_string(seed) + ": PNG bytes differ");
      if (Json(a.truth).dump() != Json(b.truth).dump()) {
        o.fail(std::string(to_string(t)) + " seed " + std::to_string(seed) + ": ground truth differs");
      }
      shots.insert(pa);
      ++checked;
    }
    if (shots.size() != 50) o.fail(std::string(to_string(t)) + ": only " + std::to_string(shots.size()) + " distinct screenshots");
  }
  if (o.pass) o.detail = std::to_string(checked) + " instances byte-identical on regeneration; 50/50 distinct per type";
  return o;
}

Outcome verification_rules() {
  Outcome o;
  // Slider sweep around the true goal of real instances.
  int probes = 0;
  const int tol = env().cfg.slider_tolerance_px;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = env().generate(ChallengeType::Slider, seed);
    const auto& sw = *inst.scene.slider;
    const int goal = *inst.truth.goal_offset_px;
    for (int off = goal - 12; off <= goal + 12; ++off) {
      if (off < 0 || off > sw.max_offset()) continue;
      Session s("slider", inst, env());
      const Point from = sw.handle_rect().center();
      const auto fb = s.apply_batch({{Drag{from, {from.x + off - sw.handle_offset, from.y}}}});
      const bool want = std::abs(off - goal) <= tol;
      ++probes;
      if (!fb.solved || *fb.solved != want) {
        o.fail("slider seed " + std::to_string(seed) + " delta " + std::to_string(off - goal) + " verdict wrong");
      }
    }
  }

  // Image grid truth table.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = env().generate(ChallengeType::ImageGrid, seed);
    const auto& target = inst.truth.target_tiles;
    std::vector<int> others;
    for (int i = 0; i < static_cast<int>(inst.scene.tiles.size()); ++i) {
      if (!std::binary_search(target.begin(), target.end(), i)) others.push_back(i);
    }
    const auto try_select = [&](const std::vector<int>& sel) {
      Session s("grid", inst, env());
      s.apply_batch({{LeftClick{inst.scene.checkbox->box.center()}}});
      ActionBatch b;
      for (int i : sel) b.actions.push_back(LeftClick{inst.scene.tiles[static_cast<std::size_t>(i)].rect.center()});
      b.actions.push_back(LeftClick{inst.scene.find_button(Role::SubmitButton)->rect.center()});
      return s.apply_batch(b).solved.value_or(false);
    };
    std::vector<int> subset(target.begin(), target.end() - 1);
    std::vector<int> superset = target;
    superset.push_back(others.front());
    const std::vector<int> disjoint = {others.front()};
    const std::vector<bool> table = {try_select(target), try_select(subset), try_select(superset), try_select(disjoint)};
    if (table != std::vector<bool>{true, false, false, false}) o.fail("image grid seed " + std::to_string(seed) + " truth table");
  }

  // Text: case-insensitive, surrounding whitespace ignored, inner text exact.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = env().generate(ChallengeType::Text, seed);
    const auto answer = inst.truth.answer_label;
    std::string lower = answer;
    for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    const auto submit = [&](const std::string& typed) {
      Session s("text", inst, env());
      return s
          .apply_batch({{LeftClick{inst.scene.input->rect.center()}, Type{typed},
                         LeftClick{inst.scene.find_button(Role::SubmitButton)->rect.center()}}})
          .solved.value_or(false);
    };
    const bool ok = submit(answer) && submit(lower) && submit("  " + answer + " ") && !submit(answer + "X") &&
                    !submit(answer.substr(1)) && !submit(answer.substr(0, 1) + " " + answer.substr(1));
    if (!ok) o.fail("text rules fail for seed " + std::to_string(seed));
  }
  if (o.pass) {
    o.detail = std::to_string(probes) + " slider probes match |delta|<=" + std::to_string(tol) +
               "; grid table {T,F,F,F} on 10 seeds; text case/trim rules on 10 seeds";
  }
  return o;
}

double brute_force_loss(const std::vector<SpanKind>& kinds, const std::vector<double>& logp, double lt, double la) {
  double think = 0, act = 0;
  for (std::size_t i = 0; i < kinds.size(); ++i) (kinds[i] == SpanKind::Think ? think : act) += logp[i];
  return -(lt * think + la * act) / static_cast<double>(kinds.size());
}

Outcome loss_matches_reference() {
  Outcome o;
  Rng rng(2024, "acceptance/loss");
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = rng.uniform_int(1, 400);
    std::vector<SpanKind> kinds;
    std::vector<double> logp;
    // Alternating think/act runs, like real assistant turns.
    while (static_cast<int>(kinds.size()) < n) {
      const auto kind = rng.bernoulli(0.5) ? SpanKind::Think : SpanKind::Act;
      const int run = rng.uniform_int(1, 40);
      for (int k = 0; k < run && static_cast<int>(kinds.size()) < n; ++k) {
        kinds.push_back(kind);
        logp.push_back(-rng.uniform(0.0, 15.0));
      }
    }
    const double lt = rng.uniform01(), la = rng.uniform01();
    const auto w = compute_weights(kinds, lt, la);
    worst = std::max(worst, std::abs(reference_loss(logp, w) - brute_force_loss(kinds, logp, lt, la)));
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      const double expected = (kinds[i] == SpanKind::Think ? lt : la) / static_cast<double>(kinds.size());
      worst = std::max(worst, std::abs(w.weights[i] - expected));
    }
    const auto half = compute_weights(kinds, 0.5, 0.5);
    for (double x : half.weights) {
      if (x != 0.5 / static_cast<double>(half.n_think + half.n_act)) o.fail("non-uniform weight at lambda 0.5/0.5");
    }
  }
  if (worst > 1e-12) o.fail("max deviation " + fmt("%.3g", worst));
  if (o.pass) o.detail = "1000 random layouts, max deviation " + fmt("%.3g", worst) + "; 0.5/0.5 gives 0.5/(|T|+|A|)";
  return o;
}

// Replays every act span of a record on a fresh session.
bool replays_to_solved(const TraceRecord& r) {
  Session s("replay", env().generate(r.instance.type, r.instance.seed), env());
  for (const auto& t : r.turns) {
    if (t.role != "assistant" || s.status() != SessionStatus::InProgress) continue;
    s.apply_batch(act_batch(t));
  }
  return s.status() == SessionStatus::Solved;
}

Outcome trace_pipelines() {
  Outcome o;
  const auto t0 = Steady::now();
  MockExpert expert;
  PipelineOptions opts;
  opts.workers = default_workers();

  std::vector<PipelineJob> jobs;
  for (int i = 0; i < 200; ++i) jobs.push_back({kAllChallengeTypes[static_cast<std::size_t>(i) % 7], static_cast<std::uint64_t>(i)});
  const auto sol = run_solution_pipeline(env(), jobs, expert, opts);
  const auto records = sol.records();
  if (records.size() != 200) o.fail(std::to_string(records.size()) + "/200 solution records accepted");
  std::size_t replayed = 0;
  for (const auto& r : records) {
    if (validate_trace(r, env()).empty() && replays_to_solved(r)) ++replayed;
  }
  if (replayed != records.size()) o.fail(std::to_string(replayed) + "/" + std::to_string(records.size()) + " solution records replay");

  // Correction traces with a student that always errs once.
  std::vector<PipelineJob> cjobs;
  for (int i = 0; i < 70; ++i) cjobs.push_back({kAllChallengeTypes[static_cast<std::size_t>(i) % 7], 5000 + static_cast<std::uint64_t>(i)});
  const auto flawed = run_correction_pipeline(env(), cjobs, flawed_oracle_factory(), expert, opts);
  // And a random student, which sometimes gets lucky.
  const auto random = run_correction_pipeline(env(), cjobs, random_agent_factory(), expert, opts);
  std::size_t corrections = 0, fixed = 0;
  for (const auto* run : {&flawed, &random}) {
    if (run->count_records() != run->count_student_failures()) {
      o.fail("records " + std::to_string(run->count_records()) + " != student failures " +
             std::to_string(run->count_student_failures()));
    }
    for (const auto& out : run->outcomes) {
      if (out.record.has_value() != out.student_failed) o.fail("record present for a successful student run");
    }
    for (const auto& r : run->records()) {
      ++corrections;
      if (validate_trace(r, env()).empty() && replays_to_solved(r)) ++fixed;
    }
  }
  if (flawed.count_records() != cjobs.size()) o.fail("flawed student produced " + std::to_string(flawed.count_records()) + "/70 records");
  if (fixed != corrections) o.fail(std::to_string(fixed) + "/" + std::to_string(corrections) + " corrections replay to solved");
  const double secs = seconds_since(t0);
  if (secs > 600) o.fail("took " + fmt("%.1f", secs) + " s");
  if (o.pass) {
    o.detail = "200/200 solution traces validate and replay; " + std::to_string(corrections) +
               " correction records, one per student failure, all replay to solved; " + fmt("%.1f", secs) + " s";
  }
  return o;
}

Outcome no_leaks() {
  Outcome o;
  test_support::TestServer server;
  auto c = server.client();
  std::size_t responses = 0, leaks = 0;
  const auto scan = [&](const std::string& body, const std::vector<std::string>& secrets, const std::string& where) {
    ++responses;
    const auto found = test_support::scan_for_leaks(body, secrets);
    if (!found.empty()) {
      ++leaks;
      o.fail(where + " leaks '" + found.front() + "'");
    }
  };

  for (auto t : kAllChallengeTypes) {
    for (int i = 0; i < 20; ++i) {
      const Json req{{"type", std::string(to_string(t))}};
      auto created = c.Post(i % 2 ? "/api/challenge?inline=1" : "/api/challenge", req.dump(), "application/json");
      if (!created || created->status != 200) {
        o.fail("create failed");
        continue;
      }
      const auto id = Json::parse(created->body)["challenge_id"].get<std::string>();
      const auto inst = server.service().store().with(id, [](Session& s) { return s.instance(); });
      const auto secrets = test_support::secrets_of(inst, *env().bank);
      const std::string path = "/api/challenge/" + id;
      scan(created->body, secrets, "create");

      auto shot = c.Get(path + "/screenshot");
      ++responses;
      if (!shot || test_support::png_has_text_chunks(shot->body)) o.fail("screenshot carries text chunks");

      // A random batch, then the solution.
      RandomAgent agent(static_cast<std::uint64_t>(i), t);
      const auto shot_now = server.service().store().with(id, [](Session& s) { return s.screenshot(); });
      const auto random_batch = agent.act({"", &shot_now, 0, std::nullopt, {}}).batch;
      auto fb = c.Post(path + "/actions", Json(random_batch).dump(), "application/json");
      if (fb) scan(fb->body, secrets, "feedback");
      scan(c.Get(path + "/result")->body, secrets, "result");
      while (true) {
        const auto script = server.service().store().with(id, [](Session& s) {
          return s.status() == SessionStatus::InProgress ? s.recovery_script() : std::vector<ActionBatch>{};
        });
        if (script.empty()) break;
        auto step = c.Post(path + "/actions", Json(script.front()).dump(), "application/json");
        if (!step) break;
        scan(step->body, secrets, "feedback");
      }
      scan(c.Get(path + "/result")->body, secrets, "result");
      auto after = c.Get(path + "/screenshot");
      ++responses;
      if (!after || test_support::png_has_text_chunks(after->body)) o.fail("screenshot carries text chunks");
    }
  }
  ++responses;
  if (c.Get("/api/config")->body.find(server.token()) != std::string::npos) o.fail("config exposes the meta token");

  // Meta access without a valid token.
  int denied = 0, trials = 0;
  const auto id = Json::parse(c.Post("/api/challenge", R"({"type":"text"})", "application/json")->body)["challenge_id"].get<std::string>();
  for (int i = 0; i < 100; ++i) {
    httplib::Headers h;
    if (i % 4 == 1) h.emplace("X-Meta-Token", "guess-" + std::to_string(i));
    if (i % 4 == 2) h.emplace("Authorization", "Bearer " + server.token().substr(0, server.token().size() - 1));
    if (i % 4 == 3) h.emplace("X-Meta-Token", "");
    auto res = c.Get("/api/challenge/" + id + "/meta", h);
    ++trials;
    if (res && res->status == 403) ++denied;
  }
  if (denied != trials) o.fail(std::to_string(denied) + "/" + std::to_string(trials) + " meta requests denied");
  if (o.pass) {
    o.detail = std::to_string(responses) + " public responses scanned, " + std::to_string(leaks) + " leaks; " +
               std::to_string(denied) + "/" + std::to_string(trials) + " tokenless meta requests got 403";
  }
  return o;
}

Outcome random_baseline() {
  Outcome o;
  const auto run = run_eval(env(), random_agent_factory(), build_testset(kTestSeedBase, 50),
                            {default_workers(), kTestSeedBase, 50});
  const double sr = run.report.overall.sr;
  if (run.report.overall.n != 350) o.fail("ran " + std::to_string(run.report.overall.n) + " instances");
  if (sr > 5.0) o.fail("random SR " + fmt("%.2f", sr) + "%");
  if (o.pass) o.detail = "random agent SR " + fmt("%.2f", sr) + "% over 350";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, oracle_solves_all}, {2, budgets_enforced}, {3, deterministic_generation}, {4, verification_rules},
      {5, loss_matches_reference}, {6, trace_pipelines}, {7, no_leaks}, {8, random_baseline},
  };
  int failed = 0;
  for (const auto& [n, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    std::printf("[%s] criterion %d: %s\n", o.pass ? "PASS" : "FAIL", n, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
