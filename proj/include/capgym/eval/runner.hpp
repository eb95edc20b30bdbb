#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "capgym/core/parallel.hpp"
#include "capgym/eval/agent.hpp"
#include "capgym/eval/report.hpp"
#include "capgym/eval/session_meta.hpp"
#include "capgym/session/session.hpp"

namespace capgym {

// Seed intervals that keep training and evaluation instances apart.
inline constexpr std::uint64_t kTrainSeedLimit = 1'000'000;
inline constexpr std::uint64_t kTestSeedBase = 1'000'000'000;

struct TestCase {
  ChallengeType type = ChallengeType::Text;
  std::uint64_t seed = 0;
  friend bool operator==(const TestCase&, const TestCase&) = default;
};

inline std::vector<TestCase> build_testset(std::uint64_t seed_base, std::size_t per_type,
                                           const std::vector<ChallengeType>& types = {kAllChallengeTypes.begin(),
                                                                                      kAllChallengeTypes.end()}) {
  if (per_type < 1) throw ConfigError("per_type", "per-type count must be at least 1");
  std::vector<TestCase> out;
  out.reserve(types.size() * per_type);
  for (auto t : types) {
    for (std::size_t i = 0; i < per_type; ++i) out.push_back({t, seed_base + i});
  }
  return out;
}

struct EvalOptions {
  int workers = 1;
  std::uint64_t seed_base = kTestSeedBase;  // recorded in the manifest
  std::size_t per_type = 0;                 // recorded in the manifest
};

struct EvalRun {
  std::vector<InstanceLog> logs;  // in testset order
  EvalReport report;
};

// Drives one agent on one fresh session until the session is terminal.
inline InstanceLog run_instance(const Environment& env, const AgentFactory& factory, const TestCase& tc,
                                std::size_t index) {
  const auto t0 = std::chrono::steady_clock::now();
  InstanceLog log;
  log.index = index;
  log.type = tc.type;
  log.seed = tc.seed;
  Session s("eval-" + std::to_string(index), env.generate(tc.type, tc.seed), env);
  SessionMeta meta(s);
  log.budget = s.budget();
  try {
    auto agent = factory.make({tc.type, tc.seed, factory.privileged ? &meta : nullptr});
    Observation obs{s.instance().instruction_text, nullptr, 0, std::nullopt, {}};
    while (s.status() == SessionStatus::InProgress) {
      obs.screenshot = &s.screenshot();
      obs.step = s.steps_used();
      auto turn = agent->act(obs);
      const auto fb = s.apply_batch(turn.batch);
      log.batches.push_back({turn.batch, fb.solved, std::string(to_string(fb.status)), fb.rejected_action});
      obs.last_solved = fb.solved;
      obs.history.push_back(std::move(turn));
    }
  } catch (const std::exception& e) {
    log.error = std::string("agent_error: ") + e.what();
  }
  log.steps = s.steps_used();
  log.solved = s.status() == SessionStatus::Solved;
  log.status = log.error.empty() ? std::string(to_string(s.status())) : "failed";
  log.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return log;
}

inline RunManifest make_run_manifest(const Environment& env, const AgentFactory& factory, const EvalOptions& opts) {
  RunManifest m{factory.id, opts.seed_base, opts.per_type, {}, config_hash(env.cfg)};
  for (auto t : kAllChallengeTypes) m.budgets.push_back(env.cfg.budget(t));
  return m;
}

inline EvalRun run_eval(const Environment& env, const AgentFactory& factory, const std::vector<TestCase>& testset,
                        const EvalOptions& opts = {}) {
  if (testset.empty()) throw Error("evaluation needs at least one instance");
  EvalRun run;
  run.logs.resize(testset.size());
  parallel_for(testset.size(), opts.workers,
               [&](std::size_t i) { run.logs[i] = run_instance(env, factory, testset[i], i); });
  run.report = aggregate(run.logs, make_run_manifest(env, factory, opts));
  return run;
}

inline void write_logs(const std::vector<InstanceLog>& logs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& l : logs) out << Json(l).dump() << '\n';
}

inline std::vector<InstanceLog> read_logs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<InstanceLog> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(parse_json(line, "instance log").get<InstanceLog>());
  }
  return out;
}

// Agent spec strings: oracle | random | replay:<file> | remote:<url>.
inline AgentFactory make_agent_factory(const std::string& spec, ChatOptions remote = {}) {
  if (spec == "oracle") return oracle_agent_factory();
  if (spec == "random") return random_agent_factory();
  if (spec.rfind("replay:", 0) == 0) return replay_agent_factory(load_replay_script(spec.substr(7)), spec);
  if (spec.rfind("remote:", 0) == 0) {
    remote.url = spec.substr(7);
    parse_endpoint(remote.url);
    return remote_agent_factory(std::move(remote));
  }
  throw ConfigError("agent", "expected oracle, random, replay:<file> or remote:<url>, got '" + spec + "'");
}

}  // namespace capgym
