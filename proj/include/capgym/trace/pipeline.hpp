#pragma once

#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include "capgym/core/hash.hpp"
#include "capgym/core/parallel.hpp"
#include "capgym/eval/agent.hpp"
#include "capgym/eval/session_meta.hpp"
#include "capgym/render/annotate.hpp"
#include "capgym/session/session.hpp"
#include "capgym/trace/expert.hpp"
#include "capgym/trace/prompts.hpp"
#include "capgym/trace/record.hpp"
#include "capgym/trace/validate.hpp"

namespace capgym {

struct PipelineOptions {
  int workers = 4;
  int max_in_flight = 4;   // concurrent expert requests
  int max_attempts = 3;    // requeues after expert failures
  int student_steps = -1;  // default: budget - 2, leaving room for recovery
  std::vector<std::string> forbidden = default_forbidden_phrases();
};

struct TraceOutcome {
  std::optional<TraceRecord> record;
  std::vector<Violation> violations;  // non-empty when the record was rejected
  std::string error;                  // expert or agent failure
  bool student_failed = false;        // correction runs only
  int attempts = 1;
};

// Caps concurrent calls into a shared expert.
class BoundedExpert : public ExpertClient {
 public:
  BoundedExpert(ExpertClient& inner, int max_in_flight) : inner_(inner), slots_(std::max(max_in_flight, 1)) {}
  std::string model_id() const override { return inner_.model_id(); }
  std::string reason(const ExpertRequest& req) override {
    slots_.acquire();
    try {
      auto out = inner_.reason(req);
      slots_.release();
      return out;
    } catch (...) {
      slots_.release();
      throw;
    }
  }

 private:
  ExpertClient& inner_;
  std::counting_semaphore<1024> slots_;
};

namespace pipeline_detail {

struct Builder {
  const Environment& env;
  const ChallengeInstance& inst;
  ExpertClient& expert;
  TraceRecord rec;
  std::string prompts;

  Builder(const Environment& e, const ChallengeInstance& i, ExpertClient& x, TraceKind kind)
      : env(e), inst(i), expert(x) {
    rec.id = std::string(to_string(kind)) + "-" + std::string(to_string(i.type)) + "-" + std::to_string(i.seed);
    rec.kind = kind;
    rec.instance = {i.type, i.seed, i.config_hash};
    rec.system = agent_system_prompt();
  }

  int add_image(const Screenshot& shot) {
    rec.images.push_back({"images/" + rec.id + "-" + std::to_string(rec.images.size()) + ".png", encode_png(shot)});
    return static_cast<int>(rec.images.size()) - 1;
  }

  void user_turn(const Screenshot& shot) {
    const bool first = rec.turns.empty();
    rec.turns.push_back(make_user_turn(first ? kInitialUserPrompt : kFollowUpUserPrompt, add_image(shot)));
  }

  ExpertContext context(const SceneGraph& live, const std::vector<ActionBatch>& plan) const {
    ExpertContext c;
    c.type = inst.type;
    c.instruction = inst.instruction_text;
    c.answer = inst.truth.answer_label;
    c.plan = describe_actions(live, *env.bank, plan);
    c.grid_pending = inst.type == ChallengeType::ImageGrid && !live.grid_visible;
    return c;
  }

  // Expert reasoning for one oracle batch from the current state.
  std::string solution_think(const Session& s, const ActionBatch& batch) {
    const auto& shot = s.screenshot();
    ExpertRequest req{solution_prompt(inst, *env.bank, s.live(), {batch}),
                      {encode_png(shot), encode_png(annotate(shot, {batch}))},
                      context(s.live(), {batch})};
    prompts += req.prompt;
    return expert.reason(req);
  }

  TraceRecord finish() {
    rec.provenance = {expert.model_id(), to_hex(fnv1a64(prompts))};
    return std::move(rec);
  }
};

inline std::string describe_batch(const SceneGraph& before, const AssetBank& bank, const ActionBatch& b) {
  return describe_actions(before, bank, {b});
}

}  // namespace pipeline_detail

// Expert reasoning per oracle batch with the oracle actions appended verbatim.
inline TraceOutcome gen_solution_trace(const ChallengeInstance& inst, const Environment& env, ExpertClient& expert,
                                       const PipelineOptions& opts = {}) {
  pipeline_detail::Builder b(env, inst, expert, TraceKind::Solution);
  Session s("solution", inst, env);
  for (const auto& batch : inst.truth.oracle_script) {
    b.user_turn(s.screenshot());
    const auto think = b.solution_think(s, batch);
    b.rec.turns.push_back(make_assistant_turn(think, batch));
    s.apply_batch(batch);
  }
  TraceOutcome out;
  auto rec = b.finish();
  out.violations = validate_trace(rec, env, opts.forbidden);
  if (out.violations.empty()) out.record = std::move(rec);
  return out;
}

// Runs the student on a live session. A solved run is rejected (no record).
// On failure, the expert explains the mistake and the recovery script from
// the post-failure state is appended.
inline TraceOutcome gen_correction_trace(const ChallengeInstance& inst, const Environment& env,
                                         const AgentFactory& student, ExpertClient& expert,
                                         const PipelineOptions& opts = {}) {
  using pipeline_detail::describe_batch;
  TraceOutcome out;
  pipeline_detail::Builder b(env, inst, expert, TraceKind::Correction);
  Session s("correction", inst, env);
  SessionMeta meta(s);
  const int budget = s.budget();
  if (budget < 3 && opts.student_steps < 0) throw PipelineError("budget too small for correction traces");
  const int cap = opts.student_steps > 0 ? std::min(opts.student_steps, budget - 2) : budget - 2;
  auto agent = student.make({inst.type, inst.seed, student.privileged ? &meta : nullptr});

  Observation obs{inst.instruction_text, nullptr, 0, std::nullopt, {}};
  AgentTurn last;
  SceneGraph before_last = s.live();
  int before_image = 0;
  for (int step = 0; step < cap; ++step) {
    obs.screenshot = &s.screenshot();
    obs.step = step;
    b.user_turn(s.screenshot());
    before_image = static_cast<int>(b.rec.images.size()) - 1;
    before_last = s.live();
    try {
      last = agent->act(obs);
      if (last.batch.actions.empty()) throw ParseError("student produced an empty batch");
    } catch (const std::exception& e) {
      out.error = std::string("student failed to act: ") + e.what();
      return out;
    }
    b.rec.turns.push_back(make_assistant_turn(last.reasoning, last.batch, false));
    const auto fb = s.apply_batch(last.batch);
    obs.history.push_back(last);
    obs.last_solved = fb.solved;
    if (s.status() == SessionStatus::Solved) return out;  // rejection: nothing to correct
    if (fb.solved == false || s.status() != SessionStatus::InProgress) break;
  }
  out.student_failed = true;
  if (s.status() != SessionStatus::InProgress) {
    out.error = "student exhausted the budget before a correction could be applied";
    return out;
  }

  // Correction turn: before, after and annotated images.
  const auto recovery = s.recovery_script();
  const auto& after = s.screenshot();
  b.user_turn(after);
  ExpertRequest req{correction_prompt(inst, *env.bank, s.live(), last.reasoning, recovery),
                    {b.rec.images[static_cast<std::size_t>(before_image)].png, encode_png(after),
                     encode_png(annotate(after, recovery))},
                    b.context(s.live(), recovery)};
  req.context.correction = true;
  req.context.previous_reasoning = last.reasoning;
  req.context.previous_actions = describe_batch(before_last, *env.bank, last.batch);
  b.prompts += req.prompt;
  const auto think = expert.reason(req);
  b.rec.turns.push_back(make_assistant_turn(think, recovery.front()));
  s.apply_batch(recovery.front());
  for (std::size_t k = 1; k < recovery.size() && s.status() == SessionStatus::InProgress; ++k) {
    b.user_turn(s.screenshot());
    const auto more = b.solution_think(s, recovery[k]);
    b.rec.turns.push_back(make_assistant_turn(more, recovery[k]));
    s.apply_batch(recovery[k]);
  }
  auto rec = b.finish();
  out.violations = validate_trace(rec, env, opts.forbidden);
  if (out.violations.empty()) out.record = std::move(rec);
  return out;
}

struct PipelineJob {
  ChallengeType type = ChallengeType::Text;
  std::uint64_t seed = 0;
};

struct PipelineRun {
  std::vector<TraceOutcome> outcomes;  // one per job, in job order

  std::vector<TraceRecord> records() const {
    std::vector<TraceRecord> out;
    for (const auto& o : outcomes) {
      if (o.record) out.push_back(*o.record);
    }
    return out;
  }
  std::size_t count_records() const {
    std::size_t n = 0;
    for (const auto& o : outcomes) n += o.record ? 1 : 0;
    return n;
  }
  std::size_t count_student_failures() const {
    std::size_t n = 0;
    for (const auto& o : outcomes) n += o.student_failed ? 1 : 0;
    return n;
  }
  std::size_t count_rejected() const {
    std::size_t n = 0;
    for (const auto& o : outcomes) n += o.violations.empty() ? 0 : 1;
    return n;
  }
  std::size_t count_errors() const {
    std::size_t n = 0;
    for (const auto& o : outcomes) n += o.error.empty() ? 0 : 1;
    return n;
  }
};

namespace pipeline_detail {

// Retries a job when the expert fails; other errors end the job.
template <class Fn>
TraceOutcome with_requeue(const PipelineOptions& opts, Fn&& fn) {
  std::string last;
  for (int attempt = 1; attempt <= std::max(opts.max_attempts, 1); ++attempt) {
    try {
      auto out = fn();
      out.attempts = attempt;
      return out;
    } catch (const PipelineError& e) {
      last = e.what();
    }
  }
  TraceOutcome out;
  out.error = "expert failed: " + last;
  out.attempts = std::max(opts.max_attempts, 1);
  return out;
}

}  // namespace pipeline_detail

inline PipelineRun run_solution_pipeline(const Environment& env, const std::vector<PipelineJob>& jobs,
                                         ExpertClient& expert, const PipelineOptions& opts = {}) {
  BoundedExpert bounded(expert, opts.max_in_flight);
  PipelineRun run;
  run.outcomes.resize(jobs.size());
  parallel_for(jobs.size(), opts.workers, [&](std::size_t i) {
    run.outcomes[i] = pipeline_detail::with_requeue(opts, [&] {
      return gen_solution_trace(env.generate(jobs[i].type, jobs[i].seed), env, bounded, opts);
    });
  });
  return run;
}

inline PipelineRun run_correction_pipeline(const Environment& env, const std::vector<PipelineJob>& jobs,
                                           const AgentFactory& student, ExpertClient& expert,
                                           const PipelineOptions& opts = {}) {
  BoundedExpert bounded(expert, opts.max_in_flight);
  PipelineRun run;
  run.outcomes.resize(jobs.size());
  parallel_for(jobs.size(), opts.workers, [&](std::size_t i) {
    run.outcomes[i] = pipeline_detail::with_requeue(opts, [&] {
      return gen_correction_trace(env.generate(jobs[i].type, jobs[i].seed), env, student, bounded, opts);
    });
  });
  return run;
}

// Expert spec: "mock" or an http(s) chat endpoint URL.
inline std::unique_ptr<ExpertClient> make_expert(const std::string& spec, ChatOptions chat = {}) {
  if (spec == "mock") return std::make_unique<MockExpert>();
  chat.url = spec;
  if (chat.model.empty()) throw ConfigError("expert_model", "a network expert needs a model name");
  return std::make_unique<HttpExpert>(std::move(chat));
}

// Student spec for correction traces: flawed | random | remote:<url>.
inline AgentFactory make_student_factory(const std::string& spec, ChatOptions chat = {}) {
  if (spec == "flawed") return flawed_oracle_factory();
  if (spec == "random") return random_agent_factory();
  if (spec.rfind("remote:", 0) == 0) {
    chat.url = spec.substr(7);
    parse_endpoint(chat.url);
    return remote_agent_factory(std::move(chat));
  }
  throw ConfigError("student", "expected flawed, random or remote:<url>, got '" + spec + "'");
}

}  // namespace capgym
