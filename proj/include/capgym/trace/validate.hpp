#pragma once

#include <algorithm>
#include <cctype>
#include <string>
#include <vector>

#include "capgym/session/session.hpp"
#include "capgym/trace/record.hpp"

namespace capgym {

inline const std::vector<std::string>& default_forbidden_phrases() {
  static const std::vector<std::string> kPhrases = {"ground truth", "annotated", "annotation", "planned actions",
                                                    "provided solution"};
  return kPhrases;
}

struct Violation {
  char check = 'a';  // a: leak phrase, b: replay, c: span layout, d: grounding
  std::string code;
  std::string message;
  friend bool operator==(const Violation&, const Violation&) = default;
};

namespace validate_detail {

inline std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline std::vector<const Turn*> assistant_turns(const TraceRecord& r) {
  std::vector<const Turn*> out;
  for (const auto& t : r.turns) {
    if (t.role == "assistant") out.push_back(&t);
  }
  return out;
}

}  // namespace validate_detail

// Runs every check in a fixed order (a, b, c, d) and reports all violations.
inline std::vector<Violation> validate_trace(const TraceRecord& r, const Environment& env,
                                             const std::vector<std::string>& forbidden = default_forbidden_phrases()) {
  using namespace validate_detail;
  std::vector<Violation> out;
  const auto turns = assistant_turns(r);

  // (a) leak phrases in reasoning.
  for (std::size_t i = 0; i < turns.size(); ++i) {
    const auto think = lower(think_text(*turns[i]));
    for (const auto& phrase : forbidden) {
      if (think.find(lower(phrase)) != std::string::npos) {
        out.push_back({'a', "forbidden_phrase", "assistant turn " + std::to_string(i) + " mentions '" + phrase + "'"});
      }
    }
  }

  // (b) act spans replay to a solve on a fresh session.
  std::vector<ActionBatch> batches;
  bool parsed = true;
  for (std::size_t i = 0; i < turns.size(); ++i) {
    try {
      auto b = act_batch(*turns[i]);
      if (b.actions.empty()) throw ParseError("no act span");
      batches.push_back(std::move(b));
    } catch (const Error& e) {
      parsed = false;
      out.push_back({'b', "act_unparsable", "assistant turn " + std::to_string(i) + ": " + e.what()});
    }
  }
  std::optional<ChallengeInstance> inst;
  if (r.instance.config_hash != config_hash(env.cfg)) {
    out.push_back({'b', "config_mismatch", "record was generated under config " + r.instance.config_hash});
  } else {
    inst = env.generate(r.instance.type, r.instance.seed);
  }
  if (inst && parsed) {
    Session s("validate", *inst, env);
    std::size_t applied = 0;
    try {
      for (std::size_t i = 0; i < batches.size(); ++i) {
        if (s.status() != SessionStatus::InProgress) break;
        s.apply_batch(batches[i]);
        ++applied;
        // Student turns of a correction record must reproduce the failure.
        if (r.kind == TraceKind::Correction && !turns[i]->train && s.status() == SessionStatus::Solved) {
          out.push_back({'b', "student_solved", "student turn " + std::to_string(i) + " solves the instance"});
        }
      }
    } catch (const Error& e) {
      out.push_back({'b', "replay_error", e.what()});
    }
    if (s.status() != SessionStatus::Solved) {
      out.push_back({'b', "replay_unsolved", "replay ends " + std::string(to_string(s.status()))});
    } else if (applied != batches.size()) {
      out.push_back({'b', "replay_extra", "solved before the last act span"});
    }
    if (r.kind == TraceKind::Solution && batches != inst->truth.oracle_script) {
      out.push_back({'b', "oracle_mismatch", "act spans differ from the oracle script"});
    }
  }

  // (c) span layout.
  if (turns.empty()) out.push_back({'c', "no_assistant_turn", "record has no assistant turn"});
  for (std::size_t i = 0; i < turns.size(); ++i) {
    const auto& t = *turns[i];
    const std::string where = "assistant turn " + std::to_string(i);
    std::size_t cursor = 0;
    bool has_act = false;
    bool tiled = true;
    for (const auto& s : t.spans) {
      if (s.start != cursor || s.end <= s.start || s.end > t.text.size()) {
        tiled = false;
        break;
      }
      cursor = s.end;
      if (s.kind == SpanKind::Act) has_act = true;
      if (s.kind == SpanKind::Think && span_text(t, s).find("<tool_call>") != std::string::npos) {
        out.push_back({'c', "think_has_tool_call", where + ": think span contains a tool call"});
      }
    }
    if (!tiled || cursor != t.text.size()) {
      out.push_back({'c', "span_partition", where + ": spans must cover the text without gaps or overlaps"});
    }
    if (!has_act) out.push_back({'c', "no_act_span", where + ": no act span"});
  }

  // (d) text answers are read out in the final reasoning.
  if (is_text_type(r.instance.type) && !turns.empty() && inst) {
    const auto answer = lower(inst->truth.answer_label);
    if (lower(think_text(*turns.back())).find(answer) == std::string::npos) {
      out.push_back({'d', "answer_not_observed", "final reasoning never states the characters"});
    }
  }
  return out;
}

}  // namespace capgym
