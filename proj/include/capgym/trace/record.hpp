#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "capgym/core/action.hpp"
#include "capgym/core/json.hpp"
#include "capgym/core/types.hpp"
#include "capgym/trace/prompts.hpp"

namespace capgym {

enum class SpanKind { Think, Act };
enum class TraceKind { Solution, Correction };

inline constexpr std::string_view to_string(SpanKind k) { return k == SpanKind::Think ? "think" : "act"; }
inline constexpr std::string_view to_string(TraceKind k) { return k == TraceKind::Solution ? "solution" : "correction"; }

struct Span {
  std::size_t start = 0;  // character offsets, half-open
  std::size_t end = 0;
  SpanKind kind = SpanKind::Think;
  friend bool operator==(const Span&, const Span&) = default;
};

struct Turn {
  std::string role;  // user | assistant
  std::string text;
  std::vector<int> images;  // indices into TraceRecord::images (user turns)
  std::vector<Span> spans;  // assistant turns
  bool train = true;        // false for replayed student turns in correction records
  friend bool operator==(const Turn&, const Turn&) = default;
};

struct TraceImage {
  std::string path;                // relative to the dataset root
  std::vector<std::uint8_t> png;   // in-memory payload; empty once exported
  friend bool operator==(const TraceImage&, const TraceImage&) = default;
};

struct InstanceMeta {
  ChallengeType type = ChallengeType::Text;
  std::uint64_t seed = 0;
  std::string config_hash;
  friend bool operator==(const InstanceMeta&, const InstanceMeta&) = default;
};

struct Provenance {
  std::string expert_model;
  std::string prompt_hash;
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct TraceRecord {
  std::string id;
  TraceKind kind = TraceKind::Solution;
  InstanceMeta instance;
  std::string system;
  std::vector<TraceImage> images;
  std::vector<Turn> turns;
  Provenance provenance;
  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

// Assistant turn text: reasoning, a newline, then one tool-call block per
// action. The think span includes the separating newline.
inline Turn make_assistant_turn(const std::string& think, const ActionBatch& batch, bool train = true) {
  Turn t;
  t.role = "assistant";
  t.train = train;
  const std::string calls = format_tool_calls(batch);
  if (think.empty()) {
    t.text = calls;
  } else {
    t.text = think + "\n" + calls;
    t.spans.push_back({0, think.size() + 1, SpanKind::Think});
  }
  t.spans.push_back({t.text.size() - calls.size(), t.text.size(), SpanKind::Act});
  return t;
}

inline Turn make_user_turn(std::string_view text, int image) {
  return {"user", std::string(text), {image}, {}, true};
}

inline std::string span_text(const Turn& t, const Span& s) { return t.text.substr(s.start, s.end - s.start); }

inline std::string think_text(const Turn& t) {
  std::string out;
  for (const auto& s : t.spans) {
    if (s.kind == SpanKind::Think) out += span_text(t, s);
  }
  return out;
}

// Act spans of one assistant turn parsed into a batch.
inline ActionBatch act_batch(const Turn& t) {
  ActionBatch b;
  for (const auto& s : t.spans) {
    if (s.kind != SpanKind::Act) continue;
    const auto parsed = parse_tool_calls(span_text(t, s));
    if (!parsed.reasoning.empty()) throw ParseError("act span contains text outside tool calls");
    b.actions.insert(b.actions.end(), parsed.batch.actions.begin(), parsed.batch.actions.end());
  }
  return b;
}

inline void to_json(Json& j, const Span& s) {
  j = Json{{"start", s.start}, {"end", s.end}, {"kind", std::string(to_string(s.kind))}};
}

inline void from_json(const Json& j, Span& s) {
  s.start = j.at("start").get<std::size_t>();
  s.end = j.at("end").get<std::size_t>();
  const auto k = j.at("kind").get<std::string>();
  if (k != "think" && k != "act") throw ParseError("unknown span kind '" + k + "'");
  s.kind = k == "think" ? SpanKind::Think : SpanKind::Act;
}

inline void to_json(Json& j, const Turn& t) {
  j = Json{{"role", t.role}, {"text", t.text}};
  if (t.role == "assistant") {
    j["spans"] = t.spans;
    j["train"] = t.train;
  } else {
    j["images"] = t.images;
  }
}

inline void from_json(const Json& j, Turn& t) {
  t.role = j.at("role").get<std::string>();
  t.text = j.at("text").get<std::string>();
  t.images = j.value("images", std::vector<int>{});
  t.spans = j.value("spans", std::vector<Span>{});
  t.train = j.value("train", true);
}

inline void to_json(Json& j, const TraceRecord& r) {
  Json images = Json::array();
  for (const auto& im : r.images) images.push_back(im.path);
  j = Json{{"id", r.id},
           {"kind", std::string(to_string(r.kind))},
           {"instance",
            {{"type", std::string(to_string(r.instance.type))},
             {"seed", r.instance.seed},
             {"config_hash", r.instance.config_hash}}},
           {"system", r.system},
           {"images", images},
           {"turns", r.turns},
           {"provenance", {{"expert_model", r.provenance.expert_model}, {"prompt_hash", r.provenance.prompt_hash}}}};
}

inline void from_json(const Json& j, TraceRecord& r) {
  r.id = j.at("id").get<std::string>();
  const auto kind = j.at("kind").get<std::string>();
  if (kind != "solution" && kind != "correction") throw ParseError("unknown record kind '" + kind + "'");
  r.kind = kind == "solution" ? TraceKind::Solution : TraceKind::Correction;
  const auto& inst = j.at("instance");
  const auto type = parse_challenge_type(inst.at("type").get<std::string>());
  if (!type) throw ParseError("unknown challenge type in record " + r.id);
  r.instance = {*type, inst.at("seed").get<std::uint64_t>(), inst.at("config_hash").get<std::string>()};
  r.system = j.value("system", "");
  r.images.clear();
  for (const auto& p : j.at("images")) r.images.push_back({p.get<std::string>(), {}});
  r.turns = j.at("turns").get<std::vector<Turn>>();
  r.provenance = {j.at("provenance").at("expert_model").get<std::string>(),
                  j.at("provenance").at("prompt_hash").get<std::string>()};
}

}  // namespace capgym
