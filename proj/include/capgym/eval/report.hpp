#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "capgym/core/action.hpp"
#include "capgym/core/error.hpp"
#include "capgym/core/json.hpp"
#include "capgym/core/types.hpp"

namespace capgym {

struct BatchLog {
  ActionBatch batch;
  std::optional<bool> solved;
  std::string status;
  std::optional<int> rejected_action;
  friend bool operator==(const BatchLog&, const BatchLog&) = default;
};

// One line of the per-instance JSONL log.
struct InstanceLog {
  std::size_t index = 0;
  ChallengeType type = ChallengeType::Text;
  std::uint64_t seed = 0;
  bool solved = false;
  std::string status;
  int steps = 0;  // accepted batches
  int budget = 0;
  double wall_ms = 0;
  std::string error;  // agent failure tag, empty otherwise
  std::vector<BatchLog> batches;
  friend bool operator==(const InstanceLog&, const InstanceLog&) = default;
};

struct TypeStats {
  std::size_t n = 0;
  std::size_t solved = 0;
  double sr = 0;         // percent
  double avg_steps = 0;  // over solved cases; 0 when none solved
  double wall_ms_mean = 0;
  double wall_ms_p50 = 0;
  double wall_ms_max = 0;
  std::size_t errors = 0;
  friend bool operator==(const TypeStats&, const TypeStats&) = default;
};

struct RunManifest {
  std::string agent_id;
  std::uint64_t seed_base = 0;
  std::size_t per_type = 0;
  std::vector<int> budgets;  // in type order
  std::string config_hash;
  friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

struct EvalReport {
  RunManifest manifest;
  std::vector<std::pair<ChallengeType, TypeStats>> per_type;  // fixed type order, present types only
  TypeStats overall;
  friend bool operator==(const EvalReport&, const EvalReport&) = default;

  const TypeStats* find(ChallengeType t) const {
    for (const auto& [type, stats] : per_type) {
      if (type == t) return &stats;
    }
    return nullptr;
  }
};

inline void to_json(Json& j, const BatchLog& b) {
  j = Json{{"batch", b.batch}, {"status", b.status}};
  j["solved"] = b.solved ? Json(*b.solved) : Json(nullptr);
  if (b.rejected_action) j["rejected_action"] = *b.rejected_action;
}

inline void from_json(const Json& j, BatchLog& b) {
  b.batch = j.at("batch").get<ActionBatch>();
  b.status = j.at("status").get<std::string>();
  b.solved = j.at("solved").is_null() ? std::nullopt : std::optional<bool>(j.at("solved").get<bool>());
  b.rejected_action = j.contains("rejected_action") ? std::optional<int>(j["rejected_action"].get<int>()) : std::nullopt;
}

inline void to_json(Json& j, const InstanceLog& l) {
  j = Json{{"index", l.index},   {"type", std::string(to_string(l.type))},
           {"seed", l.seed},     {"solved", l.solved},
           {"status", l.status}, {"steps", l.steps},
           {"budget", l.budget}, {"wall_ms", l.wall_ms},
           {"error", l.error},   {"batches", l.batches}};
}

inline void from_json(const Json& j, InstanceLog& l) {
  l.index = j.at("index").get<std::size_t>();
  const auto t = parse_challenge_type(j.at("type").get<std::string>());
  if (!t) throw ParseError("unknown challenge type in instance log");
  l.type = *t;
  l.seed = j.at("seed").get<std::uint64_t>();
  l.solved = j.at("solved").get<bool>();
  l.status = j.at("status").get<std::string>();
  l.steps = j.at("steps").get<int>();
  l.budget = j.at("budget").get<int>();
  l.wall_ms = j.at("wall_ms").get<double>();
  l.error = j.value("error", "");
  l.batches = j.at("batches").get<std::vector<BatchLog>>();
}

inline void to_json(Json& j, const TypeStats& s) {
  j = Json{{"n", s.n},
           {"solved", s.solved},
           {"sr", s.sr},
           {"avg_steps", s.avg_steps},
           {"wall_ms", {{"mean", s.wall_ms_mean}, {"p50", s.wall_ms_p50}, {"max", s.wall_ms_max}}},
           {"errors", s.errors}};
}

inline void from_json(const Json& j, TypeStats& s) {
  s.n = j.at("n").get<std::size_t>();
  s.solved = j.at("solved").get<std::size_t>();
  s.sr = j.at("sr").get<double>();
  s.avg_steps = j.at("avg_steps").get<double>();
  s.wall_ms_mean = j.at("wall_ms").at("mean").get<double>();
  s.wall_ms_p50 = j.at("wall_ms").at("p50").get<double>();
  s.wall_ms_max = j.at("wall_ms").at("max").get<double>();
  s.errors = j.value("errors", std::size_t{0});
}

inline void to_json(Json& j, const EvalReport& r) {
  Json per_type = Json::object();
  for (const auto& [t, s] : r.per_type) per_type[std::string(to_string(t))] = s;
  j = Json{{"manifest",
            {{"agent_id", r.manifest.agent_id},
             {"seed_base", r.manifest.seed_base},
             {"per_type", r.manifest.per_type},
             {"budgets", r.manifest.budgets},
             {"config_hash", r.manifest.config_hash}}},
           {"per_type", per_type},
           {"overall", r.overall}};
}

inline void from_json(const Json& j, EvalReport& r) {
  const auto& m = j.at("manifest");
  r.manifest = {m.at("agent_id").get<std::string>(), m.at("seed_base").get<std::uint64_t>(),
                m.at("per_type").get<std::size_t>(), m.at("budgets").get<std::vector<int>>(),
                m.at("config_hash").get<std::string>()};
  r.per_type.clear();
  const auto& pt = j.at("per_type");
  for (auto t : kAllChallengeTypes) {
    const std::string key(to_string(t));
    if (pt.contains(key)) r.per_type.emplace_back(t, pt[key].get<TypeStats>());
  }
  r.overall = j.at("overall").get<TypeStats>();
}

inline TypeStats summarize(const std::vector<const InstanceLog*>& logs) {
  TypeStats s;
  s.n = logs.size();
  if (logs.empty()) return s;
  long steps = 0;
  std::vector<double> wall;
  for (const auto* l : logs) {
    if (l->solved) {
      ++s.solved;
      steps += l->steps;
    }
    if (!l->error.empty()) ++s.errors;
    wall.push_back(l->wall_ms);
  }
  s.sr = 100.0 * static_cast<double>(s.solved) / static_cast<double>(s.n);
  s.avg_steps = s.solved ? static_cast<double>(steps) / static_cast<double>(s.solved) : 0.0;
  std::sort(wall.begin(), wall.end());
  double sum = 0;
  for (double w : wall) sum += w;
  s.wall_ms_mean = sum / static_cast<double>(wall.size());
  s.wall_ms_p50 = wall[(wall.size() - 1) / 2];
  s.wall_ms_max = wall.back();
  return s;
}

// Deterministic reduction: the result depends only on the log contents.
inline EvalReport aggregate(const std::vector<InstanceLog>& logs, RunManifest manifest) {
  if (logs.empty()) throw Error("evaluation needs at least one instance");
  EvalReport r;
  r.manifest = std::move(manifest);
  std::vector<const InstanceLog*> all;
  for (const auto& l : logs) all.push_back(&l);
  std::sort(all.begin(), all.end(), [](const auto* a, const auto* b) { return a->index < b->index; });
  for (auto t : kAllChallengeTypes) {
    std::vector<const InstanceLog*> sub;
    for (const auto* l : all) {
      if (l->type == t) sub.push_back(l);
    }
    if (!sub.empty()) r.per_type.emplace_back(t, summarize(sub));
  }
  r.overall = summarize(all);
  return r;
}

enum class ReportFormat { Text, Json, Markdown };

inline std::optional<ReportFormat> parse_report_format(std::string_view s) {
  if (s == "text") return ReportFormat::Text;
  if (s == "json") return ReportFormat::Json;
  if (s == "markdown" || s == "md") return ReportFormat::Markdown;
  return std::nullopt;
}

namespace report_detail {

inline std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

struct Column {
  std::string name;
  const TypeStats* stats;
};

inline std::vector<Column> columns(const EvalReport& r) {
  std::vector<Column> cols;
  for (auto t : kAllChallengeTypes) cols.push_back({std::string(display_name(t)), r.find(t)});
  cols.push_back({"Overall", &r.overall});
  return cols;
}

inline std::string cell(const TypeStats* s, int row) {
  if (!s || s->n == 0) return "-";
  switch (row) {
    case 0: return fixed(s->sr);
    case 1: return s->solved ? fixed(s->avg_steps) : "-";
    default: return std::to_string(s->solved) + "/" + std::to_string(s->n);
  }
}

}  // namespace report_detail

inline std::string render_report(const EvalReport& r, ReportFormat format) {
  using namespace report_detail;
  if (r.overall.n == 0) throw Error("report has no instances");
  if (format == ReportFormat::Json) return Json(r).dump(2) + "\n";

  const auto cols = columns(r);
  const char* rows[] = {"SR (%)", "Avg steps", "Solved/n"};
  std::string out;
  if (format == ReportFormat::Markdown) {
    out += "| Metric |";
    for (const auto& c : cols) out += " " + c.name + " |";
    out += "\n|---|";
    for (std::size_t i = 0; i < cols.size(); ++i) out += "---:|";
    out += "\n";
    for (int row = 0; row < 3; ++row) {
      out += std::string("| ") + rows[row] + " |";
      for (const auto& c : cols) out += " " + cell(c.stats, row) + " |";
      out += "\n";
    }
    return out;
  }

  out += "agent " + r.manifest.agent_id + ", seed base " + std::to_string(r.manifest.seed_base) + ", config " +
         r.manifest.config_hash + "\n";
  std::size_t label_w = 10;
  std::vector<std::size_t> widths;
  for (const auto& c : cols) {
    std::size_t w = c.name.size();
    for (int row = 0; row < 3; ++row) w = std::max(w, cell(c.stats, row).size());
    widths.push_back(w);
  }
  const auto pad = [](std::string s, std::size_t w, bool left) {
    const std::string fill(w > s.size() ? w - s.size() : 0, ' ');
    return left ? s + fill : fill + s;
  };
  out += pad("", label_w, true);
  for (std::size_t i = 0; i < cols.size(); ++i) out += "  " + pad(cols[i].name, widths[i], false);
  out += "\n";
  for (int row = 0; row < 3; ++row) {
    out += pad(rows[row], label_w, true);
    for (std::size_t i = 0; i < cols.size(); ++i) out += "  " + pad(cell(cols[i].stats, row), widths[i], false);
    out += "\n";
  }
  return out;
}

}  // namespace capgym
