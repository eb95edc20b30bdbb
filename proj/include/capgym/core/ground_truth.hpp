#pragma once

#include <optional>
#include <string>
#include <vector>

#include "capgym/core/action.hpp"
#include "capgym/core/json.hpp"
#include "capgym/core/types.hpp"

namespace capgym {

struct Target {
  Role role = Role::Icon;
  Rect rect;
  int index = -1;  // tile index, icon index or page, depending on role
  friend bool operator==(const Target&, const Target&) = default;
};

// Privileged per-instance solution data.
struct GroundTruth {
  std::string answer_label;
  std::vector<Target> targets;
  std::optional<int> goal_offset_px;
  std::optional<int> target_page;
  std::vector<int> target_tiles;  // sorted
  std::vector<ActionBatch> oracle_script;

  const Target* find(Role role, int index = -1) const {
    for (const auto& t : targets) {
      if (t.role == role && (index < 0 || t.index == index)) return &t;
    }
    return nullptr;
  }

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

inline void to_json(Json& j, const Target& t) {
  j = Json{{"role", std::string(to_string(t.role))}, {"x", t.rect.x}, {"y", t.rect.y},
           {"w", t.rect.w}, {"h", t.rect.h}, {"index", t.index}};
}

inline void from_json(const Json& j, Target& t) {
  t.role = parse_role(j.at("role").get<std::string>());
  t.rect = {j.at("x").get<int>(), j.at("y").get<int>(), j.at("w").get<int>(), j.at("h").get<int>()};
  t.index = j.value("index", -1);
}

inline void to_json(Json& j, const GroundTruth& g) {
  j = Json{{"answer_label", g.answer_label},
           {"targets", g.targets},
           {"goal_offset_px", g.goal_offset_px ? Json(*g.goal_offset_px) : Json(nullptr)},
           {"target_page", g.target_page ? Json(*g.target_page) : Json(nullptr)},
           {"target_tiles", g.target_tiles},
           {"oracle_script", g.oracle_script}};
}

inline void from_json(const Json& j, GroundTruth& g) {
  g.answer_label = j.at("answer_label").get<std::string>();
  g.targets = j.at("targets").get<std::vector<Target>>();
  g.goal_offset_px = j.at("goal_offset_px").is_null() ? std::nullopt
                                                      : std::optional<int>(j["goal_offset_px"].get<int>());
  g.target_page = j.at("target_page").is_null() ? std::nullopt
                                                : std::optional<int>(j["target_page"].get<int>());
  g.target_tiles = j.at("target_tiles").get<std::vector<int>>();
  g.oracle_script = j.at("oracle_script").get<std::vector<ActionBatch>>();
}

}  // namespace capgym
