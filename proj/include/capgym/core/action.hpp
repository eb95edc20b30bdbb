#pragma once

#include <string>
#include <variant>
#include <vector>

#include "capgym/core/json.hpp"
#include "capgym/core/types.hpp"

namespace capgym {

struct LeftClick {
  Point coordinate;
  friend bool operator==(const LeftClick&, const LeftClick&) = default;
};

struct Drag {
  Point start;
  Point end;
  friend bool operator==(const Drag&, const Drag&) = default;
};

// Appends to the focused input. '\b' deletes the last character, '\n' submits.
struct Type {
  std::string text;
  friend bool operator==(const Type&, const Type&) = default;
};

struct Terminate {
  friend bool operator==(const Terminate&, const Terminate&) = default;
};

using Action = std::variant<LeftClick, Drag, Type, Terminate>;

// One batch is one agent step (one model call).
struct ActionBatch {
  std::vector<Action> actions;
  friend bool operator==(const ActionBatch&, const ActionBatch&) = default;
};

inline void to_json(Json& j, const Action& a) {
  std::visit(
      [&j](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LeftClick>) {
          j = Json{{"action", "left_click"}, {"coordinate", v.coordinate}};
        } else if constexpr (std::is_same_v<T, Drag>) {
          j = Json{{"action", "drag"}, {"start", v.start}, {"end", v.end}};
        } else if constexpr (std::is_same_v<T, Type>) {
          j = Json{{"action", "type"}, {"text", v.text}};
        } else {
          j = Json{{"action", "terminate"}};
        }
      },
      a);
}

inline void from_json(const Json& j, Action& a) {
  if (!j.is_object()) throw ParseError("action must be a JSON object");
  const auto it = j.find("action");
  if (it == j.end() || !it->is_string()) throw ParseError("action object needs a string 'action' field");
  const auto name = it->get<std::string>();
  try {
    if (name == "left_click") {
      a = LeftClick{j.at("coordinate").get<Point>()};
    } else if (name == "drag") {
      a = Drag{j.at("start").get<Point>(), j.at("end").get<Point>()};
    } else if (name == "type") {
      if (!j.at("text").is_string()) throw ParseError("type.text must be a string");
      a = Type{j.at("text").get<std::string>()};
    } else if (name == "terminate") {
      a = Terminate{};
    } else {
      throw ParseError("unknown action '" + name + "'");
    }
  } catch (const Json::exception& e) {
    throw ParseError("malformed '" + name + "' action: " + e.what());
  }
}

inline void to_json(Json& j, const ActionBatch& b) { j = Json{{"actions", b.actions}}; }

inline void from_json(const Json& j, ActionBatch& b) {
  if (!j.is_object() || !j.contains("actions") || !j["actions"].is_array()) {
    throw ParseError("batch must be an object with an 'actions' array");
  }
  b.actions.clear();
  for (const auto& item : j["actions"]) b.actions.push_back(item.get<Action>());
  if (b.actions.empty()) throw ParseError("batch must contain at least one action");
}

inline Action parse_action(std::string_view text) { return parse_json(text, "action").get<Action>(); }

inline ActionBatch parse_batch(std::string_view text) {
  return parse_json(text, "action batch").get<ActionBatch>();
}

inline std::string_view action_name(const Action& a) {
  switch (a.index()) {
    case 0: return "left_click";
    case 1: return "drag";
    case 2: return "type";
    default: return "terminate";
  }
}

}  // namespace capgym
