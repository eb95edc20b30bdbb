#pragma once

// Shared JSON helpers and adapters for the core value types.

#include <nlohmann/json.hpp>
#include <string>

#include "capgym/core/error.hpp"
#include "capgym/core/types.hpp"

namespace capgym {

using Json = nlohmann::json;

inline Json parse_json(std::string_view text, std::string_view what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

inline void to_json(Json& j, const Point& p) { j = Json::array({p.x, p.y}); }

inline void from_json(const Json& j, Point& p) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ParseError("coordinate must be an [x, y] pair of numbers");
  }
  // Agents may emit fractional pixels; round to the nearest pixel.
  p.x = static_cast<int>(std::lround(j[0].get<double>()));
  p.y = static_cast<int>(std::lround(j[1].get<double>()));
}

inline void to_json(Json& j, const Rect& r) { j = Json{{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}}; }

inline void from_json(const Json& j, Rect& r) {
  r.x = j.at("x").get<int>();
  r.y = j.at("y").get<int>();
  r.w = j.at("w").get<int>();
  r.h = j.at("h").get<int>();
}

inline void to_json(Json& j, const Color& c) {
  j = Json::array({c.r, c.g, c.b});
}

inline void from_json(const Json& j, Color& c) {
  c.r = j.at(0).get<std::uint8_t>();
  c.g = j.at(1).get<std::uint8_t>();
  c.b = j.at(2).get<std::uint8_t>();
  c.a = 255;
}

}  // namespace capgym
