#pragma once

#include <algorithm>
#include <cmath>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "capgym/core/error.hpp"

namespace capgym {

enum class ChallengeType {
  Text,
  CompactText,
  IconMatch,
  IconSelection,
  Paged,
  Slider,
  ImageGrid,
};

inline constexpr std::size_t kChallengeTypeCount = 7;

// Report column order.
inline constexpr std::array<ChallengeType, kChallengeTypeCount> kAllChallengeTypes = {
    ChallengeType::Text,          ChallengeType::CompactText, ChallengeType::IconMatch,
    ChallengeType::IconSelection, ChallengeType::Paged,       ChallengeType::Slider,
    ChallengeType::ImageGrid,
};

inline constexpr std::size_t index_of(ChallengeType t) { return static_cast<std::size_t>(t); }

inline constexpr std::string_view to_string(ChallengeType t) {
  switch (t) {
    case ChallengeType::Text: return "text";
    case ChallengeType::CompactText: return "compact_text";
    case ChallengeType::IconMatch: return "icon_match";
    case ChallengeType::IconSelection: return "icon_selection";
    case ChallengeType::Paged: return "paged";
    case ChallengeType::Slider: return "slider";
    case ChallengeType::ImageGrid: return "image_grid";
  }
  return "unknown";
}

inline constexpr std::string_view display_name(ChallengeType t) {
  switch (t) {
    case ChallengeType::Text: return "Text";
    case ChallengeType::CompactText: return "Compact Text";
    case ChallengeType::IconMatch: return "Icon Match";
    case ChallengeType::IconSelection: return "Icon Selection";
    case ChallengeType::Paged: return "Paged";
    case ChallengeType::Slider: return "Slider";
    case ChallengeType::ImageGrid: return "Image Grid";
  }
  return "Unknown";
}

inline std::optional<ChallengeType> parse_challenge_type(std::string_view name) {
  for (auto t : kAllChallengeTypes) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

inline bool is_text_type(ChallengeType t) {
  return t == ChallengeType::Text || t == ChallengeType::CompactText;
}

struct Point {
  int x = 0;
  int y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

// Half-open pixel rectangle [x, x+w) x [y, y+h).
struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  int right() const { return x + w; }
  int bottom() const { return y + h; }
  long area() const { return static_cast<long>(std::max(w, 0)) * std::max(h, 0); }
  bool empty() const { return w <= 0 || h <= 0; }
  Point center() const { return {x + w / 2, y + h / 2}; }

  bool contains(Point p) const { return p.x >= x && p.x < right() && p.y >= y && p.y < bottom(); }
  bool contains(const Rect& r) const {
    return r.x >= x && r.y >= y && r.right() <= right() && r.bottom() <= bottom();
  }

  Rect inflated(int d) const { return {x - d, y - d, w + 2 * d, h + 2 * d}; }
  Rect translated(int dx, int dy) const { return {x + dx, y + dy, w, h}; }

  Rect intersect(const Rect& o) const {
    const int l = std::max(x, o.x);
    const int t = std::max(y, o.y);
    const int r = std::min(right(), o.right());
    const int b = std::min(bottom(), o.bottom());
    if (r <= l || b <= t) return {l, t, 0, 0};
    return {l, t, r - l, b - t};
  }

  friend bool operator==(const Rect&, const Rect&) = default;
};

struct Color {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  std::uint8_t a = 255;
  friend bool operator==(const Color&, const Color&) = default;
};

inline double color_distance(Color a, Color b) {
  const double dr = double(a.r) - b.r;
  const double dg = double(a.g) - b.g;
  const double db = double(a.b) - b.b;
  return std::sqrt(dr * dr + dg * dg + db * db);
}

inline double luminance(Color c) { return 0.299 * c.r + 0.587 * c.g + 0.114 * c.b; }

// Geometry roles attached to ground-truth rectangles.
enum class Role {
  InputBox,
  SubmitButton,
  Icon,
  Tile,
  Checkbox,
  NavPrev,
  NavNext,
  SliderHandle,
  SliderGoal,
};

inline constexpr std::string_view to_string(Role r) {
  switch (r) {
    case Role::InputBox: return "input-box";
    case Role::SubmitButton: return "submit-button";
    case Role::Icon: return "icon";
    case Role::Tile: return "tile";
    case Role::Checkbox: return "checkbox";
    case Role::NavPrev: return "nav-prev";
    case Role::NavNext: return "nav-next";
    case Role::SliderHandle: return "slider-handle";
    case Role::SliderGoal: return "slider-goal";
  }
  return "unknown";
}

inline Role parse_role(std::string_view s) {
  for (Role r : {Role::InputBox, Role::SubmitButton, Role::Icon, Role::Tile, Role::Checkbox,
                 Role::NavPrev, Role::NavNext, Role::SliderHandle, Role::SliderGoal}) {
    if (to_string(r) == s) return r;
  }
  throw ParseError("unknown role '" + std::string(s) + "'");
}

}  // namespace capgym
