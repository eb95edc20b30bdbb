#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "capgym/render/image.hpp"

namespace capgym {

struct Vec2 {
  double x = 0;
  double y = 0;
};

// One filled primitive in the glyph's unit square [-1, 1]^2 (y down).
struct GlyphShape {
  enum class Kind { Polygon, Circle };
  Kind kind = Kind::Polygon;
  bool subtract = false;
  std::vector<Vec2> points;
  Vec2 center;
  double radius = 0;

  bool covers(double u, double v) const {
    if (kind == Kind::Circle) {
      const double dx = u - center.x;
      const double dy = v - center.y;
      return dx * dx + dy * dy <= radius * radius;
    }
    bool inside = false;
    for (std::size_t i = 0, j = points.size() - 1; i < points.size(); j = i++) {
      const auto& a = points[i];
      const auto& b = points[j];
      if ((a.y > v) != (b.y > v) && u < (b.x - a.x) * (v - a.y) / (b.y - a.y) + a.x) inside = !inside;
    }
    return inside;
  }
};

// A named icon: either a vector shape list or a raster alpha mask loaded from disk.
struct IconGlyph {
  std::string id;
  std::vector<GlyphShape> shapes;
  Image raster;

  bool covers(double u, double v) const {
    if (u < -1 || u > 1 || v < -1 || v > 1) return false;
    if (!raster.empty()) {
      const int x = std::min(raster.width() - 1, static_cast<int>((u + 1) / 2 * raster.width()));
      const int y = std::min(raster.height() - 1, static_cast<int>((v + 1) / 2 * raster.height()));
      return raster.at(x, y).a >= 128;
    }
    bool in = false;
    for (const auto& s : shapes) {
      if (s.covers(u, v)) in = !s.subtract;
    }
    return in;
  }

  // Human-readable name used in instructions ("arrow-up" -> "arrow up").
  std::string display_name() const {
    std::string out = id;
    for (auto& c : out) {
      if (c == '-' || c == '_') c = ' ';
    }
    return out;
  }
};

namespace glyph_detail {

using Kind = GlyphShape::Kind;

inline GlyphShape poly(std::vector<Vec2> pts, bool sub = false) {
  return {Kind::Polygon, sub, std::move(pts), {}, 0};
}
inline GlyphShape rect(double x0, double y0, double x1, double y1, bool sub = false) {
  return poly({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}, sub);
}
inline GlyphShape circle(double cx, double cy, double r, bool sub = false) {
  return {Kind::Circle, sub, {}, {cx, cy}, r};
}
inline GlyphShape regular(int n, double r, double phase = -std::numbers::pi / 2) {
  std::vector<Vec2> pts;
  for (int i = 0; i < n; ++i) {
    const double a = phase + 2 * std::numbers::pi * i / n;
    pts.push_back({r * std::cos(a), r * std::sin(a)});
  }
  return poly(std::move(pts));
}
inline GlyphShape star(int points, double outer, double inner) {
  std::vector<Vec2> pts;
  for (int i = 0; i < 2 * points; ++i) {
    const double a = -std::numbers::pi / 2 + std::numbers::pi * i / points;
    const double r = i % 2 == 0 ? outer : inner;
    pts.push_back({r * std::cos(a), r * std::sin(a)});
  }
  return poly(std::move(pts));
}
inline GlyphShape rotated(GlyphShape s, double deg) {
  const double a = deg * std::numbers::pi / 180;
  for (auto& p : s.points) {
    p = {p.x * std::cos(a) - p.y * std::sin(a), p.x * std::sin(a) + p.y * std::cos(a)};
  }
  const Vec2 c = s.center;
  s.center = {c.x * std::cos(a) - c.y * std::sin(a), c.x * std::sin(a) + c.y * std::cos(a)};
  return s;
}
inline GlyphShape arrow(double deg) {
  return rotated(poly({{0, -0.9}, {0.75, -0.1}, {0.3, -0.1}, {0.3, 0.9}, {-0.3, 0.9}, {-0.3, -0.1}, {-0.75, -0.1}}),
                 deg);
}

}  // namespace glyph_detail

// The built-in glyph set. Every shape stays inside the unit circle so icons
// can rotate freely within their bounding box.
inline std::vector<IconGlyph> builtin_glyphs() {
  using namespace glyph_detail;
  std::vector<IconGlyph> g;
  const auto add = [&g](std::string id, std::vector<GlyphShape> shapes) {
    g.push_back({std::move(id), std::move(shapes), {}});
  };
  add("circle", {circle(0, 0, 0.85)});
  add("square", {rect(-0.65, -0.65, 0.65, 0.65)});
  add("triangle", {poly({{0, -0.9}, {0.8, 0.5}, {-0.8, 0.5}})});
  add("diamond", {poly({{0, -0.95}, {0.6, 0}, {0, 0.95}, {-0.6, 0}})});
  add("pentagon", {regular(5, 0.9)});
  add("hexagon", {regular(6, 0.9)});
  add("octagon", {regular(8, 0.9, std::numbers::pi / 8)});
  add("star", {star(5, 0.95, 0.4)});
  add("sparkle", {star(4, 0.95, 0.28)});
  add("heart", {circle(-0.38, -0.25, 0.42), circle(0.38, -0.25, 0.42),
                poly({{-0.78, -0.08}, {0.78, -0.08}, {0, 0.8}})});
  add("x-mark", {rotated(rect(-0.18, -0.85, 0.18, 0.85), 45), rotated(rect(-0.18, -0.85, 0.18, 0.85), -45)});
  add("plus", {rect(-0.2, -0.85, 0.2, 0.85), rect(-0.85, -0.2, 0.85, 0.2)});
  add("arrow-up", {arrow(0)});
  add("arrow-right", {arrow(90)});
  add("arrow-down", {arrow(180)});
  add("arrow-left", {arrow(270)});
  add("moon", {circle(0, 0, 0.85), circle(0.4, -0.25, 0.65, true)});
  add("ring", {circle(0, 0, 0.88), circle(0, 0, 0.5, true)});
  add("house", {poly({{0, -0.85}, {0.8, -0.05}, {-0.8, -0.05}}), rect(-0.55, -0.1, 0.55, 0.6),
                rect(-0.15, 0.2, 0.15, 0.6, true)});
  add("bolt", {poly({{0.2, -0.95}, {-0.55, 0.1}, {-0.05, 0.1}, {-0.2, 0.95}, {0.55, -0.1}, {0.05, -0.1}})});
  add("flag", {rect(-0.65, -0.75, -0.5, 0.7), poly({{-0.5, -0.75}, {0.7, -0.45}, {-0.5, -0.15}})});
  add("tree", {poly({{0, -0.95}, {0.5, -0.25}, {-0.5, -0.25}}), poly({{0, -0.55}, {0.65, 0.4}, {-0.65, 0.4}}),
               rect(-0.13, 0.4, 0.13, 0.85)});
  add("cloud", {circle(-0.42, 0.12, 0.36), circle(0.05, -0.12, 0.45), circle(0.45, 0.15, 0.34),
                rect(-0.42, 0.12, 0.45, 0.48)});
  add("droplet", {circle(0, 0.28, 0.55), poly({{0, -0.9}, {0.5, 0.08}, {-0.5, 0.08}})});
  add("shield", {poly({{-0.65, -0.7}, {0.65, -0.7}, {0.65, 0.05}, {0, 0.85}, {-0.65, 0.05}})});
  add("key", {circle(-0.45, 0, 0.4), circle(-0.45, 0, 0.18, true), rect(-0.1, -0.1, 0.85, 0.1),
              rect(0.45, 0.1, 0.58, 0.38), rect(0.68, 0.1, 0.8, 0.32)});
  add("lock", {circle(0, -0.3, 0.5), circle(0, -0.3, 0.3, true), rect(-1, -0.3, 1, 1, true),
               rect(-0.6, -0.3, 0.6, 0.7), circle(0, 0.15, 0.12, true)});
  add("cup", {circle(0.45, 0.0, 0.33), circle(0.45, 0.0, 0.17, true),
              poly({{-0.65, -0.55}, {0.4, -0.55}, {0.3, 0.65}, {-0.55, 0.65}})});
  add("bookmark", {poly({{-0.5, -0.8}, {0.5, -0.8}, {0.5, 0.8}, {0, 0.35}, {-0.5, 0.8}})});
  add("hourglass", {poly({{-0.6, -0.75}, {0.6, -0.75}, {0, 0}}), poly({{0, 0}, {0.6, 0.75}, {-0.6, 0.75}})});
  add("crown", {poly({{-0.85, -0.45}, {-0.42, 0.0}, {0, -0.65}, {0.42, 0.0}, {0.85, -0.45}, {0.68, 0.5},
                      {-0.68, 0.5}})});
  add("check", {poly({{-0.85, 0.0}, {-0.58, -0.28}, {-0.25, 0.05}, {0.55, -0.7}, {0.82, -0.42}, {-0.25, 0.62}})});
  add("tag", {poly({{-0.85, -0.45}, {0.3, -0.45}, {0.85, 0}, {0.3, 0.45}, {-0.85, 0.45}}),
              circle(0.25, 0, 0.13, true)});
  add("bell", {circle(0, -0.2, 0.5), poly({{-0.5, -0.2}, {0.5, -0.2}, {0.75, 0.5}, {-0.75, 0.5}}),
               circle(0, 0.68, 0.16)});
  add("umbrella", {circle(0, -0.05, 0.85), rect(-1, -0.05, 1, 1, true), rect(-0.07, -0.05, 0.07, 0.75)});
  add("gem", {poly({{-0.45, -0.65}, {0.45, -0.65}, {0.85, -0.2}, {0, 0.85}, {-0.85, -0.2}})});
  return g;
}

}  // namespace capgym
