#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "capgym/core/types.hpp"

namespace capgym {

// 8-bit RGBA raster, row-major, origin top-left.
class Image {
 public:
  Image() = default;
  Image(int width, int height, Color fill = {255, 255, 255, 255})
      : width_(width), height_(height), pixels_(static_cast<std::size_t>(std::max(width, 0)) *
                                                std::max(height, 0) * 4) {
    for (std::size_t i = 0; i < pixels_.size(); i += 4) {
      pixels_[i] = fill.r;
      pixels_[i + 1] = fill.g;
      pixels_[i + 2] = fill.b;
      pixels_[i + 3] = fill.a;
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return width_ <= 0 || height_ <= 0; }
  Rect bounds() const { return {0, 0, width_, height_}; }
  const std::vector<std::uint8_t>& pixels() const { return pixels_; }
  std::vector<std::uint8_t>& pixels() { return pixels_; }

  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  Color at(int x, int y) const {
    const auto i = offset(x, y);
    return {pixels_[i], pixels_[i + 1], pixels_[i + 2], pixels_[i + 3]};
  }

  // Clamped lookup, used for resampling.
  Color sample(int x, int y) const {
    return at(std::clamp(x, 0, width_ - 1), std::clamp(y, 0, height_ - 1));
  }

  void set(int x, int y, Color c) {
    if (!in_bounds(x, y)) return;
    const auto i = offset(x, y);
    pixels_[i] = c.r;
    pixels_[i + 1] = c.g;
    pixels_[i + 2] = c.b;
    pixels_[i + 3] = c.a;
  }

  // Source-over blend of an opaque color with the given coverage in [0, 255].
  void blend(int x, int y, Color c, int alpha) {
    if (!in_bounds(x, y)) return;
    const auto i = offset(x, y);
    const int a = std::clamp(alpha, 0, 255);
    pixels_[i] = static_cast<std::uint8_t>((c.r * a + pixels_[i] * (255 - a) + 127) / 255);
    pixels_[i + 1] = static_cast<std::uint8_t>((c.g * a + pixels_[i + 1] * (255 - a) + 127) / 255);
    pixels_[i + 2] = static_cast<std::uint8_t>((c.b * a + pixels_[i + 2] * (255 - a) + 127) / 255);
    pixels_[i + 3] = 255;
  }

  void fill_rect(const Rect& r, Color c) {
    const Rect clipped = r.intersect(bounds());
    for (int y = clipped.y; y < clipped.bottom(); ++y) {
      for (int x = clipped.x; x < clipped.right(); ++x) set(x, y, c);
    }
  }

  void blend_rect(const Rect& r, Color c, int alpha) {
    const Rect clipped = r.intersect(bounds());
    for (int y = clipped.y; y < clipped.bottom(); ++y) {
      for (int x = clipped.x; x < clipped.right(); ++x) blend(x, y, c, alpha);
    }
  }

  // Border drawn inside `r`.
  void stroke_rect(const Rect& r, Color c, int thickness = 1) {
    fill_rect({r.x, r.y, r.w, thickness}, c);
    fill_rect({r.x, r.bottom() - thickness, r.w, thickness}, c);
    fill_rect({r.x, r.y, thickness, r.h}, c);
    fill_rect({r.right() - thickness, r.y, thickness, r.h}, c);
  }

  void fill_circle(double cx, double cy, double radius, Color c) {
    const int x0 = static_cast<int>(std::floor(cx - radius));
    const int x1 = static_cast<int>(std::ceil(cx + radius));
    const int y0 = static_cast<int>(std::floor(cy - radius));
    const int y1 = static_cast<int>(std::ceil(cy + radius));
    const double r2 = radius * radius;
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double dx = x + 0.5 - cx;
        const double dy = y + 0.5 - cy;
        if (dx * dx + dy * dy <= r2) set(x, y, c);
      }
    }
  }

  void draw_line(Point a, Point b, Color c, int thickness = 1) {
    const double len = std::hypot(double(b.x - a.x), double(b.y - a.y));
    const int steps = std::max(1, static_cast<int>(std::ceil(len * 2)));
    const double half = thickness / 2.0;
    for (int i = 0; i <= steps; ++i) {
      const double t = static_cast<double>(i) / steps;
      const double x = a.x + (b.x - a.x) * t;
      const double y = a.y + (b.y - a.y) * t;
      if (thickness <= 1) {
        set(static_cast<int>(std::floor(x)), static_cast<int>(std::floor(y)), c);
      } else {
        fill_circle(x + 0.5, y + 0.5, half, c);
      }
    }
  }

  // Nearest-neighbour scaled copy of `src` into `dst`.
  void blit_scaled(const Image& src, const Rect& dst) {
    if (src.empty() || dst.empty()) return;
    const Rect clipped = dst.intersect(bounds());
    for (int y = clipped.y; y < clipped.bottom(); ++y) {
      const int sy = static_cast<int>((static_cast<long>(y - dst.y) * src.height()) / dst.h);
      for (int x = clipped.x; x < clipped.right(); ++x) {
        const int sx = static_cast<int>((static_cast<long>(x - dst.x) * src.width()) / dst.w);
        set(x, y, src.at(sx, sy));
      }
    }
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t offset(int x, int y) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) * 4;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

inline Color mix(Color a, Color b, double t) {
  const auto lerp = [t](std::uint8_t x, std::uint8_t y) {
    return static_cast<std::uint8_t>(std::lround(x + (y - x) * std::clamp(t, 0.0, 1.0)));
  };
  return {lerp(a.r, b.r), lerp(a.g, b.g), lerp(a.b, b.b), 255};
}

inline Color darken(Color c, double amount) { return mix(c, {0, 0, 0, 255}, amount); }
inline Color lighten(Color c, double amount) { return mix(c, {255, 255, 255, 255}, amount); }

inline Color contrasting_ink(Color background) {
  return luminance(background) > 140 ? Color{20, 20, 28, 255} : Color{245, 245, 245, 255};
}

}  // namespace capgym
