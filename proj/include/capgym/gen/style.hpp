#pragma once

#include <vector>

#include "capgym/core/config.hpp"
#include "capgym/core/rng.hpp"
#include "capgym/gen/scene.hpp"
#include "capgym/render/image.hpp"

namespace capgym {

// Sampled layout and styling parameters for one instance.
struct StyleSample {
  Background background;
  std::vector<Color> palette;
  Color panel_color;
  Color ink;
  Color accent;
  int font_px = 14;
  int padding_px = 8;
  int margin_px = 8;
  int canvas_w = 0;
  int canvas_h = 0;
  int container_w = 0;
  int container_h = 0;
  int submit_variant = 0;  // 0: below right, 1: inline, 2: below left
  friend bool operator==(const StyleSample&, const StyleSample&) = default;
};

inline Color sample_color(Rng& rng) {
  return {static_cast<std::uint8_t>(rng.uniform_int(0, 255)), static_cast<std::uint8_t>(rng.uniform_int(0, 255)),
          static_cast<std::uint8_t>(rng.uniform_int(0, 255)), 255};
}

// Colors pairwise at least `min_distance` apart and apart from `avoid`.
inline std::vector<Color> sample_palette(Rng& rng, int count, double min_distance, Color avoid) {
  std::vector<Color> out;
  double threshold = min_distance;
  int attempts = 0;
  while (static_cast<int>(out.size()) < count) {
    const Color c = sample_color(rng);
    bool ok = color_distance(c, avoid) >= threshold;
    for (const auto& o : out) ok = ok && color_distance(c, o) >= threshold;
    if (ok) out.push_back(c);
    // Very strict thresholds can be infeasible; relax gradually rather than spin.
    if (++attempts % 2000 == 0) threshold *= 0.9;
  }
  return out;
}

inline StyleSample sample_style(Rng& rng, const EnvConfig& cfg, const CanvasRange& canvas,
                                std::size_t background_count) {
  StyleSample s;
  s.canvas_w = rng.uniform_int(canvas.width.min, canvas.width.max);
  s.canvas_h = rng.uniform_int(canvas.height.min, canvas.height.max);
  s.font_px = rng.uniform_int(cfg.font_size_px.min, cfg.font_size_px.max);
  s.padding_px = rng.uniform_int(cfg.padding_px.min, cfg.padding_px.max);
  s.margin_px = rng.uniform_int(cfg.margin_px.min, cfg.margin_px.max);
  s.submit_variant = rng.uniform_int(0, 2);
  if (background_count > 0 && rng.bernoulli(0.5)) {
    s.background.kind = Background::Kind::Image;
    s.background.image = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(background_count) - 1));
  } else {
    s.background.kind = Background::Kind::Solid;
    s.background.color = sample_color(rng);
  }
  const bool dark = rng.bernoulli(0.3);
  s.panel_color = dark ? Color{static_cast<std::uint8_t>(rng.uniform_int(20, 60)),
                               static_cast<std::uint8_t>(rng.uniform_int(20, 60)),
                               static_cast<std::uint8_t>(rng.uniform_int(30, 70)), 255}
                       : Color{static_cast<std::uint8_t>(rng.uniform_int(225, 255)),
                               static_cast<std::uint8_t>(rng.uniform_int(225, 255)),
                               static_cast<std::uint8_t>(rng.uniform_int(225, 255)), 255};
  s.ink = contrasting_ink(s.panel_color);
  const int palette_n = rng.uniform_int(cfg.palette_size.min, cfg.palette_size.max);
  s.palette = sample_palette(rng, palette_n, cfg.palette_min_distance, s.panel_color);
  s.accent = s.palette.front();
  s.container_w = s.canvas_w - 2 * s.margin_px;
  s.container_h = s.canvas_h - 2 * s.margin_px;
  return s;
}

}  // namespace capgym
