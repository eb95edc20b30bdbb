#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "capgym/core/error.hpp"
#include "capgym/core/hash.hpp"
#include "capgym/gen/asset_bank.hpp"
#include "capgym/gen/scene.hpp"
#include "capgym/render/font.hpp"
#include "capgym/render/image.hpp"
#include "capgym/render/png.hpp"

namespace capgym {

struct Screenshot {
  Image image;
  std::string hash;  // function of dimensions and pixels only

  int width() const { return image.width(); }
  int height() const { return image.height(); }
  friend bool operator==(const Screenshot&, const Screenshot&) = default;
};

inline std::string content_hash(const Image& img) {
  std::uint64_t h = kFnvOffset;
  const std::uint32_t dims[2] = {static_cast<std::uint32_t>(img.width()), static_cast<std::uint32_t>(img.height())};
  h = fnv1a64(std::span(reinterpret_cast<const std::uint8_t*>(dims), sizeof(dims)), h);
  return to_hex(fnv1a64(img.pixels(), h));
}

inline Screenshot make_screenshot(Image img) {
  Screenshot s{std::move(img), {}};
  s.hash = content_hash(s.image);
  return s;
}

inline std::vector<std::uint8_t> encode_png(const Screenshot& shot) { return encode_png(shot.image); }

namespace render_detail {

inline Color sample_bilinear(const Image& src, double u, double v) {
  const double x = u * src.width() - 0.5;
  const double y = v * src.height() - 0.5;
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0;
  const double fy = y - y0;
  const Color a = src.sample(x0, y0), b = src.sample(x0 + 1, y0);
  const Color c = src.sample(x0, y0 + 1), d = src.sample(x0 + 1, y0 + 1);
  return mix(mix(a, b, fx), mix(c, d, fx), fy);
}

inline void draw_image_bilinear(Image& dst, const Image& src, const Rect& r) {
  const Rect clipped = r.intersect(dst.bounds());
  for (int y = clipped.y; y < clipped.bottom(); ++y) {
    for (int x = clipped.x; x < clipped.right(); ++x) {
      dst.set(x, y, sample_bilinear(src, (x - r.x + 0.5) / r.w, (y - r.y + 0.5) / r.h));
    }
  }
}

inline void draw_centered_text(Image& img, const Rect& r, const std::string& text, int font_px, Color c) {
  const BitmapFont font(font_px);
  const int w = font.text_width(text);
  font.draw(img, {r.x + (r.w - w) / 2, r.y + (r.h - font.line_height()) / 2}, text, c);
}

inline void draw_label(Image& img, const Label& l) {
  const BitmapFont font(l.font_px);
  int y = l.rect.y;
  for (const auto& line : l.lines) {
    font.draw(img, {l.rect.x, y}, line, l.color);
    y += font.line_height();
  }
}

inline void draw_button(Image& img, const Button& b) {
  img.fill_rect(b.rect, b.fill);
  img.stroke_rect(b.rect, darken(b.fill, 0.3), 1);
  draw_centered_text(img, b.rect, b.label, b.font_px, b.ink);
}

inline void draw_input(Image& img, const InputBox& in, Color accent) {
  img.fill_rect(in.rect, {255, 255, 255, 255});
  img.stroke_rect(in.rect, in.focused ? accent : Color{150, 150, 150, 255}, 2);
  const BitmapFont font(in.font_px);
  const int max_chars = std::max(0, (in.rect.w - 16) / font.advance());
  std::string shown = in.text;
  if (static_cast<int>(shown.size()) > max_chars) shown = shown.substr(shown.size() - static_cast<std::size_t>(max_chars));
  const Point origin{in.rect.x + 8, in.rect.y + (in.rect.h - font.line_height()) / 2};
  font.draw(img, origin, shown, {20, 20, 20, 255});
  if (in.focused) {
    const int cx = origin.x + font.text_width(shown) + 1;
    img.fill_rect({cx, origin.y, 2, font.line_height()}, accent);
  }
}

inline void draw_icon(Image& img, const IconGlyph& glyph, const IconNode& node) {
  const Rect& r = node.rect;
  if (r.empty()) return;
  const double a = -node.rotation_deg * std::numbers::pi / 180;
  const double ca = std::cos(a), sa = std::sin(a);
  const double half = r.w / 2.0;
  const double cx = r.x + r.w / 2.0, cy = r.y + r.h / 2.0;
  std::vector<std::uint8_t> cover(static_cast<std::size_t>(r.w * r.h), 0);
  for (int y = 0; y < r.h; ++y) {
    for (int x = 0; x < r.w; ++x) {
      const double dx = (r.x + x + 0.5 - cx) / half;
      const double dy = (r.y + y + 0.5 - cy) / half;
      const double u = dx * ca - dy * sa;
      const double v = dx * sa + dy * ca;
      cover[static_cast<std::size_t>(y * r.w + x)] = glyph.covers(u, v) ? 1 : 0;
    }
  }
  const Color edge = darken(node.color, 0.45);
  const auto covered = [&](int x, int y) {
    return x >= 0 && y >= 0 && x < r.w && y < r.h && cover[static_cast<std::size_t>(y * r.w + x)];
  };
  for (int y = 0; y < r.h; ++y) {
    for (int x = 0; x < r.w; ++x) {
      if (!covered(x, y)) continue;
      const bool border = !covered(x - 1, y) || !covered(x + 1, y) || !covered(x, y - 1) || !covered(x, y + 1);
      img.set(r.x + x, r.y + y, border ? edge : node.color);
    }
  }
}

inline void draw_tile(Image& img, const AssetBank& bank, const ImageTile& t, Color accent) {
  img.blit_scaled(bank.images.at(t.image).pixels, t.rect);
  if (t.selected) {
    img.stroke_rect(t.rect, accent, 4);
    const int badge = std::max(8, t.rect.w / 6);
    const double bx = t.rect.x + 4 + badge / 2.0 + 2;
    const double by = t.rect.y + 4 + badge / 2.0 + 2;
    img.fill_circle(bx, by, badge / 2.0, accent);
    const Color ink = contrasting_ink(accent);
    img.draw_line({static_cast<int>(bx - badge / 4.0), static_cast<int>(by)},
                  {static_cast<int>(bx - 1), static_cast<int>(by + badge / 4.0)}, ink, 2);
    img.draw_line({static_cast<int>(bx - 1), static_cast<int>(by + badge / 4.0)},
                  {static_cast<int>(bx + badge / 4.0), static_cast<int>(by - badge / 4.0)}, ink, 2);
  }
}

// Puzzle-piece membership in local piece coordinates [0, size)^2.
inline bool piece_mask(int size, std::uint32_t variant, double x, double y) {
  const double r = size / 6.0;
  const double body0 = r;
  const double body1 = size - r;
  const double mid = size / 2.0;
  bool in = x >= body0 && x < body1 && y >= body0 && y < body1;
  const auto knob = [&](double cx, double cy, bool outward) {
    if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) in = outward;
  };
  knob(mid, body0, (variant & 1) != 0);
  knob(body1, mid, (variant & 2) != 0);
  knob(mid, body1, (variant & 4) != 0);
  return in;
}

inline bool piece_edge(int size, std::uint32_t variant, int x, int y) {
  const auto m = [&](int px, int py) { return piece_mask(size, variant, px + 0.5, py + 0.5); };
  return m(x, y) && (!m(x - 1, y) || !m(x + 1, y) || !m(x, y - 1) || !m(x, y + 1));
}

inline void draw_slider(Image& img, const AssetBank& bank, const SliderWidget& s, Color accent, int font_px) {
  const Image& bg = bank.backgrounds.at(s.image).pixels;
  draw_image_bilinear(img, bg, s.area);
  // The piece shows the pixels that belong in the gap.
  const Rect gap = s.piece_rect(s.gap_offset);
  std::vector<Color> piece(static_cast<std::size_t>(s.piece_size * s.piece_size));
  for (int y = 0; y < s.piece_size; ++y) {
    for (int x = 0; x < s.piece_size; ++x) {
      piece[static_cast<std::size_t>(y * s.piece_size + x)] = img.sample(gap.x + x, gap.y + y);
    }
  }
  for (int y = 0; y < s.piece_size; ++y) {
    for (int x = 0; x < s.piece_size; ++x) {
      if (!piece_mask(s.piece_size, s.mask_variant, x + 0.5, y + 0.5)) continue;
      if (piece_edge(s.piece_size, s.mask_variant, x, y)) {
        img.set(gap.x + x, gap.y + y, {255, 255, 255, 255});
      } else {
        img.blend(gap.x + x, gap.y + y, {0, 0, 0, 255}, 150);
      }
    }
  }
  const Rect at = s.piece_rect(s.handle_offset);
  for (int y = 0; y < s.piece_size; ++y) {
    for (int x = 0; x < s.piece_size; ++x) {
      if (!piece_mask(s.piece_size, s.mask_variant, x + 0.5, y + 0.5)) continue;
      const Color c = piece_edge(s.piece_size, s.mask_variant, x, y) ? Color{250, 250, 210, 255}
                                                                      : piece[static_cast<std::size_t>(y * s.piece_size + x)];
      img.set(at.x + x, at.y + y, c);
    }
  }
  img.fill_rect(s.track, {222, 226, 232, 255});
  img.stroke_rect(s.track, {180, 184, 192, 255}, 1);
  const Rect handle = s.handle_rect();
  img.fill_rect({s.track.x, s.track.y, handle.x - s.track.x, s.track.h}, lighten(accent, 0.6));
  img.fill_rect(handle, accent);
  img.stroke_rect(handle, darken(accent, 0.35), 1);
  draw_centered_text(img, handle, ">>", std::min(font_px, 16), contrasting_ink(accent));
}

inline std::uint64_t pixel_hash(std::uint64_t seed, int x, int y) {
  return splitmix64(seed ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32) ^
                    static_cast<std::uint32_t>(y));
}

inline void draw_text_panel(Image& img, const AssetBank& bank, const TextPanel& tp) {
  if (tp.bank_image) {
    img.blit_scaled(bank.distorted_text.at(*tp.bank_image).pixels, tp.rect);
    return;
  }
  img.fill_rect(tp.rect, tp.tint);
  const BitmapFont font(tp.char_px);
  const int text_w = font.text_width(tp.text);
  const int x0 = tp.rect.x + (tp.rect.w - text_w) / 2;
  const int y0 = tp.rect.y + (tp.rect.h - font.line_height()) / 2;
  const double two_pi = 2 * std::numbers::pi;
  for (int y = tp.rect.y; y < tp.rect.bottom(); ++y) {
    for (int x = tp.rect.x; x < tp.rect.right(); ++x) {
      const double sx = x - tp.warp_amp_x * std::sin(two_pi * y / tp.warp_period_y + tp.warp_phase_x);
      const double sy = y - tp.warp_amp_y * std::sin(two_pi * x / tp.warp_period_x + tp.warp_phase_y);
      const int lx = static_cast<int>(std::floor(sx)) - x0;
      if (lx < 0 || lx >= text_w) continue;
      const auto i = static_cast<std::size_t>(lx / font.advance());
      const int ly = static_cast<int>(std::floor(sy)) - y0 - tp.char_dy[i];
      if (font.ink(tp.text[i], lx % font.advance(), ly)) img.set(x, y, tp.char_colors[i]);
    }
  }
  // Occluding strokes across the text band.
  for (int k = 0; k < tp.strokes; ++k) {
    const auto h0 = pixel_hash(tp.noise_seed, k, 0);
    const auto h1 = pixel_hash(tp.noise_seed, k, 1);
    const Point a{tp.rect.x + static_cast<int>(h0 % 12), tp.rect.y + static_cast<int>((h0 >> 16) % static_cast<std::uint64_t>(tp.rect.h))};
    const Point b{tp.rect.right() - 1 - static_cast<int>(h1 % 12),
                  tp.rect.y + static_cast<int>((h1 >> 16) % static_cast<std::uint64_t>(tp.rect.h))};
    img.draw_line(a, b, tp.char_colors[static_cast<std::size_t>(k) % tp.char_colors.size()], 2);
  }
  // Speckle noise, seeded per instance.
  for (int y = tp.rect.y; y < tp.rect.bottom(); ++y) {
    for (int x = tp.rect.x; x < tp.rect.right(); ++x) {
      const auto h = pixel_hash(tp.noise_seed ^ 0x5bd1e995ULL, x, y);
      if (h % 1000 < 35) img.set(x, y, tp.char_colors[(h >> 20) % tp.char_colors.size()]);
    }
  }
  img.stroke_rect(tp.rect, darken(tp.tint, 0.25), 1);
}

inline void draw_checkbox(Image& img, const Checkbox& cb, int font_px, Color accent) {
  img.fill_rect(cb.panel, {249, 249, 249, 255});
  img.stroke_rect(cb.panel, {211, 211, 211, 255}, 1);
  img.fill_rect(cb.box, {255, 255, 255, 255});
  img.stroke_rect(cb.box, {120, 120, 120, 255}, 2);
  if (cb.checked) {
    img.draw_line({cb.box.x + 5, cb.box.y + 12}, {cb.box.x + 10, cb.box.y + 18}, accent, 3);
    img.draw_line({cb.box.x + 10, cb.box.y + 18}, {cb.box.x + 19, cb.box.y + 6}, accent, 3);
  }
  const BitmapFont font(std::min(font_px, 16));
  font.draw(img, {cb.box.right() + 12, cb.panel.y + (cb.panel.h - font.line_height()) / 2}, cb.label,
            {40, 40, 40, 255});
}

}  // namespace render_detail

// Deterministic rasterization of the live scene.
inline Screenshot render(const SceneGraph& scene, const AssetBank& bank) {
  using namespace render_detail;
  if (scene.width <= 0 || scene.height <= 0) throw RenderError("cannot render a zero-area canvas");
  Image img(scene.width, scene.height);
  if (scene.background.kind == Background::Kind::Image) {
    draw_image_bilinear(img, bank.backgrounds.at(scene.background.image).pixels, scene.canvas());
  } else {
    img.fill_rect(scene.canvas(), scene.background.color);
  }
  if (!scene.panel.empty()) {
    img.fill_rect(scene.panel, scene.panel_color);
    img.stroke_rect(scene.panel, darken(scene.panel_color, 0.2), 1);
  }
  for (const auto& l : scene.labels) {
    if (scene.visible(l)) draw_label(img, l);
  }
  if (scene.text_panel) draw_text_panel(img, bank, *scene.text_panel);
  if (scene.slider) draw_slider(img, bank, *scene.slider, scene.accent, scene.labels.empty() ? 14 : scene.labels[0].font_px);
  for (const auto& t : scene.tiles) {
    if (scene.visible(t)) draw_tile(img, bank, t, scene.accent);
  }
  for (const auto& n : scene.icons) {
    if (scene.visible(n)) draw_icon(img, bank.icons.at(n.glyph), n);
  }
  if (scene.input) draw_input(img, *scene.input, scene.accent);
  for (const auto& b : scene.buttons) {
    if (scene.visible(b)) draw_button(img, b);
  }
  if (scene.checkbox_visible()) {
    draw_checkbox(img, *scene.checkbox, scene.labels.empty() ? 14 : scene.labels[0].font_px, scene.accent);
  }
  return make_screenshot(std::move(img));
}

}  // namespace capgym
