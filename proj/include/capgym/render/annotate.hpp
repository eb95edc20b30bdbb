#pragma once

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "capgym/core/action.hpp"
#include "capgym/render/font.hpp"
#include "capgym/render/render.hpp"

namespace capgym {

namespace annotate_detail {

inline constexpr Color kMarker{230, 30, 40, 255};
inline constexpr Color kMarkerInk{255, 255, 255, 255};

inline void marker(Image& img, Point p, int n) {
  img.fill_circle(p.x + 0.5, p.y + 0.5, 11, {255, 255, 255, 255});
  img.fill_circle(p.x + 0.5, p.y + 0.5, 9, kMarker);
  const BitmapFont font(12);
  const std::string s = std::to_string(n);
  font.draw(img, {p.x - font.text_width(s) / 2 + 1, p.y - font.line_height() / 2 + 1}, s, kMarkerInk);
}

inline void arrow(Image& img, Point a, Point b) {
  img.draw_line(a, b, kMarker, 3);
  const double ang = std::atan2(double(b.y - a.y), double(b.x - a.x));
  for (double d : {2.6, -2.6}) {
    const Point tip{b.x + static_cast<int>(std::lround(12 * std::cos(ang + d))),
                    b.y + static_cast<int>(std::lround(12 * std::sin(ang + d)))};
    img.draw_line(b, tip, kMarker, 3);
  }
}

inline std::string printable(const std::string& text) {
  std::string out;
  for (char c : text) {
    if (c == '\b') out += "<BS>";
    else if (c == '\n') out += "<ENTER>";
    else out += c;
  }
  return out;
}

}  // namespace annotate_detail

// Copy of `shot` with numbered action markers: circles at click points,
// arrows for drags, and a caption for typed text.
inline Screenshot annotate(const Screenshot& shot, const std::vector<ActionBatch>& script) {
  using namespace annotate_detail;
  Image img = shot.image;
  Point last{img.width() / 2, img.height() / 2};
  int n = 0;
  for (const auto& batch : script) {
    for (const auto& a : batch.actions) {
      ++n;
      if (const auto* c = std::get_if<LeftClick>(&a)) {
        marker(img, c->coordinate, n);
        last = c->coordinate;
      } else if (const auto* d = std::get_if<Drag>(&a)) {
        arrow(img, d->start, d->end);
        marker(img, d->start, n);
        last = d->end;
      } else if (const auto* t = std::get_if<Type>(&a)) {
        const BitmapFont font(13);
        const std::string caption = std::to_string(n) + ": type \"" + printable(t->text) + "\"";
        const Rect box{std::clamp(last.x + 14, 0, std::max(0, img.width() - font.text_width(caption) - 8)),
                       std::clamp(last.y + 14, 0, std::max(0, img.height() - font.line_height() - 6)),
                       font.text_width(caption) + 8, font.line_height() + 6};
        img.fill_rect(box, kMarker);
        font.draw(img, {box.x + 4, box.y + 3}, caption, kMarkerInk);
      }
    }
  }
  return make_screenshot(std::move(img));
}

}  // namespace capgym
