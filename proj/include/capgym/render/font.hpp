#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "capgym/render/font_data.hpp"
#include "capgym/render/image.hpp"

namespace capgym {

// Bundled monospace bitmap font, resampled nearest-neighbour to a pixel size.
class BitmapFont {
 public:
  explicit BitmapFont(int size_px) : size_px_(std::max(size_px, 6)) {}

  int size_px() const { return size_px_; }
  int advance() const { return std::max(1, (font_data::kCellWidth * size_px_ + 6) / font_data::kNominalSize); }
  int line_height() const { return std::max(1, (font_data::kCellHeight * size_px_ + 6) / font_data::kNominalSize); }
  int text_width(std::string_view s) const { return static_cast<int>(s.size()) * advance(); }

  static bool glyph_bit(char ch, int gx, int gy) {
    int code = static_cast<unsigned char>(ch);
    if (code < font_data::kFirstChar || code > font_data::kLastChar) code = '?';
    const auto& rows = font_data::kGlyphs[static_cast<std::size_t>(code - font_data::kFirstChar)];
    return (rows[static_cast<std::size_t>(gy)] >> (7 - gx)) & 1;
  }

  // Whether the pixel (px, py) relative to the glyph origin is ink.
  bool ink(char ch, int px, int py) const {
    const int gx = px * font_data::kCellWidth / advance();
    const int gy = py * font_data::kCellHeight / line_height();
    if (gx < 0 || gy < 0 || gx >= font_data::kCellWidth || gy >= font_data::kCellHeight) return false;
    return glyph_bit(ch, gx, gy);
  }

  void draw(Image& img, Point origin, std::string_view text, Color c) const {
    const int adv = advance();
    const int lh = line_height();
    for (std::size_t i = 0; i < text.size(); ++i) {
      const int ox = origin.x + static_cast<int>(i) * adv;
      for (int y = 0; y < lh; ++y) {
        for (int x = 0; x < adv; ++x) {
          if (ink(text[i], x, y)) img.set(ox + x, origin.y + y, c);
        }
      }
    }
  }

  // Greedy word wrap to `max_width` pixels.
  std::vector<std::string> wrap(std::string_view text, int max_width) const {
    std::vector<std::string> lines;
    std::string line;
    std::size_t pos = 0;
    while (pos < text.size()) {
      const auto sp = text.find(' ', pos);
      const auto word = text.substr(pos, sp == std::string_view::npos ? std::string_view::npos : sp - pos);
      const std::string candidate = line.empty() ? std::string(word) : line + " " + std::string(word);
      if (!line.empty() && text_width(candidate) > max_width) {
        lines.push_back(line);
        line = std::string(word);
      } else {
        line = candidate;
      }
      if (sp == std::string_view::npos) break;
      pos = sp + 1;
    }
    if (!line.empty()) lines.push_back(line);
    return lines;
  }

 private:
  int size_px_;
};

}  // namespace capgym
