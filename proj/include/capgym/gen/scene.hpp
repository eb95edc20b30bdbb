#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "capgym/core/ground_truth.hpp"
#include "capgym/core/types.hpp"

namespace capgym {

struct Background {
  enum class Kind { Solid, Image };
  Kind kind = Kind::Solid;
  Color color;
  std::size_t image = 0;  // index into AssetBank::backgrounds
  friend bool operator==(const Background&, const Background&) = default;
};

struct Label {
  Rect rect;
  std::vector<std::string> lines;
  int font_px = 14;
  Color color;
  bool grid_stage = false;
  friend bool operator==(const Label&, const Label&) = default;
};

struct InputBox {
  Rect rect;
  std::string text;
  bool focused = false;
  int font_px = 14;
  friend bool operator==(const InputBox&, const InputBox&) = default;
};

struct Button {
  Rect rect;
  std::string label;
  Role role = Role::SubmitButton;
  Color fill;
  Color ink;
  int font_px = 14;
  bool grid_stage = false;
  friend bool operator==(const Button&, const Button&) = default;
};

struct IconNode {
  std::size_t glyph = 0;  // index into AssetBank::icons
  Color color;
  double rotation_deg = 0;
  Rect rect;
  int page = -1;  // -1: not paged
  friend bool operator==(const IconNode&, const IconNode&) = default;
};

struct ImageTile {
  std::size_t image = 0;  // index into AssetBank::images
  Rect rect;
  bool selected = false;
  int page = -1;
  bool grid_stage = false;
  friend bool operator==(const ImageTile&, const ImageTile&) = default;
};

// Puzzle slider: a piece cut from the background image at the gap offset is
// drawn at the handle offset; handle and piece move together one-to-one.
struct SliderWidget {
  Rect area;            // background image region
  std::size_t image = 0;
  Rect track;
  int handle_w = 0;
  int piece_size = 0;
  int piece_x0 = 0;     // piece left edge at offset 0, relative to area
  int piece_y = 0;      // relative to area
  int gap_offset = 0;   // offset at which the piece fills the gap
  int handle_offset = 0;
  std::uint32_t mask_variant = 0;

  int max_offset() const { return std::min(track.w - handle_w, area.w - piece_x0 - piece_size); }
  Rect handle_rect() const { return {track.x + handle_offset, track.y, handle_w, track.h}; }
  Rect piece_rect(int offset) const {
    return {area.x + piece_x0 + offset, area.y + piece_y, piece_size, piece_size};
  }
  friend bool operator==(const SliderWidget&, const SliderWidget&) = default;
};

// Distorted text rendered from parameters; `bank_image` selects a labeled
// image from the asset bank instead of synthesizing one.
struct TextPanel {
  Rect rect;
  std::string text;
  int char_px = 40;
  double warp_amp_x = 0;
  double warp_amp_y = 0;
  double warp_period_x = 40;
  double warp_period_y = 40;
  double warp_phase_x = 0;
  double warp_phase_y = 0;
  std::vector<int> char_dy;
  std::vector<Color> char_colors;
  Color tint;
  std::uint64_t noise_seed = 0;
  int strokes = 3;
  std::optional<std::size_t> bank_image;
  friend bool operator==(const TextPanel&, const TextPanel&) = default;
};

struct Checkbox {
  Rect panel;
  Rect box;
  std::string label;
  bool checked = false;
  friend bool operator==(const Checkbox&, const Checkbox&) = default;
};

struct SceneGraph {
  int width = 0;
  int height = 0;
  Background background;
  Rect panel;
  Color panel_color;
  Color ink;
  Color accent;
  Rect content;  // region icons may be dropped into
  std::vector<Label> labels;
  std::optional<InputBox> input;
  std::vector<Button> buttons;
  std::vector<IconNode> icons;
  std::vector<ImageTile> tiles;
  std::optional<SliderWidget> slider;
  std::optional<TextPanel> text_panel;
  std::optional<Checkbox> checkbox;
  int page = 0;
  int page_count = 1;
  bool grid_visible = true;

  Rect canvas() const { return {0, 0, width, height}; }

  bool on_page(int element_page) const { return element_page < 0 || element_page == page; }
  bool visible(const Label& l) const { return !l.grid_stage || grid_visible; }
  bool visible(const Button& b) const { return !b.grid_stage || grid_visible; }
  bool visible(const IconNode& n) const { return on_page(n.page); }
  bool visible(const ImageTile& t) const { return on_page(t.page) && (!t.grid_stage || grid_visible); }
  bool checkbox_visible() const { return checkbox.has_value() && !grid_visible; }

  const Button* find_button(Role role) const {
    for (const auto& b : buttons) {
      if (b.role == role) return &b;
    }
    return nullptr;
  }

  friend bool operator==(const SceneGraph&, const SceneGraph&) = default;
};

struct Hit {
  enum class Kind { None, Input, Button, Icon, Tile, Checkbox, SliderHandle };
  Kind kind = Kind::None;
  int index = -1;
};

// Topmost interactive element under `p`, in live state.
inline Hit hit_test(const SceneGraph& s, Point p) {
  for (std::size_t i = 0; i < s.buttons.size(); ++i) {
    if (s.visible(s.buttons[i]) && s.buttons[i].rect.contains(p)) return {Hit::Kind::Button, static_cast<int>(i)};
  }
  if (s.input && s.input->rect.contains(p)) return {Hit::Kind::Input, 0};
  if (s.checkbox_visible() && s.checkbox->box.contains(p)) return {Hit::Kind::Checkbox, 0};
  if (s.slider && s.slider->handle_rect().contains(p)) return {Hit::Kind::SliderHandle, 0};
  // Later icons draw on top.
  for (std::size_t i = s.icons.size(); i-- > 0;) {
    if (s.visible(s.icons[i]) && s.icons[i].rect.contains(p)) return {Hit::Kind::Icon, static_cast<int>(i)};
  }
  for (std::size_t i = 0; i < s.tiles.size(); ++i) {
    if (s.visible(s.tiles[i]) && s.tiles[i].rect.contains(p)) return {Hit::Kind::Tile, static_cast<int>(i)};
  }
  return {};
}

// Interactive element rectangles currently on screen.
inline std::vector<Rect> interactive_rects(const SceneGraph& s) {
  std::vector<Rect> out;
  for (const auto& b : s.buttons) {
    if (s.visible(b)) out.push_back(b.rect);
  }
  if (s.input) out.push_back(s.input->rect);
  if (s.checkbox_visible()) out.push_back(s.checkbox->box);
  if (s.slider) out.push_back(s.slider->handle_rect());
  for (const auto& n : s.icons) {
    if (s.visible(n)) out.push_back(n.rect);
  }
  for (const auto& t : s.tiles) {
    if (s.visible(t)) out.push_back(t.rect);
  }
  return out;
}

}  // namespace capgym
