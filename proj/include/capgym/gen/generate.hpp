#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "capgym/core/config.hpp"
#include "capgym/core/error.hpp"
#include "capgym/core/rng.hpp"
#include "capgym/gen/asset_bank.hpp"
#include "capgym/gen/instance.hpp"
#include "capgym/gen/solver.hpp"
#include "capgym/gen/style.hpp"
#include "capgym/render/font.hpp"

namespace capgym {

// Characters used for synthesized text challenges; visually ambiguous glyphs
// (0/O, 1/I/L) are excluded.
inline constexpr std::string_view kTextAlphabet = "ABCDEFGHJKMNPQRSTUVWXYZ23456789";

inline constexpr int kElementGap = 6;
inline constexpr double kMaxIconRotation = 25.0;

namespace gen_detail {

// Panel, inner area and wrapped instruction header shared by all layouts.
struct Frame {
  Rect panel;
  Rect inner;
  BitmapFont font;
  int header_bottom = 0;
};

inline std::optional<Frame> make_frame(SceneGraph& scene, const StyleSample& style, const std::string& header,
                                       bool header_grid_stage = false) {
  Frame f{{style.margin_px, style.margin_px, style.container_w, style.container_h}, {}, BitmapFont(style.font_px), 0};
  f.inner = f.panel.inflated(-style.padding_px);
  if (f.inner.w < 120 || f.inner.h < 100) return std::nullopt;
  const auto lines = f.font.wrap(header, f.inner.w);
  for (const auto& l : lines) {
    if (f.font.text_width(l) > f.inner.w) return std::nullopt;
  }
  const int h = static_cast<int>(lines.size()) * f.font.line_height();
  scene.labels.push_back({{f.inner.x, f.inner.y, f.inner.w, h}, lines, style.font_px, style.ink, header_grid_stage});
  f.header_bottom = f.inner.y + h;
  return f;
}

inline void init_scene(SceneGraph& scene, const StyleSample& style) {
  scene.width = style.canvas_w;
  scene.height = style.canvas_h;
  scene.background = style.background;
  scene.panel = {style.margin_px, style.margin_px, style.container_w, style.container_h};
  scene.panel_color = style.panel_color;
  scene.ink = style.ink;
  scene.accent = style.accent;
}

inline Button make_button(const Rect& r, std::string label, Role role, const StyleSample& style, int font_px) {
  return {r, std::move(label), role, style.accent, contrasting_ink(style.accent), font_px, false};
}

inline int button_width(const BitmapFont& font, std::string_view label) { return font.text_width(label) + 24; }
inline int control_height(const BitmapFont& font) { return font.line_height() + 12; }

// Places `n` square items in a jittered grid over `area`; each item keeps at
// least kElementGap/2 px from its cell edges.
inline std::optional<std::vector<Rect>> scatter_in_cells(Rng& rng, const Rect& area, int n, int max_size) {
  const double aspect = static_cast<double>(area.w) / std::max(area.h, 1);
  int cols = std::max(1, static_cast<int>(std::ceil(std::sqrt(n * aspect))));
  int rows = (n + cols - 1) / cols;
  // Spare cells give position freedom.
  if (cols * rows == n) cols += 1;
  const int cell_w = area.w / cols;
  const int cell_h = area.h / rows;
  const int cell = std::min(cell_w, cell_h);
  if (cell < 26) return std::nullopt;
  const auto cells = rng.sample_indices(cols * rows, n);
  std::vector<Rect> out;
  const int half_gap = kElementGap / 2;
  for (int c : cells) {
    const int cx = area.x + (c % cols) * cell_w;
    const int cy = area.y + (c / cols) * cell_h;
    const int hi = std::min(max_size, cell - 2 * half_gap);
    const int size = rng.uniform_int(std::max(20, hi * 6 / 10), hi);
    const int x = cx + half_gap + rng.uniform_int(0, cell_w - 2 * half_gap - size);
    const int y = cy + half_gap + rng.uniform_int(0, cell_h - 2 * half_gap - size);
    out.push_back({x, y, size, size});
  }
  return out;
}

inline double sample_rotation(Rng& rng) { return rng.uniform(-kMaxIconRotation, kMaxIconRotation); }

struct Built {
  SceneGraph scene;
  GroundTruth truth;
  std::string instruction;
};

// ---------------------------------------------------------------- text

inline std::optional<Built> build_text(Rng rng, StyleSample& style, const EnvConfig& cfg, const AssetBank& bank) {
  Built b;
  init_scene(b.scene, style);
  b.instruction = "Type the characters shown in the image";
  auto frame = make_frame(b.scene, style, b.instruction);
  if (!frame) return std::nullopt;
  const auto& font = frame->font;
  const Rect inner = frame->inner;

  std::optional<std::size_t> bank_text;
  std::string answer;
  if (!bank.distorted_text.empty() && rng.bernoulli(0.5)) {
    bank_text = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(bank.distorted_text.size()) - 1));
    answer = bank.distorted_text[*bank_text].label;
  } else {
    const int len = rng.uniform_int(cfg.text_length.min, cfg.text_length.max);
    for (int i = 0; i < len; ++i) answer.push_back(kTextAlphabet[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(kTextAlphabet.size()) - 1))]);
  }

  static constexpr std::string_view kSubmitLabels[] = {"Submit", "Verify", "Check"};
  const std::string submit_label(kSubmitLabels[rng.uniform_int(0, 2)]);
  const int ch = control_height(font);
  const int bw = button_width(font, submit_label);
  if (style.submit_variant == 1 && inner.w - bw - kElementGap < 90) style.submit_variant = 0;
  const int rows_h = style.submit_variant == 1 ? ch : 2 * ch + kElementGap;

  const int top = frame->header_bottom + kElementGap;
  const int avail = inner.bottom() - top - kElementGap - rows_h;
  const int len = static_cast<int>(answer.size());
  const int max_px_by_w = static_cast<int>((inner.w - 24) / (len * 8.0 / 13.0));
  const int panel_h = std::min(avail, 150);
  const int char_px = std::min({panel_h * 6 / 10, max_px_by_w, 60});
  if (char_px < 20 || panel_h < 36) return std::nullopt;

  TextPanel tp;
  const int panel_w = std::min(inner.w, static_cast<int>(len * char_px * 8.0 / 13.0) + 24 + rng.uniform_int(0, 40));
  tp.rect = {inner.x + rng.uniform_int(0, inner.w - panel_w), top, panel_w, panel_h};
  tp.text = answer;
  tp.char_px = char_px;
  tp.warp_amp_x = rng.uniform(1.0, 3.5);
  tp.warp_amp_y = rng.uniform(1.5, std::max(2.0, char_px * 0.1));
  tp.warp_period_x = rng.uniform(28, 70);
  tp.warp_period_y = rng.uniform(28, 70);
  tp.warp_phase_x = rng.uniform(0, 6.283);
  tp.warp_phase_y = rng.uniform(0, 6.283);
  const int slack = std::max(0, (panel_h - char_px * 16 / 13) / 2 - 4);
  for (int i = 0; i < len; ++i) {
    tp.char_dy.push_back(rng.uniform_int(-std::min(slack, char_px / 8), std::min(slack, char_px / 8)));
    tp.char_colors.push_back(darken(rng.pick(style.palette), 0.35));
  }
  tp.tint = lighten(rng.pick(style.palette), 0.75);
  tp.noise_seed = rng.next_u64();
  tp.strokes = rng.uniform_int(2, 4);
  tp.bank_image = bank_text;
  b.scene.text_panel = tp;

  const int row_y = tp.rect.bottom() + kElementGap;
  Rect input_rect;
  Rect button_rect;
  switch (style.submit_variant) {
    case 1:
      input_rect = {inner.x, row_y, inner.w - bw - kElementGap, ch};
      button_rect = {input_rect.right() + kElementGap, row_y, bw, ch};
      break;
    case 2:
      input_rect = {inner.x, row_y, inner.w, ch};
      button_rect = {inner.x, row_y + ch + kElementGap, bw, ch};
      break;
    default:
      input_rect = {inner.x, row_y, inner.w, ch};
      button_rect = {inner.right() - bw, row_y + ch + kElementGap, bw, ch};
      break;
  }
  b.scene.input = InputBox{input_rect, "", false, style.font_px};
  b.scene.buttons.push_back(make_button(button_rect, submit_label, Role::SubmitButton, style, style.font_px));
  b.scene.content = tp.rect;

  b.truth.answer_label = answer;
  b.truth.targets.push_back({Role::InputBox, input_rect, -1});
  b.truth.targets.push_back({Role::SubmitButton, button_rect, -1});
  return b;
}

// ---------------------------------------------------------------- icon selection

inline std::optional<Built> build_icon_selection(Rng rng, StyleSample& style, const EnvConfig& cfg,
                                                 const AssetBank& bank) {
  Built b;
  init_scene(b.scene, style);
  const int n = rng.uniform_int(cfg.icon_selection_count.min, cfg.icon_selection_count.max);
  const auto target_glyph = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(bank.icons.size()) - 1));
  b.instruction = "Click on the " + bank.icons[target_glyph].display_name() + " icon";
  auto frame = make_frame(b.scene, style, b.instruction);
  if (!frame) return std::nullopt;
  const Rect area{frame->inner.x, frame->header_bottom + kElementGap, frame->inner.w,
                  frame->inner.bottom() - frame->header_bottom - kElementGap};
  auto rects = scatter_in_cells(rng, area, n, 64);
  if (!rects) return std::nullopt;
  b.scene.content = area;
  const int target_slot = rng.uniform_int(0, n - 1);
  for (int i = 0; i < n; ++i) {
    std::size_t glyph = target_glyph;
    if (i != target_slot) {
      while (glyph == target_glyph) {
        glyph = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(bank.icons.size()) - 1));
      }
    }
    b.scene.icons.push_back({glyph, rng.pick(style.palette), sample_rotation(rng), (*rects)[static_cast<std::size_t>(i)], -1});
  }
  b.truth.answer_label = bank.icons[target_glyph].id;
  b.truth.targets.push_back({Role::Icon, b.scene.icons[static_cast<std::size_t>(target_slot)].rect, target_slot});
  return b;
}

// ---------------------------------------------------------------- icon match

inline std::optional<Built> build_icon_match(Rng rng, StyleSample& style, const EnvConfig& cfg, const AssetBank& bank) {
  Built b;
  init_scene(b.scene, style);
  b.instruction = "Drag one icon onto the identical icon";
  auto frame = make_frame(b.scene, style, b.instruction);
  if (!frame) return std::nullopt;
  const int n = rng.uniform_int(cfg.icon_match_count.min, cfg.icon_match_count.max);
  const Rect area{frame->inner.x, frame->header_bottom + kElementGap, frame->inner.w,
                  frame->inner.bottom() - frame->header_bottom - kElementGap};
  auto rects = scatter_in_cells(rng, area, n, 64);
  if (!rects) return std::nullopt;
  b.scene.content = area;

  const int glyph_count = static_cast<int>(bank.icons.size());
  const int colors = static_cast<int>(style.palette.size());
  // (glyph, color) combinations; the pair uses one, distractors are all distinct.
  const auto combos = rng.sample_indices(glyph_count * colors, n - 1);
  const auto slots = rng.sample_indices(n, 2);
  const int pair_combo = combos[0];
  std::vector<int> combo_of(static_cast<std::size_t>(n), -1);
  combo_of[static_cast<std::size_t>(slots[0])] = pair_combo;
  combo_of[static_cast<std::size_t>(slots[1])] = pair_combo;
  std::size_t next = 1;
  for (int i = 0; i < n; ++i) {
    if (combo_of[static_cast<std::size_t>(i)] < 0) combo_of[static_cast<std::size_t>(i)] = combos[next++];
  }
  const double pair_rotation = sample_rotation(rng);
  for (int i = 0; i < n; ++i) {
    const int combo = combo_of[static_cast<std::size_t>(i)];
    double rot = sample_rotation(rng);
    if (i == slots[1]) rot = std::clamp(pair_rotation + rng.uniform(-15.0, 15.0), -kMaxIconRotation, kMaxIconRotation);
    if (i == slots[0]) rot = pair_rotation;
    b.scene.icons.push_back({static_cast<std::size_t>(combo / colors), style.palette[static_cast<std::size_t>(combo % colors)],
                             rot, (*rects)[static_cast<std::size_t>(i)], -1});
  }
  b.truth.answer_label = bank.icons[static_cast<std::size_t>(pair_combo / colors)].id;
  b.truth.targets.push_back({Role::Icon, b.scene.icons[static_cast<std::size_t>(slots[0])].rect, slots[0]});
  b.truth.targets.push_back({Role::Icon, b.scene.icons[static_cast<std::size_t>(slots[1])].rect, slots[1]});
  return b;
}

// ---------------------------------------------------------------- slider

inline std::optional<Built> build_slider(Rng rng, StyleSample& style, const EnvConfig&, const AssetBank& bank) {
  Built b;
  init_scene(b.scene, style);
  b.instruction = "Drag the slider to fit the puzzle piece";
  auto frame = make_frame(b.scene, style, b.instruction);
  if (!frame) return std::nullopt;
  const Rect inner = frame->inner;
  const int track_h = 34;
  const int top = frame->header_bottom + kElementGap;
  const int area_h = std::min(170, inner.bottom() - top - kElementGap - track_h);
  if (area_h < 80 || inner.w < 200) return std::nullopt;

  SliderWidget s;
  s.area = {inner.x, top, inner.w, area_h};
  s.image = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(bank.backgrounds.size()) - 1));
  s.track = {inner.x, s.area.bottom() + kElementGap, inner.w, track_h};
  s.handle_w = rng.uniform_int(40, 52);
  s.piece_size = rng.uniform_int(40, std::min(54, area_h - 16));
  s.piece_x0 = rng.uniform_int(4, 10);
  s.piece_y = rng.uniform_int(6, area_h - s.piece_size - 6);
  s.mask_variant = static_cast<std::uint32_t>(rng.uniform_int(0, 7));
  const int lo = s.piece_size * 3 / 4;
  const int hi = s.max_offset() - 12;
  if (hi <= lo) return std::nullopt;
  s.gap_offset = rng.uniform_int(lo, hi);
  s.handle_offset = 0;
  b.scene.slider = s;
  b.scene.content = s.area;

  b.truth.answer_label = std::to_string(s.gap_offset);
  b.truth.goal_offset_px = s.gap_offset;
  b.truth.targets.push_back({Role::SliderHandle, s.handle_rect(), -1});
  b.truth.targets.push_back({Role::SliderGoal, s.piece_rect(s.gap_offset), -1});
  return b;
}

// ---------------------------------------------------------------- paged

inline std::optional<Built> build_paged(Rng rng, StyleSample& style, const EnvConfig& cfg, const AssetBank& bank) {
  Built b;
  init_scene(b.scene, style);
  const bool use_icons = rng.bernoulli(0.5);
  const int pages = rng.uniform_int(cfg.paged_pages.min, cfg.paged_pages.max);
  const int per_page = rng.uniform_int(cfg.paged_items_per_page.min, cfg.paged_items_per_page.max);
  const auto cats = bank.category_names();

  std::size_t target_glyph = 0;
  std::string target_category;
  if (use_icons) {
    target_glyph = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(bank.icons.size()) - 1));
    b.instruction = "Find and click the " + bank.icons[target_glyph].display_name() + " icon";
  } else {
    target_category = rng.pick(cats);
    b.instruction = "Find and click the image with " + target_category;
  }
  auto frame = make_frame(b.scene, style, b.instruction);
  if (!frame) return std::nullopt;
  const auto& font = frame->font;
  const Rect inner = frame->inner;
  const int ch = control_height(font);
  const int top = frame->header_bottom + kElementGap;
  const Rect area{inner.x, top, inner.w, inner.bottom() - top - kElementGap - ch};
  const int cols = per_page <= 4 ? 2 : 3;
  const int rows = (per_page + cols - 1) / cols;
  const int cell_w = area.w / cols;
  const int cell_h = area.h / rows;
  const int cell = std::min(cell_w, cell_h);
  if (cell < 40) return std::nullopt;
  b.scene.content = area;
  b.scene.page_count = pages;

  const std::string prev_label = "< Prev";
  const std::string next_label = "Next >";
  const Rect prev{inner.x, inner.bottom() - ch, button_width(font, prev_label), ch};
  const Rect next{inner.right() - button_width(font, next_label), inner.bottom() - ch, button_width(font, next_label), ch};
  if (prev.right() + kElementGap > next.x) return std::nullopt;
  b.scene.buttons.push_back(make_button(prev, prev_label, Role::NavPrev, style, style.font_px));
  b.scene.buttons.push_back(make_button(next, next_label, Role::NavNext, style, style.font_px));

  const int target_page = rng.uniform_int(0, pages - 1);
  const int target_slot = rng.uniform_int(0, per_page - 1);
  const auto& target_images = use_icons ? std::vector<std::size_t>{} : bank.categories.at(target_category);
  std::vector<std::size_t> other_images;
  for (const auto& [name, idx] : bank.categories) {
    if (name != target_category) other_images.insert(other_images.end(), idx.begin(), idx.end());
  }
  int target_index = -1;
  for (int p = 0; p < pages; ++p) {
    for (int k = 0; k < per_page; ++k) {
      const int cx = area.x + (k % cols) * cell_w;
      const int cy = area.y + (k / cols) * cell_h;
      const bool is_target = p == target_page && k == target_slot;
      if (use_icons) {
        const int hi = std::min(64, cell - kElementGap);
        const int size = rng.uniform_int(std::max(24, hi * 6 / 10), hi);
        const Rect r{cx + kElementGap / 2 + rng.uniform_int(0, cell_w - kElementGap - size),
                     cy + kElementGap / 2 + rng.uniform_int(0, cell_h - kElementGap - size), size, size};
        std::size_t glyph = target_glyph;
        while (!is_target && glyph == target_glyph) {
          glyph = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(bank.icons.size()) - 1));
        }
        if (is_target) target_index = static_cast<int>(b.scene.icons.size());
        b.scene.icons.push_back({glyph, rng.pick(style.palette), sample_rotation(rng), r, p});
      } else {
        const int size = cell - kElementGap;
        const Rect r{cx + (cell_w - size) / 2, cy + (cell_h - size) / 2, size, size};
        const std::size_t image = is_target ? rng.pick(target_images) : rng.pick(other_images);
        if (is_target) target_index = static_cast<int>(b.scene.tiles.size());
        b.scene.tiles.push_back({image, r, false, p, false});
      }
    }
  }
  b.truth.answer_label = use_icons ? bank.icons[target_glyph].id : target_category;
  b.truth.target_page = target_page;
  if (use_icons) {
    b.truth.targets.push_back({Role::Icon, b.scene.icons[static_cast<std::size_t>(target_index)].rect, target_index});
  } else {
    b.truth.targets.push_back({Role::Tile, b.scene.tiles[static_cast<std::size_t>(target_index)].rect, target_index});
  }
  b.truth.targets.push_back({Role::NavPrev, prev, -1});
  b.truth.targets.push_back({Role::NavNext, next, -1});
  return b;
}

// ---------------------------------------------------------------- image grid

inline std::optional<Built> build_image_grid(Rng rng, StyleSample& style, const EnvConfig& cfg, const AssetBank& bank) {
  Built b;
  init_scene(b.scene, style);
  const auto cats = bank.category_names();
  const std::string category = rng.pick(cats);
  b.instruction = "Select all images with " + category;
  auto frame = make_frame(b.scene, style, b.instruction, true);
  if (!frame) return std::nullopt;
  const auto& font = frame->font;
  const Rect inner = frame->inner;
  const int ch = control_height(font);
  const int top = frame->header_bottom + kElementGap;
  const int gap = rng.uniform_int(kElementGap, kElementGap + 4);
  const int grid_h_avail = inner.bottom() - top - kElementGap - ch;
  const int tile = std::min((inner.w - 2 * gap) / 3, (grid_h_avail - 2 * gap) / 3);
  if (tile < 48) return std::nullopt;
  const int grid_w = 3 * tile + 2 * gap;
  const int gx = inner.x + (inner.w - grid_w) / 2;
  b.scene.content = {gx, top, grid_w, grid_w};

  int min_targets = cfg.image_grid_targets.min;
  if (!cfg.image_grid_allow_empty) min_targets = std::max(1, min_targets);
  const int m = rng.uniform_int(min_targets, std::max(min_targets, cfg.image_grid_targets.max));
  auto positions = rng.sample_indices(9, m);
  std::sort(positions.begin(), positions.end());
  const auto& target_images = bank.categories.at(category);
  if (static_cast<int>(target_images.size()) < m) throw GenerationError("category '" + category + "' too small");
  const auto chosen = rng.sample_indices(static_cast<int>(target_images.size()), m);
  std::vector<std::size_t> others;
  for (const auto& [name, idx] : bank.categories) {
    if (name != category) others.insert(others.end(), idx.begin(), idx.end());
  }
  const auto distractors = rng.sample_indices(static_cast<int>(others.size()), 9 - m);
  std::size_t ti = 0;
  std::size_t di = 0;
  for (int i = 0; i < 9; ++i) {
    const Rect r{gx + (i % 3) * (tile + gap), top + (i / 3) * (tile + gap), tile, tile};
    const bool is_target = std::binary_search(positions.begin(), positions.end(), i);
    const std::size_t image = is_target ? target_images[static_cast<std::size_t>(chosen[ti++])]
                                        : others[static_cast<std::size_t>(distractors[di++])];
    b.scene.tiles.push_back({image, r, false, -1, true});
  }
  const std::string verify_label = "Verify";
  const int bw = button_width(font, verify_label);
  const Rect verify{gx + grid_w - bw, inner.bottom() - ch, bw, ch};
  Button vb = make_button(verify, verify_label, Role::SubmitButton, style, style.font_px);
  vb.grid_stage = true;
  b.scene.buttons.push_back(vb);

  b.truth.answer_label = category;
  b.truth.target_tiles = positions;
  for (int i : positions) b.truth.targets.push_back({Role::Tile, b.scene.tiles[static_cast<std::size_t>(i)].rect, i});
  b.truth.targets.push_back({Role::SubmitButton, verify, -1});

  if (cfg.image_grid_checkbox) {
    Checkbox cb;
    const std::string label = "I'm not a robot";
    const int pw = std::min(inner.w, font.text_width(label) + 80);
    const int ph = std::max(56, font.line_height() + 28);
    cb.panel = {inner.x + (inner.w - pw) / 2, inner.y + (inner.h - ph) / 2, pw, ph};
    cb.box = {cb.panel.x + 14, cb.panel.y + (ph - 24) / 2, 24, 24};
    cb.label = label;
    b.scene.checkbox = cb;
    b.scene.grid_visible = false;
    b.truth.targets.push_back({Role::Checkbox, cb.box, -1});
  }
  return b;
}

inline std::optional<Built> build(ChallengeType type, Rng rng, StyleSample& style, const EnvConfig& cfg,
                                  const AssetBank& bank) {
  switch (type) {
    case ChallengeType::Text:
    case ChallengeType::CompactText: return build_text(rng, style, cfg, bank);
    case ChallengeType::IconSelection: return build_icon_selection(rng, style, cfg, bank);
    case ChallengeType::IconMatch: return build_icon_match(rng, style, cfg, bank);
    case ChallengeType::Slider: return build_slider(rng, style, cfg, bank);
    case ChallengeType::Paged: return build_paged(rng, style, cfg, bank);
    case ChallengeType::ImageGrid: return build_image_grid(rng, style, cfg, bank);
  }
  return std::nullopt;
}

// Shrinks margin, then padding, then font size toward their configured
// minimum until the layout fits.
inline bool shrink_style(StyleSample& s, const EnvConfig& cfg) {
  const auto step = [](int& v, int lo) {
    if (v <= lo) return false;
    v = std::max(lo, v - 2);
    return true;
  };
  bool changed = step(s.margin_px, cfg.margin_px.min) || step(s.padding_px, cfg.padding_px.min) ||
                 step(s.font_px, cfg.font_size_px.min);
  s.container_w = s.canvas_w - 2 * s.margin_px;
  s.container_h = s.canvas_h - 2 * s.margin_px;
  return changed;
}

}  // namespace gen_detail

inline std::string instance_id(ChallengeType type, std::uint64_t seed) {
  return std::string(to_string(type)) + "-" + std::to_string(seed);
}

// Pure function of (type, seed, cfg, bank).
inline ChallengeInstance generate(ChallengeType type, std::uint64_t seed, const EnvConfig& cfg, const AssetBank& bank) {
  check_bank(bank);
  if (type == ChallengeType::IconMatch) {
    const int combos = static_cast<int>(bank.icons.size()) * cfg.palette_size.min;
    if (combos < cfg.icon_match_count.max) throw GenerationError("asset bank too small for icon match distractors");
  }
  Rng root(seed, "challenge/" + std::string(to_string(type)));
  Rng style_rng = root.derive("style");
  StyleSample style = sample_style(style_rng, cfg, cfg.canvas_range(type), bank.backgrounds.size());
  const Rng content = root.derive("content");

  std::optional<gen_detail::Built> built;
  while (!(built = gen_detail::build(type, content, style, cfg, bank))) {
    if (!gen_detail::shrink_style(style, cfg)) {
      throw GenerationError("layout does not fit the " + std::to_string(style.canvas_w) + "x" +
                            std::to_string(style.canvas_h) + " canvas for " + std::string(to_string(type)));
    }
  }

  ChallengeInstance inst;
  inst.id = instance_id(type, seed);
  inst.type = type;
  inst.seed = seed;
  inst.config_hash = config_hash(cfg);
  inst.style = style;
  inst.scene = std::move(built->scene);
  inst.truth = std::move(built->truth);
  inst.instruction_text = std::move(built->instruction);
  inst.truth.oracle_script = solve_from_state(inst, inst.scene);
  return inst;
}

}  // namespace capgym
