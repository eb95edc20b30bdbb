#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "capgym/core/error.hpp"
#include "capgym/core/hash.hpp"
#include "capgym/core/json.hpp"
#include "capgym/core/types.hpp"

namespace capgym {

struct IntRange {
  int min = 0;
  int max = 0;
  bool contains(int v) const { return v >= min && v <= max; }
  friend bool operator==(const IntRange&, const IntRange&) = default;
};

struct CanvasRange {
  IntRange width;
  IntRange height;
  friend bool operator==(const CanvasRange&, const CanvasRange&) = default;
};

struct EnvConfig {
  // Indexed by ChallengeType.
  std::array<CanvasRange, kChallengeTypeCount> canvas = {{
      {{480, 720}, {280, 420}},  // text
      {{260, 340}, {180, 240}},  // compact_text
      {{420, 600}, {360, 480}},  // icon_match
      {{420, 600}, {360, 480}},  // icon_selection
      {{420, 560}, {380, 480}},  // paged
      {{340, 420}, {300, 360}},  // slider
      {{360, 440}, {460, 540}},  // image_grid
  }};
  std::array<int, kChallengeTypeCount> budgets = {5, 5, 5, 5, 8, 5, 8};

  IntRange font_size_px{14, 22};
  IntRange padding_px{8, 20};
  IntRange margin_px{8, 24};
  IntRange palette_size{4, 6};
  double palette_min_distance = 60.0;

  IntRange text_length{4, 6};
  IntRange icon_selection_count{8, 16};
  IntRange icon_match_count{6, 12};
  IntRange paged_pages{2, 4};
  IntRange paged_items_per_page{4, 6};
  IntRange image_grid_targets{1, 4};
  bool image_grid_allow_empty = false;
  bool image_grid_checkbox = true;

  int slider_tolerance_px = 6;
  bool text_case_sensitive = false;
  bool regenerate_on_fail = false;

  int session_expiry_s = 600;
  std::string meta_token = "dev-meta-token";
  std::string asset_bank_path;

  int budget(ChallengeType t) const { return budgets[index_of(t)]; }
  const CanvasRange& canvas_range(ChallengeType t) const { return canvas[index_of(t)]; }

  friend bool operator==(const EnvConfig&, const EnvConfig&) = default;
};

namespace detail {

inline void check_range(const IntRange& r, const std::string& key, int floor_value) {
  if (r.min > r.max) throw ConfigError(key, "min must not exceed max");
  if (r.min < floor_value) {
    throw ConfigError(key, "min must be at least " + std::to_string(floor_value));
  }
}

inline IntRange read_range(const Json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    throw ConfigError(key, "expected [min, max] integer pair");
  }
  return {j[0].get<int>(), j[1].get<int>()};
}

template <class T>
T read_scalar(const Json& j, const std::string& key) {
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!j.is_boolean()) throw ConfigError(key, "expected boolean");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!j.is_string()) throw ConfigError(key, "expected string");
    } else if constexpr (std::is_integral_v<T>) {
      if (!j.is_number_integer()) throw ConfigError(key, "expected integer");
    } else {
      if (!j.is_number()) throw ConfigError(key, "expected number");
    }
    return j.get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(key, "wrong value type");
  }
}

inline Json range_json(const IntRange& r) { return Json::array({r.min, r.max}); }

}  // namespace detail

inline void validate(const EnvConfig& cfg) {
  using detail::check_range;
  for (auto t : kAllChallengeTypes) {
    const auto name = std::string(to_string(t));
    check_range(cfg.canvas_range(t).width, "canvas." + name + ".width", 64);
    check_range(cfg.canvas_range(t).height, "canvas." + name + ".height", 64);
    if (cfg.budget(t) < 1) throw ConfigError("budgets." + name, "budget must be at least 1");
  }
  check_range(cfg.font_size_px, "font_size_px", 6);
  check_range(cfg.padding_px, "padding_px", 0);
  check_range(cfg.margin_px, "margin_px", 0);
  check_range(cfg.palette_size, "palette_size", 4);
  if (cfg.palette_min_distance < 0 || cfg.palette_min_distance > 200) {
    throw ConfigError("palette_min_distance", "must lie in [0, 200]");
  }
  check_range(cfg.text_length, "text_length", 1);
  check_range(cfg.icon_selection_count, "icon_selection_count", 2);
  check_range(cfg.icon_match_count, "icon_match_count", 2);
  check_range(cfg.paged_pages, "paged_pages", 1);
  check_range(cfg.paged_items_per_page, "paged_items_per_page", 1);
  check_range(cfg.image_grid_targets, "image_grid_targets", 0);
  if (cfg.image_grid_targets.max > 9) throw ConfigError("image_grid_targets", "max must be at most 9");
  if (cfg.image_grid_targets.min == 0 && !cfg.image_grid_allow_empty) {
    throw ConfigError("image_grid_targets", "min 0 requires image_grid_allow_empty");
  }
  if (cfg.text_length.max > 12) throw ConfigError("text_length", "max must be at most 12");
  if (cfg.icon_selection_count.max > 24) throw ConfigError("icon_selection_count", "max must be at most 24");
  if (cfg.icon_match_count.max > 24) throw ConfigError("icon_match_count", "max must be at most 24");
  if (cfg.paged_items_per_page.max > 9) throw ConfigError("paged_items_per_page", "max must be at most 9");
  if (cfg.slider_tolerance_px < 1) throw ConfigError("slider_tolerance_px", "must be at least 1");
  if (cfg.session_expiry_s < 1) throw ConfigError("session_expiry_s", "must be at least 1");
}

inline Json to_json_document(const EnvConfig& cfg, bool include_secrets = true) {
  using detail::range_json;
  Json canvas = Json::object();
  Json budgets = Json::object();
  for (auto t : kAllChallengeTypes) {
    const auto& c = cfg.canvas_range(t);
    canvas[std::string(to_string(t))] = {{"width", range_json(c.width)}, {"height", range_json(c.height)}};
    budgets[std::string(to_string(t))] = cfg.budget(t);
  }
  Json j = {
      {"canvas", canvas},
      {"budgets", budgets},
      {"font_size_px", range_json(cfg.font_size_px)},
      {"padding_px", range_json(cfg.padding_px)},
      {"margin_px", range_json(cfg.margin_px)},
      {"palette_size", range_json(cfg.palette_size)},
      {"palette_min_distance", cfg.palette_min_distance},
      {"text_length", range_json(cfg.text_length)},
      {"icon_selection_count", range_json(cfg.icon_selection_count)},
      {"icon_match_count", range_json(cfg.icon_match_count)},
      {"paged_pages", range_json(cfg.paged_pages)},
      {"paged_items_per_page", range_json(cfg.paged_items_per_page)},
      {"image_grid_targets", range_json(cfg.image_grid_targets)},
      {"image_grid_allow_empty", cfg.image_grid_allow_empty},
      {"image_grid_checkbox", cfg.image_grid_checkbox},
      {"slider_tolerance_px", cfg.slider_tolerance_px},
      {"text_case_sensitive", cfg.text_case_sensitive},
      {"regenerate_on_fail", cfg.regenerate_on_fail},
      {"session_expiry_s", cfg.session_expiry_s},
      {"asset_bank_path", cfg.asset_bank_path},
  };
  if (include_secrets) j["meta_token"] = cfg.meta_token;
  return j;
}

// Applies a partial override document on top of `base`. Unknown keys and
// ill-typed values raise ConfigError naming the key. The result is validated.
inline EnvConfig apply_overrides(EnvConfig cfg, const Json& doc) {
  using detail::read_range;
  using detail::read_scalar;
  if (!doc.is_object()) throw ConfigError("<root>", "configuration must be a JSON object");

  const auto range_field = [&](const char* key, IntRange& dst) {
    if (doc.contains(key)) dst = read_range(doc[key], key);
  };

  for (const auto& [key, value] : doc.items()) {
    if (key == "canvas") {
      if (!value.is_object()) throw ConfigError(key, "expected object keyed by challenge type");
      for (const auto& [tname, dims] : value.items()) {
        const auto t = parse_challenge_type(tname);
        const std::string base = "canvas." + tname;
        if (!t) throw ConfigError(base, "unknown challenge type");
        if (!dims.is_object()) throw ConfigError(base, "expected object");
        for (const auto& [dim, r] : dims.items()) {
          if (dim == "width") {
            cfg.canvas[index_of(*t)].width = read_range(r, base + ".width");
          } else if (dim == "height") {
            cfg.canvas[index_of(*t)].height = read_range(r, base + ".height");
          } else {
            throw ConfigError(base + "." + dim, "unknown key");
          }
        }
      }
    } else if (key == "budgets") {
      if (!value.is_object()) throw ConfigError(key, "expected object keyed by challenge type");
      for (const auto& [tname, b] : value.items()) {
        const auto t = parse_challenge_type(tname);
        if (!t) throw ConfigError("budgets." + tname, "unknown challenge type");
        cfg.budgets[index_of(*t)] = read_scalar<int>(b, "budgets." + tname);
      }
    } else if (key == "palette_min_distance") {
      cfg.palette_min_distance = read_scalar<double>(value, key);
    } else if (key == "image_grid_allow_empty") {
      cfg.image_grid_allow_empty = read_scalar<bool>(value, key);
    } else if (key == "image_grid_checkbox") {
      cfg.image_grid_checkbox = read_scalar<bool>(value, key);
    } else if (key == "slider_tolerance_px") {
      cfg.slider_tolerance_px = read_scalar<int>(value, key);
    } else if (key == "text_case_sensitive") {
      cfg.text_case_sensitive = read_scalar<bool>(value, key);
    } else if (key == "regenerate_on_fail") {
      cfg.regenerate_on_fail = read_scalar<bool>(value, key);
    } else if (key == "session_expiry_s") {
      cfg.session_expiry_s = read_scalar<int>(value, key);
    } else if (key == "meta_token") {
      cfg.meta_token = read_scalar<std::string>(value, key);
    } else if (key == "asset_bank_path") {
      cfg.asset_bank_path = read_scalar<std::string>(value, key);
    } else if (key != "font_size_px" && key != "padding_px" && key != "margin_px" &&
               key != "palette_size" && key != "text_length" && key != "icon_selection_count" &&
               key != "icon_match_count" && key != "paged_pages" && key != "paged_items_per_page" &&
               key != "image_grid_targets") {
      throw ConfigError(key, "unknown key");
    }
  }
  range_field("font_size_px", cfg.font_size_px);
  range_field("padding_px", cfg.padding_px);
  range_field("margin_px", cfg.margin_px);
  range_field("palette_size", cfg.palette_size);
  range_field("text_length", cfg.text_length);
  range_field("icon_selection_count", cfg.icon_selection_count);
  range_field("icon_match_count", cfg.icon_match_count);
  range_field("paged_pages", cfg.paged_pages);
  range_field("paged_items_per_page", cfg.paged_items_per_page);
  range_field("image_grid_targets", cfg.image_grid_targets);

  validate(cfg);
  return cfg;
}

// Loads a JSON key/value configuration file; missing keys keep their defaults.
inline EnvConfig load_config(const std::optional<std::filesystem::path>& path) {
  EnvConfig cfg;
  if (!path) {
    validate(cfg);
    return cfg;
  }
  std::ifstream in(*path);
  if (!in) throw ConfigError("<file>", "cannot open " + path->string());
  std::stringstream ss;
  ss << in.rdbuf();
  Json doc;
  try {
    doc = Json::parse(ss.str());
  } catch (const Json::parse_error& e) {
    throw ConfigError("<file>", std::string("malformed JSON: ") + e.what());
  }
  return apply_overrides(cfg, doc);
}

// Hash of the generation-relevant settings; secrets and paths are excluded.
inline std::string config_hash(const EnvConfig& cfg) {
  Json j = to_json_document(cfg, false);
  j.erase("asset_bank_path");
  j.erase("session_expiry_s");
  return to_hex(fnv1a64(j.dump()));
}

}  // namespace capgym
