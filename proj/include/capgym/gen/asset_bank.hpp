#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "capgym/core/error.hpp"
#include "capgym/core/json.hpp"
#include "capgym/core/rng.hpp"
#include "capgym/gen/glyphs.hpp"
#include "capgym/render/png.hpp"

namespace capgym {

struct CategorizedImage {
  std::string id;
  std::string category;
  Image pixels;
};

struct BackgroundImage {
  std::string id;
  Image pixels;
};

struct TextImage {
  std::string id;
  std::string label;
  Image pixels;
};

inline constexpr std::size_t kMinIcons = 30;
inline constexpr std::size_t kMinCategories = 5;
inline constexpr std::size_t kMinImagesPerCategory = 9;
inline constexpr std::size_t kMinBackgrounds = 5;

// Read-only visual assets shared by all generators.
struct AssetBank {
  std::vector<IconGlyph> icons;
  std::vector<CategorizedImage> images;
  std::map<std::string, std::vector<std::size_t>> categories;  // category -> indices into images
  std::vector<BackgroundImage> backgrounds;
  std::vector<TextImage> distorted_text;

  std::vector<std::string> category_names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : categories) out.push_back(name);
    return out;
  }

  const IconGlyph* find_icon(std::string_view id) const {
    for (const auto& g : icons) {
      if (g.id == id) return &g;
    }
    return nullptr;
  }

  std::size_t image_index(std::string_view id) const {
    for (std::size_t i = 0; i < images.size(); ++i) {
      if (images[i].id == id) return i;
    }
    throw AssetError("unknown image id '" + std::string(id) + "'");
  }

  void add_image(CategorizedImage img) {
    categories[img.category].push_back(images.size());
    images.push_back(std::move(img));
  }
};

inline void check_bank(const AssetBank& bank) {
  if (bank.icons.size() < kMinIcons) {
    throw AssetError("asset bank has " + std::to_string(bank.icons.size()) + " icons, needs at least " +
                     std::to_string(kMinIcons));
  }
  if (bank.categories.size() < kMinCategories) {
    throw AssetError("asset bank has " + std::to_string(bank.categories.size()) +
                     " image categories, needs at least " + std::to_string(kMinCategories));
  }
  for (const auto& [name, idx] : bank.categories) {
    if (idx.size() < kMinImagesPerCategory) {
      throw AssetError("category '" + name + "' has " + std::to_string(idx.size()) + " images, needs at least " +
                       std::to_string(kMinImagesPerCategory));
    }
  }
  if (bank.backgrounds.size() < kMinBackgrounds) {
    throw AssetError("asset bank needs at least " + std::to_string(kMinBackgrounds) + " backgrounds");
  }
}

namespace procedural {

inline constexpr int kImageSize = 96;
inline constexpr int kBackgroundSize = 192;
inline constexpr int kImagesPerCategory = 12;

inline Color random_color(Rng& rng, int lo = 30, int hi = 230) {
  return {static_cast<std::uint8_t>(rng.uniform_int(lo, hi)), static_cast<std::uint8_t>(rng.uniform_int(lo, hi)),
          static_cast<std::uint8_t>(rng.uniform_int(lo, hi)), 255};
}

// Two colors far enough apart for the pattern to read clearly.
inline std::pair<Color, Color> contrasting_pair(Rng& rng) {
  Color a = random_color(rng);
  Color b = random_color(rng);
  while (color_distance(a, b) < 120) b = random_color(rng, 0, 255);
  return {a, b};
}

using PatternFn = bool (*)(double u, double v, double freq, double angle);

inline double rot_u(double u, double v, double angle) { return u * std::cos(angle) + v * std::sin(angle); }
inline double rot_v(double u, double v, double angle) { return -u * std::sin(angle) + v * std::cos(angle); }
inline double frac(double x) { return x - std::floor(x); }

struct PatternCategory {
  const char* name;
  PatternFn fn;
};

inline const std::vector<PatternCategory>& pattern_categories() {
  static const std::vector<PatternCategory> kCats = {
      {"stripes", [](double u, double v, double f, double a) { return frac(rot_u(u, v, a) * f) < 0.5; }},
      {"checkers",
       [](double u, double v, double f, double a) {
         const double ru = rot_u(u, v, a) * f, rv = rot_v(u, v, a) * f;
         return (static_cast<long>(std::floor(ru)) + static_cast<long>(std::floor(rv))) % 2 == 0;
       }},
      {"dots",
       [](double u, double v, double f, double a) {
         const double ru = frac(rot_u(u, v, a) * f) - 0.5, rv = frac(rot_v(u, v, a) * f) - 0.5;
         return ru * ru + rv * rv < 0.09;
       }},
      {"waves",
       [](double u, double v, double f, double a) {
         const double ru = rot_u(u, v, a), rv = rot_v(u, v, a);
         return frac(rv * f + 0.35 * std::sin(ru * 2 * std::numbers::pi * 1.5)) < 0.45;
       }},
      {"rings",
       [](double u, double v, double f, double) {
         return frac(std::hypot(u - 0.5, v - 0.5) * f * 1.4) < 0.5;
       }},
      {"bricks",
       [](double u, double v, double f, double) {
         const double rv = v * f;
         const double shift = static_cast<long>(std::floor(rv)) % 2 == 0 ? 0.0 : 0.5;
         const double ru = u * f * 0.5 + shift;
         return frac(rv) > 0.15 && frac(ru) > 0.08;
       }},
      {"zigzags",
       [](double u, double v, double f, double a) {
         const double ru = rot_u(u, v, a) * f, rv = rot_v(u, v, a) * f;
         return frac(rv + std::abs(frac(ru) - 0.5)) < 0.45;
       }},
      {"grids",
       [](double u, double v, double f, double a) {
         const double ru = frac(rot_u(u, v, a) * f), rv = frac(rot_v(u, v, a) * f);
         return ru < 0.18 || rv < 0.18;
       }},
  };
  return kCats;
}

inline Image pattern_image(const PatternCategory& cat, int index) {
  Rng rng(static_cast<std::uint64_t>(index), std::string("asset/image/") + cat.name);
  const auto [fg, bg] = contrasting_pair(rng);
  const double freq = rng.uniform(3.0, 7.0);
  const double angle = rng.uniform(-0.6, 0.6);
  Image img(kImageSize, kImageSize);
  for (int y = 0; y < kImageSize; ++y) {
    for (int x = 0; x < kImageSize; ++x) {
      const double u = (x + 0.5) / kImageSize;
      const double v = (y + 0.5) / kImageSize;
      img.set(x, y, cat.fn(u, v, freq, angle) ? fg : bg);
    }
  }
  return img;
}

// Smooth value noise in [0, 1] on a lattice of the given period.
inline double value_noise(double u, double v, int period, std::uint64_t salt) {
  const auto lattice = [&](int ix, int iy) {
    const auto h = splitmix64(salt ^ (static_cast<std::uint64_t>(ix % period) * 73856093ULL) ^
                              (static_cast<std::uint64_t>(iy % period) * 19349663ULL));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
  };
  const double x = u * period, y = v * period;
  const int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0, fy = y - y0;
  const double sx = fx * fx * (3 - 2 * fx), sy = fy * fy * (3 - 2 * fy);
  const double a = lattice(x0, y0), b = lattice(x0 + 1, y0);
  const double c = lattice(x0, y0 + 1), d = lattice(x0 + 1, y0 + 1);
  return (a + (b - a) * sx) + ((c + (d - c) * sx) - (a + (b - a) * sx)) * sy;
}

inline Image background_image(int index) {
  Rng rng(static_cast<std::uint64_t>(index), "asset/background");
  const auto [c0, c1] = contrasting_pair(rng);
  const int style = index % 4;
  const double angle = rng.uniform(0, 2 * std::numbers::pi);
  const auto salt = rng.next_u64();
  Image img(kBackgroundSize, kBackgroundSize);
  for (int y = 0; y < kBackgroundSize; ++y) {
    for (int x = 0; x < kBackgroundSize; ++x) {
      const double u = (x + 0.5) / kBackgroundSize;
      const double v = (y + 0.5) / kBackgroundSize;
      double t = 0;
      switch (style) {
        case 0: t = 0.5 + 0.5 * ((u - 0.5) * std::cos(angle) + (v - 0.5) * std::sin(angle)) * 1.4; break;
        case 1: t = std::min(1.0, std::hypot(u - 0.5, v - 0.5) * 1.6); break;
        case 2: t = 0.65 * value_noise(u, v, 4, salt) + 0.35 * value_noise(u, v, 9, salt + 1); break;
        default: t = 0.5 + 0.5 * std::sin((u * std::cos(angle) + v * std::sin(angle)) * 14); break;
      }
      img.set(x, y, mix(c0, c1, t));
    }
  }
  return img;
}

}  // namespace procedural

// Fully procedural bank: built-in vector glyphs, pattern categories and
// gradient/noise backgrounds.
inline AssetBank procedural_asset_bank() {
  AssetBank bank;
  bank.icons = builtin_glyphs();
  for (const auto& cat : procedural::pattern_categories()) {
    for (int i = 0; i < procedural::kImagesPerCategory; ++i) {
      bank.add_image({std::string(cat.name) + "-" + std::to_string(i), cat.name, procedural::pattern_image(cat, i)});
    }
  }
  for (int i = 0; i < 8; ++i) {
    bank.backgrounds.push_back({"procedural-bg-" + std::to_string(i), procedural::background_image(i)});
  }
  check_bank(bank);
  return bank;
}

namespace detail {

inline std::vector<std::filesystem::path> sorted_pngs(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  if (!std::filesystem::is_directory(dir)) return out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".png") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline Image load_asset_png(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw AssetError("missing asset file: " + path.string());
  try {
    return load_png(path);
  } catch (const Error& e) {
    throw AssetError("cannot load asset " + path.string() + ": " + e.what());
  }
}

inline Json load_manifest(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return Json::parse(bytes.begin(), bytes.end());
  } catch (const Json::parse_error& e) {
    throw AssetError("malformed manifest " + path.string() + ": " + e.what());
  }
}

}  // namespace detail

// Loads an asset directory:
//   icons.json (id -> file under icons/), icons/*.png
//   images/<category>/*.png
//   backgrounds/*.png
//   text/labels.json (file -> label), optional
// Icons and backgrounds are topped up from the procedural bank when the
// directory supplies fewer than the minimum; image categories are not.
inline AssetBank load_asset_bank(const std::optional<std::filesystem::path>& root) {
  if (!root) return procedural_asset_bank();
  namespace fs = std::filesystem;
  if (!fs::is_directory(*root)) throw AssetError("asset directory not found: " + root->string());

  AssetBank bank;
  const auto icons_manifest = *root / "icons.json";
  if (fs::exists(icons_manifest)) {
    const Json m = detail::load_manifest(icons_manifest);
    if (!m.is_object()) throw AssetError("icons.json must map icon id to file name");
    for (const auto& [id, file] : m.items()) {
      if (!file.is_string()) throw AssetError("icons.json entry '" + id + "' must be a file name");
      const fs::path p = *root / "icons" / file.get<std::string>();
      if (p.extension() != ".png") {
        throw AssetError("unsupported icon format (PNG only): " + p.string());
      }
      bank.icons.push_back({id, {}, detail::load_asset_png(p)});
    }
  }
  const auto images_dir = *root / "images";
  if (fs::is_directory(images_dir)) {
    std::vector<fs::path> cats;
    for (const auto& e : fs::directory_iterator(images_dir)) {
      if (e.is_directory()) cats.push_back(e.path());
    }
    std::sort(cats.begin(), cats.end());
    for (const auto& dir : cats) {
      const auto name = dir.filename().string();
      for (const auto& p : detail::sorted_pngs(dir)) {
        bank.add_image({name + "/" + p.stem().string(), name, detail::load_asset_png(p)});
      }
    }
  }
  for (const auto& p : detail::sorted_pngs(*root / "backgrounds")) {
    bank.backgrounds.push_back({p.stem().string(), detail::load_asset_png(p)});
  }
  const auto labels = *root / "text" / "labels.json";
  if (fs::exists(labels)) {
    const Json m = detail::load_manifest(labels);
    if (!m.is_object()) throw AssetError("text/labels.json must map file name to label");
    for (const auto& [file, label] : m.items()) {
      if (!label.is_string()) throw AssetError("text/labels.json entry '" + file + "' must be a string");
      bank.distorted_text.push_back({file, label.get<std::string>(), detail::load_asset_png(*root / "text" / file)});
    }
  }

  if (bank.icons.size() < kMinIcons) {
    for (auto& g : builtin_glyphs()) {
      if (bank.icons.size() >= kMinIcons) break;
      if (!bank.find_icon(g.id)) bank.icons.push_back(std::move(g));
    }
  }
  for (int i = 0; bank.backgrounds.size() < kMinBackgrounds; ++i) {
    bank.backgrounds.push_back({"procedural-bg-" + std::to_string(i), procedural::background_image(i)});
  }
  check_bank(bank);
  return bank;
}

}  // namespace capgym
