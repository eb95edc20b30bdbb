#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "capgym/core/error.hpp"
#include "capgym/core/json.hpp"
#include "capgym/trace/record.hpp"

namespace capgym {

inline constexpr std::string_view kRecordsFile = "records.jsonl";
inline constexpr std::string_view kManifestFile = "manifest.json";

struct DatasetManifest {
  std::size_t records = 0;
  std::size_t images = 0;
  std::map<std::string, std::size_t> by_type;
  std::map<std::string, std::size_t> by_kind;
  std::string config_hash;  // empty when the records mix configs
  std::vector<std::string> expert_models;
  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

inline void to_json(Json& j, const DatasetManifest& m) {
  j = Json{{"records", m.records},         {"images", m.images},           {"by_type", m.by_type},
           {"by_kind", m.by_kind},         {"config_hash", m.config_hash}, {"expert_models", m.expert_models},
           {"records_file", kRecordsFile}};
}

inline void from_json(const Json& j, DatasetManifest& m) {
  m.records = j.at("records").get<std::size_t>();
  m.images = j.at("images").get<std::size_t>();
  m.by_type = j.at("by_type").get<std::map<std::string, std::size_t>>();
  m.by_kind = j.at("by_kind").get<std::map<std::string, std::size_t>>();
  m.config_hash = j.at("config_hash").get<std::string>();
  m.expert_models = j.value("expert_models", std::vector<std::string>{});
}

namespace export_detail {

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return {};
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& p, std::string_view bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + p.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for " + p.string());
}

inline std::string jsonl_line(const TraceRecord& r) { return Json(r).dump(-1, ' ', false, Json::error_handler_t::strict); }

}  // namespace export_detail

inline DatasetManifest make_manifest(const std::vector<TraceRecord>& records) {
  DatasetManifest m;
  m.records = records.size();
  bool mixed = false;
  for (const auto& r : records) {
    m.images += r.images.size();
    ++m.by_type[std::string(to_string(r.instance.type))];
    ++m.by_kind[std::string(to_string(r.kind))];
    if (m.config_hash.empty() && !mixed) m.config_hash = r.instance.config_hash;
    if (r.instance.config_hash != m.config_hash) mixed = true;
    if (std::find(m.expert_models.begin(), m.expert_models.end(), r.provenance.expert_model) == m.expert_models.end()) {
      m.expert_models.push_back(r.provenance.expert_model);
    }
  }
  if (mixed) m.config_hash.clear();
  std::sort(m.expert_models.begin(), m.expert_models.end());
  return m;
}

// Writes records.jsonl, images/ and manifest.json under `dir`. Images with an
// empty in-memory payload are read from `source_root` (a previously exported
// dataset); a missing file is an error naming the record.
inline DatasetManifest export_dataset(const std::vector<TraceRecord>& records, const std::filesystem::path& dir,
                                      const std::optional<std::filesystem::path>& source_root = std::nullopt) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir / "images", ec);
  if (ec) throw Error("cannot create " + (dir / "images").string() + ": " + ec.message());

  std::string lines;
  for (const auto& r : records) {
    for (const auto& im : r.images) {
      if (im.path.empty() || im.path.find("..") != std::string::npos) {
        throw Error("record " + r.id + " has an invalid image path '" + im.path + "'");
      }
      const auto target = dir / im.path;
      if (!im.png.empty()) {
        export_detail::write_file(target, std::string_view(reinterpret_cast<const char*>(im.png.data()), im.png.size()));
        continue;
      }
      const auto source = (source_root ? *source_root : dir) / im.path;
      if (!fs::exists(source)) throw Error("record " + r.id + ": missing image file " + source.string());
      if (!fs::exists(target) || !fs::equivalent(source, target)) {
        fs::create_directories(target.parent_path());
        fs::copy_file(source, target, fs::copy_options::overwrite_existing, ec);
        if (ec) throw Error("record " + r.id + ": cannot copy " + source.string() + ": " + ec.message());
      }
    }
    lines += export_detail::jsonl_line(r);
    lines += '\n';
  }
  export_detail::write_file(dir / kRecordsFile, lines);
  const auto manifest = make_manifest(records);
  export_detail::write_file(dir / kManifestFile, Json(manifest).dump(2) + "\n");
  return manifest;
}

struct Dataset {
  DatasetManifest manifest;
  std::vector<TraceRecord> records;  // image payloads stay on disk
};

inline Dataset load_dataset(const std::filesystem::path& dir) {
  Dataset d;
  std::ifstream mf(dir / kManifestFile);
  if (!mf) throw Error("cannot open " + (dir / kManifestFile).string());
  std::stringstream ss;
  ss << mf.rdbuf();
  d.manifest = parse_json(ss.str(), "dataset manifest").get<DatasetManifest>();
  std::ifstream in(dir / kRecordsFile);
  if (!in) throw Error("cannot open " + (dir / kRecordsFile).string());
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      d.records.push_back(parse_json(line, "dataset record").get<TraceRecord>());
    } catch (const Json::exception& e) {
      throw ParseError("records.jsonl line " + std::to_string(n) + ": " + e.what());
    }
  }
  if (d.records.size() != d.manifest.records) throw ParseError("manifest record count does not match records.jsonl");
  return d;
}

// Reads the image payloads of a loaded record back into memory.
inline void load_images(TraceRecord& r, const std::filesystem::path& dir) {
  for (auto& im : r.images) {
    im.png = export_detail::read_file(dir / im.path);
    if (im.png.empty()) throw Error("record " + r.id + ": missing image file " + (dir / im.path).string());
  }
}

}  // namespace capgym
