#pragma once

// In-process service on an ephemeral port plus the leak scanner shared by the
// unit and acceptance suites.

#include <httplib.h>

#include <cctype>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "capgym/service/server.hpp"

namespace capgym::test_support {

class TestServer {
 public:
  explicit TestServer(EnvConfig cfg = {}, ServiceOptions opts = {})
      : service_(Environment::make(std::move(cfg)), std::move(opts)) {
    service_.register_routes(srv_);
    port_ = srv_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { srv_.listen_after_bind(); });
    srv_.wait_until_ready();
  }

  ~TestServer() {
    srv_.stop();
    if (thread_.joinable()) thread_.join();
  }

  TestServer(const TestServer&) = delete;
  TestServer& operator=(const TestServer&) = delete;

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(30, 0);
    return c;
  }

  Service& service() { return service_; }
  const std::string& token() const { return service_.config().meta_token; }
  int port() const { return port_; }

 private:
  Service service_;
  httplib::Server srv_;
  int port_ = 0;
  std::thread thread_;
};

// Public numeric fields; the scan ignores them because they describe the
// canvas or the counters, not the solution.
inline Json strip_public_fields(Json j) {
  if (j.is_object()) {
    for (const char* key : {"width", "height", "budget", "steps_used", "seed", "rejected_action"}) j.erase(key);
    for (auto& [k, v] : j.items()) v = strip_public_fields(v);
  }
  return j;
}

inline std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// True when `needle` occurs in `hay` with no alphanumeric neighbour.
inline bool contains_token(const std::string& hay, const std::string& needle) {
  if (needle.empty()) return false;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) {
    const bool left = pos == 0 || !std::isalnum(static_cast<unsigned char>(hay[pos - 1]));
    const auto end = pos + needle.size();
    const bool right = end >= hay.size() || !std::isalnum(static_cast<unsigned char>(hay[end]));
    if (left && right) return true;
  }
  return false;
}

// Strings whose presence in a non-privileged response would leak the answer.
inline std::vector<std::string> secrets_of(const ChallengeInstance& inst, const AssetBank& bank) {
  std::vector<std::string> out;
  const auto& t = inst.truth;
  out.push_back(lower(t.answer_label));
  if (inst.type == ChallengeType::IconSelection || inst.type == ChallengeType::IconMatch ||
      inst.type == ChallengeType::Paged) {
    if (const auto* g = bank.find_icon(t.answer_label)) out.push_back(lower(g->display_name()));
  }
  for (const auto& target : t.targets) {
    const auto c = target.rect.center();
    out.push_back(std::to_string(c.x) + "," + std::to_string(c.y));
    out.push_back(Json(target.rect).dump());
  }
  for (const auto& b : t.oracle_script) {
    out.push_back(lower(Json(b).dump()));
    for (const auto& a : b.actions) out.push_back(lower(Json(a).dump()));
  }
  if (!t.target_tiles.empty()) out.push_back(Json(t.target_tiles).dump());
  return out;
}

// Leaks found in one response body (JSON or plain text).
inline std::vector<std::string> scan_for_leaks(const std::string& body, const std::vector<std::string>& secrets) {
  std::string text = body;
  try {
    text = strip_public_fields(Json::parse(body)).dump();
  } catch (const Json::exception&) {
  }
  text = lower(text);
  std::string compact;
  for (char c : text) {
    if (c != ' ') compact += c;
  }
  std::vector<std::string> found;
  for (const auto& s : secrets) {
    if (contains_token(compact, s) || contains_token(text, s)) found.push_back(s);
  }
  return found;
}

// PNG payloads must not carry text chunks.
inline bool png_has_text_chunks(const std::string& body) {
  std::size_t pos = 8;
  while (pos + 8 <= body.size()) {
    const auto b = [&](std::size_t i) { return static_cast<std::uint32_t>(static_cast<unsigned char>(body[i])); };
    const std::uint32_t len = b(pos) << 24 | b(pos + 1) << 16 | b(pos + 2) << 8 | b(pos + 3);
    const std::string tag = body.substr(pos + 4, 4);
    if (tag == "tEXt" || tag == "iTXt" || tag == "zTXt") return true;
    pos += 12 + static_cast<std::size_t>(len);
  }
  return false;
}

}  // namespace capgym::test_support
