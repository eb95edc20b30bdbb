#pragma once

#include <httplib.h>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include "capgym/core/base64.hpp"
#include "capgym/core/config.hpp"
#include "capgym/core/json.hpp"
#include "capgym/session/store.hpp"

namespace capgym {

struct ApiError {
  int status = 500;
  std::string code;
  std::string message;
};

struct ServiceOptions {
  std::string cors_origin = "*";
  std::optional<std::filesystem::path> schema_dir;
  std::optional<std::filesystem::path> playground_dir;
  int sweep_interval_s = 30;
};

// Reads the meta token and asset path from the environment when set.
inline EnvConfig apply_env_overrides(EnvConfig cfg) {
  if (const char* tok = std::getenv("CAPGYM_META_TOKEN"); tok && *tok) cfg.meta_token = tok;
  if (const char* path = std::getenv("CAPGYM_ASSET_BANK"); path && *path) cfg.asset_bank_path = path;
  validate(cfg);
  return cfg;
}

inline std::string default_schema_dir() {
#ifdef CAPGYM_SCHEMA_DIR
  return CAPGYM_SCHEMA_DIR;
#else
  return "schemas";
#endif
}

namespace service_detail {

inline void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline void send_error(httplib::Response& res, const ApiError& e) {
  send_json(res, e.status, Json{{"error", {{"code", e.code}, {"message", e.message}}}});
}

inline std::string bearer_token(const httplib::Request& req) {
  if (req.has_header("X-Meta-Token")) return req.get_header_value("X-Meta-Token");
  const auto auth = req.get_header_value("Authorization");
  constexpr std::string_view kPrefix = "Bearer ";
  if (auth.rfind(kPrefix, 0) == 0) return auth.substr(kPrefix.size());
  return {};
}

// Constant-time comparison so the token cannot be probed byte by byte.
inline bool token_equal(const std::string& a, const std::string& b) {
  unsigned diff = static_cast<unsigned>(a.size() ^ b.size());
  for (std::size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
    const unsigned char x = i < a.size() ? static_cast<unsigned char>(a[i]) : 0;
    const unsigned char y = i < b.size() ? static_cast<unsigned char>(b[i]) : 0;
    diff |= x ^ y;
  }
  return diff == 0 && !a.empty();
}

inline bool flag(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) return false;
  const auto v = req.get_param_value(name);
  return v.empty() || v == "1" || v == "true";
}

}  // namespace service_detail

class Service {
 public:
  explicit Service(Environment env, ServiceOptions opts = {})
      : store_(std::move(env), std::random_device{}()), opts_(std::move(opts)) {
    if (!opts_.schema_dir) opts_.schema_dir = default_schema_dir();
  }

  ~Service() { stop(); }

  SessionStore& store() { return store_; }
  const EnvConfig& config() const { return store_.environment().cfg; }

  void register_routes(httplib::Server& srv) {
    using namespace service_detail;
    srv.set_default_headers({{"Access-Control-Allow-Origin", opts_.cors_origin},
                             {"Access-Control-Allow-Headers", "Content-Type, Authorization, X-Meta-Token"},
                             {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                             {"Access-Control-Expose-Headers", "ETag"}});
    srv.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    srv.Post("/api/challenge", wrap([this](const auto& req, auto& res) { create(req, res); }));
    srv.Get(R"(/api/challenge/([^/]+)/screenshot)", wrap([this](const auto& req, auto& res) { screenshot(req, res); }));
    srv.Post(R"(/api/challenge/([^/]+)/actions)", wrap([this](const auto& req, auto& res) { actions(req, res); }));
    srv.Get(R"(/api/challenge/([^/]+)/meta)", wrap([this](const auto& req, auto& res) { meta(req, res); }));
    srv.Get(R"(/api/challenge/([^/]+)/result)", wrap([this](const auto& req, auto& res) { result(req, res); }));
    srv.Get("/api/health", wrap([this](const auto&, auto& res) {
      send_json(res, 200, Json{{"status", "ok"}, {"sessions", store_.size()}});
    }));
    srv.Get("/api/config", wrap([this](const auto&, auto& res) {
      send_json(res, 200, to_json_document(config(), false));
    }));
    srv.Get("/api/schema", wrap([this](const auto& req, auto& res) { schema(req, res); }));
    if (opts_.playground_dir && std::filesystem::is_directory(*opts_.playground_dir)) {
      srv.set_mount_point("/playground", opts_.playground_dir->string());
    }
  }

  // Starts the periodic expiry sweep.
  void start_sweeper() {
    if (sweeper_.joinable()) return;
    sweeper_ = std::thread([this] {
      std::unique_lock lock(sweep_mutex_);
      while (!stopping_) {
        sweep_cv_.wait_for(lock, std::chrono::seconds(opts_.sweep_interval_s));
        if (!stopping_) store_.expire_stale();
      }
    });
  }

  void stop() {
    {
      std::lock_guard lock(sweep_mutex_);
      stopping_ = true;
    }
    sweep_cv_.notify_all();
    if (sweeper_.joinable()) sweeper_.join();
  }

 private:
  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  static Handler wrap(Handler h) {
    using namespace service_detail;
    return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
      try {
        h(req, res);
      } catch (const ApiError& e) {
        send_error(res, e);
      } catch (const NotFoundError& e) {
        send_error(res, {404, "not_found", e.what()});
      } catch (const SessionStateError& e) {
        send_error(res, {409, "session_terminal", e.what()});
      } catch (const ParseError& e) {
        send_error(res, {400, "bad_request", e.what()});
      } catch (const ConfigError& e) {
        send_error(res, {400, "bad_config", e.what()});
      } catch (const Json::exception& e) {
        send_error(res, {400, "bad_request", e.what()});
      } catch (const std::exception& e) {
        send_error(res, {500, "internal", e.what()});
      }
    };
  }

  static std::string screenshot_url(const std::string& id, const std::string& hash) {
    return "/api/challenge/" + id + "/screenshot?v=" + hash;
  }

  void create(const httplib::Request& req, httplib::Response& res) {
    const Json body = req.body.empty() ? Json::object() : parse_json(req.body, "request body");
    if (!body.is_object()) throw ApiError{400, "bad_request", "request body must be a JSON object"};
    if (!body.contains("type") || !body["type"].is_string()) {
      throw ApiError{400, "bad_request", "missing string field 'type'"};
    }
    const auto type_name = body["type"].get<std::string>();
    const auto type = parse_challenge_type(type_name);
    if (!type) throw ApiError{400, "unknown_type", "unknown challenge type '" + type_name + "'"};

    std::uint64_t seed = 0;
    if (body.contains("seed") && !body["seed"].is_null()) {
      if (!body["seed"].is_number_unsigned()) throw ApiError{400, "bad_request", "seed must be a non-negative integer"};
      seed = body["seed"].get<std::uint64_t>();
    } else {
      std::lock_guard lock(seed_mutex_);
      seed = seed_rng_() % 1'000'000'000'000ULL;
    }

    std::string id;
    if (body.contains("config_overrides") && !body["config_overrides"].is_null()) {
      const auto& ov = body["config_overrides"];
      for (const char* locked : {"meta_token", "asset_bank_path"}) {
        if (ov.is_object() && ov.contains(locked)) {
          throw ApiError{400, "bad_config", std::string("config key '") + locked + "' cannot be overridden per request"};
        }
      }
      const auto& base = store_.environment();
      Environment env{apply_overrides(base.cfg, ov), base.bank};
      id = store_.create_with(env, *type, seed);
    } else {
      id = store_.create(*type, seed);
    }

    store_.with(id, [&](Session& s) {
      const auto& shot = s.screenshot();
      Json out{{"challenge_id", id},
               {"type", type_name},
               {"seed", seed},
               {"width", shot.width()},
               {"height", shot.height()},
               {"screenshot_url", screenshot_url(id, shot.hash)},
               {"budget", s.budget()}};
      if (service_detail::flag(req, "inline")) out["screenshot_png_base64"] = base64_encode(encode_png(shot));
      service_detail::send_json(res, 200, out);
    });
  }

  void screenshot(const httplib::Request& req, httplib::Response& res) {
    const auto id = req.matches[1].str();
    store_.with(id, [&](Session& s) {
      const auto& shot = s.screenshot();
      const std::string etag = "\"" + shot.hash + "\"";
      res.set_header("ETag", etag);
      res.set_header("Cache-Control", "no-cache");
      if (req.get_header_value("If-None-Match") == etag) {
        res.status = 304;
        return;
      }
      const auto png = encode_png(shot);
      res.status = 200;
      res.set_content(std::string(png.begin(), png.end()), "image/png");
    });
  }

  void actions(const httplib::Request& req, httplib::Response& res) {
    const auto id = req.matches[1].str();
    if (!store_.contains(id)) throw NotFoundError("unknown challenge id '" + id + "'");
    const auto batch = parse_json(req.body, "action batch").get<ActionBatch>();
    store_.with(id, [&](Session& s) {
      const auto fb = s.apply_batch(batch);
      Json out = feedback_json(fb, screenshot_url(id, fb.screenshot));
      if (service_detail::flag(req, "inline")) out["screenshot_png_base64"] = base64_encode(encode_png(s.screenshot()));
      service_detail::send_json(res, 200, out);
    });
  }

  void meta(const httplib::Request& req, httplib::Response& res) {
    if (!service_detail::token_equal(service_detail::bearer_token(req), config().meta_token)) {
      throw ApiError{403, "forbidden", "a valid meta token is required"};
    }
    const auto id = req.matches[1].str();
    store_.with(id, [&](Session& s) {
      const auto& inst = s.instance();
      Json transcript = Json::array();
      for (const auto& e : s.transcript()) {
        transcript.push_back({{"batch", e.batch}, {"feedback", feedback_json(e.feedback, e.feedback.screenshot)}});
      }
      Json out = inst.truth;
      out["challenge_id"] = id;
      out["type"] = std::string(to_string(inst.type));
      out["seed"] = inst.seed;
      out["config_hash"] = inst.config_hash;
      out["instruction"] = inst.instruction_text;
      out["transcript"] = transcript;
      out["recovery_script"] = s.recovery_script();
      service_detail::send_json(res, 200, out);
    });
  }

  void result(const httplib::Request& req, httplib::Response& res) {
    const auto id = req.matches[1].str();
    store_.with(id, [&](Session& s) {
      Json solved = nullptr;
      if (s.status() == SessionStatus::Solved) solved = true;
      if (s.status() == SessionStatus::Failed || s.status() == SessionStatus::Expired) solved = false;
      service_detail::send_json(res, 200,
                                Json{{"status", std::string(to_string(s.status()))},
                                     {"solved", solved},
                                     {"steps_used", s.steps_used()},
                                     {"budget", s.budget()}});
    });
  }

  void schema(const httplib::Request& req, httplib::Response& res) {
    const std::string name = req.has_param("name") ? req.get_param_value("name") : "openapi";
    if (name.find_first_not_of("abcdefghijklmnopqrstuvwxyz_") != std::string::npos) {
      throw ApiError{400, "bad_request", "invalid schema name"};
    }
    const auto path = *opts_.schema_dir / (name + ".json");
    std::ifstream in(path);
    if (!in) throw ApiError{404, "not_found", "schema '" + name + "' is not available"};
    std::stringstream ss;
    ss << in.rdbuf();
    res.status = 200;
    res.set_content(ss.str(), "application/json");
  }

  SessionStore store_;
  ServiceOptions opts_;
  std::mutex seed_mutex_;
  std::mt19937_64 seed_rng_{std::random_device{}()};
  std::thread sweeper_;
  std::mutex sweep_mutex_;
  std::condition_variable sweep_cv_;
  bool stopping_ = false;
};

// Splits "host:port"; a bare port binds all interfaces.
inline std::pair<std::string, int> parse_addr(const std::string& addr) {
  const auto colon = addr.rfind(':');
  try {
    if (colon == std::string::npos) return {"0.0.0.0", std::stoi(addr)};
    return {addr.substr(0, colon).empty() ? "0.0.0.0" : addr.substr(0, colon), std::stoi(addr.substr(colon + 1))};
  } catch (const std::exception&) {
    throw ConfigError("addr", "expected host:port, got '" + addr + "'");
  }
}

}  // namespace capgym
