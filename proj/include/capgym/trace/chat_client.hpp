#pragma once

#include <httplib.h>

#include <chrono>
#include <cstdint>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "capgym/core/base64.hpp"
#include "capgym/core/error.hpp"
#include "capgym/core/json.hpp"

namespace capgym {

struct ChatPart {
  enum class Kind { Text, ImagePng };
  Kind kind = Kind::Text;
  std::string text;
  std::vector<std::uint8_t> png;

  static ChatPart of_text(std::string t) { return {Kind::Text, std::move(t), {}}; }
  static ChatPart of_image(std::vector<std::uint8_t> png) { return {Kind::ImagePng, {}, std::move(png)}; }
};

struct ChatMessage {
  std::string role;  // system | user | assistant
  std::vector<ChatPart> parts;
};

struct ChatOptions {
  std::string url;  // full endpoint or base URL
  std::string model = "default";
  std::string api_key;
  int timeout_s = 120;
  int max_retries = 4;
  int backoff_base_ms = 500;
  double temperature = 0.0;
  int max_tokens = 1024;
};

struct Endpoint {
  std::string scheme_host_port;
  std::string path;
};

// "http://host:8000" -> {"http://host:8000", "/v1/chat/completions"}.
inline Endpoint parse_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("url", "expected scheme://host[:port][/path], got '" + url + "'");
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint ep{url.substr(0, path_start), path_start == std::string::npos ? "" : url.substr(path_start)};
  if (ep.path.empty() || ep.path == "/") ep.path = "/v1/chat/completions";
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (url.rfind("https://", 0) == 0) throw ConfigError("url", "https endpoints need a build with OpenSSL support");
#endif
  return ep;
}

inline Json chat_request_body(const ChatOptions& opts, const std::vector<ChatMessage>& messages) {
  Json msgs = Json::array();
  for (const auto& m : messages) {
    Json content = Json::array();
    for (const auto& p : m.parts) {
      if (p.kind == ChatPart::Kind::Text) {
        content.push_back({{"type", "text"}, {"text", p.text}});
      } else {
        content.push_back({{"type", "image_url"}, {"image_url", {{"url", png_data_url(p.png)}}}});
      }
    }
    // Plain-string content keeps text-only turns compatible with strict servers.
    if (m.parts.size() == 1 && m.parts[0].kind == ChatPart::Kind::Text) {
      msgs.push_back({{"role", m.role}, {"content", m.parts[0].text}});
    } else {
      msgs.push_back({{"role", m.role}, {"content", content}});
    }
  }
  return Json{{"model", opts.model},
              {"messages", msgs},
              {"temperature", opts.temperature},
              {"max_tokens", opts.max_tokens}};
}

inline std::string chat_response_text(const Json& body) {
  const auto& content = body.at("choices").at(0).at("message").at("content");
  if (content.is_string()) return content.get<std::string>();
  std::string out;
  for (const auto& part : content) {
    if (part.value("type", "") == "text") out += part.value("text", "");
  }
  return out;
}

// Minimal client for OpenAI-compatible chat-completion endpoints. Network
// errors, 429 and 5xx are retried with exponential backoff.
class ChatClient {
 public:
  explicit ChatClient(ChatOptions opts) : opts_(std::move(opts)), endpoint_(parse_endpoint(opts_.url)) {}

  const ChatOptions& options() const { return opts_; }
  int last_attempts() const { return last_attempts_; }

  // Replaceable for tests.
  std::function<void(std::chrono::milliseconds)> sleep = [](std::chrono::milliseconds d) {
    std::this_thread::sleep_for(d);
  };

  std::string complete(const std::vector<ChatMessage>& messages) {
    const std::string body = chat_request_body(opts_, messages).dump();
    httplib::Client cli(endpoint_.scheme_host_port);
    cli.set_connection_timeout(std::min(opts_.timeout_s, 30), 0);
    cli.set_read_timeout(opts_.timeout_s, 0);
    cli.set_write_timeout(opts_.timeout_s, 0);
    httplib::Headers headers;
    if (!opts_.api_key.empty()) headers.emplace("Authorization", "Bearer " + opts_.api_key);

    std::string last_error;
    for (int attempt = 0; attempt <= opts_.max_retries; ++attempt) {
      last_attempts_ = attempt + 1;
      if (attempt > 0) sleep(std::chrono::milliseconds(static_cast<long>(opts_.backoff_base_ms) << (attempt - 1)));
      auto res = cli.Post(endpoint_.path, headers, body, "application/json");
      if (!res) {
        last_error = "network error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status == 429 || res->status >= 500) {
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200) {
        throw PipelineError("chat endpoint returned HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
      }
      try {
        return chat_response_text(Json::parse(res->body));
      } catch (const Json::exception& e) {
        throw PipelineError(std::string("malformed chat response: ") + e.what());
      }
    }
    throw PipelineError("chat endpoint failed after " + std::to_string(last_attempts_) + " attempts (" + last_error + ")");
  }

 private:
  ChatOptions opts_;
  Endpoint endpoint_;
  int last_attempts_ = 0;
};

}  // namespace capgym
