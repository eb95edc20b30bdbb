#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "capgym/core/action.hpp"
#include "capgym/core/rng.hpp"
#include "capgym/gen/instance.hpp"
#include "capgym/render/png.hpp"
#include "capgym/render/render.hpp"
#include "capgym/trace/chat_client.hpp"
#include "capgym/trace/prompts.hpp"

namespace capgym {

struct AgentTurn {
  std::string reasoning;
  ActionBatch batch;
};

struct Observation {
  std::string instruction;
  const Screenshot* screenshot = nullptr;
  int step = 0;                        // batches already submitted
  std::optional<bool> last_solved;     // verdict of the previous batch, if it submitted
  std::vector<AgentTurn> history;
};

// Privileged view of a live session, handed only to privileged agents.
class MetaAccess {
 public:
  virtual ~MetaAccess() = default;
  virtual const ChallengeInstance& instance() const = 0;
  virtual const SceneGraph& live_scene() const = 0;
  virtual std::vector<ActionBatch> recovery_script() const = 0;
};

class AgentAdapter {
 public:
  virtual ~AgentAdapter() = default;
  virtual AgentTurn act(const Observation& obs) = 0;
};

struct AgentContext {
  ChallengeType type = ChallengeType::Text;
  std::uint64_t seed = 0;
  const MetaAccess* meta = nullptr;  // null for non-privileged agents
};

struct AgentFactory {
  std::string id;
  bool privileged = false;
  std::function<std::unique_ptr<AgentAdapter>(const AgentContext&)> make;
};

// Replays the solution from the live state at every step.
class OracleAgent : public AgentAdapter {
 public:
  explicit OracleAgent(const MetaAccess& meta) : meta_(meta) {}

  AgentTurn act(const Observation&) override {
    const auto script = meta_.recovery_script();
    if (script.empty()) return {"Nothing left to do.", {{Terminate{}}}};
    return {"Following the known solution.", script.front()};
  }

 private:
  const MetaAccess& meta_;
};

// Uniform random GUI actions: one to three per step.
class RandomAgent : public AgentAdapter {
 public:
  RandomAgent(std::uint64_t seed, ChallengeType type)
      : rng_(seed, "random-agent/" + std::string(to_string(type))) {}

  AgentTurn act(const Observation& obs) override {
    const int w = obs.screenshot ? obs.screenshot->width() : 1;
    const int h = obs.screenshot ? obs.screenshot->height() : 1;
    const auto point = [&] { return Point{static_cast<int>(rng_.uniform_int(0, w - 1)), static_cast<int>(rng_.uniform_int(0, h - 1))}; };
    AgentTurn turn{"Trying random interactions.", {}};
    const auto n = rng_.uniform_int(1, 3);
    for (std::int64_t i = 0; i < n; ++i) {
      const double r = rng_.uniform01();
      if (r < 0.5) {
        turn.batch.actions.push_back(LeftClick{point()});
      } else if (r < 0.8) {
        turn.batch.actions.push_back(Drag{point(), point()});
      } else {
        static constexpr std::string_view kChars = "ABCDEFGHJKMNPQRSTUVWXYZ23456789";
        std::string s;
        const auto len = rng_.uniform_int(3, 6);
        for (std::int64_t k = 0; k < len; ++k) s += kChars[static_cast<std::size_t>(rng_.uniform_int(0, kChars.size() - 1))];
        turn.batch.actions.push_back(Type{s});
      }
    }
    return turn;
  }

 private:
  Rng rng_;
};

// Cycles through a fixed script.
class ReplayAgent : public AgentAdapter {
 public:
  explicit ReplayAgent(std::vector<ActionBatch> script) : script_(std::move(script)) {
    if (script_.empty()) throw ConfigError("replay", "replay script must contain at least one batch");
  }

  AgentTurn act(const Observation&) override {
    const auto& b = script_[next_++ % script_.size()];
    return {"Replaying scripted actions.", b};
  }

 private:
  std::vector<ActionBatch> script_;
  std::size_t next_ = 0;
};

// Accepts either a JSON array of batches or {"batches": [...]}.
inline std::vector<ActionBatch> load_replay_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("replay", "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  Json doc = parse_json(ss.str(), "replay script");
  if (doc.is_object() && doc.contains("batches")) doc = doc["batches"];
  if (!doc.is_array()) throw ParseError("replay script must be an array of batches");
  return doc.get<std::vector<ActionBatch>>();
}

// A privileged agent that makes one deliberate mistake on its first
// submitting batch and then follows the solution. Used as the failing student
// for correction traces.
class FlawedOracleAgent : public AgentAdapter {
 public:
  explicit FlawedOracleAgent(const MetaAccess& meta, std::string wrong_text = {})
      : meta_(meta), wrong_text_(std::move(wrong_text)) {}

  AgentTurn act(const Observation&) override {
    const auto script = meta_.recovery_script();
    if (script.empty()) return {"Nothing left to do.", {{Terminate{}}}};
    const auto& inst = meta_.instance();
    // The checkbox stage does not submit; take it as is.
    if (mistake_made_ || (inst.type == ChallengeType::ImageGrid && script.size() > 1)) {
      return {"Following the known solution.", script.front()};
    }
    mistake_made_ = true;
    ActionBatch b = script.front();
    const SceneGraph& live = meta_.live_scene();
    switch (inst.type) {
      case ChallengeType::Text:
      case ChallengeType::CompactText: {
        const std::string typo = wrong_text_.empty() ? misread(inst.truth.answer_label) : wrong_text_;
        for (auto& a : b.actions) {
          if (auto* t = std::get_if<Type>(&a)) t->text = typo;
        }
        return {"I observe a warped text image displaying '" + typo + "'. I will type '" + typo +
                    "' into the input field and press submit.",
                b};
      }
      case ChallengeType::Slider: {
        auto& d = std::get<Drag>(b.actions.front());
        d.end.x += d.end.x - d.start.x > 30 ? -24 : 24;
        return {"The gap looks close to the piece, so I drag the handle a short way.", b};
      }
      case ChallengeType::ImageGrid: {
        ActionBatch wrong;
        for (std::size_t i = 0; i < live.tiles.size(); ++i) {
          if (!std::binary_search(inst.truth.target_tiles.begin(), inst.truth.target_tiles.end(), static_cast<int>(i))) {
            wrong.actions.push_back(LeftClick{live.tiles[i].rect.center()});
            break;
          }
        }
        wrong.actions.push_back(b.actions.back());
        return {"This tile seems to match the instruction, so I select it and verify.", wrong};
      }
      case ChallengeType::IconMatch: {
        auto& d = std::get<Drag>(b.actions.back());
        d.end = decoy(live);
        return {"These two icons look alike, so I drag one onto the other.", b};
      }
      default:
        return {"That item looks like the one requested, so I click it.", {{LeftClick{decoy(live)}}}};
    }
  }

 private:
  static std::string misread(const std::string& answer) {
    static constexpr std::string_view kAlphabet = "ABCDEFGHJKMNPQRSTUVWXYZ23456789";
    std::string out = answer.empty() ? std::string("A") : answer;
    const auto pos = kAlphabet.find(static_cast<char>(std::toupper(static_cast<unsigned char>(out[0]))));
    out[0] = kAlphabet[(pos == std::string_view::npos ? 0 : pos + 1) % kAlphabet.size()];
    return out;
  }

  // Center of a visible non-target icon or tile.
  Point decoy(const SceneGraph& s) const {
    const auto& truth = meta_.instance().truth;
    const auto is_target = [&](Role role, std::size_t i) {
      for (const auto& t : truth.targets) {
        if (t.role == role && t.index == static_cast<int>(i)) return true;
      }
      return false;
    };
    for (std::size_t i = 0; i < s.icons.size(); ++i) {
      if (!is_target(Role::Icon, i) && s.visible(s.icons[i])) return s.icons[i].rect.center();
    }
    for (std::size_t i = 0; i < s.tiles.size(); ++i) {
      if (!is_target(Role::Tile, i) && s.visible(s.tiles[i])) return s.tiles[i].rect.center();
    }
    return {1, 1};
  }

  const MetaAccess& meta_;
  std::string wrong_text_;
  bool mistake_made_ = false;
};

// Drives a remote model through the tool-call chat protocol.
class RemoteAgent : public AgentAdapter {
 public:
  explicit RemoteAgent(ChatOptions opts) : client_(std::move(opts)) {}

  AgentTurn act(const Observation& obs) override {
    if (!obs.screenshot) throw Error("remote agent needs a screenshot");
    if (messages_.empty()) messages_.push_back({"system", {ChatPart::of_text(agent_system_prompt())}});
    const std::string_view prompt = obs.step == 0 ? kInitialUserPrompt : kFollowUpUserPrompt;
    messages_.push_back({"user", {ChatPart::of_image(encode_png(*obs.screenshot)), ChatPart::of_text(std::string(prompt))}});
    const std::string reply = client_.complete(messages_);
    messages_.push_back({"assistant", {ChatPart::of_text(reply)}});
    auto parsed = parse_tool_calls(reply);
    if (parsed.batch.actions.empty()) throw ParseError("model reply contained no tool call");
    return {parsed.reasoning, parsed.batch};
  }

 private:
  ChatClient client_;
  std::vector<ChatMessage> messages_;
};

inline AgentFactory oracle_agent_factory() {
  return {"oracle", true, [](const AgentContext& c) -> std::unique_ptr<AgentAdapter> {
            if (!c.meta) throw Error("oracle agent requires meta access");
            return std::make_unique<OracleAgent>(*c.meta);
          }};
}

inline AgentFactory flawed_oracle_factory(std::string wrong_text = {}) {
  return {"flawed-oracle", true, [wrong_text](const AgentContext& c) -> std::unique_ptr<AgentAdapter> {
            if (!c.meta) throw Error("flawed oracle requires meta access");
            return std::make_unique<FlawedOracleAgent>(*c.meta, wrong_text);
          }};
}

inline AgentFactory random_agent_factory() {
  return {"random", false, [](const AgentContext& c) -> std::unique_ptr<AgentAdapter> {
            return std::make_unique<RandomAgent>(c.seed, c.type);
          }};
}

inline AgentFactory replay_agent_factory(std::vector<ActionBatch> script, std::string id = "replay") {
  return {std::move(id), false, [script = std::move(script)](const AgentContext&) -> std::unique_ptr<AgentAdapter> {
            return std::make_unique<ReplayAgent>(script);
          }};
}

inline AgentFactory remote_agent_factory(ChatOptions opts) {
  return {"remote:" + opts.url, false, [opts](const AgentContext&) -> std::unique_ptr<AgentAdapter> {
            return std::make_unique<RemoteAgent>(opts);
          }};
}

}  // namespace capgym
