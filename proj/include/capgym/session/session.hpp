#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "capgym/core/action.hpp"
#include "capgym/core/config.hpp"
#include "capgym/core/error.hpp"
#include "capgym/gen/asset_bank.hpp"
#include "capgym/gen/generate.hpp"
#include "capgym/render/render.hpp"

namespace capgym {

using Clock = std::chrono::system_clock;

enum class SessionStatus { InProgress, Solved, Failed, Expired };

inline constexpr std::string_view to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::InProgress: return "in_progress";
    case SessionStatus::Solved: return "solved";
    case SessionStatus::Failed: return "failed";
    case SessionStatus::Expired: return "expired";
  }
  return "unknown";
}

struct Feedback {
  std::optional<bool> solved;  // empty when no submission happened in the batch
  SessionStatus status = SessionStatus::InProgress;
  int steps_used = 0;
  std::string screenshot;  // content hash of the resulting frame
  std::optional<int> rejected_action;
  std::string message;
  friend bool operator==(const Feedback&, const Feedback&) = default;
};

struct TranscriptEntry {
  ActionBatch batch;
  Feedback feedback;
};

// Shared, immutable generation context.
struct Environment {
  EnvConfig cfg;
  std::shared_ptr<const AssetBank> bank;

  static Environment make(EnvConfig cfg, std::shared_ptr<const AssetBank> bank = nullptr) {
    validate(cfg);
    if (!bank) {
      bank = std::make_shared<const AssetBank>(
          cfg.asset_bank_path.empty() ? procedural_asset_bank()
                                      : load_asset_bank(std::filesystem::path(cfg.asset_bank_path)));
    }
    return {std::move(cfg), std::move(bank)};
  }

  ChallengeInstance generate(ChallengeType type, std::uint64_t seed) const {
    return capgym::generate(type, seed, cfg, *bank);
  }
};

// What a submission refers to; unused fields stay empty.
struct Submission {
  std::optional<int> icon;         // IconSelection / Paged icon click
  std::optional<int> tile;         // Paged tile click
  std::optional<std::pair<int, int>> icon_pair;  // IconMatch drag
  std::optional<Point> click;      // Paged click location
  bool terminate = false;

  static Submission of_icon(int i, Point p) {
    Submission s;
    s.icon = i;
    s.click = p;
    return s;
  }
  static Submission of_tile(int i, Point p) {
    Submission s;
    s.tile = i;
    s.click = p;
    return s;
  }
  static Submission of_pair(int a, int b) {
    Submission s;
    s.icon_pair = std::pair{a, b};
    return s;
  }
  static Submission of_terminate() {
    Submission s;
    s.terminate = true;
    return s;
  }
};

class Session {
 public:
  Session(std::string id, ChallengeInstance inst, const Environment& env, Clock::time_point created = Clock::now())
      : id_(std::move(id)),
        instance_(std::move(inst)),
        live_(instance_.scene),
        cfg_(env.cfg),
        bank_(env.bank),
        created_at_(created) {}

  const std::string& id() const { return id_; }
  const ChallengeInstance& instance() const { return instance_; }
  const SceneGraph& live() const { return live_; }
  SessionStatus status() const { return status_; }
  int steps_used() const { return steps_used_; }
  int budget() const { return cfg_.budget(instance_.type); }
  Clock::time_point created_at() const { return created_at_; }
  const std::vector<TranscriptEntry>& transcript() const { return transcript_; }
  bool input_focused() const { return live_.input && live_.input->focused; }
  // Outcome of the most recent submission, if any.
  std::optional<bool> last_verdict() const { return last_verdict_; }

  const Screenshot& screenshot() const {
    if (!frame_) frame_ = render(live_, *bank_);
    return *frame_;
  }

  bool is_stale(Clock::time_point now) const {
    return now - created_at_ > std::chrono::seconds(cfg_.session_expiry_s);
  }

  // Marks the session expired if it is in progress and too old.
  bool expire_if_stale(Clock::time_point now) {
    if (status_ != SessionStatus::InProgress || !is_stale(now)) return false;
    status_ = SessionStatus::Expired;
    return true;
  }

  Feedback apply_batch(const ActionBatch& batch, Clock::time_point now = Clock::now()) {
    expire_if_stale(now);
    if (status_ != SessionStatus::InProgress) {
      throw SessionStateError("session " + id_ + " is " + std::string(to_string(status_)));
    }
    if (batch.actions.empty()) throw ParseError("batch must contain at least one action");

    Feedback fb;
    bool reveal_grid = false;
    for (std::size_t i = 0; i < batch.actions.size(); ++i) {
      const auto& action = batch.actions[i];
      if (!in_canvas(action)) {
        fb.rejected_action = static_cast<int>(i);
        fb.message = "action " + std::to_string(i) + " is outside the canvas";
        break;
      }
      const auto sub = step(action, reveal_grid);
      if (!sub) continue;
      const bool ok = verify(*sub);
      fb.solved = ok;
      last_verdict_ = ok;
      if (ok) {
        status_ = SessionStatus::Solved;
      } else {
        reset_after_failure();
      }
      break;
    }
    if (reveal_grid) live_.grid_visible = true;
    ++steps_used_;
    if (status_ == SessionStatus::InProgress && steps_used_ >= budget()) status_ = SessionStatus::Failed;
    frame_.reset();
    fb.status = status_;
    fb.steps_used = steps_used_;
    fb.screenshot = screenshot().hash;
    transcript_.push_back({batch, fb});
    return fb;
  }

  // Script that solves the session from its current live state.
  std::vector<ActionBatch> recovery_script() const { return solve_from_state(instance_, live_); }

 private:
  bool in_canvas(const Action& a) const {
    const Rect canvas = live_.canvas();
    if (const auto* c = std::get_if<LeftClick>(&a)) return canvas.contains(c->coordinate);
    if (const auto* d = std::get_if<Drag>(&a)) return canvas.contains(d->start) && canvas.contains(d->end);
    return true;
  }

  // Applies one primitive; returns a submission if it triggered one.
  std::optional<Submission> step(const Action& action, bool& reveal_grid) {
    if (const auto* c = std::get_if<LeftClick>(&action)) return click(c->coordinate, reveal_grid);
    if (const auto* d = std::get_if<Drag>(&action)) return drag(*d);
    if (const auto* t = std::get_if<Type>(&action)) return type(t->text);
    return Submission::of_terminate();
  }

  std::optional<Submission> click(Point p, bool& reveal_grid) {
    const Hit hit = hit_test(live_, p);
    if (live_.input) live_.input->focused = hit.kind == Hit::Kind::Input;
    switch (hit.kind) {
      case Hit::Kind::Button: {
        const auto role = live_.buttons[static_cast<std::size_t>(hit.index)].role;
        if (role == Role::SubmitButton) return Submission{};
        if (role == Role::NavNext) live_.page = std::min(live_.page + 1, live_.page_count - 1);
        if (role == Role::NavPrev) live_.page = std::max(live_.page - 1, 0);
        return std::nullopt;
      }
      case Hit::Kind::Checkbox:
        live_.checkbox->checked = true;
        reveal_grid = true;
        return std::nullopt;
      case Hit::Kind::Icon:
        if (instance_.type == ChallengeType::IconSelection || instance_.type == ChallengeType::Paged) {
          return Submission::of_icon(hit.index, p);
        }
        return std::nullopt;
      case Hit::Kind::Tile:
        if (instance_.type == ChallengeType::Paged) return Submission::of_tile(hit.index, p);
        if (instance_.type == ChallengeType::ImageGrid) {
          auto& tile = live_.tiles[static_cast<std::size_t>(hit.index)];
          tile.selected = !tile.selected;
        }
        return std::nullopt;
      default:
        return std::nullopt;
    }
  }

  std::optional<Submission> drag(const Drag& d) {
    const Hit from = hit_test(live_, d.start);
    if (live_.input) live_.input->focused = false;
    if (from.kind == Hit::Kind::SliderHandle) {
      auto& s = *live_.slider;
      s.handle_offset = std::clamp(s.handle_offset + (d.end.x - d.start.x), 0, s.max_offset());
      return Submission{};
    }
    if (from.kind == Hit::Kind::Icon && instance_.type == ChallengeType::IconMatch) {
      const auto src = static_cast<std::size_t>(from.index);
      // Topmost other icon under the drop point.
      for (std::size_t i = live_.icons.size(); i-- > 0;) {
        if (i != src && live_.icons[i].rect.contains(d.end)) {
          return Submission::of_pair(from.index, static_cast<int>(i));
        }
      }
      auto& icon = live_.icons[src];
      const Rect& area = live_.content;
      const int x = std::clamp(d.end.x - icon.rect.w / 2, area.x, std::max(area.x, area.right() - icon.rect.w));
      const int y = std::clamp(d.end.y - icon.rect.h / 2, area.y, std::max(area.y, area.bottom() - icon.rect.h));
      icon.rect.x = x;
      icon.rect.y = y;
    }
    return std::nullopt;
  }

  std::optional<Submission> type(const std::string& text) {
    if (!input_focused()) return std::nullopt;
    auto& buf = live_.input->text;
    for (char c : text) {
      if (c == '\b') {
        if (!buf.empty()) buf.pop_back();
      } else if (c == '\n') {
        return Submission{};
      } else {
        buf.push_back(c);
      }
    }
    return std::nullopt;
  }

  static std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
  }

  static std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  }

  bool verify(const Submission& sub) const {
    const auto& truth = instance_.truth;
    switch (instance_.type) {
      case ChallengeType::Text:
      case ChallengeType::CompactText: {
        std::string typed = trim(live_.input->text);
        std::string want = trim(truth.answer_label);
        if (!cfg_.text_case_sensitive) {
          typed = lower(typed);
          want = lower(want);
        }
        return typed == want;
      }
      case ChallengeType::Slider:
        return std::abs(live_.slider->handle_offset - *truth.goal_offset_px) <= cfg_.slider_tolerance_px;
      case ChallengeType::IconSelection: {
        const auto* t = truth.find(Role::Icon);
        return sub.icon && t && *sub.icon == t->index;
      }
      case ChallengeType::IconMatch: {
        if (!sub.icon_pair) return false;
        const int a = truth.targets.at(0).index;
        const int b = truth.targets.at(1).index;
        const auto [x, y] = *sub.icon_pair;
        return (x == a && y == b) || (x == b && y == a);
      }
      case ChallengeType::Paged: {
        if (!sub.click || live_.page != *truth.target_page) return false;
        const Role role = sub.tile ? Role::Tile : Role::Icon;
        const auto* t = truth.find(role);
        const auto idx = sub.tile ? sub.tile : sub.icon;
        return t && idx && *idx == t->index && t->rect.contains(*sub.click);
      }
      case ChallengeType::ImageGrid: {
        if (!live_.grid_visible) return false;
        std::vector<int> selected;
        for (std::size_t i = 0; i < live_.tiles.size(); ++i) {
          if (live_.tiles[i].selected) selected.push_back(static_cast<int>(i));
        }
        return selected == truth.target_tiles;
      }
    }
    return false;
  }

  // Interactive state returns to its initial value; the displayed page and
  // the checkbox stage are kept.
  void reset_after_failure() {
    if (cfg_.regenerate_on_fail) {
      const int page = live_.page;
      const bool grid = live_.grid_visible;
      ++regenerations_;
      instance_ = capgym::generate(instance_.type, splitmix64(instance_.seed ^ static_cast<std::uint64_t>(regenerations_)),
                                   cfg_, *bank_);
      live_ = instance_.scene;
      live_.page = std::min(page, live_.page_count - 1);
      live_.grid_visible = grid;
      if (live_.checkbox && grid) live_.checkbox->checked = true;
      return;
    }
    const auto& init = instance_.scene;
    if (live_.input) {
      live_.input->text.clear();
      live_.input->focused = false;
    }
    for (std::size_t i = 0; i < live_.tiles.size(); ++i) live_.tiles[i].selected = init.tiles[i].selected;
    for (std::size_t i = 0; i < live_.icons.size(); ++i) live_.icons[i].rect = init.icons[i].rect;
    if (live_.slider) live_.slider->handle_offset = init.slider->handle_offset;
  }

  std::string id_;
  ChallengeInstance instance_;
  SceneGraph live_;
  EnvConfig cfg_;
  std::shared_ptr<const AssetBank> bank_;
  Clock::time_point created_at_;
  SessionStatus status_ = SessionStatus::InProgress;
  int steps_used_ = 0;
  int regenerations_ = 0;
  std::optional<bool> last_verdict_;
  std::vector<TranscriptEntry> transcript_;
  mutable std::optional<Screenshot> frame_;
};

inline Json feedback_json(const Feedback& fb, const std::string& screenshot_ref) {
  Json j{{"solved", fb.solved ? Json(*fb.solved) : Json(nullptr)},
         {"status", std::string(to_string(fb.status))},
         {"steps_used", fb.steps_used},
         {"screenshot", screenshot_ref}};
  if (fb.rejected_action) j["rejected_action"] = *fb.rejected_action;
  if (!fb.message.empty()) j["message"] = fb.message;
  return j;
}

}  // namespace capgym
