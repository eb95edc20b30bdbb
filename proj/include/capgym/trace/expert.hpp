#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "capgym/core/types.hpp"
#include "capgym/trace/chat_client.hpp"

namespace capgym {

// Privileged facts the mock expert writes from. Network experts ignore it and
// read the prompt and images instead.
struct ExpertContext {
  ChallengeType type = ChallengeType::Text;
  std::string instruction;
  std::string answer;
  std::string plan;  // numbered action description
  bool grid_pending = false;
  bool correction = false;
  std::string previous_reasoning;
  std::string previous_actions;
};

struct ExpertRequest {
  std::string prompt;
  std::vector<std::vector<std::uint8_t>> images;  // PNG
  ExpertContext context;
};

class ExpertClient {
 public:
  virtual ~ExpertClient() = default;
  virtual std::string model_id() const = 0;
  virtual std::string reason(const ExpertRequest& req) = 0;
};

struct MockExpertOptions {
  // When non-empty, appended to every `inject_every`-th response.
  std::string inject_phrase;
  int inject_every = 1;
};

// Deterministic template reasoning; never touches the network.
class MockExpert : public ExpertClient {
 public:
  explicit MockExpert(MockExpertOptions opts = {}) : opts_(std::move(opts)) {}

  std::string model_id() const override { return "mock-expert-v1"; }

  std::string reason(const ExpertRequest& req) override {
    const auto& c = req.context;
    std::string text = c.correction ? correction_text(c) : solution_text(c);
    const auto n = calls_.fetch_add(1) + 1;
    if (!opts_.inject_phrase.empty() && n % std::max(opts_.inject_every, 1) == 0) {
      text += " " + opts_.inject_phrase;
    }
    return text;
  }

  int calls() const { return calls_.load(); }

 private:
  static std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
  }

  static std::string observation(const ExpertContext& c) {
    const std::string ask = "The CAPTCHA asks: \"" + c.instruction + "\".";
    switch (c.type) {
      case ChallengeType::Text:
      case ChallengeType::CompactText:
        return std::string("I observe a ") + (c.type == ChallengeType::CompactText ? "compact " : "") +
               "text CAPTCHA. " + ask + " A warped image shows the characters '" + c.answer +
               "', with an input field and a submit button below it.";
      case ChallengeType::IconSelection:
        return "I observe a canvas of colored icons. " + ask + " Scanning the icons, I find one that looks like a " +
               c.answer + ".";
      case ChallengeType::IconMatch:
        return "I observe a canvas of icons with different shapes and colors. " + ask +
               " Two of them are the same " + c.answer + " shape in the same color.";
      case ChallengeType::Slider:
        return "I observe a slider puzzle: a background image with a dark gap and a loose puzzle piece on the left. " +
               ask + " The gap sits " + c.answer + " px to the right of the piece.";
      case ChallengeType::Paged:
        return "I observe a paged gallery with previous and next buttons. " + ask + " The item I need (" +
               c.answer + ") is not necessarily on the current page.";
      case ChallengeType::ImageGrid:
        if (c.grid_pending) {
          return "I observe a checkbox verification widget. " + ask +
                 " The image grid is hidden until the checkbox is clicked.";
        }
        return "I observe a grid of image tiles. " + ask + " I check every tile for " + c.answer + " patterns.";
    }
    return ask;
  }

  static std::string inference(const ExpertContext& c) {
    switch (c.type) {
      case ChallengeType::Text:
      case ChallengeType::CompactText:
        return "I infer that I must enter '" + c.answer + "' in the input field and submit it.";
      case ChallengeType::IconSelection: return "I infer that clicking the " + c.answer + " icon completes the task.";
      case ChallengeType::IconMatch: return "I infer that I must drag one " + c.answer + " icon onto its twin.";
      case ChallengeType::Slider: return "I infer that the handle must travel the same distance so the piece fills the gap.";
      case ChallengeType::Paged: return "I infer that I should move to the right page and click the matching item.";
      case ChallengeType::ImageGrid:
        return c.grid_pending ? std::string("I infer that the grid must load before any tile can be judged.")
                              : "I infer that exactly the tiles with " + c.answer + " must be selected before verifying.";
    }
    return {};
  }

  static std::string solution_text(const ExpertContext& c) {
    return observation(c) + " " + inference(c) + " My plan: " + one_line(c.plan) + ".";
  }

  static std::string correction_text(const ExpertContext& c) {
    std::string what;
    switch (c.type) {
      case ChallengeType::Text:
      case ChallengeType::CompactText:
        what = "Looking closer, the characters read '" + c.answer + "', so the text I entered did not match.";
        break;
      case ChallengeType::Slider:
        what = "The piece did not line up with the gap, which is " + c.answer + " px from the start.";
        break;
      case ChallengeType::ImageGrid:
        what = "My tile selection did not match the tiles showing " + c.answer + ".";
        break;
      default:
        what = "I acted on the wrong element; the correct target is the " + c.answer + ".";
        break;
    }
    std::string prev = one_line(c.previous_reasoning);
    if (prev.size() > 240) prev = prev.substr(0, 240) + "...";
    return observation(c) + " In my previous attempt I reasoned: \"" + prev + "\" and performed: " +
           one_line(c.previous_actions) + ". The second image shows the CAPTCHA was not solved. " + what +
           " The correct approach: " + one_line(c.plan) + ".";
  }

  MockExpertOptions opts_;
  std::atomic<int> calls_{0};
};

// Expert backed by an OpenAI-compatible chat endpoint.
class HttpExpert : public ExpertClient {
 public:
  explicit HttpExpert(ChatOptions opts) : opts_(std::move(opts)) { parse_endpoint(opts_.url); }

  std::string model_id() const override { return opts_.model; }

  std::string reason(const ExpertRequest& req) override {
    ChatMessage msg{"user", {ChatPart::of_text(req.prompt)}};
    for (const auto& png : req.images) msg.parts.push_back(ChatPart::of_image(png));
    ChatClient client(opts_);
    auto text = client.complete({msg});
    const auto b = text.find_first_not_of(" \t\r\n\"");
    const auto e = text.find_last_not_of(" \t\r\n\"");
    if (b == std::string::npos) throw PipelineError("expert returned an empty response");
    return text.substr(b, e - b + 1);
  }

 private:
  ChatOptions opts_;
};

}  // namespace capgym
