#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "capgym/core/action.hpp"
#include "capgym/core/json.hpp"
#include "capgym/gen/asset_bank.hpp"
#include "capgym/gen/instance.hpp"

namespace capgym {

inline constexpr std::string_view kToolName = "computer_use";

inline constexpr std::string_view kInitialUserPrompt =
    "Solve the CAPTCHA as per the given instructions. You may need to interact with various elements such as "
    "checkboxes, image grids, sliders, or text inputs to complete the CAPTCHA challenge.";

inline constexpr std::string_view kFollowUpUserPrompt =
    "Continue solving the CAPTCHA. Observe the current state and take the next actions.";

inline Json tool_description() {
  return Json{
      {"type", "function"},
      {"function",
       {{"name", std::string(kToolName)},
        {"description",
         "Interact with the CAPTCHA using the mouse and keyboard. Coordinates are screenshot pixels, origin at the "
         "top-left corner."},
        {"parameters",
         {{"type", "object"},
          {"required", {"action"}},
          {"properties",
           {{"action",
             {{"type", "string"},
              {"enum", {"left_click", "drag", "type", "terminate"}},
              {"description",
               "left_click: click at `coordinate`. drag: press at `start`, release at `end`. type: type `text` into "
               "the focused field. terminate: stop and submit the current state."}}},
            {"coordinate", {{"type", "array"}, {"items", {{"type", "integer"}}}, {"description", "[x, y]"}}},
            {"start", {{"type", "array"}, {"items", {{"type", "integer"}}}, {"description", "[x, y]"}}},
            {"end", {{"type", "array"}, {"items", {{"type", "integer"}}}, {"description", "[x, y]"}}},
            {"text", {{"type", "string"}}}}}}}}}};
}

inline std::string agent_system_prompt() {
  return "# Tools\n\nYou may call one or more functions to assist with the user query.\n\n"
         "You are provided with function signatures within <tools></tools> XML tags:\n<tools>\n" +
         tool_description().dump() +
         "\n</tools>\n\n"
         "For each function call, return a json object with function name and arguments within <tool_call></tool_call> "
         "XML tags:\n<tool_call>\n{\"name\": <function-name>, \"arguments\": <args-json-object>}\n</tool_call>\n\n"
         "# Response format\n\nResponse format for every step:\n"
         "1) A single <tool_call>...</tool_call> block containing only the JSON: {\"name\": <function-name>, "
         "\"arguments\": <args-json-object>}.\n\n"
         "Rules:\n- Be brief: output concise thoughts.\n- Do not output anything else outside those parts.\n"
         "- If finishing, use action=terminate in the tool call.";
}

inline std::string format_tool_call(const Action& a) {
  return "<tool_call>\n{\"name\": \"" + std::string(kToolName) + "\", \"arguments\": " + Json(a).dump() +
         "}\n</tool_call>";
}

inline std::string format_tool_calls(const ActionBatch& batch) {
  std::string out;
  for (std::size_t i = 0; i < batch.actions.size(); ++i) {
    if (i) out += "\n";
    out += format_tool_call(batch.actions[i]);
  }
  return out;
}

struct ParsedResponse {
  std::string reasoning;  // text outside tool-call blocks, trimmed
  ActionBatch batch;
};

// Extracts every <tool_call> block. Throws ParseError on malformed calls.
inline ParsedResponse parse_tool_calls(std::string_view text) {
  constexpr std::string_view kOpen = "<tool_call>";
  constexpr std::string_view kClose = "</tool_call>";
  ParsedResponse out;
  std::size_t pos = 0;
  while (true) {
    const auto open = text.find(kOpen, pos);
    out.reasoning += std::string(text.substr(pos, open == std::string_view::npos ? std::string_view::npos : open - pos));
    if (open == std::string_view::npos) break;
    const auto close = text.find(kClose, open);
    if (close == std::string_view::npos) throw ParseError("unterminated <tool_call> block");
    const auto body = text.substr(open + kOpen.size(), close - open - kOpen.size());
    const Json call = parse_json(body, "tool call");
    if (!call.is_object() || call.value("name", "") != kToolName || !call.contains("arguments")) {
      throw ParseError("tool call must name '" + std::string(kToolName) + "' and carry arguments");
    }
    Json args = call["arguments"];
    if (args.is_string()) args = parse_json(args.get<std::string>(), "tool call arguments");
    out.batch.actions.push_back(args.get<Action>());
    pos = close + kClose.size();
  }
  const auto b = out.reasoning.find_first_not_of(" \t\r\n");
  const auto e = out.reasoning.find_last_not_of(" \t\r\n");
  out.reasoning = b == std::string::npos ? std::string() : out.reasoning.substr(b, e - b + 1);
  return out;
}

namespace prompt_detail {

inline std::string rect_str(const Rect& r) {
  return "[x=" + std::to_string(r.x) + ", y=" + std::to_string(r.y) + ", w=" + std::to_string(r.w) +
         ", h=" + std::to_string(r.h) + "]";
}

inline std::string point_str(Point p) { return "(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")"; }

inline std::string button_label(const SceneGraph& s, Role role) {
  const auto* b = s.find_button(role);
  return b ? b->label : std::string();
}

inline std::string element_at(const SceneGraph& s, const AssetBank& bank, Point p) {
  const Hit hit = hit_test(s, p);
  const auto i = static_cast<std::size_t>(hit.index);
  switch (hit.kind) {
    case Hit::Kind::Button: return "the '" + s.buttons[i].label + "' button";
    case Hit::Kind::Input: return "the input box";
    case Hit::Kind::Checkbox: return "the checkbox";
    case Hit::Kind::SliderHandle: return "the slider handle";
    case Hit::Kind::Icon: return "the " + bank.icons[s.icons[i].glyph].display_name() + " icon";
    case Hit::Kind::Tile: return "image tile " + std::to_string(hit.index);
    case Hit::Kind::None: break;
  }
  return "the background";
}

inline std::string printable(std::string_view text, int* deletes = nullptr) {
  std::string out;
  int del = 0;
  for (char c : text) {
    if (c == '\b') ++del;
    else if (c == '\n') out += "\\n";
    else out += c;
  }
  if (deletes) *deletes = del;
  return out;
}

}  // namespace prompt_detail

// Plain-language summary of the privileged solution data.
inline std::string describe_challenge(const ChallengeInstance& inst, const AssetBank& /*bank*/) {
  using namespace prompt_detail;
  const auto& s = inst.scene;
  const auto& t = inst.truth;
  std::string d = "The instruction reads \"" + inst.instruction_text + "\". ";
  switch (inst.type) {
    case ChallengeType::Text:
    case ChallengeType::CompactText:
      d += "The distorted image shows the characters '" + t.answer_label + "'. The input box is at " +
           rect_str(s.input->rect) + " and the '" + button_label(s, Role::SubmitButton) + "' button is at " +
           rect_str(s.find_button(Role::SubmitButton)->rect) + ".";
      break;
    case ChallengeType::IconSelection: {
      const auto* target = t.find(Role::Icon);
      d += "The canvas holds " + std::to_string(s.icons.size()) + " icons; the " + t.answer_label + " icon is at " +
           rect_str(target->rect) + ". Clicking an icon submits the selection.";
      break;
    }
    case ChallengeType::IconMatch:
      d += "The canvas holds " + std::to_string(s.icons.size()) + " icons; the two identical " + t.answer_label +
           " icons are at " + rect_str(t.targets.at(0).rect) + " and " + rect_str(t.targets.at(1).rect) +
           ". Dropping one onto the other submits.";
      break;
    case ChallengeType::Slider:
      d += "The puzzle piece fits the gap when the handle moves " + std::to_string(*t.goal_offset_px) +
           " px to the right. The handle is at " + rect_str(s.slider->handle_rect()) +
           ". Releasing the handle submits.";
      break;
    case ChallengeType::Paged: {
      const auto* target = t.find(Role::Icon) ? t.find(Role::Icon) : t.find(Role::Tile);
      d += "There are " + std::to_string(s.page_count) + " pages and the target (" + t.answer_label +
           ") is on page " + std::to_string(*t.target_page + 1) + " at " + rect_str(target->rect) +
           ". The '" + button_label(s, Role::NavPrev) + "' and '" + button_label(s, Role::NavNext) +
           "' buttons switch pages. Clicking an item submits it.";
      break;
    }
    case ChallengeType::ImageGrid: {
      std::string tiles;
      for (std::size_t i = 0; i < t.target_tiles.size(); ++i) {
        tiles += (i ? ", " : "") + std::to_string(t.target_tiles[i]);
      }
      d += "The grid has " + std::to_string(s.tiles.size()) + " tiles numbered row by row from 0. Tiles showing " +
           t.answer_label + ": " + (tiles.empty() ? std::string("none") : tiles) + ".";
      if (s.checkbox) d += " The grid appears after the checkbox is clicked.";
      break;
    }
  }
  return d;
}

// Numbered action list; element names are resolved against the scene as it
// evolves through page changes and the grid stage.
inline std::string describe_actions(const SceneGraph& start, const AssetBank& bank,
                                    const std::vector<ActionBatch>& batches) {
  using namespace prompt_detail;
  SceneGraph s = start;
  std::string out;
  int n = 0;
  for (const auto& batch : batches) {
    bool reveal = false;
    for (const auto& a : batch.actions) {
      if (n++) out += "\n";
      out += std::to_string(n) + ". ";
      if (const auto* c = std::get_if<LeftClick>(&a)) {
        out += "left_click at " + point_str(c->coordinate) + " on " + element_at(s, bank, c->coordinate);
        const Hit hit = hit_test(s, c->coordinate);
        if (hit.kind == Hit::Kind::Button) {
          const auto role = s.buttons[static_cast<std::size_t>(hit.index)].role;
          if (role == Role::NavNext) s.page = std::min(s.page + 1, s.page_count - 1);
          if (role == Role::NavPrev) s.page = std::max(s.page - 1, 0);
        }
        if (hit.kind == Hit::Kind::Checkbox) reveal = true;
      } else if (const auto* d = std::get_if<Drag>(&a)) {
        out += "drag from " + point_str(d->start) + " to " + point_str(d->end) + ", moving " +
               element_at(s, bank, d->start);
        if (hit_test(s, d->start).kind == Hit::Kind::SliderHandle) {
          out += " by " + std::to_string(d->end.x - d->start.x) + " px";
        } else {
          out += " onto " + element_at(s, bank, d->end);
        }
      } else if (const auto* t = std::get_if<Type>(&a)) {
        int deletes = 0;
        const auto shown = printable(t->text, &deletes);
        out += "type '" + shown + "'";
        if (deletes) out += " after deleting " + std::to_string(deletes) + " existing characters";
      } else {
        out += "terminate";
      }
    }
    if (reveal) s.grid_visible = true;
  }
  return out;
}

inline std::string solution_prompt(const ChallengeInstance& inst, const AssetBank& bank, const SceneGraph& live,
                                   const std::vector<ActionBatch>& planned) {
  return std::string("You are documenting the internal reasoning for a CAPTCHA-solving assistant before it acts. \n") +
         "Challenge type: " + std::string(display_name(inst.type)) + ". \n" +
         "Challenge details: " + describe_challenge(inst, bank) + " \n" +
         "Planned actions: " + describe_actions(live, bank, planned) + "\n" +
         "You are also provided with initial CAPTCHA screenshot and the annotated version of the screenshot with the "
         "actions steps the assistant should take. While you can use the annotations to understand the scene, you "
         "should not mention the existence of the annotations in your reasoning.\n"
         R"(
**REQUIREMENTS**
- You should think base on the provided images.
- Describe what you **observe** in the CAPTCHA scene (layout, visual cues, objects, etc.).
- Explain what you **infer** from those observations (what the task requires).
- Describe what you **plan** to do (actions) step by step. Make sure you exactly follow the order included in planned actions.
- Example output:
    "I observe that I am currently in a webpage that ask me solve a CAPTCHA. The CAPTCHA asks me to select the icon "book". Below the text instruction of the CAPTCHA, I can see a canvas with several icons of different color in the river background. On top left of the canvas, there's a purple icon that looks like "duck", to the right there's an icon that looks like "car", ...... On the second row I see a blue "book" icon, which may be the icon I should click ..... I need to perform multiple actions to solve this CAPTCHA: I should click on the "book" icon on the second row to finish the task."

**CAPTCHA-specific Hints**
- For CAPTCHAs that use the "type" operation, remember to click on the input box first before typing in the answer.
- For Image Grid, you should describe each image block and make a judgment on whether the required element exists, then click on the correct image blocks.
- When a submit/verify button is present, end the plan by clicking it. Some slider and icon CAPTCHAs do not have a submit button and generally submit automatically after the main action is completed.
)";
}

inline std::string correction_prompt(const ChallengeInstance& inst, const AssetBank& bank, const SceneGraph& live,
                                     const std::string& model_reasoning, const std::vector<ActionBatch>& correct) {
  return std::string(
             "You are documenting the correction internal reasoning for a CAPTCHA-solving assistant after a failed "
             "attempt. \n") +
         "You are given the images of the CAPTCHA before and after your failed attempt, as well as an annotated image "
         "with action steps to solve the CAPTCHA (3 images in total). Although you have access to the ground truth "
         "actions and annotated image, you should pretend to find out the error by yourself from the failed attempt "
         "reasoning and updated images. You should never mention the ground truth actions or annotated image in your "
         "response." +
         "Challenge type: " + std::string(display_name(inst.type)) + "." +
         "Challenge details: " + describe_challenge(inst, bank) +
         "Previous reasoning: " + model_reasoning +
         "Correct actions: " + describe_actions(live, bank, correct) +
         R"(
**REQUIREMENTS**
- Your output should ONLY contain the thinking part, NOT the action part. The actions will be added separately.
- Describe what you **observe and infer** in the CAPTCHA scene (layout, visual cues, objects, etc.).
- Analyze what you **did wrong** in your previous attempt and why the correct actions are right.
- Describe what you **plan** to do (correct actions) step by step. Make sure you exactly follow the order included in correct actions.
- Example output:
    "I observe that I am currently in a webpage that asks me to solve a CAPTCHA. The CAPTCHA asks me to select the icon "book". Below the text instruction of the CAPTCHA, I can see a canvas with several icons of different color in the river background. On top left of the canvas, there's a purple icon that looks like "duck", to the right there's an icon that looks like "car", ...... On the second row I see a blue "book" icon, which may be the icon I should click. In my previous attempt, I incorrectly clicked on the "car" icon because I misidentified it as a "book". Looking at the second image, I can see that this action was wrong and the CAPTCHA failed. The correct approach is to click on the blue "book" icon on the second row, which clearly represents a book, not a car. I need to perform multiple actions to solve this CAPTCHA: I should click on the "book" icon on the second row to finish the task."
)";
}

}  // namespace capgym
