#pragma once

#include <algorithm>
#include <vector>

#include "capgym/gen/instance.hpp"

namespace capgym {

namespace detail {

inline LeftClick click(const Rect& r) { return {r.center()}; }

}  // namespace detail

// Action batches that solve `inst` starting from the live scene `live`.
// Applied to the initial scene this is the instance's oracle script; applied
// after a failed attempt it is the recovery script.
inline std::vector<ActionBatch> solve_from_state(const ChallengeInstance& inst, const SceneGraph& live) {
  using detail::click;
  const auto& truth = inst.truth;
  std::vector<ActionBatch> script;
  switch (inst.type) {
    case ChallengeType::Text:
    case ChallengeType::CompactText: {
      ActionBatch b;
      b.actions.push_back(click(live.input->rect));
      b.actions.push_back(Type{std::string(live.input->text.size(), '\b') + truth.answer_label});
      b.actions.push_back(click(live.find_button(Role::SubmitButton)->rect));
      script.push_back(std::move(b));
      break;
    }
    case ChallengeType::IconSelection: {
      const auto* t = truth.find(Role::Icon);
      script.push_back({{click(live.icons[static_cast<std::size_t>(t->index)].rect)}});
      break;
    }
    case ChallengeType::IconMatch: {
      const int a = truth.targets.at(0).index;
      const int b = truth.targets.at(1).index;
      script.push_back({{Drag{live.icons[static_cast<std::size_t>(a)].rect.center(),
                              live.icons[static_cast<std::size_t>(b)].rect.center()}}});
      break;
    }
    case ChallengeType::Slider: {
      const auto& s = *live.slider;
      const Point from = s.handle_rect().center();
      script.push_back({{Drag{from, {from.x + (s.gap_offset - s.handle_offset), from.y}}}});
      break;
    }
    case ChallengeType::Paged: {
      ActionBatch b;
      const int target_page = *truth.target_page;
      const Role nav = target_page > live.page ? Role::NavNext : Role::NavPrev;
      for (int p = live.page; p != target_page; p += (target_page > live.page ? 1 : -1)) {
        b.actions.push_back(click(live.find_button(nav)->rect));
      }
      const auto* t = truth.find(Role::Icon);
      if (t) {
        b.actions.push_back(click(live.icons[static_cast<std::size_t>(t->index)].rect));
      } else {
        t = truth.find(Role::Tile);
        b.actions.push_back(click(live.tiles[static_cast<std::size_t>(t->index)].rect));
      }
      script.push_back(std::move(b));
      break;
    }
    case ChallengeType::ImageGrid: {
      if (live.checkbox && !live.grid_visible) script.push_back({{click(live.checkbox->box)}});
      ActionBatch b;
      for (std::size_t i = 0; i < live.tiles.size(); ++i) {
        const bool want = std::binary_search(truth.target_tiles.begin(), truth.target_tiles.end(),
                                             static_cast<int>(i));
        if (want != live.tiles[i].selected) b.actions.push_back(click(live.tiles[i].rect));
      }
      b.actions.push_back(click(live.find_button(Role::SubmitButton)->rect));
      script.push_back(std::move(b));
      break;
    }
  }
  return script;
}

}  // namespace capgym
