#pragma once

#include <cstdint>
#include <string>

#include "capgym/core/ground_truth.hpp"
#include "capgym/gen/scene.hpp"
#include "capgym/gen/style.hpp"

namespace capgym {

struct ChallengeInstance {
  std::string id;
  ChallengeType type = ChallengeType::Text;
  std::uint64_t seed = 0;
  std::string config_hash;
  StyleSample style;
  SceneGraph scene;
  GroundTruth truth;
  std::string instruction_text;
  friend bool operator==(const ChallengeInstance&, const ChallengeInstance&) = default;
};

}  // namespace capgym
