#pragma once

#include "capgym/eval/agent.hpp"
#include "capgym/session/session.hpp"

namespace capgym {

// Privileged access to an in-process session.
class SessionMeta : public MetaAccess {
 public:
  explicit SessionMeta(const Session& s) : s_(s) {}
  const ChallengeInstance& instance() const override { return s_.instance(); }
  const SceneGraph& live_scene() const override { return s_.live(); }
  std::vector<ActionBatch> recovery_script() const override { return s_.recovery_script(); }

 private:
  const Session& s_;
};

}  // namespace capgym
