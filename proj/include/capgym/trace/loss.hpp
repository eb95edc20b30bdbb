#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "capgym/core/error.hpp"
#include "capgym/trace/record.hpp"

namespace capgym {

// Per-token coefficients of the joint objective
//   L = -1/(|T|+|A|) * (lambda_think * sum_{t in T} log p_t + lambda_act * sum_{t in A} log p_t).
struct LossWeights {
  double lambda_think = 0.5;
  double lambda_act = 0.5;
  std::size_t n_think = 0;
  std::size_t n_act = 0;
  std::vector<double> weights;
};

inline LossWeights compute_weights(const std::vector<SpanKind>& kinds, double lambda_think, double lambda_act) {
  if (kinds.empty()) throw Error("compute_weights needs at least one token");
  if (lambda_think < 0 || lambda_act < 0) throw Error("loss weights must be non-negative");
  LossWeights w;
  w.lambda_think = lambda_think;
  w.lambda_act = lambda_act;
  for (auto k : kinds) (k == SpanKind::Think ? w.n_think : w.n_act)++;
  const double denom = static_cast<double>(kinds.size());
  const double think = lambda_think / denom;
  const double act = lambda_act / denom;
  w.weights.reserve(kinds.size());
  for (auto k : kinds) w.weights.push_back(k == SpanKind::Think ? think : act);
  return w;
}

inline double reference_loss(const std::vector<double>& logp, const LossWeights& w) {
  if (logp.size() != w.weights.size()) {
    throw Error("reference_loss: " + std::to_string(logp.size()) + " log-probs for " +
                std::to_string(w.weights.size()) + " weights");
  }
  double loss = 0;
  for (std::size_t i = 0; i < logp.size(); ++i) loss -= w.weights[i] * logp[i];
  return loss;
}

// Token kinds for one assistant turn, given each token's character range in
// the turn text. A token takes the kind of the span holding its first
// character; tokens outside every span are rejected.
inline std::vector<SpanKind> token_kinds(const Turn& turn, const std::vector<std::pair<std::size_t, std::size_t>>& tokens) {
  std::vector<SpanKind> out;
  out.reserve(tokens.size());
  for (const auto& [start, end] : tokens) {
    const Span* hit = nullptr;
    for (const auto& s : turn.spans) {
      if (start >= s.start && start < s.end) hit = &s;
    }
    if (!hit || end < start) throw Error("token at offset " + std::to_string(start) + " is not covered by a span");
    out.push_back(hit->kind);
  }
  return out;
}

}  // namespace capgym
