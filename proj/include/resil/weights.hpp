#pragma once

#include "resil/transform.hpp"

#include <map>
#include <vector>

namespace resil {

/// Per-state weight for one error of a transformed MDP.
using WeightFunction = std::vector<Rational>;

/// Weight functions keyed by error state (transformed index). A repair copy
/// ⟨e,s,r⟩ weighs 1-p if s is operational and -p once the budget is exhausted
/// (r + cost(s) > R); everything else weighs 0. An error whose own cost already
/// exceeds R weighs -p itself, since none of its repairs can succeed.
inline std::map<std::size_t, WeightFunction> build_weights(const TransformedMdp& mt, const Rational& threshold) {
  std::map<std::size_t, WeightFunction> out;
  for (auto e : mt.errors()) {
    WeightFunction w(mt.size());
    if (mt.cost(e) > mt.cost_bound()) w[e] = -threshold;
    out.emplace(e, std::move(w));
  }
  for (std::size_t t = 0; t < mt.size(); ++t) {
    const auto& tag = mt.tag(t);
    if (!tag) continue;
    auto e = mt.find(tag->error, std::nullopt);
    if (!e) continue;
    auto& w = out[*e];
    if (mt.is_op(t))
      w[t] = 1 - threshold;
    else if (tag->cost + mt.cost(t) > mt.cost_bound())
      w[t] = -threshold;
  }
  return out;
}

}  // namespace resil
