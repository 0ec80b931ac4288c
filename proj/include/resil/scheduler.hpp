#pragma once

#include "resil/transform.hpp"

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace resil {

/// Distribution over a state's choices, as (choice index, probability) pairs.
using ActionDistribution = std::vector<std::pair<std::size_t, Rational>>;

/// Memoryless randomized scheduler over a host with dense state indices.
/// An empty distribution means "undefined at this state".
struct MrScheduler {
  std::vector<ActionDistribution> dist;

  MrScheduler() = default;
  explicit MrScheduler(std::size_t n) : dist(n) {}

  std::size_t size() const { return dist.size(); }
  bool defined(std::size_t s) const { return s < dist.size() && !dist[s].empty(); }
  void set_dirac(std::size_t s, std::size_t choice) { dist[s] = {{choice, Rational(1)}}; }

  Rational probability(std::size_t s, std::size_t choice) const {
    if (s >= dist.size()) return 0;
    for (const auto& [c, p] : dist[s])
      if (c == choice) return p;
    return 0;
  }

  friend bool operator==(const MrScheduler&, const MrScheduler&) = default;
};

/// Uniform distribution over the first `count` choices.
inline ActionDistribution uniform_distribution(std::size_t count) {
  ActionDistribution d;
  for (std::size_t c = 0; c < count; ++c) d.push_back({c, make_rational(1, static_cast<std::int64_t>(count))});
  return d;
}

/// Scheduler on the base model whose memory is either empty or the pair
/// (error, repair cost so far). Rules are keyed by (base state, memory); the
/// memory update when leaving a state is next_tag().
struct MemoryRule {
  std::size_t state = 0;
  std::optional<RepairTag> memory;
  std::vector<std::pair<std::string, Rational>> distribution;  // by action name
};

struct FiniteMemoryScheduler {
  std::int64_t cost_bound = 0;
  std::vector<MemoryRule> rules;

  const MemoryRule* find(std::size_t state, const std::optional<RepairTag>& memory) const {
    for (const auto& r : rules)
      if (r.state == state && r.memory == memory) return &r;
    return nullptr;
  }

  /// Distinct non-empty memory values used by the rules.
  std::vector<RepairTag> memory_elements() const {
    std::vector<RepairTag> out;
    for (const auto& r : rules)
      if (r.memory && std::find(out.begin(), out.end(), *r.memory) == out.end()) out.push_back(*r.memory);
    return out;
  }
};

/// Reads a memoryless scheduler on the transformed MDP as a finite-memory
/// scheduler on its base model. `keep` selects the transformed states to emit
/// (all defined states when empty).
inline FiniteMemoryScheduler render(const TransformedMdp& mt, const MrScheduler& s,
                                    const std::vector<char>& keep = {}) {
  FiniteMemoryScheduler out;
  out.cost_bound = mt.cost_bound();
  for (std::size_t t = 0; t < mt.size(); ++t) {
    if (!s.defined(t) || (!keep.empty() && !keep[t])) continue;
    MemoryRule rule{mt.base_of(t), mt.tag(t), {}};
    for (const auto& [c, p] : s.dist[t]) rule.distribution.push_back({mt.choices(t)[c].action, p});
    out.rules.push_back(std::move(rule));
  }
  return out;
}

/// Inverse of render(): maps every rule to its transformed state. Throws
/// std::invalid_argument for rules naming states or actions the transformed
/// MDP does not have.
inline MrScheduler lift_scheduler(const TransformedMdp& mt, const FiniteMemoryScheduler& f) {
  MrScheduler s(mt.size());
  for (const auto& r : f.rules) {
    auto t = mt.find(r.state, r.memory);
    if (!t) throw std::invalid_argument("rule for " + mt.render_id(r.state, r.memory) + " names no reachable state");
    if (s.defined(*t)) throw std::invalid_argument("duplicate rule for " + mt.id(*t));
    for (const auto& [action, p] : r.distribution) {
      auto c = mt.base().find_choice(r.state, action);
      if (!c) throw std::invalid_argument("action " + action + " not enabled at " + mt.id(*t));
      s.dist[*t].push_back({*c, p});
    }
  }
  return s;
}

}  // namespace resil
