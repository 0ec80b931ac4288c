#pragma once

#include "resil/analyze.hpp"
#include "resil/scheduler.hpp"
#include "resil/transform.hpp"

#include <cstddef>
#include <deque>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

namespace resil {

/// Action distributions offered at a state with `k` choices: the Dirac ones
/// when grid == 0, otherwise every distribution with probabilities j/grid.
inline std::vector<ActionDistribution> grid_distributions(std::size_t k, std::int64_t grid) {
  std::vector<ActionDistribution> out;
  if (grid <= 0) {
    for (std::size_t c = 0; c < k; ++c) out.push_back({{c, Rational(1)}});
    return out;
  }
  std::vector<std::int64_t> parts(k, 0);
  std::function<void(std::size_t, std::int64_t)> rec = [&](std::size_t i, std::int64_t left) {
    if (i + 1 == k) {
      parts[i] = left;
      ActionDistribution d;
      for (std::size_t c = 0; c < k; ++c)
        if (parts[c] > 0) d.push_back({c, make_rational(parts[c], grid)});
      out.push_back(std::move(d));
      return;
    }
    for (std::int64_t j = left; j >= 0; --j) {
      parts[i] = j;
      rec(i + 1, left - j);
    }
  };
  rec(0, grid);
  return out;
}

/// Calls `visit` once per memoryless scheduler of the transformed MDP, where
/// two schedulers count as different only if they differ on a state they
/// reach. Throws std::length_error once more than `cap` candidates appear.
template <class Visit>
std::size_t enumerate_schedulers(const TransformedMdp& mt, std::int64_t grid, Visit&& visit,
                                 std::size_t cap = 200000) {
  MrScheduler s(mt.size());
  for (std::size_t t = 0; t < mt.size(); ++t)
    if (mt.choices(t).size() == 1) s.set_dirac(t, 0);
  std::vector<std::vector<ActionDistribution>> options(mt.size());
  std::size_t count = 0;

  std::function<void()> rec = [&]() {
    // First reachable state still undefined, in breadth-first order.
    std::vector<char> seen(mt.size(), 0);
    std::deque<std::size_t> queue{mt.initial()};
    seen[mt.initial()] = 1;
    std::size_t open = kNoState;
    while (!queue.empty() && open == kNoState) {
      auto u = queue.front();
      queue.pop_front();
      if (!s.defined(u)) {
        open = u;
        break;
      }
      for (const auto& [c, p] : s.dist[u])
        for (const auto& b : mt.choices(u)[c].branches)
          if (!seen[b.target]) {
            seen[b.target] = 1;
            queue.push_back(b.target);
          }
    }
    if (open == kNoState) {
      if (++count > cap) throw std::length_error("scheduler enumeration exceeds the candidate cap");
      visit(static_cast<const MrScheduler&>(s));
      return;
    }
    if (options[open].empty()) options[open] = grid_distributions(mt.choices(open).size(), grid);
    for (const auto& d : options[open]) {
      s.dist[open] = d;
      rec();
    }
    s.dist[open].clear();
  };
  rec();
  return count;
}

struct OracleResult {
  std::optional<Rational> best;  // none: no candidate is resilient
  MrScheduler witness;
  std::size_t candidates = 0;
};

/// Best availability over resilient memoryless schedulers of the transformed
/// MDP: all deterministic ones (grid 0) or all with probabilities k/grid.
inline OracleResult brute_force_optimum(const TransformedMdp& mt, const Rational& threshold, std::int64_t grid = 0,
                                        std::size_t cap = 200000) {
  OracleResult r;
  std::vector<Rational> payoff(mt.size());
  for (std::size_t s = 0; s < mt.size(); ++s) payoff[s] = mt.payoff(s);
  r.candidates = enumerate_schedulers(
      mt, grid,
      [&](const MrScheduler& s) {
        if (r.best) {
          auto chain = induce_chain(mt, s, mt.initial());
          if (availability(chain, payoff) <= *r.best) return;
        }
        auto report = verify_resilient(mt, s, threshold);
        if (report.ok && (!r.best || report.availability > *r.best)) {
          r.best = report.availability;
          r.witness = s;
        }
      },
      cap);
  return r;
}

}  // namespace resil
