#pragma once

#include "resil/analyze.hpp"
#include "resil/model.hpp"
#include "resil/scheduler.hpp"
#include "resil/transform.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace resil {

struct TrialStats {
  double mean_payoff = 0;
  std::uint64_t repairs_started = 0;
  std::uint64_t repairs_within_budget = 0;
  std::uint64_t repairs_completed = 0;
  std::vector<std::string> trace;  // "state[memory]/action" for the first trace steps
};

struct SimulationStats {
  std::uint64_t steps = 0;
  std::vector<TrialStats> trials;

  std::size_t trial_count() const { return trials.size(); }
  double mean_availability() const {
    double sum = 0;
    for (const auto& t : trials) sum += t.mean_payoff;
    return trials.empty() ? 0 : sum / static_cast<double>(trials.size());
  }
  double stddev_availability() const {
    if (trials.size() < 2) return 0;
    double mean = mean_availability(), acc = 0;
    for (const auto& t : trials) acc += (t.mean_payoff - mean) * (t.mean_payoff - mean);
    return std::sqrt(acc / static_cast<double>(trials.size() - 1));
  }
  std::uint64_t repairs_started() const {
    std::uint64_t n = 0;
    for (const auto& t : trials) n += t.repairs_started;
    return n;
  }
  std::uint64_t repairs_completed() const {
    std::uint64_t n = 0;
    for (const auto& t : trials) n += t.repairs_completed;
    return n;
  }
  std::uint64_t repairs_within_budget() const {
    std::uint64_t n = 0;
    for (const auto& t : trials) n += t.repairs_within_budget;
    return n;
  }
};

/// splitmix64 finalizer; derives the per-trial seed from (seed, trial).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) {
  return splitmix64(splitmix64(seed) ^ trial);
}

/// Uniform double in [0,1) from the top 53 bits (same on every platform).
inline double unit_interval(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

namespace detail {

/// Finite-memory scheduler compiled into a table over (state, memory) nodes.
struct CompiledScheduler {
  struct Step {
    std::size_t choice;
    double cumulative;
  };
  struct Node {
    std::size_t state;
    std::optional<RepairTag> memory;
    std::vector<Step> actions;
  };
  std::vector<Node> nodes;
  std::map<std::tuple<std::size_t, std::size_t, std::int64_t>, std::size_t> index;

  static std::tuple<std::size_t, std::size_t, std::int64_t> key(std::size_t s, const std::optional<RepairTag>& m) {
    return m ? std::tuple{s, m->error, m->cost} : std::tuple{s, kNoState, std::int64_t{0}};
  }

  std::optional<std::size_t> find(std::size_t s, const std::optional<RepairTag>& m) const {
    auto it = index.find(key(s, m));
    if (it == index.end()) return std::nullopt;
    return it->second;
  }
};

inline CompiledScheduler compile(const MdpWithRepair& m, const FiniteMemoryScheduler& f) {
  CompiledScheduler out;
  for (const auto& r : f.rules) {
    CompiledScheduler::Node node{r.state, r.memory, {}};
    double acc = 0;
    for (const auto& [action, p] : r.distribution) {
      auto c = m.find_choice(r.state, action);
      if (!c) throw IncompleteScheduler("action " + action + " not enabled at " + m.id(r.state));
      acc += to_double(p);
      node.actions.push_back({*c, acc});
    }
    if (node.actions.empty()) throw IncompleteScheduler("empty distribution at " + m.id(r.state));
    node.actions.back().cumulative = 1.0;
    out.index.emplace(CompiledScheduler::key(r.state, r.memory), out.nodes.size());
    out.nodes.push_back(std::move(node));
  }
  return out;
}

}  // namespace detail

/// Seeded Monte Carlo runs of a finite-memory scheduler on the base model.
/// Trial i draws from std::mt19937_64 seeded with trial_seed(seed, i), so the
/// result does not depend on the order in which trials are run. A repair
/// episode starts at an error and ends at the next operational state; it is
/// within budget if the costs collected before that state total at most R.
inline SimulationStats simulate(const MdpWithRepair& m, const FiniteMemoryScheduler& f, std::uint64_t steps,
                                std::uint64_t trials, std::uint64_t seed, std::size_t trace_steps = 0) {
  SimulationStats stats;
  stats.steps = steps;
  if (trials == 0) return stats;
  auto table = detail::compile(m, f);
  // Cumulative successor probabilities per (state, choice).
  std::vector<std::vector<std::vector<std::pair<std::size_t, double>>>> succ(m.size());
  for (std::size_t s = 0; s < m.size(); ++s)
    for (const auto& c : m.choices(s)) {
      std::vector<std::pair<std::size_t, double>> row;
      double acc = 0;
      for (const auto& b : c.branches) {
        acc += to_double(b.prob);
        row.push_back({b.target, acc});
      }
      if (!row.empty()) row.back().second = 1.0;
      succ[s].push_back(std::move(row));
    }

  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    std::mt19937_64 rng(trial_seed(seed, trial));
    TrialStats t;
    std::size_t state = m.initial;
    std::optional<RepairTag> memory;
    bool in_repair = false;
    std::int64_t spent = 0;
    std::uint64_t payoff = 0;
    for (std::uint64_t k = 0; k < steps; ++k) {
      if (m.is_err(state)) {
        ++t.repairs_started;
        in_repair = true;
        spent = 0;
      } else if (m.is_op(state) && in_repair) {
        ++t.repairs_completed;
        if (spent <= f.cost_bound) ++t.repairs_within_budget;
        in_repair = false;
      }
      if (in_repair) spent += m.cost(state);
      payoff += static_cast<std::uint64_t>(m.payoff(state));

      auto node = table.find(state, memory);
      if (!node) throw IncompleteScheduler("no rule for " + m.id(state) + " with memory " +
                                           (memory ? m.id(memory->error) + "," + std::to_string(memory->cost) : "none"));
      const auto& actions = table.nodes[*node].actions;
      double u = unit_interval(rng);
      std::size_t choice = actions.back().choice;
      for (const auto& a : actions)
        if (u < a.cumulative) {
          choice = a.choice;
          break;
        }
      if (k < trace_steps) {
        std::string entry = m.id(state);
        if (memory) entry += "[" + m.id(memory->error) + "," + std::to_string(memory->cost) + "]";
        t.trace.push_back(entry + "/" + m.choices(state)[choice].action);
      }
      double v = unit_interval(rng);
      const auto& row = succ[state][choice];
      std::size_t next = row.back().first;
      for (const auto& [target, cum] : row)
        if (v < cum) {
          next = target;
          break;
        }
      memory = next_tag(m, f.cost_bound, state, memory);
      state = next;
    }
    t.mean_payoff = steps == 0 ? 0 : static_cast<double>(payoff) / static_cast<double>(steps);
    stats.trials.push_back(std::move(t));
  }
  return stats;
}

inline std::string format_simulation(const SimulationStats& s, bool per_trial = false) {
  std::ostringstream out;
  char buf[64];
  out << "trials: " << s.trial_count() << "\n";
  out << "steps: " << s.steps << "\n";
  if (s.trials.empty()) return out.str();
  std::snprintf(buf, sizeof buf, "%.6f", s.mean_availability());
  out << "mean availability: " << buf << "\n";
  std::snprintf(buf, sizeof buf, "%.6f", s.stddev_availability());
  out << "stddev across trials: " << buf << "\n";
  out << "repairs started: " << s.repairs_started() << "\n";
  out << "repairs completed: " << s.repairs_completed() << "\n";
  out << "repairs within budget: " << s.repairs_within_budget() << "\n";
  if (s.repairs_completed() > 0) {
    std::snprintf(buf, sizeof buf, "%.6f",
                  static_cast<double>(s.repairs_within_budget()) / static_cast<double>(s.repairs_completed()));
    out << "within-budget fraction: " << buf << "\n";
  }
  for (std::size_t i = 0; per_trial && i < s.trials.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6f", s.trials[i].mean_payoff);
    out << "trial " << i << ": " << buf;
    for (const auto& e : s.trials[i].trace) out << " " << e;
    out << "\n";
  }
  return out.str();
}

}  // namespace resil
