#pragma once

#include "resil/rational.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace resil {

inline constexpr std::size_t kNoState = std::numeric_limits<std::size_t>::max();

enum class StateKind { Operational, Error, Repair };

inline const char* kind_tag(StateKind k) {
  switch (k) {
    case StateKind::Operational: return "op";
    case StateKind::Error: return "err";
    case StateKind::Repair: return "rep";
  }
  return "?";
}

inline std::optional<StateKind> kind_from_tag(std::string_view tag) {
  if (tag == "op") return StateKind::Operational;
  if (tag == "err") return StateKind::Error;
  if (tag == "rep") return StateKind::Repair;
  return std::nullopt;
}

struct Branch {
  std::size_t target = kNoState;
  Rational prob;
};

/// One enabled action of a state together with its successor distribution.
struct Choice {
  std::string action;
  std::vector<Branch> branches;
};

struct StateInfo {
  std::string id;
  StateKind kind = StateKind::Operational;
  std::int64_t reward = 0;
  std::vector<Choice> choices;
};

/// MDP whose states are partitioned into operational, error and repair states.
/// Rewards are payoffs on operational states and costs everywhere else.
/// Indices follow input order; targets that could not be resolved hold kNoState
/// and are reported by validate_structure.
class MdpWithRepair {
 public:
  std::vector<StateInfo> states;
  std::size_t initial = kNoState;
  /// Source ids of input transitions that named no declared state.
  std::vector<std::string> dangling_sources;

  std::size_t size() const { return states.size(); }
  const std::vector<Choice>& choices(std::size_t s) const { return states[s].choices; }
  const std::string& id(std::size_t s) const { return states[s].id; }

  bool is_op(std::size_t s) const { return states[s].kind == StateKind::Operational; }
  bool is_err(std::size_t s) const { return states[s].kind == StateKind::Error; }
  std::int64_t cost(std::size_t s) const { return is_op(s) ? 0 : states[s].reward; }
  std::int64_t payoff(std::size_t s) const { return is_op(s) ? states[s].reward : 0; }

  std::optional<std::size_t> find(std::string_view state_id) const {
    for (std::size_t s = 0; s < states.size(); ++s)
      if (states[s].id == state_id) return s;
    return std::nullopt;
  }

  std::optional<std::size_t> find_choice(std::size_t s, std::string_view action) const {
    const auto& cs = states[s].choices;
    for (std::size_t c = 0; c < cs.size(); ++c)
      if (cs[c].action == action) return c;
    return std::nullopt;
  }

  std::vector<std::size_t> errors() const {
    std::vector<std::size_t> out;
    for (std::size_t s = 0; s < states.size(); ++s)
      if (is_err(s)) out.push_back(s);
    return out;
  }

  friend bool operator==(const MdpWithRepair& a, const MdpWithRepair& b) {
    if (a.initial != b.initial || a.states.size() != b.states.size()) return false;
    for (std::size_t s = 0; s < a.states.size(); ++s) {
      const auto& x = a.states[s];
      const auto& y = b.states[s];
      if (x.id != y.id || x.kind != y.kind || x.reward != y.reward || x.choices.size() != y.choices.size()) return false;
      for (std::size_t c = 0; c < x.choices.size(); ++c) {
        const auto& p = x.choices[c];
        const auto& q = y.choices[c];
        if (p.action != q.action || p.branches.size() != q.branches.size()) return false;
        for (std::size_t i = 0; i < p.branches.size(); ++i)
          if (p.branches[i].target != q.branches[i].target || p.branches[i].prob != q.branches[i].prob) return false;
      }
    }
    return true;
  }
};

/// Builds an MdpWithRepair from string ids. Forward references are allowed;
/// unknown ids resolve to kNoState at build() time.
class MdpBuilder {
 public:
  MdpBuilder& state(std::string id, StateKind kind, std::int64_t reward = 0) {
    states_.push_back({std::move(id), kind, reward, {}});
    return *this;
  }

  MdpBuilder& choice(std::string from, std::string action,
                     std::vector<std::pair<std::string, Rational>> to) {
    pending_.push_back({std::move(from), std::move(action), std::move(to)});
    return *this;
  }

  /// Single-successor shorthand with probability one.
  MdpBuilder& edge(std::string from, std::string action, std::string to) {
    return choice(std::move(from), std::move(action), {{std::move(to), Rational(1)}});
  }

  MdpBuilder& initial(std::string id) {
    initial_ = std::move(id);
    return *this;
  }

  MdpWithRepair build() const {
    MdpWithRepair m;
    m.states = states_;
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t s = 0; s < m.states.size(); ++s) index.emplace(m.states[s].id, s);
    auto resolve = [&](const std::string& id) {
      auto it = index.find(id);
      return it == index.end() ? kNoState : it->second;
    };
    for (const auto& p : pending_) {
      std::size_t from = resolve(p.from);
      if (from == kNoState) {
        m.dangling_sources.push_back(p.from);
        continue;
      }
      Choice c{p.action, {}};
      for (const auto& [target, prob] : p.to) c.branches.push_back({resolve(target), prob});
      m.states[from].choices.push_back(std::move(c));
    }
    m.initial = resolve(initial_);
    return m;
  }

 private:
  struct Pending {
    std::string from;
    std::string action;
    std::vector<std::pair<std::string, Rational>> to;
  };
  std::vector<StateInfo> states_;
  std::vector<Pending> pending_;
  std::string initial_;
};

struct Violation {
  std::string rule;
  std::vector<std::string> where;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  void add(std::string rule, std::vector<std::string> where, std::string message) {
    violations.push_back({std::move(rule), std::move(where), std::move(message)});
  }
  void append(const ValidationReport& other) {
    violations.insert(violations.end(), other.violations.begin(), other.violations.end());
  }
};

inline ValidationReport validate_structure(const MdpWithRepair& m) {
  ValidationReport report;
  if (m.states.empty()) report.add("empty-model", {}, "model has no states");
  if (m.initial == kNoState || m.initial >= m.size())
    report.add("dangling-reference", {"initial"}, "initial state is not a declared state");

  for (const auto& from : m.dangling_sources)
    report.add("dangling-reference", {from}, "transition source is not a declared state");

  std::set<std::string> seen;
  for (const auto& st : m.states)
    if (!seen.insert(st.id).second) report.add("duplicate-state", {st.id}, "state id declared twice");

  for (std::size_t s = 0; s < m.size(); ++s) {
    const auto& st = m.states[s];
    if (st.reward < 0)
      report.add("negative-reward", {st.id}, "reward " + std::to_string(st.reward) + " is negative");
    if (st.choices.empty()) report.add("trap-state", {st.id}, "trap state: no enabled action");

    std::set<std::string> actions;
    for (const auto& c : st.choices) {
      if (!actions.insert(c.action).second)
        report.add("duplicate-action", {st.id, c.action}, "action declared twice at the same state");
      Rational sum = 0;
      for (const auto& b : c.branches) {
        if (b.target == kNoState || b.target >= m.size())
          report.add("dangling-reference", {st.id, c.action}, "transition targets an undeclared state");
        if (b.prob <= 0)
          report.add("nonpositive-probability", {st.id, c.action},
                     "probability " + to_string(b.prob) + " is not positive");
        sum += b.prob;
      }
      if (sum != 1)
        report.add("distribution-sum", {st.id, c.action}, "distribution sums to " + to_string(sum));
    }
  }
  return report;
}

/// States from which some path reaches an error state before any operational
/// state (the least fixpoint V = Err ∪ {s ∉ Op∪Err : some action may enter V}).
inline std::vector<char> error_before_op_states(const MdpWithRepair& m) {
  std::vector<char> in_v(m.size(), 0);
  for (std::size_t s = 0; s < m.size(); ++s) in_v[s] = m.is_err(s);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t s = 0; s < m.size(); ++s) {
      if (in_v[s] || m.is_op(s)) continue;
      for (const auto& c : m.choices(s)) {
        bool hits = std::any_of(c.branches.begin(), c.branches.end(), [&](const Branch& b) {
          return b.prob > 0 && b.target < m.size() && in_v[b.target];
        });
        if (hits) {
          in_v[s] = 1;
          changed = true;
          break;
        }
      }
    }
  }
  return in_v;
}

/// Checks that after every error the first error-or-operational state hit is operational.
inline ValidationReport validate_repair_assumption(const MdpWithRepair& m) {
  ValidationReport report;
  auto in_v = error_before_op_states(m);
  for (std::size_t e = 0; e < m.size(); ++e) {
    if (!m.is_err(e)) continue;
    for (const auto& c : m.choices(e))
      for (const auto& b : c.branches)
        if (b.prob > 0 && b.target < m.size() && in_v[b.target])
          report.add("repair-assumption", {m.id(e), c.action, m.id(b.target)},
                     "successor " + m.id(b.target) + " may reach an error state before an operational state");
  }
  return report;
}

inline ValidationReport validate(const MdpWithRepair& m) {
  auto report = validate_structure(m);
  if (report.ok()) report.append(validate_repair_assumption(m));
  return report;
}

}  // namespace resil
