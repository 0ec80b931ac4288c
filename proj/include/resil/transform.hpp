#pragma once

#include "resil/model.hpp"

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace resil {

/// Annotation of a repair copy: the error that started the repair and the cost
/// accumulated since then (before the current state).
struct RepairTag {
  std::size_t error;
  std::int64_t cost;
  friend bool operator==(const RepairTag&, const RepairTag&) = default;
};

struct TransformedState {
  std::size_t base;
  std::optional<RepairTag> tag;
};

/// Cost-annotated copy of an MdpWithRepair: repair phases are unfolded into
/// states ⟨e,s,r⟩ (rendered "e#s#r") so that the cost spent since error e is
/// part of the state. Only the fragment reachable from the initial state is
/// materialized; index 0 is always the initial state. Each state's choices
/// mirror the base state's choices in the same order.
class TransformedMdp {
 public:
  const MdpWithRepair& base() const { return base_; }
  std::int64_t cost_bound() const { return bound_; }

  std::size_t size() const { return states_.size(); }
  std::size_t initial() const { return 0; }
  const std::vector<Choice>& choices(std::size_t s) const { return choices_[s]; }

  std::size_t base_of(std::size_t s) const { return states_[s].base; }
  const std::optional<RepairTag>& tag(std::size_t s) const { return states_[s].tag; }

  bool is_repair_copy(std::size_t s) const { return states_[s].tag.has_value(); }
  bool is_error(std::size_t s) const { return !is_repair_copy(s) && base_.is_err(base_of(s)); }
  bool is_op(std::size_t s) const { return base_.is_op(base_of(s)); }
  /// Membership in Op_e: repair copies of error e sitting on an operational state.
  bool in_op_of(std::size_t s, std::size_t error) const {
    return is_repair_copy(s) && states_[s].tag->error == error && is_op(s);
  }
  std::int64_t cost(std::size_t s) const { return base_.cost(base_of(s)); }
  std::int64_t payoff(std::size_t s) const { return base_.payoff(base_of(s)); }

  std::string id(std::size_t s) const { return render_id(states_[s].base, states_[s].tag); }

  std::string render_id(std::size_t base_state, const std::optional<RepairTag>& t) const {
    if (!t) return base_.id(base_state);
    return base_.id(t->error) + "#" + base_.id(base_state) + "#" + std::to_string(t->cost);
  }

  std::optional<std::size_t> find(std::size_t base_state, const std::optional<RepairTag>& t) const {
    auto it = index_.find(key(base_state, t));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<std::size_t> find(std::string_view state_id) const {
    auto it = by_id_.find(std::string(state_id));
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
  }

  /// Error states in index order.
  std::vector<std::size_t> errors() const {
    std::vector<std::size_t> out;
    for (std::size_t s = 0; s < size(); ++s)
      if (is_error(s)) out.push_back(s);
    return out;
  }

  friend TransformedMdp transform(const MdpWithRepair& m, std::int64_t cost_bound);

 private:
  using Key = std::tuple<std::size_t, std::size_t, std::int64_t>;
  static Key key(std::size_t base_state, const std::optional<RepairTag>& t) {
    return t ? Key{base_state, t->error, t->cost} : Key{base_state, kNoState, 0};
  }

  MdpWithRepair base_;
  std::int64_t bound_ = 0;
  std::vector<TransformedState> states_;
  std::vector<std::vector<Choice>> choices_;
  std::map<Key, std::size_t> index_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

/// Successor annotation when leaving `from` (within a repair or not) towards
/// base state `to`. Shared by the product construction and path lifting.
inline std::optional<RepairTag> next_tag(const MdpWithRepair& m, std::int64_t bound, std::size_t from,
                                         const std::optional<RepairTag>& tag) {
  if (!tag) {
    if (m.is_err(from) && m.cost(from) <= bound) return RepairTag{from, m.cost(from)};
    return std::nullopt;
  }
  std::int64_t acc = tag->cost + m.cost(from);
  if (!m.is_op(from) && acc <= bound) return RepairTag{tag->error, acc};
  return std::nullopt;
}

/// Builds the reachable part of the cost-annotated MDP for cost bound R.
/// Requires a structurally valid model satisfying the repair assumption;
/// a repair copy of an error state signals a violated assumption and throws.
inline TransformedMdp transform(const MdpWithRepair& m, std::int64_t cost_bound) {
  if (cost_bound < 0) throw std::invalid_argument("cost bound must be nonnegative");
  if (m.initial >= m.size()) throw std::invalid_argument("model has no valid initial state");

  TransformedMdp mt;
  mt.base_ = m;
  mt.bound_ = cost_bound;
  std::deque<std::size_t> queue;

  auto intern = [&](std::size_t base_state, std::optional<RepairTag> t) {
    auto k = TransformedMdp::key(base_state, t);
    if (auto it = mt.index_.find(k); it != mt.index_.end()) return it->second;
    if (t && m.is_err(base_state))
      throw std::invalid_argument("repair assumption violated: error " + m.id(base_state) +
                                  " reachable during repair of " + m.id(t->error));
    std::size_t idx = mt.states_.size();
    mt.states_.push_back({base_state, t});
    mt.choices_.emplace_back();
    mt.index_.emplace(k, idx);
    mt.by_id_.emplace(mt.render_id(base_state, t), idx);
    queue.push_back(idx);
    return idx;
  };

  intern(m.initial, std::nullopt);
  while (!queue.empty()) {
    std::size_t t = queue.front();
    queue.pop_front();
    const std::size_t s = mt.states_[t].base;
    const auto succ_tag = next_tag(m, cost_bound, s, mt.states_[t].tag);
    std::vector<Choice> out;
    for (const auto& c : m.choices(s)) {
      Choice lifted{c.action, {}};
      for (const auto& b : c.branches) lifted.branches.push_back({intern(b.target, succ_tag), b.prob});
      out.push_back(std::move(lifted));
    }
    mt.choices_[t] = std::move(out);
  }
  return mt;
}

/// Alternating state/action sequence given by ids; states.size() == actions.size() + 1.
struct PathRecord {
  std::vector<std::string> states;
  std::vector<std::string> actions;
  friend bool operator==(const PathRecord&, const PathRecord&) = default;
};

namespace detail {

template <class Host>
std::optional<std::vector<std::size_t>> resolve_path(const Host& host, const PathRecord& p) {
  if (p.states.empty() || p.states.size() != p.actions.size() + 1) return std::nullopt;
  std::vector<std::size_t> idx;
  for (const auto& s : p.states) {
    auto i = host.find(s);
    if (!i) return std::nullopt;
    idx.push_back(*i);
  }
  for (std::size_t k = 0; k < p.actions.size(); ++k) {
    bool ok = false;
    for (const auto& c : host.choices(idx[k])) {
      if (c.action != p.actions[k]) continue;
      for (const auto& b : c.branches)
        if (b.target == idx[k + 1] && b.prob > 0) ok = true;
    }
    if (!ok) return std::nullopt;
  }
  return idx;
}

}  // namespace detail

/// A path is valid when every (s, α, s') step has positive probability in the host.
template <class Host>
bool is_valid_path(const Host& host, const PathRecord& p) {
  return detail::resolve_path(host, p).has_value();
}

template <class Host>
std::int64_t path_cost(const Host& host, const PathRecord& p) {
  auto idx = detail::resolve_path(host, p);
  if (!idx) throw std::invalid_argument("invalid path");
  std::int64_t sum = 0;
  for (auto s : *idx) sum += host.cost(s);
  return sum;
}

template <class Host>
std::int64_t path_payoff(const Host& host, const PathRecord& p) {
  auto idx = detail::resolve_path(host, p);
  if (!idx) throw std::invalid_argument("invalid path");
  std::int64_t sum = 0;
  for (auto s : *idx) sum += host.payoff(s);
  return sum;
}

/// Replaces every repair copy ⟨e,s,r⟩ by s.
inline PathRecord project_path(const TransformedMdp& mt, const PathRecord& p) {
  auto idx = detail::resolve_path(mt, p);
  if (!idx) throw std::invalid_argument("path is not valid in the transformed MDP");
  PathRecord out;
  out.actions = p.actions;
  for (auto s : *idx) out.states.push_back(mt.base().id(mt.base_of(s)));
  return out;
}

/// Inverse of project_path for paths of the base model starting in its initial state.
inline PathRecord lift_path(const TransformedMdp& mt, const PathRecord& p) {
  const auto& m = mt.base();
  auto idx = detail::resolve_path(m, p);
  if (!idx) throw std::invalid_argument("path is not valid in the base model");
  if (idx->front() != m.initial) throw std::invalid_argument("path does not start in the initial state");
  PathRecord out;
  out.actions = p.actions;
  std::optional<RepairTag> tag;
  for (std::size_t k = 0; k < idx->size(); ++k) {
    if (k > 0) tag = next_tag(m, mt.cost_bound(), (*idx)[k - 1], tag);
    auto t = mt.find((*idx)[k], tag);
    if (!t) throw std::logic_error("lifted state missing from transformed MDP");
    out.states.push_back(mt.id(*t));
  }
  return out;
}

}  // namespace resil
