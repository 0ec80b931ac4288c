#pragma once

#include "resil/graph.hpp"
#include "resil/linear_system.hpp"
#include "resil/scheduler.hpp"
#include "resil/transform.hpp"
#include "resil/weights.hpp"

#include <algorithm>
#include <cstddef>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace resil {

/// Thrown when a scheduler is undefined (or malformed) at a reachable state.
class IncompleteScheduler : public std::runtime_error {
 public:
  explicit IncompleteScheduler(const std::string& what) : std::runtime_error(what) {}
};

/// Markov chain induced by an MR scheduler on the part of the host reachable
/// from the initial state. Chain index 0 is the initial state.
struct InducedChain {
  std::vector<std::size_t> states;                               // chain index -> host index
  std::vector<std::size_t> local;                                // host index -> chain index or kNoState
  std::vector<std::vector<std::pair<std::size_t, Rational>>> rows;  // merged successors

  std::size_t size() const { return states.size(); }
  bool contains(std::size_t host_state) const {
    return host_state < local.size() && local[host_state] != kNoState;
  }

  graph::Adjacency adjacency() const {
    graph::Adjacency adj(size());
    for (std::size_t i = 0; i < size(); ++i)
      for (const auto& [j, p] : rows[i]) adj[i].push_back(j);
    return adj;
  }

  /// Host-indexed mask or value vector restricted to chain indices.
  template <class T>
  std::vector<T> project(const std::vector<T>& by_host) const {
    std::vector<T> out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = by_host[states[i]];
    return out;
  }
};

template <class Host>
InducedChain induce_chain(const Host& host, const MrScheduler& sched, std::size_t init) {
  InducedChain c;
  c.local.assign(host.size(), kNoState);
  auto visit = [&](std::size_t s) {
    if (c.local[s] == kNoState) {
      c.local[s] = c.states.size();
      c.states.push_back(s);
    }
    return c.local[s];
  };
  visit(init);
  for (std::size_t i = 0; i < c.states.size(); ++i) {
    const std::size_t s = c.states[i];
    if (!sched.defined(s)) throw IncompleteScheduler("scheduler undefined at reachable state " + host.id(s));
    const auto& choices = host.choices(s);
    Rational total = 0;
    std::map<std::size_t, Rational> merged;
    for (const auto& [choice, p] : sched.dist[s]) {
      if (choice >= choices.size())
        throw IncompleteScheduler("scheduler picks a disabled action at " + host.id(s));
      if (p < 0) throw IncompleteScheduler("negative action probability at " + host.id(s));
      total += p;
      if (p == 0) continue;
      for (const auto& b : choices[choice].branches) merged[b.target] += p * b.prob;
    }
    if (total != 1) throw IncompleteScheduler("action distribution at " + host.id(s) + " sums to " + to_string(total));
    std::vector<std::pair<std::size_t, Rational>> row;
    for (auto& [t, p] : merged)
      if (p != 0) row.push_back({t, p});
    for (auto& [t, p] : row) t = visit(t);
    c.rows.push_back(std::move(row));
  }
  return c;
}

/// Pr_s(stay U target) for every chain state: states with probability zero are
/// found on the graph, the remaining ones by an exact linear solve.
inline std::vector<Rational> until_probability(const InducedChain& c, const std::vector<char>& stay,
                                               const std::vector<char>& target) {
  const std::size_t n = c.size();
  auto adj = c.adjacency();
  auto positive = graph::backward_reachable(adj, target, stay);
  std::vector<Rational> result(n);
  std::vector<std::size_t> unknown_idx(n, kNoState), unknown;
  for (std::size_t s = 0; s < n; ++s) {
    if (target[s]) result[s] = 1;
    else if (positive[s]) {
      unknown_idx[s] = unknown.size();
      unknown.push_back(s);
    }
  }
  if (unknown.empty()) return result;
  Matrix a(unknown.size(), std::vector<Rational>(unknown.size()));
  std::vector<Rational> b(unknown.size());
  for (std::size_t i = 0; i < unknown.size(); ++i) {
    a[i][i] = 1;
    for (const auto& [t, p] : c.rows[unknown[i]]) {
      if (target[t]) b[i] += p;
      else if (unknown_idx[t] != kNoState) a[i][unknown_idx[t]] -= p;
    }
  }
  auto x = solve_linear_system(std::move(a), std::move(b));
  for (std::size_t i = 0; i < unknown.size(); ++i) result[unknown[i]] = x[i];
  return result;
}

/// Pr_s(◇ target) = 1, decided on the graph: a state fails iff it can reach,
/// without touching the target, a state from which the target is unreachable.
inline std::vector<char> almost_sure_reach(const InducedChain& c, const std::vector<char>& target) {
  auto adj = c.adjacency();
  auto can_reach = graph::backward_reachable(adj, target);
  std::vector<char> doomed(c.size()), avoid(c.size());
  for (std::size_t s = 0; s < c.size(); ++s) {
    doomed[s] = !can_reach[s];
    avoid[s] = !target[s];
  }
  auto bad = graph::backward_reachable(adj, doomed, avoid);
  std::vector<char> out(c.size());
  for (std::size_t s = 0; s < c.size(); ++s) out[s] = target[s] || !bad[s];
  return out;
}

/// Stationary distribution of a bottom component (members in chain indices).
inline std::vector<Rational> stationary_distribution(const InducedChain& c, const std::vector<std::size_t>& bscc) {
  const std::size_t k = bscc.size();
  std::vector<std::size_t> pos(c.size(), kNoState);
  for (std::size_t i = 0; i < k; ++i) pos[bscc[i]] = i;
  // Balance equations pi_j = sum_i pi_i P(i,j) for j >= 1, plus normalization.
  Matrix a(k, std::vector<Rational>(k));
  std::vector<Rational> b(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (const auto& [t, p] : c.rows[bscc[i]])
      if (pos[t] != kNoState && pos[t] != 0) a[pos[t]][i] += p;
    if (i != 0) a[i][i] -= 1;
  }
  for (std::size_t i = 0; i < k; ++i) a[0][i] = 1;
  b[0] = 1;
  return solve_linear_system(std::move(a), std::move(b));
}

/// Expected long-run average of `value` (chain-indexed) from every chain state.
inline std::vector<Rational> long_run_average(const InducedChain& c, const std::vector<Rational>& value) {
  const std::size_t n = c.size();
  auto bottoms = graph::bottom_components(c.adjacency());
  std::vector<Rational> result(n);
  std::vector<char> recurrent(n, 0);
  for (const auto& b : bottoms) {
    auto pi = stationary_distribution(c, b);
    Rational g = 0;
    for (std::size_t i = 0; i < b.size(); ++i) g += pi[i] * value[b[i]];
    for (auto s : b) {
      result[s] = g;
      recurrent[s] = 1;
    }
  }
  std::vector<std::size_t> idx(n, kNoState), transient;
  for (std::size_t s = 0; s < n; ++s)
    if (!recurrent[s]) {
      idx[s] = transient.size();
      transient.push_back(s);
    }
  if (transient.empty()) return result;
  Matrix a(transient.size(), std::vector<Rational>(transient.size()));
  std::vector<Rational> rhs(transient.size());
  for (std::size_t i = 0; i < transient.size(); ++i) {
    a[i][i] = 1;
    for (const auto& [t, p] : c.rows[transient[i]]) {
      if (recurrent[t]) rhs[i] += p * result[t];
      else a[i][idx[t]] -= p;
    }
  }
  auto x = solve_linear_system(std::move(a), std::move(rhs));
  for (std::size_t i = 0; i < transient.size(); ++i) result[transient[i]] = x[i];
  return result;
}

/// Long-run availability from the chain's initial state; `payoff` is host-indexed.
inline Rational availability(const InducedChain& c, const std::vector<Rational>& payoff) {
  return long_run_average(c, c.project(payoff))[0];
}

/// MP_e for each weight function (host-indexed), from the chain's initial state.
inline std::map<std::size_t, Rational> mp_values(const InducedChain& c,
                                                 const std::map<std::size_t, WeightFunction>& weights) {
  std::map<std::size_t, Rational> out;
  for (const auto& [e, w] : weights) out.emplace(e, long_run_average(c, c.project(w))[0]);
  return out;
}

/// Probability, from chain state `from`, of reaching `target` with the costs of
/// the states visited before it summing to at most `bound`. Evaluated on an
/// explicit (state, spent cost) product, independently of any cost annotation
/// already present in the host.
inline Rational cost_bounded_reach(const InducedChain& c, const std::vector<std::int64_t>& cost,
                                   const std::vector<char>& target, std::size_t from, std::int64_t bound) {
  InducedChain product;
  std::map<std::pair<std::size_t, std::int64_t>, std::size_t> index;
  std::vector<std::pair<std::size_t, std::int64_t>> nodes;
  std::vector<char> hit, live;
  constexpr std::size_t sink = 0;  // budget exhausted
  nodes.push_back({kNoState, 0});
  hit.push_back(0);
  live.push_back(0);
  product.rows.emplace_back();
  auto visit = [&](std::size_t s, std::int64_t spent) -> std::size_t {
    if (spent > bound) return sink;
    auto [it, fresh] = index.emplace(std::make_pair(s, spent), nodes.size());
    if (fresh) {
      nodes.push_back({s, spent});
      hit.push_back(target[s]);
      live.push_back(!target[s]);
      product.rows.emplace_back();
    }
    return it->second;
  };
  std::size_t start = visit(from, 0);
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    auto [s, spent] = nodes[i];
    if (target[s]) continue;
    std::vector<std::pair<std::size_t, Rational>> row;
    for (const auto& [t, p] : c.rows[s]) row.push_back({visit(t, spent + cost[s]), p});
    product.rows[i] = std::move(row);
  }
  product.states.resize(nodes.size());
  return until_probability(product, live, hit)[start];
}

struct ErrorCheck {
  std::size_t error = 0;  // transformed state index
  Rational res_probability;
  bool res_ok = false;
  bool as_rep_ok = false;
  Rational mp;
};

struct VerificationReport {
  Rational threshold;
  std::vector<ErrorCheck> errors;  // reachable errors, index order
  Rational availability;
  bool ok = false;
};

/// (Res) probability at error state `e` (chain index): one step out of e, then
/// repair states until a repair copy of e on an operational state.
inline Rational res_probability(const TransformedMdp& mt, const InducedChain& c, std::size_t e) {
  const std::size_t error = c.states[e];
  std::vector<char> stay(c.size()), target(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    stay[i] = mt.is_repair_copy(c.states[i]);
    target[i] = mt.in_op_of(c.states[i], mt.base_of(error));
  }
  auto until = until_probability(c, stay, target);
  Rational sum = 0;
  for (const auto& [t, p] : c.rows[e]) sum += p * until[t];
  return sum;
}

/// Checks (Res) and (ASRep) at every error reachable under a memoryless
/// scheduler of the transformed MDP. Throws IncompleteScheduler if the
/// scheduler is undefined somewhere reachable.
inline VerificationReport verify_resilient(const TransformedMdp& mt, const MrScheduler& sched, const Rational& threshold) {
  VerificationReport r;
  r.threshold = threshold;
  auto c = induce_chain(mt, sched, mt.initial());
  std::vector<Rational> payoff(mt.size());
  for (std::size_t s = 0; s < mt.size(); ++s) payoff[s] = mt.payoff(s);
  r.availability = availability(c, payoff);

  std::vector<char> op(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) op[i] = mt.is_op(c.states[i]);
  auto as = almost_sure_reach(c, op);
  auto weights = build_weights(mt, threshold);
  r.ok = true;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const std::size_t s = c.states[i];
    if (!mt.is_error(s)) continue;
    ErrorCheck check;
    check.error = s;
    check.res_probability = res_probability(mt, c, i);
    check.res_ok = check.res_probability >= threshold;
    check.as_rep_ok = as[i] != 0;
    check.mp = long_run_average(c, c.project(weights.at(s)))[0];
    r.ok = r.ok && check.res_ok && check.as_rep_ok;
    r.errors.push_back(std::move(check));
  }
  std::sort(r.errors.begin(), r.errors.end(), [](const auto& a, const auto& b) { return a.error < b.error; });
  return r;
}

inline std::string format_report(const TransformedMdp& mt, const VerificationReport& r) {
  std::ostringstream out;
  out << "resilient: " << (r.ok ? "yes" : "no") << "\n";
  out << "threshold: " << to_string(r.threshold) << "\n";
  out << "availability: " << to_string(r.availability) << " (" << to_decimal(r.availability) << ")\n";
  for (const auto& e : r.errors) {
    out << "error " << mt.id(e.error) << ": res " << to_string(e.res_probability) << " ("
        << to_decimal(e.res_probability) << ") " << (e.res_ok ? "ok" : "FAIL") << ", asrep "
        << (e.as_rep_ok ? "ok" : "FAIL") << ", mp " << to_string(e.mp) << "\n";
  }
  return out.str();
}

/// Expected reward accumulated before reaching `absorbing` from `from`.
/// Requires the absorbing set to be reached almost surely; throws otherwise.
template <class Host>
Rational expected_total_reward(const Host& host, const MrScheduler& sched, std::size_t from,
                               const std::vector<char>& absorbing) {
  auto c = induce_chain(host, sched, from);
  auto target = c.project(absorbing);
  auto sure = almost_sure_reach(c, target);
  if (!sure[0]) throw std::invalid_argument("absorbing states are not reached almost surely");
  std::vector<std::size_t> idx(c.size(), kNoState), open;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (!target[i]) {
      idx[i] = open.size();
      open.push_back(i);
    }
  if (open.empty()) return 0;
  Matrix a(open.size(), std::vector<Rational>(open.size()));
  std::vector<Rational> b(open.size());
  for (std::size_t k = 0; k < open.size(); ++k) {
    a[k][k] = 1;
    b[k] = host.reward(c.states[open[k]]);
    for (const auto& [t, p] : c.rows[open[k]])
      if (idx[t] != kNoState) a[k][idx[t]] -= p;
  }
  auto x = solve_linear_system(std::move(a), std::move(b));
  return idx[0] == kNoState ? Rational(0) : x[idx[0]];
}

}  // namespace resil
