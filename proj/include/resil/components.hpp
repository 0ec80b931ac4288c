#pragma once

#include "resil/analyze.hpp"
#include "resil/graph.hpp"
#include "resil/lp.hpp"
#include "resil/scheduler.hpp"
#include "resil/transform.hpp"
#include "resil/weights.hpp"

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace resil {

/// Sub-MDP of a transformed MDP given by alive states and alive choices.
struct SubMdp {
  const TransformedMdp* host = nullptr;
  std::vector<char> state_alive;
  std::vector<std::vector<char>> choice_alive;

  static SubMdp full(const TransformedMdp& mt) {
    SubMdp q;
    q.host = &mt;
    q.state_alive.assign(mt.size(), 1);
    for (std::size_t s = 0; s < mt.size(); ++s) q.choice_alive.emplace_back(mt.choices(s).size(), 1);
    return q;
  }

  bool alive(std::size_t s) const { return state_alive[s] != 0; }
  bool enabled(std::size_t s, std::size_t c) const { return state_alive[s] && choice_alive[s][c]; }
  bool empty() const { return std::none_of(state_alive.begin(), state_alive.end(), [](char a) { return a; }); }

  std::vector<std::size_t> states() const {
    std::vector<std::size_t> out;
    for (std::size_t s = 0; s < state_alive.size(); ++s)
      if (state_alive[s]) out.push_back(s);
    return out;
  }

  std::vector<std::size_t> enabled_choices(std::size_t s) const {
    std::vector<std::size_t> out;
    if (!alive(s)) return out;
    for (std::size_t c = 0; c < choice_alive[s].size(); ++c)
      if (choice_alive[s][c]) out.push_back(c);
    return out;
  }

  friend bool operator==(const SubMdp& a, const SubMdp& b) {
    return a.host == b.host && a.state_alive == b.state_alive && a.choice_alive == b.choice_alive;
  }
};

/// Largest sub-MDP of q without the states of `removed`: deleted states take
/// every action leading into them down, and states left without actions go too.
inline SubMdp prune(SubMdp q, const std::vector<std::size_t>& removed) {
  const auto& mt = *q.host;
  std::vector<std::size_t> work;
  for (auto s : removed)
    if (q.state_alive[s]) {
      q.state_alive[s] = 0;
      work.push_back(s);
    }
  if (work.empty()) return q;
  // Predecessor lists: (state, choice) pairs with a branch into each target.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> pred(mt.size());
  for (std::size_t s = 0; s < mt.size(); ++s)
    for (std::size_t c = 0; c < mt.choices(s).size(); ++c)
      for (const auto& b : mt.choices(s)[c].branches) pred[b.target].push_back({s, c});
  while (!work.empty()) {
    auto dead = work.back();
    work.pop_back();
    for (auto [s, c] : pred[dead]) {
      if (!q.state_alive[s] || !q.choice_alive[s][c]) continue;
      q.choice_alive[s][c] = 0;
      if (std::none_of(q.choice_alive[s].begin(), q.choice_alive[s].end(), [](char a) { return a; })) {
        q.state_alive[s] = 0;
        work.push_back(s);
      }
    }
  }
  for (std::size_t s = 0; s < mt.size(); ++s)
    if (!q.state_alive[s]) std::fill(q.choice_alive[s].begin(), q.choice_alive[s].end(), 0);
  return q;
}

struct EndComponent {
  std::vector<std::size_t> states;                // sorted
  std::map<std::size_t, std::vector<std::size_t>> actions;  // state -> choice indices
};

/// Maximal end components of q, ordered by smallest member.
inline std::vector<EndComponent> mec_decomposition(const SubMdp& q) {
  const auto& mt = *q.host;
  const std::size_t n = mt.size();
  std::vector<char> alive = q.state_alive;
  auto choice_alive = q.choice_alive;
  std::vector<std::size_t> comp_of(n, kNoState);
  for (;;) {
    graph::Adjacency adj(n);
    for (std::size_t s = 0; s < n; ++s) {
      if (!alive[s]) continue;
      for (std::size_t c = 0; c < choice_alive[s].size(); ++c)
        if (choice_alive[s][c])
          for (const auto& b : mt.choices(s)[c].branches) adj[s].push_back(b.target);
    }
    auto comps = graph::strongly_connected_components(adj, alive);
    std::fill(comp_of.begin(), comp_of.end(), kNoState);
    for (std::size_t i = 0; i < comps.size(); ++i)
      for (auto s : comps[i]) comp_of[s] = i;
    bool changed = false;
    for (std::size_t s = 0; s < n; ++s) {
      if (!alive[s]) continue;
      bool any = false;
      for (std::size_t c = 0; c < choice_alive[s].size(); ++c) {
        if (!choice_alive[s][c]) continue;
        bool stays = std::all_of(mt.choices(s)[c].branches.begin(), mt.choices(s)[c].branches.end(),
                                 [&](const Branch& b) { return alive[b.target] && comp_of[b.target] == comp_of[s]; });
        if (!stays) {
          choice_alive[s][c] = 0;
          changed = true;
        } else {
          any = true;
        }
      }
      if (!any) {
        alive[s] = 0;
        changed = true;
      }
    }
    if (!changed) {
      std::vector<EndComponent> out;
      for (auto& comp : comps) {
        EndComponent ec;
        ec.states = comp;
        for (auto s : comp)
          for (std::size_t c = 0; c < choice_alive[s].size(); ++c)
            if (choice_alive[s][c]) ec.actions[s].push_back(c);
        out.push_back(std::move(ec));
      }
      return out;
    }
  }
}

/// The multi-mean-payoff program on a sub-MDP together with its variable maps.
struct MultiMpProgram {
  LinearProgram lp;
  std::map<std::pair<std::size_t, std::size_t>, VarId> y_action;   // transient flow y_{s,a}
  std::map<std::size_t, VarId> y_switch;                            // switch mass y_s
  std::map<std::pair<std::size_t, std::size_t>, VarId> x_action;   // recurrent frequency x_{s,a}
  std::vector<EndComponent> mecs;
};

/// Occupation-measure program: transient flow from `init` switching into
/// maximal end components, recurrent frequencies inside them, one
/// nonnegative-mean constraint per weight function, payoff maximized.
/// With a `recurrent` mask, frequencies and switch mass are confined to it.
inline MultiMpProgram build_multi_mp_lp(const SubMdp& q, std::size_t init,
                                        const std::map<std::size_t, WeightFunction>& weights,
                                        const std::vector<char>& recurrent = {}) {
  const auto& mt = *q.host;
  if (!q.alive(init)) throw std::invalid_argument("initial state is not part of the sub-MDP");
  MultiMpProgram p;
  p.mecs = mec_decomposition(q);
  auto allowed = [&](std::size_t s) { return recurrent.empty() || recurrent[s]; };

  for (auto s : q.states())
    for (auto c : q.enabled_choices(s))
      p.y_action[{s, c}] = p.lp.add_variable("y_" + mt.id(s) + "_" + mt.choices(s)[c].action);
  for (const auto& mec : p.mecs)
    for (auto s : mec.states) {
      if (!allowed(s)) continue;
      p.y_switch[s] = p.lp.add_variable("y_" + mt.id(s));
      for (auto c : mec.actions.at(s))
        if (std::all_of(mt.choices(s)[c].branches.begin(), mt.choices(s)[c].branches.end(),
                        [&](const Branch& b) { return allowed(b.target); }))
          p.x_action[{s, c}] = p.lp.add_variable("x_" + mt.id(s) + "_" + mt.choices(s)[c].action);
    }

  // Inflow terms per state, for both flows.
  std::map<std::size_t, LinearExpr> y_in, x_in;
  for (const auto& [sc, v] : p.y_action)
    for (const auto& b : mt.choices(sc.first)[sc.second].branches) y_in[b.target].push_back({v, b.prob});
  for (const auto& [sc, v] : p.x_action)
    for (const auto& b : mt.choices(sc.first)[sc.second].branches) x_in[b.target].push_back({v, b.prob});

  for (auto s : q.states()) {
    LinearExpr row;
    for (auto c : q.enabled_choices(s)) row.push_back({p.y_action.at({s, c}), Rational(1)});
    if (auto it = p.y_switch.find(s); it != p.y_switch.end()) row.push_back({it->second, Rational(1)});
    for (const auto& t : y_in[s]) row.push_back({t.var, -t.coef});
    p.lp.add_constraint(std::move(row), Relation::Equal, s == init ? 1 : 0, "flow_" + mt.id(s));
  }
  {
    LinearExpr row;
    for (const auto& [s, v] : p.y_switch) row.push_back({v, Rational(1)});
    p.lp.add_constraint(std::move(row), Relation::Equal, 1, "switch");
  }
  for (const auto& mec : p.mecs)
    for (auto s : mec.states) {
      LinearExpr row;
      for (auto c : mec.actions.at(s))
        if (auto it = p.x_action.find({s, c}); it != p.x_action.end()) row.push_back({it->second, Rational(1)});
      for (const auto& t : x_in[s]) row.push_back({t.var, -t.coef});
      if (!row.empty()) p.lp.add_constraint(std::move(row), Relation::Equal, 0, "recur_" + mt.id(s));
    }
  for (std::size_t i = 0; i < p.mecs.size(); ++i) {
    LinearExpr row;
    for (auto s : p.mecs[i].states) {
      for (auto c : p.mecs[i].actions.at(s))
        if (auto it = p.x_action.find({s, c}); it != p.x_action.end()) row.push_back({it->second, Rational(1)});
      if (auto it = p.y_switch.find(s); it != p.y_switch.end()) row.push_back({it->second, Rational(-1)});
    }
    if (!row.empty()) p.lp.add_constraint(std::move(row), Relation::Equal, 0, "match_" + std::to_string(i));
  }
  for (const auto& [e, w] : weights) {
    LinearExpr row;
    for (const auto& [sc, v] : p.x_action)
      if (w[sc.first] != 0) row.push_back({v, w[sc.first]});
    if (!row.empty()) p.lp.add_constraint(std::move(row), Relation::GreaterEqual, 0, "mp_" + mt.id(e));
  }
  Objective obj;
  for (const auto& [sc, v] : p.x_action)
    if (mt.payoff(sc.first) != 0) obj.terms.push_back({v, Rational(mt.payoff(sc.first))});
  p.lp.set_objective(std::move(obj));
  return p;
}

/// Long-run share of operational states; the tie-breaker among optima, so a
/// component that is never operational is only taken when nothing else is.
inline Objective operational_time_objective(const SubMdp& q, const MultiMpProgram& p) {
  Objective o{Sense::Maximize, {}};
  for (const auto& [sc, v] : p.x_action)
    if (q.host->is_op(sc.first)) o.terms.push_back({v, Rational(1)});
  return o;
}

struct ComponentTriple {
  std::vector<std::size_t> states;                          // E, sorted
  std::map<std::size_t, std::vector<std::size_t>> actions;  // A
  MrScheduler scheduler;                                    // H_E, defined on E only
  Rational availability;
  SubMdp snapshot;                                          // Q_E
};

using ComponentSet = std::vector<ComponentTriple>;

/// Availability of H_E inside E (E is closed and irreducible under H_E).
inline Rational component_availability(const TransformedMdp& mt, const ComponentTriple& t) {
  auto chain = induce_chain(mt, t.scheduler, t.states.front());
  std::vector<Rational> payoff(mt.size());
  for (auto s : t.states) payoff[s] = mt.payoff(s);
  return availability(chain, payoff);
}

namespace detail {

/// Bottom components of the support of x, with their frequency-derived schedulers.
inline ComponentSet components_of_solution(const MultiMpProgram& p, const LpSolution& sol, const SubMdp& q) {
  const auto& mt = *q.host;
  const std::size_t n = mt.size();
  std::vector<char> support(n, 0);
  graph::Adjacency adj(n);
  for (const auto& [sc, v] : p.x_action) {
    if (sol[v] <= 0) continue;
    support[sc.first] = 1;
    for (const auto& b : mt.choices(sc.first)[sc.second].branches) adj[sc.first].push_back(b.target);
  }
  ComponentSet out;
  for (auto& comp : graph::bottom_components(adj, support)) {
    ComponentTriple t;
    t.states = comp;
    t.scheduler = MrScheduler(n);
    t.snapshot = q;
    for (auto s : comp) {
      Rational total = 0;
      for (const auto& [sc, v] : p.x_action)
        if (sc.first == s && sol[v] > 0) total += sol[v];
      for (const auto& [sc, v] : p.x_action)
        if (sc.first == s && sol[v] > 0) {
          t.actions[s].push_back(sc.second);
          t.scheduler.dist[s].push_back({sc.second, sol[v] / total});
        }
    }
    t.availability = component_availability(mt, t);
    out.push_back(std::move(t));
  }
  return out;
}

inline void certify(const SubMdp& q, const std::map<std::size_t, WeightFunction>& weights, ComponentTriple t,
                    ComponentSet& out) {
  std::vector<char> inside(q.host->size(), 0);
  for (auto s : t.states) inside[s] = 1;
  auto restricted = build_multi_mp_lp(q, t.states.front(), weights, inside);
  auto sol = solve(restricted.lp);
  if (sol.optimal() && sol.objective_value > t.availability) {
    auto better = components_of_solution(restricted, sol, q);
    if (!better.empty()) {
      for (auto& b : better) certify(q, weights, std::move(b), out);
      return;
    }
  }
  out.push_back(std::move(t));
}

}  // namespace detail

/// Components induced by an optimal solution of the multi-mean-payoff program,
/// each re-certified by the program restricted to it.
inline ComponentSet extract_components(const SubMdp& q, const MultiMpProgram& p, const LpSolution& sol,
                                       const std::map<std::size_t, WeightFunction>& weights) {
  if (!sol.optimal()) throw std::invalid_argument("extraction needs an optimal solution");
  ComponentSet out;
  for (auto& t : detail::components_of_solution(p, sol, q)) detail::certify(q, weights, std::move(t), out);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.states.front() < b.states.front(); });
  return out;
}

/// Repeatedly solves the program on the remaining sub-MDP, collects the
/// components of each optimum and prunes them (or the current initial state if
/// the program is infeasible) until nothing is left.
inline ComponentSet compute_E(const TransformedMdp& mt, const Rational& threshold) {
  auto weights = build_weights(mt, threshold);
  ComponentSet result;
  SubMdp q = SubMdp::full(mt);
  std::size_t s = mt.initial();
  while (!q.empty()) {
    auto program = build_multi_mp_lp(q, s, weights);
    auto sol = solve_lexicographic(program.lp, operational_time_objective(q, program));
    std::vector<std::size_t> removed;
    if (sol.optimal()) {
      for (auto& t : extract_components(q, program, sol, weights)) {
        removed.insert(removed.end(), t.states.begin(), t.states.end());
        result.push_back(std::move(t));
      }
    }
    if (removed.empty()) removed.push_back(s);
    q = prune(std::move(q), removed);
    if (!q.empty() && !q.alive(s)) s = q.states().front();
  }
  return result;
}

inline std::string format_components(const TransformedMdp& mt, const ComponentSet& comps) {
  std::ostringstream out;
  out << "components: " << comps.size() << "\n";
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const auto& t = comps[i];
    out << "component " << i << ": availability " << to_string(t.availability) << " (" << to_decimal(t.availability)
        << "), snapshot states " << t.snapshot.states().size() << "\n";
    for (auto s : t.states) {
      out << "  " << mt.id(s) << ":";
      for (const auto& [c, p] : t.scheduler.dist[s]) out << " " << mt.choices(s)[c].action << "=" << to_string(p);
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace resil
