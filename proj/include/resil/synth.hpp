#pragma once

#include "resil/analyze.hpp"
#include "resil/components.hpp"
#include "resil/lp.hpp"
#include "resil/model.hpp"
#include "resil/scheduler.hpp"
#include "resil/transform.hpp"

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace resil {

inline constexpr const char* kTau = "tau";

/// Transformed MDP extended by one goal_E per component plus a final goal.
/// Indices: transformed states first, then goal_E in component order, then goal.
/// Each transformed state in E ∩ Õp gets an extra last choice tau -> goal_E.
///
/// A component without operational states ("idle", availability 0) has no
/// such state, so its goal_E would be unreachable. Idle components flagged in
/// `idle` get tau at all of their states instead. Entering one during a
/// repair would keep the repair from ever completing. A state is surely
/// inside a repair if it is an error or a non-operational repair copy; from
/// those, every choice that may enter an untagged non-operational state
/// leading (through such states) into a flagged component is forbidden. By
/// default only idle components no repair can reach are flagged; idle
/// components containing repair copies are never flagged.
class GoalMdp {
 public:
  GoalMdp(const TransformedMdp& mt, const ComponentSet& comps, std::vector<char> idle = {})
      : mt_(&mt), comps_(&comps), idle_(idle.empty() ? default_idle(mt, comps) : std::move(idle)) {
    const std::size_t n = mt.size();
    if (idle_.size() != comps.size()) throw std::invalid_argument("idle flags do not match the component set");
    component_of_.assign(n, kNoState);
    for (std::size_t i = 0; i < comps.size(); ++i)
      for (auto s : comps[i].states) component_of_[s] = i;
    tau_.assign(n, 0);
    std::vector<std::size_t> flagged;
    for (std::size_t i = 0; i < comps.size(); ++i) {
      if (idle_[i] && !flaggable(mt, comps[i])) throw std::invalid_argument("component cannot be flagged idle");
      if (idle_[i]) flagged.push_back(i);
      for (auto s : comps[i].states) tau_[s] = idle_[i] || mt.is_op(s);
    }
    forbidden_ = repair_entries(mt, comps, flagged);
    choices_.resize(n + comps.size() + 1);
    for (std::size_t s = 0; s < n; ++s) {
      choices_[s] = mt.choices(s);
      if (tau_[s]) choices_[s].push_back({kTau, {{goal_of(component_of_[s]), Rational(1)}}});
    }
    for (std::size_t i = 0; i < comps.size(); ++i) choices_[goal_of(i)] = {{kTau, {{goal(), Rational(1)}}}};
    choices_[goal()] = {{kTau, {{goal(), Rational(1)}}}};
  }

  static bool in_repair(const TransformedMdp& mt, std::size_t s) {
    return mt.is_error(s) || (mt.is_repair_copy(s) && !mt.is_op(s));
  }

  /// Idle component without repair copies.
  static bool flaggable(const TransformedMdp& mt, const ComponentTriple& t) {
    for (auto s : t.states)
      if (mt.is_op(s) || in_repair(mt, s)) return false;
    return true;
  }

  /// Choices (state, index) surely inside a repair that may lead into one
  /// of the given components.
  static std::vector<std::pair<std::size_t, std::size_t>> repair_entries(const TransformedMdp& mt,
                                                                        const ComponentSet& comps,
                                                                        const std::vector<std::size_t>& which) {
    const std::size_t n = mt.size();
    auto plain = [&](std::size_t s) { return !mt.is_op(s) && !in_repair(mt, s); };
    // Untagged non-operational states that can reach a listed component through such states.
    std::vector<std::vector<std::size_t>> pred(n);
    for (std::size_t s = 0; s < n; ++s)
      for (const auto& c : mt.choices(s))
        for (const auto& b : c.branches) pred[b.target].push_back(s);
    std::vector<char> leads(n, 0);
    std::vector<std::size_t> stack;
    for (auto i : which)
      for (auto s : comps[i].states)
        if (!leads[s]) {
          leads[s] = 1;
          stack.push_back(s);
        }
    while (!stack.empty()) {
      auto u = stack.back();
      stack.pop_back();
      for (auto p : pred[u])
        if (plain(p) && !leads[p]) {
          leads[p] = 1;
          stack.push_back(p);
        }
    }
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t s = 0; s < n; ++s) {
      if (!in_repair(mt, s)) continue;
      for (std::size_t c = 0; c < mt.choices(s).size(); ++c) {
        bool hits = false;
        for (const auto& b : mt.choices(s)[c].branches) hits = hits || leads[b.target];
        if (hits) out.push_back({s, c});
      }
    }
    return out;
  }

  /// Flaggable idle components that some repair may run into.
  static std::vector<std::size_t> contested_idle(const TransformedMdp& mt, const ComponentSet& comps) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < comps.size(); ++i)
      if (flaggable(mt, comps[i]) && !repair_entries(mt, comps, {i}).empty()) out.push_back(i);
    return out;
  }

  static std::vector<char> default_idle(const TransformedMdp& mt, const ComponentSet& comps) {
    std::vector<char> flags(comps.size(), 0);
    for (std::size_t i = 0; i < comps.size(); ++i) flags[i] = flaggable(mt, comps[i]);
    for (auto i : contested_idle(mt, comps)) flags[i] = 0;
    return flags;
  }

  const std::vector<char>& idle_flags() const { return idle_; }
  /// Choices the resiliency program must leave unused.
  const std::vector<std::pair<std::size_t, std::size_t>>& forbidden_choices() const { return forbidden_; }

  const TransformedMdp& transformed() const { return *mt_; }
  const ComponentSet& components() const { return *comps_; }
  /// Whether transformed state s carries the extra tau choice (always last).
  bool has_tau(std::size_t s) const { return s < tau_.size() && tau_[s]; }
  std::size_t size() const { return choices_.size(); }
  std::size_t initial() const { return mt_->initial(); }
  const std::vector<Choice>& choices(std::size_t s) const { return choices_[s]; }

  std::size_t goal_of(std::size_t component) const { return mt_->size() + component; }
  std::size_t goal() const { return mt_->size() + comps_->size(); }
  bool is_goal_state(std::size_t s) const { return s >= mt_->size(); }
  /// Component whose E contains transformed state s, or kNoState.
  std::size_t component_of(std::size_t s) const { return s < component_of_.size() ? component_of_[s] : kNoState; }

  Rational reward(std::size_t s) const {
    if (s >= mt_->size() && s < goal()) return (*comps_)[s - mt_->size()].availability;
    return 0;
  }

  std::string id(std::size_t s) const {
    if (s < mt_->size()) return mt_->id(s);
    if (s == goal()) return "goal";
    return "goal_" + std::to_string(s - mt_->size());
  }

  std::vector<char> goal_mask() const {
    std::vector<char> m(size(), 0);
    m[goal()] = 1;
    return m;
  }

 private:
  const TransformedMdp* mt_;
  const ComponentSet* comps_;
  std::vector<char> idle_;
  std::vector<std::size_t> component_of_;
  std::vector<char> tau_;
  std::vector<std::pair<std::size_t, std::size_t>> forbidden_;
  std::vector<std::vector<Choice>> choices_;
};

inline GoalMdp build_goal_mdp(const TransformedMdp& mt, const ComponentSet& comps, std::vector<char> idle = {}) {
  return GoalMdp(mt, comps, std::move(idle));
}

struct ResiliencyProgram {
  LinearProgram lp;
  std::map<std::pair<std::size_t, std::size_t>, VarId> y;  // (state, choice) -> variable
};

/// Flow program over the goal MDP: unit source at the initial state, at least
/// unit inflow into goal, and the repair-success ratio per error.
inline ResiliencyProgram build_resiliency_lp(const GoalMdp& n, const Rational& threshold) {
  ResiliencyProgram p;
  const auto& mt = n.transformed();
  for (std::size_t s = 0; s < n.goal(); ++s)
    for (std::size_t c = 0; c < n.choices(s).size(); ++c)
      p.y[{s, c}] = p.lp.add_variable("y_" + n.id(s) + "_" + n.choices(s)[c].action);

  std::vector<LinearExpr> inflow(n.size());
  for (const auto& [sc, v] : p.y)
    for (const auto& b : n.choices(sc.first)[sc.second].branches) inflow[b.target].push_back({v, b.prob});

  auto visits = [&](std::size_t s) {
    LinearExpr e;
    for (std::size_t c = 0; c < n.choices(s).size(); ++c) e.push_back({p.y.at({s, c}), Rational(1)});
    return e;
  };

  for (std::size_t s = 0; s < n.goal(); ++s) {
    LinearExpr row = visits(s);
    for (const auto& t : inflow[s]) row.push_back({t.var, -t.coef});
    p.lp.add_constraint(std::move(row), Relation::Equal, s == n.initial() ? 1 : 0, "flow_" + n.id(s));
  }
  p.lp.add_constraint(inflow[n.goal()], Relation::GreaterEqual, 1, "goal");

  for (auto e : mt.errors()) {
    LinearExpr row;
    for (std::size_t s = 0; s < mt.size(); ++s)
      if (mt.in_op_of(s, mt.base_of(e)))
        for (auto& t : visits(s)) row.push_back(std::move(t));
    for (auto& t : visits(e)) row.push_back({t.var, -threshold * t.coef});
    p.lp.add_constraint(std::move(row), Relation::GreaterEqual, 0, "res_" + mt.id(e));
  }
  for (const auto& sc : n.forbidden_choices())
    p.lp.add_constraint({{p.y.at(sc), Rational(1)}}, Relation::Equal, 0,
                        "forbid_" + mt.id(sc.first) + "_" + mt.choices(sc.first)[sc.second].action);

  Objective obj;
  for (std::size_t i = 0; i < n.components().size(); ++i)
    if (n.components()[i].availability != 0)
      obj.terms.push_back({p.y.at({n.goal_of(i), 0}), n.components()[i].availability});
  p.lp.set_objective(std::move(obj));
  return p;
}

/// Sum of all flow variables; minimized at the optimum to strip circulations.
inline Objective total_flow_objective(const ResiliencyProgram& p) {
  Objective o{Sense::Minimize, {}};
  for (const auto& [sc, v] : p.y) o.terms.push_back({v, Rational(1)});
  return o;
}

struct ComposedScheduler {
  MrScheduler transient;           // on F (transformed states outside the chosen components)
  std::vector<std::size_t> chosen;  // indices into the component set
  MrScheduler combined;            // memoryless scheduler on the transformed MDP
  MrScheduler goal_scheduler;      // the flow scheduler on the goal MDP (analysis only)
  FiniteMemoryScheduler rendered;  // on the base model, reachable part
};

/// Turns an optimal flow into a scheduler: frequencies on F, the component
/// schedulers on every chosen component (adopted on first entry).
inline ComposedScheduler extract_scheduler(const GoalMdp& n, const ResiliencyProgram& p, const LpSolution& sol) {
  if (!sol.optimal()) throw std::invalid_argument("scheduler extraction needs an optimal solution");
  const auto& mt = n.transformed();
  const auto& comps = n.components();
  ComposedScheduler out;
  std::vector<char> in_chosen(mt.size(), 0);
  for (std::size_t i = 0; i < comps.size(); ++i)
    if (sol[p.y.at({n.goal_of(i), 0})] > 0) {
      out.chosen.push_back(i);
      for (auto s : comps[i].states) in_chosen[s] = 1;
    }

  out.goal_scheduler = MrScheduler(n.size());
  for (std::size_t s = 0; s < n.size(); ++s) {
    if (s == n.goal()) {
      out.goal_scheduler.set_dirac(s, 0);
      continue;
    }
    Rational total = 0;
    for (std::size_t c = 0; c < n.choices(s).size(); ++c) total += sol[p.y.at({s, c})];
    if (total > 0) {
      for (std::size_t c = 0; c < n.choices(s).size(); ++c)
        if (auto v = sol[p.y.at({s, c})]; v > 0) out.goal_scheduler.dist[s].push_back({c, v / total});
    } else {
      out.goal_scheduler.dist[s] = uniform_distribution(n.choices(s).size());
    }
  }

  out.transient = MrScheduler(mt.size());
  out.combined = MrScheduler(mt.size());
  for (std::size_t s = 0; s < mt.size(); ++s) {
    if (in_chosen[s]) continue;
    Rational total = 0;
    for (std::size_t c = 0; c < mt.choices(s).size(); ++c) total += sol[p.y.at({s, c})];
    if (total > 0) {
      for (std::size_t c = 0; c < mt.choices(s).size(); ++c)
        if (auto v = sol[p.y.at({s, c})]; v > 0) out.transient.dist[s].push_back({c, v / total});
    } else {
      out.transient.dist[s] = uniform_distribution(mt.choices(s).size());
    }
    out.combined.dist[s] = out.transient.dist[s];
  }
  for (auto i : out.chosen)
    for (auto s : comps[i].states) out.combined.dist[s] = comps[i].scheduler.dist[s];

  auto chain = induce_chain(mt, out.combined, mt.initial());
  std::vector<char> keep(mt.size(), 0);
  for (auto s : chain.states) keep[s] = 1;
  out.rendered = render(mt, out.combined, keep);
  return out;
}

/// Rejected model: validation failed.
class InvalidModel : public std::invalid_argument {
 public:
  explicit InvalidModel(ValidationReport r)
      : std::invalid_argument("invalid model"), report(std::move(r)) {}
  ValidationReport report;
};

/// The synthesized scheduler failed its own post-verification.
class VerificationFailure : public std::logic_error {
 public:
  explicit VerificationFailure(const std::string& what) : std::logic_error(what) {}
};

struct SynthesisResult {
  std::shared_ptr<const TransformedMdp> transformed;
  std::shared_ptr<const ComponentSet> components;
  bool feasible = false;
  Rational availability;  // LP optimum, equal to the verified availability
  ComposedScheduler scheduler;
  VerificationReport report;
  LinearProgram resiliency_lp;  // the program whose solution was used
  std::vector<char> idle_flags;  // idle components given tau (see GoalMdp)
};

/// Contested idle components beyond this count are never flagged.
inline constexpr std::size_t kMaxContestedIdle = 8;

/// Full pipeline. Throws InvalidModel for models failing validation and
/// VerificationFailure if the output does not pass exact verification.
inline SynthesisResult synthesize(const MdpWithRepair& m, const Rational& threshold, std::int64_t cost_bound) {
  if (threshold <= 0 || threshold > 1) throw std::invalid_argument("threshold must lie in (0,1]");
  if (cost_bound < 0) throw std::invalid_argument("cost bound must be nonnegative");
  if (auto v = validate(m); !v.ok()) throw InvalidModel(std::move(v));

  SynthesisResult r;
  auto mt = std::make_shared<TransformedMdp>(transform(m, cost_bound));
  auto comps = std::make_shared<ComponentSet>(compute_E(*mt, threshold));
  r.transformed = mt;
  r.components = comps;
  // Try every subset of the contested idle components; keep the best
  // feasible program, the first one on ties.
  auto contested = GoalMdp::contested_idle(*mt, *comps);
  if (contested.size() > kMaxContestedIdle) contested.resize(kMaxContestedIdle);
  const auto base_flags = GoalMdp::default_idle(*mt, *comps);
  std::optional<GoalMdp> n;
  std::optional<ResiliencyProgram> program;
  LpSolution sol;
  for (std::size_t mask = 0; mask < (std::size_t{1} << contested.size()); ++mask) {
    auto flags = base_flags;
    for (std::size_t j = 0; j < contested.size(); ++j)
      if (mask >> j & 1) flags[contested[j]] = 1;
    GoalMdp candidate(*mt, *comps, std::move(flags));
    auto prog = build_resiliency_lp(candidate, threshold);
    auto s = solve(prog.lp);
    if (mask == 0) r.resiliency_lp = prog.lp;
    if (s.status == LpStatus::Unbounded) throw VerificationFailure("resiliency program is unbounded");
    if (!s.optimal() || (program && s.objective_value <= sol.objective_value)) continue;
    n.emplace(std::move(candidate));
    program.emplace(std::move(prog));
    sol = std::move(s);
  }
  if (!program) return r;
  r.resiliency_lp = program->lp;
  r.idle_flags = n->idle_flags();
  sol = solve_lexicographic(program->lp, total_flow_objective(*program));
  if (!sol.optimal()) throw VerificationFailure("lexicographic resiliency program failed");
  const Rational optimum = evaluate(program->lp.objective().terms, sol.values);

  r.feasible = true;
  r.availability = optimum;
  r.scheduler = extract_scheduler(*n, *program, sol);
  r.report = verify_resilient(*mt, r.scheduler.combined, threshold);
  if (!r.report.ok) throw VerificationFailure("synthesized scheduler is not resilient");
  if (r.report.availability != optimum)
    throw VerificationFailure("composed availability " + to_string(r.report.availability) +
                              " differs from the program optimum " + to_string(optimum));
  return r;
}

}  // namespace resil
