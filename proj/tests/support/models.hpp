#pragma once

#include "resil/resil.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace resil::testing {

/// The five-state running example: one error, one repair state with a cheap
/// safe action (alpha -> op1, payoff 0) and a gamble (beta: stay or reach op2).
inline MdpWithRepair repair_gamble() {
  MdpBuilder b;
  b.state("s_init", StateKind::Operational, 0)
      .state("error", StateKind::Error, 0)
      .state("rep", StateKind::Repair, 1)
      .state("op1", StateKind::Operational, 0)
      .state("op2", StateKind::Operational, 1);
  b.edge("s_init", "a", "error")
      .edge("error", "a", "rep")
      .edge("rep", "alpha", "op1")
      .choice("rep", "beta", {{"rep", make_rational(1, 2)}, {"op2", make_rational(1, 2)}})
      .edge("op1", "a", "op1")
      .edge("op2", "a", "op2")
      .initial("s_init");
  return b.build();
}

/// Scheduler on the transformed MDP playing the named action wherever it is
/// enabled and the first action elsewhere.
inline MrScheduler always(const TransformedMdp& mt, const std::string& action) {
  MrScheduler s(mt.size());
  for (std::size_t t = 0; t < mt.size(); ++t) {
    std::size_t pick = 0;
    for (std::size_t c = 0; c < mt.choices(t).size(); ++c)
      if (mt.choices(t)[c].action == action) pick = c;
    s.set_dirac(t, pick);
  }
  return s;
}

inline std::size_t state_of(const TransformedMdp& mt, const std::string& id) {
  auto s = mt.find(id);
  if (!s) throw std::invalid_argument("no state " + id);
  return *s;
}

struct RandomInstance {
  MdpWithRepair model;
  std::int64_t cost_bound = 0;
  Rational threshold;
};

/// Random valid model: at most `max_states` states, at most two actions per
/// state, one or two successors per action, rewards in 0..3. Error
/// successors are biased towards repair and operational states so that the
/// repair assumption holds often enough for rejection sampling.
inline MdpWithRepair random_model(std::mt19937_64& rng, std::size_t max_states = 6) {
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  const std::vector<Rational> splits{make_rational(1, 2), make_rational(1, 3), make_rational(2, 3),
                                     make_rational(1, 4), make_rational(3, 4)};
  for (;;) {
    const std::size_t n = 2 + pick(max_states - 1);
    MdpBuilder b;
    std::vector<StateKind> kinds(n);
    for (std::size_t s = 0; s < n; ++s) {
      auto r = pick(6);
      kinds[s] = s == 0 ? StateKind::Operational
                        : r < 2 ? StateKind::Operational : r < 4 ? StateKind::Repair : StateKind::Error;
      b.state("s" + std::to_string(s), kinds[s], static_cast<std::int64_t>(pick(4)));
    }
    auto target = [&](std::size_t from) {
      for (int tries = 0; tries < 4; ++tries) {
        auto t = pick(n);
        if (kinds[from] == StateKind::Operational || kinds[t] != StateKind::Error) return t;
      }
      return pick(n);
    };
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t actions = 1 + pick(2);
      for (std::size_t a = 0; a < actions; ++a) {
        std::string from = "s" + std::to_string(s), act = a == 0 ? "a" : "b";
        if (pick(2) == 0) {
          b.edge(from, act, "s" + std::to_string(target(s)));
        } else {
          auto t1 = target(s), t2 = target(s);
          if (t1 == t2) {
            b.edge(from, act, "s" + std::to_string(t1));
          } else {
            Rational p = splits[pick(splits.size())];
            b.choice(from, act, {{"s" + std::to_string(t1), p}, {"s" + std::to_string(t2), 1 - p}});
          }
        }
      }
    }
    b.initial("s0");
    auto m = b.build();
    if (validate(m).ok()) return m;
  }
}

inline const std::vector<Rational>& oracle_thresholds() {
  static const std::vector<Rational> t{make_rational(1, 2), make_rational(2, 3), make_rational(4, 5), Rational(1)};
  return t;
}

/// Random instance whose transformed MDP has at most `max_transformed` states
/// and at most `max_candidates` deterministic schedulers worth enumerating.
inline RandomInstance random_instance(std::mt19937_64& rng, std::size_t max_transformed = 16,
                                      std::size_t max_candidates = 4096) {
  for (;;) {
    RandomInstance inst;
    inst.model = random_model(rng);
    inst.cost_bound = static_cast<std::int64_t>(rng() % 4);
    inst.threshold = oracle_thresholds()[rng() % oracle_thresholds().size()];
    auto mt = transform(inst.model, inst.cost_bound);
    if (mt.size() > max_transformed) continue;
    try {
      enumerate_schedulers(mt, 0, [](const MrScheduler&) {}, max_candidates);
    } catch (const std::length_error&) {
      continue;
    }
    return inst;
  }
}

/// Random path of the base model from its initial state, uniformly choosing
/// actions and successors.
inline PathRecord random_path(const MdpWithRepair& m, std::mt19937_64& rng, std::size_t length) {
  PathRecord p;
  std::size_t s = m.initial;
  p.states.push_back(m.id(s));
  for (std::size_t k = 0; k < length; ++k) {
    const auto& c = m.choices(s)[rng() % m.choices(s).size()];
    const auto& b = c.branches[rng() % c.branches.size()];
    p.actions.push_back(c.action);
    s = b.target;
    p.states.push_back(m.id(s));
  }
  return p;
}

}  // namespace resil::testing
