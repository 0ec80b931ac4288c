#pragma once

#include "resil/model.hpp"
#include "resil/scheduler.hpp"
#include "resil/synth.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace resil {

using Json = nlohmann::ordered_json;

inline constexpr const char* kModelFormat = "resilient-mdp";
inline constexpr const char* kSchedulerFormat = "resilient-scheduler";
inline constexpr int kFormatVersion = 1;

/// Malformed document: bad JSON, missing or mistyped fields, bad numbers.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline const Json& field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing field \"" + key + "\"");
  return *it;
}

inline std::string string_field(const Json& obj, const char* key, const std::string& where) {
  const auto& v = field(obj, key, where);
  if (!v.is_string()) throw ParseError(where + ": field \"" + key + "\" must be a string");
  return v.get<std::string>();
}

inline std::int64_t integer_field(const Json& obj, const char* key, const std::string& where) {
  const auto& v = field(obj, key, where);
  if (!v.is_number_integer()) throw ParseError(where + ": field \"" + key + "\" must be an integer");
  return v.get<std::int64_t>();
}

inline const Json& array_field(const Json& obj, const char* key, const std::string& where) {
  const auto& v = field(obj, key, where);
  if (!v.is_array()) throw ParseError(where + ": field \"" + key + "\" must be an array");
  return v;
}

inline Rational rational_value(const Json& v, const std::string& where) {
  if (!v.is_string()) throw ParseError(where + ": probability must be a fraction or decimal string");
  auto q = parse_rational(v.get<std::string>());
  if (!q) throw ParseError(where + ": malformed number \"" + v.get<std::string>() + "\"");
  return *q;
}

inline void check_header(const Json& doc, const char* format) {
  if (string_field(doc, "format", "document") != format)
    throw ParseError(std::string("document: format must be \"") + format + "\"");
  if (integer_field(doc, "version", "document") != kFormatVersion) throw ParseError("document: unsupported version");
}

inline Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
}

using NamedDistribution = std::vector<std::pair<std::string, Rational>>;

inline Json distribution_json(const NamedDistribution& d) {
  Json arr = Json::array();
  for (const auto& [action, p] : d) arr.push_back({{"action", action}, {"prob", to_string(p)}});
  return arr;
}

inline NamedDistribution distribution_from(const Json& arr, const std::string& where) {
  if (!arr.is_array()) throw ParseError(where + ": actions must be an array");
  NamedDistribution d;
  for (const auto& entry : arr)
    d.push_back({string_field(entry, "action", where), rational_value(field(entry, "prob", where), where)});
  return d;
}

}  // namespace detail

// ---- model documents ----

inline Json model_to_json(const MdpWithRepair& m) {
  Json doc;
  doc["format"] = kModelFormat;
  doc["version"] = kFormatVersion;
  doc["initial"] = m.initial < m.size() ? m.id(m.initial) : "";
  Json states = Json::array();
  for (const auto& st : m.states) states.push_back({{"id", st.id}, {"kind", kind_tag(st.kind)}, {"reward", st.reward}});
  doc["states"] = std::move(states);
  Json transitions = Json::array();
  for (const auto& st : m.states)
    for (const auto& c : st.choices) {
      Json to = Json::array();
      for (const auto& b : c.branches)
        to.push_back({{"target", b.target < m.size() ? m.id(b.target) : ""}, {"prob", to_string(b.prob)}});
      transitions.push_back({{"from", st.id}, {"action", c.action}, {"to", std::move(to)}});
    }
  doc["transitions"] = std::move(transitions);
  return doc;
}

inline std::string write_model(const MdpWithRepair& m) { return model_to_json(m).dump(2) + "\n"; }

/// Parses a model document. Structural problems (dangling ids, bad sums,
/// traps) are left for validate(); only malformed documents throw ParseError.
inline MdpWithRepair model_from_json(const Json& doc) {
  detail::check_header(doc, kModelFormat);
  MdpBuilder b;
  const auto& states = detail::array_field(doc, "states", "document");
  for (std::size_t i = 0; i < states.size(); ++i) {
    std::string where = "states[" + std::to_string(i) + "]";
    auto kind_text = detail::string_field(states[i], "kind", where);
    auto kind = kind_from_tag(kind_text);
    if (!kind) throw ParseError(where + ": unknown kind \"" + kind_text + "\"");
    b.state(detail::string_field(states[i], "id", where), *kind, detail::integer_field(states[i], "reward", where));
  }
  const auto& transitions = detail::array_field(doc, "transitions", "document");
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    std::string where = "transitions[" + std::to_string(i) + "]";
    const auto& t = transitions[i];
    std::vector<std::pair<std::string, Rational>> to;
    for (const auto& branch : detail::array_field(t, "to", where))
      to.push_back({detail::string_field(branch, "target", where),
                    detail::rational_value(detail::field(branch, "prob", where), where)});
    b.choice(detail::string_field(t, "from", where), detail::string_field(t, "action", where), std::move(to));
  }
  b.initial(detail::string_field(doc, "initial", "document"));
  return b.build();
}

inline MdpWithRepair read_model(const std::string& text) { return model_from_json(detail::parse_json(text)); }

// ---- scheduler documents ----

struct StatePolicy {
  std::string state;  // transformed-state id
  detail::NamedDistribution actions;
  friend bool operator==(const StatePolicy&, const StatePolicy&) = default;
};

struct ComponentPolicy {
  Rational availability;
  std::vector<StatePolicy> states;
  friend bool operator==(const ComponentPolicy&, const ComponentPolicy&) = default;
};

struct RuleEntry {
  std::string state;                                         // base-state id
  std::optional<std::pair<std::string, std::int64_t>> memory;  // (error id, cost)
  detail::NamedDistribution actions;
  friend bool operator==(const RuleEntry&, const RuleEntry&) = default;
};

/// Serialized scheduler: transient part, chosen components and the
/// finite-memory rules on the base model (the part used for verification and
/// simulation).
struct SchedulerDocument {
  Rational threshold;
  std::int64_t cost_bound = 0;
  std::optional<Rational> availability;
  std::vector<StatePolicy> transient;
  std::vector<ComponentPolicy> components;
  std::vector<RuleEntry> rules;
  friend bool operator==(const SchedulerDocument&, const SchedulerDocument&) = default;
};

inline StatePolicy state_policy(const TransformedMdp& mt, const MrScheduler& s, std::size_t t) {
  StatePolicy p{mt.id(t), {}};
  for (const auto& [c, q] : s.dist[t]) p.actions.push_back({mt.choices(t)[c].action, q});
  return p;
}

inline SchedulerDocument make_document(const SynthesisResult& r, const Rational& threshold) {
  if (!r.feasible) throw std::invalid_argument("no scheduler to serialize");
  const auto& mt = *r.transformed;
  SchedulerDocument doc;
  doc.threshold = threshold;
  doc.cost_bound = mt.cost_bound();
  doc.availability = r.availability;
  for (std::size_t t = 0; t < mt.size(); ++t)
    if (r.scheduler.transient.defined(t)) doc.transient.push_back(state_policy(mt, r.scheduler.transient, t));
  for (auto i : r.scheduler.chosen) {
    const auto& comp = (*r.components)[i];
    ComponentPolicy cp{comp.availability, {}};
    for (auto s : comp.states) cp.states.push_back(state_policy(mt, comp.scheduler, s));
    doc.components.push_back(std::move(cp));
  }
  const auto& m = mt.base();
  for (const auto& rule : r.scheduler.rendered.rules) {
    RuleEntry e{m.id(rule.state), std::nullopt, rule.distribution};
    if (rule.memory) e.memory = std::make_pair(m.id(rule.memory->error), rule.memory->cost);
    doc.rules.push_back(std::move(e));
  }
  return doc;
}

/// Resolves the rules of a document against a model. Throws
/// std::invalid_argument for unknown state or error ids.
inline FiniteMemoryScheduler finite_memory_from(const MdpWithRepair& m, const SchedulerDocument& doc) {
  FiniteMemoryScheduler f;
  f.cost_bound = doc.cost_bound;
  for (const auto& e : doc.rules) {
    auto s = m.find(e.state);
    if (!s) throw std::invalid_argument("rule names unknown state " + e.state);
    MemoryRule rule{*s, std::nullopt, e.actions};
    if (e.memory) {
      auto err = m.find(e.memory->first);
      if (!err || !m.is_err(*err)) throw std::invalid_argument("rule memory names unknown error " + e.memory->first);
      rule.memory = RepairTag{*err, e.memory->second};
    }
    f.rules.push_back(std::move(rule));
  }
  return f;
}

inline Json scheduler_to_json(const SchedulerDocument& d) {
  auto policy = [](const StatePolicy& p) {
    return Json{{"state", p.state}, {"actions", detail::distribution_json(p.actions)}};
  };
  Json doc;
  doc["format"] = kSchedulerFormat;
  doc["version"] = kFormatVersion;
  doc["threshold"] = to_string(d.threshold);
  doc["costBound"] = d.cost_bound;
  doc["availability"] = d.availability ? Json(to_string(*d.availability)) : Json(nullptr);
  Json transient = Json::array();
  for (const auto& p : d.transient) transient.push_back(policy(p));
  doc["transient"] = std::move(transient);
  Json comps = Json::array();
  for (const auto& c : d.components) {
    Json states = Json::array();
    for (const auto& p : c.states) states.push_back(policy(p));
    comps.push_back({{"availability", to_string(c.availability)}, {"states", std::move(states)}});
  }
  doc["components"] = std::move(comps);
  Json rules = Json::array();
  for (const auto& r : d.rules) {
    Json memory = r.memory ? Json{{"error", r.memory->first}, {"cost", r.memory->second}} : Json(nullptr);
    rules.push_back({{"state", r.state}, {"memory", std::move(memory)}, {"actions", detail::distribution_json(r.actions)}});
  }
  doc["rules"] = std::move(rules);
  return doc;
}

inline std::string write_scheduler(const SchedulerDocument& d) { return scheduler_to_json(d).dump(2) + "\n"; }

inline SchedulerDocument scheduler_from_json(const Json& doc) {
  detail::check_header(doc, kSchedulerFormat);
  SchedulerDocument d;
  d.threshold = detail::rational_value(detail::field(doc, "threshold", "document"), "threshold");
  d.cost_bound = detail::integer_field(doc, "costBound", "document");
  if (auto it = doc.find("availability"); it != doc.end() && !it->is_null())
    d.availability = detail::rational_value(*it, "availability");
  auto policy = [](const Json& j, const std::string& where) {
    return StatePolicy{detail::string_field(j, "state", where),
                       detail::distribution_from(detail::field(j, "actions", where), where)};
  };
  if (doc.contains("transient")) {
    const auto& arr = detail::array_field(doc, "transient", "document");
    for (std::size_t i = 0; i < arr.size(); ++i) d.transient.push_back(policy(arr[i], "transient[" + std::to_string(i) + "]"));
  }
  if (doc.contains("components")) {
    const auto& arr = detail::array_field(doc, "components", "document");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      std::string where = "components[" + std::to_string(i) + "]";
      ComponentPolicy c{detail::rational_value(detail::field(arr[i], "availability", where), where), {}};
      const auto& states = detail::array_field(arr[i], "states", where);
      for (std::size_t k = 0; k < states.size(); ++k) c.states.push_back(policy(states[k], where));
      d.components.push_back(std::move(c));
    }
  }
  const auto& rules = detail::array_field(doc, "rules", "document");
  for (std::size_t i = 0; i < rules.size(); ++i) {
    std::string where = "rules[" + std::to_string(i) + "]";
    RuleEntry r;
    r.state = detail::string_field(rules[i], "state", where);
    if (auto it = rules[i].find("memory"); it != rules[i].end() && !it->is_null())
      r.memory = std::make_pair(detail::string_field(*it, "error", where), detail::integer_field(*it, "cost", where));
    r.actions = detail::distribution_from(detail::field(rules[i], "actions", where), where);
    d.rules.push_back(std::move(r));
  }
  return d;
}

inline SchedulerDocument read_scheduler(const std::string& text) {
  return scheduler_from_json(detail::parse_json(text));
}

}  // namespace resil
