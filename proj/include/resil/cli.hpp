#pragma once

#include "resil/analyze.hpp"
#include "resil/components.hpp"
#include "resil/io.hpp"
#include "resil/lp.hpp"
#include "resil/model.hpp"
#include "resil/simulate.hpp"
#include "resil/synth.hpp"
#include "resil/transform.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace resil::cli {

enum ExitCode : int {
  kOk = 0,
  kNotResilient = 1,
  kInvalidInput = 2,
  kParseError = 3,
  kUsageError = 4,
  kInternalError = 5,
};

class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

class InvalidInput : public std::runtime_error {
 public:
  explicit InvalidInput(const std::string& what) : std::runtime_error(what) {}
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw UsageError("cannot write " + path);
}

inline Rational parse_threshold(const std::string& text) {
  auto q = parse_rational(text);
  if (!q) throw UsageError("threshold \"" + text + "\" is not a fraction or decimal");
  if (*q <= 0 || *q > 1) throw UsageError("threshold must lie in (0,1], got " + text);
  return *q;
}

inline std::string format_violations(const ValidationReport& r) {
  std::ostringstream out;
  for (const auto& v : r.violations) {
    out << v.rule << ":";
    for (const auto& w : v.where) out << " " << w;
    out << ": " << v.message << "\n";
  }
  return out.str();
}

/// Loads and validates a model; prints the report and throws InvalidInput on failure.
inline MdpWithRepair load_valid_model(const std::string& path, std::ostream& out) {
  auto m = read_model(read_file(path));
  auto report = validate(m);
  if (!report.ok()) {
    out << "invalid model\n" << format_violations(report);
    throw InvalidInput("model failed validation");
  }
  return m;
}

inline int cmd_validate(const std::string& model_path, std::ostream& out) {
  auto m = read_model(read_file(model_path));
  auto report = validate(m);
  if (!report.ok()) {
    out << "invalid model\n" << format_violations(report);
    return kInvalidInput;
  }
  out << "valid model: " << m.size() << " states, " << m.errors().size() << " error states\n";
  return kOk;
}

struct SynthesizeOptions {
  std::string model;
  std::string threshold;
  std::int64_t cost_bound = 0;
  std::string out;
  std::string dump_lp;
  std::string dump_components;
};

inline int cmd_synthesize(const SynthesizeOptions& o, std::ostream& out) {
  const Rational threshold = parse_threshold(o.threshold);
  if (o.cost_bound < 0) throw UsageError("cost bound must be nonnegative");
  auto m = load_valid_model(o.model, out);
  auto r = synthesize(m, threshold, o.cost_bound);
  if (!o.dump_lp.empty()) write_file(o.dump_lp, to_lp_text(r.resiliency_lp, "resiliency program"));
  if (!o.dump_components.empty()) write_file(o.dump_components, format_components(*r.transformed, *r.components));
  out << "transformed states: " << r.transformed->size() << "\n";
  out << "components: " << r.components->size() << "\n";
  if (!r.feasible) {
    out << "no resilient scheduler\n";
    return kNotResilient;
  }
  out << "availability: " << to_string(r.availability) << " (" << to_decimal(r.availability) << ")\n";
  out << "components used: " << r.scheduler.chosen.size() << "\n";
  if (!o.out.empty()) {
    write_file(o.out, write_scheduler(make_document(r, threshold)));
    out << "scheduler written to " << o.out << "\n";
  }
  return kOk;
}

struct SchedulerInput {
  MdpWithRepair model;
  SchedulerDocument doc;
  FiniteMemoryScheduler scheduler;
};

inline SchedulerInput load_scheduler(const std::string& model_path, const std::string& scheduler_path,
                                     std::ostream& out) {
  SchedulerInput in;
  in.model = load_valid_model(model_path, out);
  in.doc = read_scheduler(read_file(scheduler_path));
  try {
    in.scheduler = finite_memory_from(in.model, in.doc);
  } catch (const std::invalid_argument& e) {
    throw InvalidInput(e.what());
  }
  return in;
}

struct VerifyOptions {
  std::string model;
  std::string scheduler;
  std::optional<std::string> threshold;
  std::optional<std::int64_t> cost_bound;
};

inline int cmd_verify(const VerifyOptions& o, std::ostream& out) {
  std::optional<Rational> threshold;
  if (o.threshold) threshold = parse_threshold(*o.threshold);
  if (o.cost_bound && *o.cost_bound < 0) throw UsageError("cost bound must be nonnegative");
  auto in = load_scheduler(o.model, o.scheduler, out);
  if (!threshold) {
    if (in.doc.threshold <= 0 || in.doc.threshold > 1) throw InvalidInput("scheduler threshold outside (0,1]");
    threshold = in.doc.threshold;
  }
  const std::int64_t bound = o.cost_bound.value_or(in.doc.cost_bound);
  if (bound < 0) throw InvalidInput("scheduler cost bound is negative");
  in.scheduler.cost_bound = bound;
  auto mt = transform(in.model, bound);
  VerificationReport report;
  try {
    report = verify_resilient(mt, lift_scheduler(mt, in.scheduler), *threshold);
  } catch (const std::invalid_argument& e) {
    throw InvalidInput(e.what());
  } catch (const IncompleteScheduler& e) {
    throw InvalidInput(e.what());
  }
  out << format_report(mt, report);
  return report.ok ? kOk : kNotResilient;
}

struct SimulateOptions {
  std::string model;
  std::string scheduler;
  std::uint64_t steps = 100000;
  std::uint64_t trials = 100;
  std::uint64_t seed = 1;
  std::size_t trace = 0;
};

inline int cmd_simulate(const SimulateOptions& o, std::ostream& out) {
  auto in = load_scheduler(o.model, o.scheduler, out);
  SimulationStats stats;
  try {
    stats = simulate(in.model, in.scheduler, o.steps, o.trials, o.seed, o.trace);
  } catch (const IncompleteScheduler& e) {
    throw InvalidInput(e.what());
  }
  out << "seed: " << o.seed << "\n" << format_simulation(stats, o.trace > 0);
  return kOk;
}

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synthesis and verification of resilient schedulers for MDPs with repair", "resil"};
  app.require_subcommand(1);

  auto* validate_cmd = app.add_subcommand("validate", "Check a model document");
  std::string validate_model;
  validate_cmd->add_option("model", validate_model, "Model file")->required();

  SynthesizeOptions syn;
  auto* synth_cmd = app.add_subcommand("synthesize", "Compute an optimal resilient scheduler");
  synth_cmd->add_option("model", syn.model, "Model file")->required();
  synth_cmd->add_option("--threshold", syn.threshold, "Repair success probability in (0,1]")->required();
  synth_cmd->add_option("--cost-bound", syn.cost_bound, "Repair cost budget R")->required();
  synth_cmd->add_option("--out", syn.out, "Scheduler document to write");
  synth_cmd->add_option("--dump-lp", syn.dump_lp, "Write the resiliency program in LP text form");
  synth_cmd->add_option("--dump-components", syn.dump_components, "Write the component set");

  VerifyOptions ver;
  auto* verify_cmd = app.add_subcommand("verify", "Check a scheduler document for resilience");
  verify_cmd->add_option("model", ver.model, "Model file")->required();
  verify_cmd->add_option("scheduler", ver.scheduler, "Scheduler file")->required();
  verify_cmd->add_option("--threshold", ver.threshold, "Threshold (default: from the scheduler)");
  verify_cmd->add_option("--cost-bound", ver.cost_bound, "Cost bound (default: from the scheduler)");

  SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo runs of a scheduler");
  sim_cmd->add_option("model", sim.model, "Model file")->required();
  sim_cmd->add_option("scheduler", sim.scheduler, "Scheduler file")->required();
  sim_cmd->add_option("--steps", sim.steps, "Steps per trial")->capture_default_str();
  sim_cmd->add_option("--trials", sim.trials, "Number of trials")->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  sim_cmd->add_option("--trace", sim.trace, "Print the first N steps of every trial");

  std::vector<const char*> argv{"resil"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*validate_cmd) return cmd_validate(validate_model, out);
    if (*synth_cmd) return cmd_synthesize(syn, out);
    if (*verify_cmd) return cmd_verify(ver, out);
    if (*sim_cmd) return cmd_simulate(sim, out);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kParseError;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const InvalidInput& e) {
    err << "invalid input: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const InvalidModel& e) {
    err << "invalid model\n" << format_violations(e.report);
    return kInvalidInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
  return kUsageError;
}

}  // namespace resil::cli
