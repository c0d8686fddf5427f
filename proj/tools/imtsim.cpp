/*
 * Copyright 2026 The imtsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// imtsim command-line driver.
//
// Exit codes: 0 success, 1 invalid input or capacity failure, 2 I/O failure.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "imtsim/imtsim.hpp"

namespace {

using namespace imtsim;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitIo = 2;

struct Options {
  std::string config = "bert-base";
  std::string model;
  std::string dataflow;
  std::string policy;
  std::string residency;
  std::string axis;
  std::string output;
  std::vector<double> sigmas;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  unsigned threads = 0;
};

RunConfig load(const Options& o) {
  RunConfig cfg = parse_config(o.config);
  if (!o.model.empty()) {
    auto m = model_preset(o.model);
    if (!m) throw ConfigError("--model: unknown preset '" + o.model + "'");
    cfg.spec.model = *m;
  }
  if (!o.dataflow.empty()) cfg.spec.dataflow = DataflowConfig::parse(o.dataflow);
  if (!o.policy.empty()) cfg.spec.policy = parse_policy(o.policy);
  if (!o.residency.empty()) cfg.spec.residency = parse_residency(o.residency);
  if (o.seed_set) cfg.seed = cfg.funcsim.seed = o.seed;
  if (!o.sigmas.empty()) cfg.funcsim.sigmas = o.sigmas;
  if (o.trials > 0) cfg.funcsim.trials = o.trials;
  if (!o.axis.empty()) {
    const auto eq = o.axis.find('=');
    if (eq == std::string::npos) throw ConfigError("--axis: expected NAME=v1,v2,...");
    SweepRequest s;
    s.axis = parse_sweep_axis(o.axis.substr(0, eq));
    std::stringstream vs(o.axis.substr(eq + 1));
    for (std::string v; std::getline(vs, v, ',');) {
      if (!v.empty()) s.values.push_back(v);
    }
    cfg.sweep = s;
  }
  cfg.validate();
  return cfg;
}

// Writes to `path`, or to stdout when it is empty.
template <class F>
void emit(const std::string& path, F&& write) {
  if (path.empty()) {
    write(std::cout);
    std::cout.flush();
    if (!std::cout) throw std::ios_base::failure("cannot write to stdout");
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot open '" + path + "' for writing");
  write(out);
  out.flush();
  if (!out) throw std::ios_base::failure("cannot write '" + path + "'");
}

std::string pick(const std::string& cli, const std::string& cfg) { return cli.empty() ? cfg : cli; }

void warn(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

int cmd_run(const Options& o) {
  const RunConfig cfg = load(o);
  const RunResult r = run_detailed(cfg.spec);
  warn(r.report.warnings);
  emit(pick(o.output, cfg.output.report), [&](std::ostream& os) { os << to_json(r.report).dump(2) << "\n"; });
  if (!cfg.output.trace.empty()) {
    emit(cfg.output.trace, [&](std::ostream& os) { write_trace(os, r.timeline); });
  }
  return kExitOk;
}

int cmd_trace(const Options& o) {
  const RunConfig cfg = load(o);
  const RunResult r = run_detailed(cfg.spec);
  warn(r.report.warnings);
  emit(pick(o.output, cfg.output.trace), [&](std::ostream& os) { write_trace(os, r.timeline); });
  return kExitOk;
}

int cmd_sweep(const Options& o) {
  const RunConfig cfg = load(o);
  if (!cfg.sweep) throw ConfigError("sweep: no axis given (use --axis or a \"sweep\" block in the config)");
  const auto points = sweep(cfg.spec, cfg.sweep->axis, cfg.sweep->values, o.threads);
  int failed = 0;
  for (const auto& p : points) {
    if (!p.error.empty()) {
      std::cerr << "error: " << to_string(cfg.sweep->axis) << "=" << p.value << ": " << p.error << "\n";
      ++failed;
    }
  }
  emit(pick(o.output, cfg.output.csv), [&](std::ostream& os) { write_sweep_csv(os, points); });
  return failed == 0 ? kExitOk : kExitInvalid;
}

int cmd_funcsim(const Options& o) {
  const RunConfig cfg = load(o);
  const auto rows = variation_sweep(cfg.funcsim, cfg.spec.hardware.projection);
  emit(pick(o.output, cfg.output.csv), [&](std::ostream& os) { write_variation_csv(os, rows); });
  return kExitOk;
}

int cmd_validate(const Options& o) {
  const RunConfig cfg = load(o);
  HardwareSpec eff;
  const Mapping m = map_model(cfg.spec.hardware, cfg.spec.model, cfg.spec.policy, cfg.spec.residency, &eff);
  warn(m.warnings);
  std::cerr << "capacity: " << m.capacity.summary() << "\n";
  emit(o.output, [&](std::ostream& os) { os << to_json(m.capacity).dump(2) << "\n"; });
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"imtsim: latency, energy and accuracy model of a hybrid in-memory transformer accelerator"};
  app.require_subcommand(1);
  Options o;

  auto common = [&o](CLI::App* sub) {
    sub->add_option("-c,--config", o.config, "Config file or preset name")->capture_default_str();
    sub->add_option("-m,--model", o.model, "Model preset (bert-base, bert-base-squad, bert-large, bert-large-squad)");
    sub->add_option("-d,--dataflow", o.dataflow, "traditional | seqblock:<SB>");
    sub->add_option("-p,--policy", o.policy, "hybrid | nvm_all | simd_dynamic");
    sub->add_option("-r,--residency", o.residency, "auto | spatial | per_layer_replay");
    sub->add_option("-o,--output", o.output, "Output file (default: stdout)");
    sub->add_option_function<std::uint64_t>(
        "--seed", [&o](std::uint64_t s) { o.seed = s, o.seed_set = true; }, "Random seed");
  };

  auto* run = app.add_subcommand("run", "Simulate one configuration and print the JSON report");
  auto* sweep = app.add_subcommand("sweep", "Simulate a parameter sweep and print CSV");
  auto* trace = app.add_subcommand("trace", "Print the schedule timeline as JSON lines");
  auto* funcsim = app.add_subcommand("funcsim", "Monte-Carlo crossbar error sweep, printed as CSV");
  auto* validate = app.add_subcommand("validate", "Check that the model fits the hardware");
  for (auto* s : {run, sweep, trace, funcsim, validate}) common(s);
  sweep->add_option("-a,--axis", o.axis, "Sweep axis and values, e.g. SL=64,128,256,512");
  sweep->add_option("-j,--threads", o.threads, "Worker threads (0: hardware concurrency)");
  funcsim->add_option("--sigmas", o.sigmas, "Relative conductance variation values")->delimiter(',');
  funcsim->add_option("--trials", o.trials, "Trials per sigma");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*run) return cmd_run(o);
    if (*sweep) return cmd_sweep(o);
    if (*trace) return cmd_trace(o);
    if (*funcsim) return cmd_funcsim(o);
    if (*validate) return cmd_validate(o);
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const imtsim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}
