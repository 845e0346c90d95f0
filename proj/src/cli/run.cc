// Copyright 2026 The apimon Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "apimon/cli/run.h"

#include <fstream>
#include <ostream>

#include "apimon/cli/trace_io.h"
#include "apimon/error.h"
#include "apimon/vm/oracle.h"

namespace apimon::cli {
namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
  if (!f.flush()) throw Error("cannot write " + path.string());
}

std::string trace_text(const std::vector<TraceRecord>& records) {
  std::string out;
  for (const TraceRecord& r : records) {
    out += to_json_line(r);
    out += '\n';
  }
  return out;
}

}  // namespace

RunOutcome run_scenario(const vm::Scenario& scenario, const monitor::MonitorConfig& config,
                        std::uint32_t quantum, std::uint64_t budget) {
  vm::Machine machine(scenario, quantum);
  monitor::Monitor mon(scenario.prototypes, scenario.root(), config);
  machine.add_sink(&mon);
  RunOutcome out;
  out.report = machine.run(budget);
  out.records = mon.records();
  out.counters = mon.counters();
  out.stats = compute_stats(out.records,
                            {out.counters.syscalls_internal, out.counters.dll_internal_tail,
                             out.counters.dll_internal_normal});
  return out;
}

int run_cli(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    vm::Scenario scenario = vm::load_scenario_file(config.scenario);
    std::uint32_t quantum = config.quantum.value_or(scenario.quantum);
    std::uint64_t budget = config.budget.value_or(scenario.budget);
    RunOutcome run = run_scenario(scenario, config.monitor, quantum, budget);

    std::string trace = trace_text(run.records);
    if (config.trace_path) write_file(*config.trace_path, trace);
    else out << trace;
    if (config.stats_path) write_file(*config.stats_path, format_stats(run.stats));
    if (config.oracle_path) {
      vm::OracleRun truth = vm::ground_truth_trace(scenario, quantum, budget);
      write_file(*config.oracle_path, trace_text(truth.records));
    }
    for (const std::string& f : run.report.faults) err << "fault: " << f << '\n';
    if (run.report.status == vm::RunReport::Status::kBudgetExhausted) {
      err << "instruction budget of " << budget << " exhausted\n";
      return kExitBudget;
    }
    return kExitHalted;
  } catch (const std::exception& e) {
    err << config.scenario.string() << ": " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace apimon::cli
