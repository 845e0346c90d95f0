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

// Run orchestration: scenario in, trace and statistics out.

#ifndef APIMON_CLI_RUN_H_
#define APIMON_CLI_RUN_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "apimon/cli/stats.h"
#include "apimon/monitor/monitor.h"
#include "apimon/trace_record.h"
#include "apimon/vm/machine.h"
#include "apimon/vm/scenario.h"

namespace apimon::cli {

inline constexpr int kExitHalted = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitBudget = 2;

struct RunConfig {
  std::filesystem::path scenario;
  monitor::MonitorConfig monitor;
  // Unset values fall back to the scenario's own settings.
  std::optional<std::uint32_t> quantum;
  std::optional<std::uint64_t> budget;
  // Unset: trace goes to the `out` stream of run_cli.
  std::optional<std::filesystem::path> trace_path;
  std::optional<std::filesystem::path> stats_path;
  std::optional<std::filesystem::path> oracle_path;
};

struct RunOutcome {
  std::vector<TraceRecord> records;
  monitor::MonitorCounters counters;
  RunStats stats;
  vm::RunReport report;
};

RunOutcome run_scenario(const vm::Scenario& scenario, const monitor::MonitorConfig& config,
                        std::uint32_t quantum, std::uint64_t budget);

// Exit code: 0 when every thread ended, 2 when the budget ran out, 1 on
// unreadable or invalid input and unwritable output.
int run_cli(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace apimon::cli

#endif  // APIMON_CLI_RUN_H_
