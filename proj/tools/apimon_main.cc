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

#include <CLI11.hpp>
#include <iostream>

#include "apimon/cli/run.h"

int main(int argc, char** argv) {
  using apimon::monitor::EspCheck;
  using apimon::monitor::Strategy;

  CLI::App app{"Trace relevant API calls and syscalls of a micro-VM scenario."};
  apimon::cli::RunConfig config;
  std::string strategy = "b";
  std::string esp_check = "exact";
  std::string trace, stats, oracle;

  app.add_option("--scenario", config.scenario, "scenario file")->required();
  app.add_option("--strategy", strategy, "exit strategy: a (exit points) or b (return address)")
      ->check(CLI::IsMember({"a", "b", "A", "B"}));
  app.add_option("--esp-check", esp_check, "exit ESP test for return-address hooks")
      ->check(CLI::IsMember({"exact", "relaxed"}));
  app.add_flag("--exit-recheck", config.monitor.exit_recheck,
               "strategy a: recheck relevance at exit points");
  app.add_option("--quantum", config.quantum, "instructions per scheduling slice")
      ->check(CLI::PositiveNumber);
  app.add_option("--budget", config.budget, "instruction budget");
  app.add_option("--out", trace, "trace file (JSON Lines); stdout if omitted");
  app.add_option("--stats", stats, "statistics file (key=value)");
  app.add_option("--oracle", oracle, "also write the ground-truth trace here");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : apimon::cli::kExitError;
  }

  config.monitor.strategy =
      (strategy == "a" || strategy == "A") ? Strategy::kExitPoints : Strategy::kReturnAddress;
  config.monitor.esp_check = esp_check == "relaxed" ? EspCheck::kRelaxed : EspCheck::kExact;
  if (!trace.empty()) config.trace_path = trace;
  if (!stats.empty()) config.stats_path = stats;
  if (!oracle.empty()) config.oracle_path = oracle;
  return apimon::cli::run_cli(config, std::cout, std::cerr);
}
