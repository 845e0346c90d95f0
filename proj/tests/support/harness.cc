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

#include "harness.h"

#include <algorithm>

namespace apimon::testing {

std::filesystem::path scenario_dir() { return APIMON_SCENARIO_DIR; }

std::vector<std::filesystem::path> bundled_scenarios() {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(scenario_dir()))
    if (e.path().extension() == ".scn") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

vm::Scenario load_bundled(const std::string& stem) {
  return vm::load_scenario_file(scenario_dir() / (stem + ".scn"));
}

std::vector<monitor::MonitorConfig> all_configs() {
  std::vector<monitor::MonitorConfig> out;
  for (auto s : {monitor::Strategy::kExitPoints, monitor::Strategy::kReturnAddress})
    for (auto e : {monitor::EspCheck::kExact, monitor::EspCheck::kRelaxed})
      out.push_back({s, e, false});
  return out;
}

std::string describe(const monitor::MonitorConfig& c) {
  std::string out = c.strategy == monitor::Strategy::kExitPoints ? "a" : "b";
  out += c.esp_check == monitor::EspCheck::kExact ? "/exact" : "/relaxed";
  if (c.exit_recheck) out += "/recheck";
  return out;
}

cli::RunOutcome run(const vm::Scenario& s, const monitor::MonitorConfig& c) {
  return cli::run_scenario(s, c, s.quantum, s.budget);
}

std::size_t count_kind(const std::vector<TraceRecord>& records, RecordKind kind) {
  return static_cast<std::size_t>(std::count_if(
      records.begin(), records.end(), [&](const TraceRecord& r) { return r.kind == kind; }));
}

}  // namespace apimon::testing
