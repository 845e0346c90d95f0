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

#include <gtest/gtest.h>

#include "apimon/cli/trace_io.h"
#include "apimon/monitor/monitor.h"
#include "apimon/vm/machine.h"
#include "apimon/vm/oracle.h"
#include "support/harness.h"
#include "support/scenario_gen.h"

namespace apimon {
namespace {

constexpr std::uint32_t kSeeds = 150;

vm::Scenario random_scenario(std::uint32_t seed) {
  return vm::parse_scenario(testing::generate_scenario(seed));
}

TEST(Generator, SameSeedSameScenario) {
  for (std::uint32_t seed = 0; seed < 20; ++seed)
    EXPECT_EQ(testing::generate_scenario(seed), testing::generate_scenario(seed));
  EXPECT_NE(testing::generate_scenario(1), testing::generate_scenario(2));
}

TEST(Property, StrategiesProduceEquivalentTraces) {
  monitor::MonitorConfig a{monitor::Strategy::kExitPoints, monitor::EspCheck::kExact, false};
  monitor::MonitorConfig b{monitor::Strategy::kReturnAddress, monitor::EspCheck::kExact, false};
  for (std::uint32_t seed = 0; seed < kSeeds; ++seed) {
    vm::Scenario s = random_scenario(seed);
    auto ra = testing::run(s, a), rb = testing::run(s, b);
    auto diff = cli::diff_traces(ra.records, rb.records, cli::DiffMode::kFull);
    EXPECT_TRUE(diff.empty()) << "seed " << seed << "\n" << cli::format_diff(diff);
    EXPECT_EQ(ra.stats, rb.stats) << "seed " << seed;
  }
}

TEST(Property, EveryConfigurationMatchesGroundTruth) {
  for (std::uint32_t seed = 0; seed < kSeeds; ++seed) {
    vm::Scenario s = random_scenario(seed);
    auto truth = vm::ground_truth_trace(s, s.quantum, s.budget);
    for (const auto& cfg : testing::all_configs()) {
      auto out = testing::run(s, cfg);
      auto diff = cli::diff_traces(out.records, truth.records, cli::DiffMode::kIdentity);
      EXPECT_TRUE(diff.empty()) << "seed " << seed << " " << testing::describe(cfg) << "\n"
                                << cli::format_diff(diff);
      EXPECT_EQ(out.report.status, vm::RunReport::Status::kHalted) << "seed " << seed;
      EXPECT_TRUE(out.report.faults.empty()) << "seed " << seed;
    }
  }
}

bool closes(const TraceRecord& entry, const TraceRecord& exit) {
  return entry.module == exit.module && entry.symbol == exit.symbol &&
         entry.ordinal == exit.ordinal && entry.ra == exit.ra && entry.esp == exit.esp;
}

// Shadow stacks stay ordered, records come only from monitored threads and
// every exit closes an entry logged earlier on the same thread.
TEST(Property, RunTimeInvariants) {
  for (std::uint32_t seed = 0; seed < kSeeds; ++seed) {
    vm::Scenario s = random_scenario(seed);
    for (const auto& cfg : testing::all_configs()) {
      vm::Machine machine(s, s.quantum);
      monitor::Monitor mon(s.prototypes, s.root(), cfg);
      std::map<ThreadKey, std::vector<TraceRecord>> open;
      int violations = 0;
      mon.set_record_callback([&](const TraceRecord& r) {
        if (!mon.pool().monitored(r.pid, r.tid)) ++violations;
        const monitor::ShadowStack* ss = mon.shadow_stack(r.pid, r.tid);
        if (ss && !ss->monotonic()) ++violations;
        auto& stack = open[{r.pid, r.tid}];
        if (r.kind == RecordKind::kApiEntry || r.kind == RecordKind::kSyscallEnter) {
          stack.push_back(r);
          return;
        }
        while (!stack.empty() && !closes(stack.back(), r)) stack.pop_back();
        if (stack.empty()) ++violations;
        else stack.pop_back();
      });
      machine.add_sink(&mon);
      machine.run(s.budget);
      EXPECT_EQ(violations, 0) << "seed " << seed << " " << testing::describe(cfg);
    }
  }
}

}  // namespace
}  // namespace apimon
