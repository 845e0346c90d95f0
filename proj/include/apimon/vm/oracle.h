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

// Ground truth for relevant calls, computed from machine semantics alone:
// real CALL/RET frames per thread, the true execution-unit pool, and the
// module of each call site. Shares nothing with the monitor's blacklist or
// shadow stack.

#ifndef APIMON_VM_ORACLE_H_
#define APIMON_VM_ORACLE_H_

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "apimon/trace_record.h"
#include "apimon/vm/machine.h"
#include "apimon/vm/scenario.h"

namespace apimon::vm {

class GroundTruth final : public EventSink, public StepObserver {
 public:
  explicit GroundTruth(const Scenario& scenario);

  void on_event(const VmEvent& ev, MachineAccess& machine) override;
  void on_step(const StepInfo& step, MachineAccess& machine) override;

  const std::vector<TraceRecord>& records() const { return records_; }

 private:
  struct Frame {
    Addr slot = 0;
    Addr ra = 0;
    bool from_program = false;
    bool relevant = false;
    std::string module;
    std::string symbol;
  };
  struct PendingSyscall {
    bool relevant = false;
    Addr ra = 0;
    Addr esp = 0;
  };
  struct ApiName {
    std::string module;
    std::string symbol;
  };

  bool monitored(Pid pid, Tid tid) const;
  const ApiName* api_at(MachineAccess& machine, Pid pid, Addr a);
  bool program_code(MachineAccess& machine, Pid pid, Addr a) const;
  void emit(TraceRecord r);

  const Scenario& scenario_;
  std::set<Pid> processes_;
  std::set<ThreadKey> threads_;
  std::map<ThreadKey, std::vector<Frame>> frames_;
  std::map<ThreadKey, PendingSyscall> syscalls_;
  std::map<const image::ModuleImage*, std::map<Addr, ApiName>> api_cache_;
  std::vector<TraceRecord> records_;
};

struct OracleRun {
  std::vector<TraceRecord> records;
  RunReport report;
};

OracleRun ground_truth_trace(const Scenario& scenario, std::uint32_t quantum,
                             std::uint64_t budget);

}  // namespace apimon::vm

#endif  // APIMON_VM_ORACLE_H_
