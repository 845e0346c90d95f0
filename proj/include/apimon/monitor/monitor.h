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

// The monitoring core: hook placement on module load, shadow-stack entry
// and exit callbacks for both exit strategies, and syscall relevance.

#ifndef APIMON_MONITOR_MONITOR_H_
#define APIMON_MONITOR_MONITOR_H_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "apimon/monitor/pool.h"
#include "apimon/monitor/shadow_stack.h"
#include "apimon/proto.h"
#include "apimon/range_blacklist.h"
#include "apimon/trace_record.h"
#include "apimon/vm/machine.h"

namespace apimon::monitor {

enum class Strategy { kExitPoints, kReturnAddress };  // (a), (b)
enum class EspCheck { kExact, kRelaxed };

struct MonitorConfig {
  Strategy strategy = Strategy::kReturnAddress;
  EspCheck esp_check = EspCheck::kExact;
  // Strategy (a) only: decide relevance again when the call reaches an
  // exit point.
  bool exit_recheck = false;
};

struct MonitorCounters {
  std::uint64_t syscalls_internal = 0;
  std::uint64_t dll_internal_tail = 0;
  std::uint64_t dll_internal_normal = 0;
  // Entry hits whose return address could not be read.
  std::uint64_t unreadable_stack = 0;
  // Exit-hook hits that matched no shadow-stack entry or failed the ESP test.
  std::uint64_t spurious_exits = 0;
  // APIs observed through return-address hooks under strategy (a).
  std::uint64_t exit_hook_fallbacks = 0;
  // Calls logged late by the exit-time recheck.
  std::uint64_t late_records = 0;
};

inline constexpr int kMaxEpilogueWalk = 16;

class Monitor final : public vm::EventSink {
 public:
  using RecordCallback = std::function<void(const TraceRecord&)>;

  Monitor(const proto::PrototypeDb& db, Pid root, MonitorConfig config);

  void on_event(const vm::VmEvent& ev, vm::MachineAccess& machine) override;

  // Callbacks, exposed for direct driving.
  void on_module_load(vm::MachineAccess& machine, Pid pid,
                      const std::shared_ptr<const image::ModuleImage>& module);
  void on_module_unload(Pid pid, const image::ModuleImage& module);
  void on_entry(vm::MachineAccess& machine, Pid pid, Tid tid, const vm::Registers& regs,
                const std::shared_ptr<const ApiBinding>& api);
  void on_exit_b(vm::MachineAccess& machine, Pid pid, Tid tid, const vm::Registers& regs);
  void on_exit_a(vm::MachineAccess& machine, Pid pid, Tid tid, const vm::Registers& regs);
  void on_syscall_enter(vm::MachineAccess& machine, const vm::SyscallEnter& ev);
  void on_syscall_exit(vm::MachineAccess& machine, const vm::SyscallExit& ev);

  // Return address a wrapper would use if it returned from `site` with the
  // stack at `esp`, found by walking its epilogue.
  static std::optional<Addr> walk_epilogue(const vm::MemoryView& mem, Addr site, Addr esp);

  void set_record_callback(RecordCallback cb) { callback_ = std::move(cb); }

  const MonitorConfig& config() const { return config_; }
  const MonitorCounters& counters() const { return counters_; }
  const std::vector<TraceRecord>& records() const { return records_; }
  const ExecutionUnitPool& pool() const { return pool_; }
  const ShadowStack* shadow_stack(Pid pid, Tid tid) const;
  const image::RangeBlacklist* blacklist(Pid pid) const;
  std::shared_ptr<const ApiBinding> binding_at(Pid pid, Addr a) const;
  std::set<Addr> exit_hooks(Pid pid) const;
  std::set<Addr> return_hooks(Pid pid) const;

 private:
  struct PendingSyscall {
    Addr ra = 0;
    Addr esp = 0;
    const proto::Prototype* prototype = nullptr;
  };

  bool exit_accepted(Addr esp_now, const ShadowStackEntry& e) const;
  void emit(TraceRecord r);
  TraceRecord api_record(RecordKind kind, Pid pid, Tid tid, const ShadowStackEntry& e) const;
  void log_exit(Pid pid, Tid tid, const ShadowStackEntry& e, const vm::Registers& regs,
                const vm::MemoryView& mem);

  const proto::PrototypeDb& db_;
  MonitorConfig config_;
  ExecutionUnitPool pool_;
  std::map<Pid, image::RangeBlacklist> blacklists_;
  std::map<Pid, std::map<Addr, std::shared_ptr<const ApiBinding>>> entry_hooks_;
  std::map<Pid, std::set<Addr>> exit_hooks_;
  std::map<Pid, std::set<Addr>> return_hooks_;
  std::map<ThreadKey, ShadowStack> stacks_;
  std::map<ThreadKey, PendingSyscall> syscalls_;
  MonitorCounters counters_;
  std::vector<TraceRecord> records_;
  RecordCallback callback_;
};

}  // namespace apimon::monitor

#endif  // APIMON_MONITOR_MONITOR_H_
