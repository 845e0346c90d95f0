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

// Deterministic micro-VM. Threads of all processes are scheduled
// round-robin, `quantum` instructions per slice, in creation order.
//
// Instrumentation contract:
//  * a BreakpointHit is delivered before the instruction at a hooked address
//    executes; hooks never alter memory, so code reads see original bytes;
//  * SYSCALL raises SyscallEnter, then any kernel-side events, then
//    SyscallExit (omitted when the calling thread terminated itself);
//  * events reach sinks serially, in execution order.
//
// Kernel services (ordinal in EAX, stack arguments from ESP+4):
//   1  create thread (target pid, entry, OUT tid pointer)
//   2  terminate thread (tid, 0 = self)
//   3  create process (pid of a dormant scenario process)
//   4  load module (pointer to module name)
//   5  unload module (pointer to module name)
//   >=100 inert, EAX = 0

#ifndef APIMON_VM_MACHINE_H_
#define APIMON_VM_MACHINE_H_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "apimon/image.h"
#include "apimon/types.h"
#include "apimon/vm/events.h"
#include "apimon/vm/isa.h"
#include "apimon/vm/memory.h"
#include "apimon/vm/scenario.h"

namespace apimon::vm {

inline constexpr std::uint32_t kSysCreateThread = 1;
inline constexpr std::uint32_t kSysTerminateThread = 2;
inline constexpr std::uint32_t kSysCreateProcess = 3;
inline constexpr std::uint32_t kSysLoadModule = 4;
inline constexpr std::uint32_t kSysUnloadModule = 5;
inline constexpr std::uint32_t kFirstInertSyscall = 100;

inline constexpr std::uint32_t kStatusSuccess = 0;
inline constexpr std::uint32_t kStatusUnsuccessful = 0xc0000001;
inline constexpr std::uint32_t kStatusAccessViolation = 0xc0000005;
inline constexpr std::uint32_t kStatusInvalidCid = 0xc000000b;
inline constexpr std::uint32_t kStatusInvalidParameter = 0xc000000d;
inline constexpr std::uint32_t kStatusNoMemory = 0xc0000017;
inline constexpr std::uint32_t kStatusInvalidService = 0xc000001c;

// What instrumentation may do from inside a callback.
class MachineAccess {
 public:
  virtual ~MachineAccess() = default;
  virtual void add_hook(Addr a) = 0;
  virtual bool has_hook(Addr a) const = 0;
  virtual const MemoryView* memory(Pid pid) const = 0;
  virtual const image::ModuleSet* modules(Pid pid) const = 0;
};

class EventSink {
 public:
  virtual ~EventSink() = default;
  virtual void on_event(const VmEvent& ev, MachineAccess& machine) = 0;
};

// Per-instruction execution facts, delivered after the instruction ran.
struct StepInfo {
  Pid pid = 0;
  Tid tid = 0;
  Addr site = 0;
  const Instruction* insn = nullptr;
  Registers before;
  Registers after;
  std::optional<std::uint32_t> popped;  // value popped by RET
  bool faulted = false;
};

class StepObserver {
 public:
  virtual ~StepObserver() = default;
  virtual void on_step(const StepInfo& step, MachineAccess& machine) = 0;
};

struct ThreadState {
  Tid tid = 0;
  Pid pid = 0;
  Registers regs;
  AddrRange stack;
  bool alive = true;
};

struct RunReport {
  enum class Status { kHalted, kBudgetExhausted };
  Status status = Status::kHalted;
  std::uint64_t instructions = 0;
  std::vector<std::string> faults;
};

class Machine final : public MachineAccess {
 public:
  // `scenario` must outlive the machine. Throws LoadError for layouts the
  // parser cannot rule out on its own.
  Machine(const Scenario& scenario, std::uint32_t quantum);

  Machine(const Machine&) = delete;
  Machine& operator=(const Machine&) = delete;

  void add_sink(EventSink* sink) { sinks_.push_back(sink); }
  void add_observer(StepObserver* observer) { observers_.push_back(observer); }

  void add_hook(Addr a) override { hooks_.insert(a); }
  bool has_hook(Addr a) const override { return hooks_.count(a) != 0; }
  const MemoryView* memory(Pid pid) const override;
  const image::ModuleSet* modules(Pid pid) const override;

  // Runs until every thread has ended or `budget` instructions in total
  // have executed (counting earlier calls).
  RunReport run(std::uint64_t budget);

  std::uint64_t clock() const { return clock_; }
  const ThreadState* thread(Tid tid) const;
  std::vector<Tid> thread_ids() const { return run_queue_; }
  Memory* mutable_memory(Pid pid);
  const std::set<Addr>& hooks() const { return hooks_; }

 private:
  struct Process {
    const ProcessDecl* decl = nullptr;
    Memory memory;
    image::ModuleSet modules;
    std::uint32_t next_slot = 0;
    bool started = false;
  };

  void emit(const VmEvent& ev);
  void start_process(Process& p, bool emit_events, Pid creator_pid, Tid creator_tid);
  void map_module(Process& p, const ModuleDecl& m);
  std::optional<Tid> spawn_thread(Process& p, Addr entry);
  void step(ThreadState& t);
  void end_thread(ThreadState& t, const std::string& fault);
  bool push(ThreadState& t, std::uint32_t value);
  std::uint32_t reg(const ThreadState& t, Reg r) const;
  void set_reg(ThreadState& t, Reg r, std::uint32_t v);
  std::uint32_t value_of(const ThreadState& t, const Operand& o) const;
  Addr effective(const ThreadState& t, const Operand& o) const;

  std::uint32_t syscall(ThreadState& t);
  std::uint32_t sys_create_thread(ThreadState& t, Pid target, Addr entry, Addr out);
  std::uint32_t sys_terminate_thread(ThreadState& t, Tid target);
  std::uint32_t sys_create_process(ThreadState& t, Pid target);
  std::uint32_t sys_load_module(ThreadState& t, Addr name_ptr);
  std::uint32_t sys_unload_module(ThreadState& t, Addr name_ptr);
  std::optional<std::string> read_name(Pid pid, Addr a) const;

  const Scenario& scenario_;
  std::uint32_t quantum_;
  std::map<Pid, Process> processes_;
  std::map<Tid, ThreadState> threads_;
  std::vector<Tid> run_queue_;
  std::size_t cursor_ = 0;
  std::set<Addr> hooks_;
  std::vector<EventSink*> sinks_;
  std::vector<StepObserver*> observers_;
  std::uint64_t clock_ = 0;
  Tid next_tid_ = 1;
  bool initial_loads_sent_ = false;
  std::vector<std::string> faults_;
};

}  // namespace apimon::vm

#endif  // APIMON_VM_MACHINE_H_
