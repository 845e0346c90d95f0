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

#include "apimon/vm/machine.h"

#include <cstdio>

#include "apimon/error.h"

namespace apimon::vm {
namespace {

std::string hex(Addr a) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08x", a);
  return buf;
}

constexpr std::size_t kMaxModuleName = 64;

}  // namespace

Machine::Machine(const Scenario& scenario, std::uint32_t quantum)
    : scenario_(scenario), quantum_(quantum == 0 ? 1 : quantum) {
  for (const ProcessDecl& decl : scenario.processes) {
    Process& p = processes_[decl.pid];
    p.decl = &decl;
    if (!decl.dormant) start_process(p, /*emit_events=*/false, 0, 0);
  }
}

const MemoryView* Machine::memory(Pid pid) const {
  auto it = processes_.find(pid);
  return it == processes_.end() || !it->second.started ? nullptr : &it->second.memory;
}

Memory* Machine::mutable_memory(Pid pid) {
  auto it = processes_.find(pid);
  return it == processes_.end() || !it->second.started ? nullptr : &it->second.memory;
}

const image::ModuleSet* Machine::modules(Pid pid) const {
  auto it = processes_.find(pid);
  return it == processes_.end() || !it->second.started ? nullptr : &it->second.modules;
}

const ThreadState* Machine::thread(Tid tid) const {
  auto it = threads_.find(tid);
  return it == threads_.end() ? nullptr : &it->second;
}

void Machine::emit(const VmEvent& ev) {
  for (EventSink* sink : sinks_) sink->on_event(ev, *this);
}

void Machine::map_module(Process& p, const ModuleDecl& m) {
  const image::ModuleImage& img = *m.image;
  p.memory.map(img.extent());
  for (const auto& [rva, insn] : m.code) {
    auto bytes = encode(insn);
    p.memory.write(img.base + rva, bytes);
  }
  for (const auto& [rva, data] : m.data) {
    p.memory.write(img.base + rva,
                   {reinterpret_cast<const std::uint8_t*>(data.data()), data.size()});
  }
}

void Machine::start_process(Process& p, bool emit_events, Pid creator_pid,
                            Tid creator_tid) {
  const ProcessDecl& decl = *p.decl;
  p.started = true;
  if (emit_events) emit(ProcessCreated{creator_pid, creator_tid, decl.pid});

  for (const std::string& name : decl.modules) {
    const ModuleDecl* m = scenario_.module(name);
    p.modules.add(m->image);
    map_module(p, *m);
    if (emit_events) emit(ModuleLoad{decl.pid, m->image});
  }
  p.memory.map(decl.stack_area);
  for (const AddrRange& r : decl.valid) p.memory.map(r);
  for (const auto& [at, bytes] : decl.init) {
    if (!p.memory.write(at, {reinterpret_cast<const std::uint8_t*>(bytes.data()),
                             bytes.size()}))
      throw LoadError("process " + std::to_string(decl.pid) +
                      ": initial data at " + hex(at) + " lies in unmapped memory");
  }
  for (Addr entry : decl.threads) {
    auto tid = spawn_thread(p, entry);
    if (!tid) throw LoadError("process " + std::to_string(decl.pid) + ": out of stack slots");
    if (emit_events) emit(ThreadCreated{creator_pid, creator_tid, decl.pid, *tid, entry});
  }
}

std::optional<Tid> Machine::spawn_thread(Process& p, Addr entry) {
  const ProcessDecl& decl = *p.decl;
  std::uint64_t lo = std::uint64_t{decl.stack_area.lo} +
                     std::uint64_t{p.next_slot} * decl.stack_slot;
  if (lo + decl.stack_slot > decl.stack_area.hi) return std::nullopt;
  ++p.next_slot;

  ThreadState t;
  t.tid = next_tid_++;
  t.pid = decl.pid;
  t.stack = {static_cast<Addr>(lo), static_cast<Addr>(lo + decl.stack_slot)};
  t.regs.eip = entry;
  // Returning from the entry function lands on address 0, which ends the
  // thread.
  t.regs.esp = t.stack.hi - 4;
  p.memory.write32(t.regs.esp, 0);
  Tid tid = t.tid;
  threads_.emplace(tid, t);
  run_queue_.push_back(tid);
  return tid;
}

RunReport Machine::run(std::uint64_t budget) {
  if (!initial_loads_sent_) {
    initial_loads_sent_ = true;
    for (auto& [pid, p] : processes_) {
      if (!p.started) continue;
      for (const std::string& name : p.decl->modules)
        emit(ModuleLoad{pid, scenario_.module(name)->image});
    }
  }

  RunReport report;
  while (true) {
    std::size_t n = run_queue_.size();
    std::optional<std::size_t> pick;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t idx = (cursor_ + i) % n;
      if (threads_.at(run_queue_[idx]).alive) {
        pick = idx;
        break;
      }
    }
    if (!pick) {
      report.status = RunReport::Status::kHalted;
      break;
    }
    if (clock_ >= budget) {
      report.status = RunReport::Status::kBudgetExhausted;
      break;
    }
    ThreadState& t = threads_.at(run_queue_[*pick]);
    for (std::uint32_t i = 0; i < quantum_ && t.alive && clock_ < budget; ++i) step(t);
    cursor_ = (*pick + 1) % run_queue_.size();
  }
  report.instructions = clock_;
  report.faults = faults_;
  return report;
}

void Machine::end_thread(ThreadState& t, const std::string& fault) {
  if (!t.alive) return;
  t.alive = false;
  if (!fault.empty()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "pid %u tid %u at %08x: ", t.pid, t.tid, t.regs.eip);
    faults_.push_back(buf + fault);
  }
  emit(ThreadTerminated{t.pid, t.tid, t.pid, t.tid});
}

std::uint32_t Machine::reg(const ThreadState& t, Reg r) const {
  switch (r) {
    case Reg::kEax: return t.regs.eax;
    case Reg::kEdx: return t.regs.edx;
    case Reg::kEsp: return t.regs.esp;
    case Reg::kR0: return t.regs.r[0];
    case Reg::kR1: return t.regs.r[1];
    case Reg::kR2: return t.regs.r[2];
    case Reg::kR3: return t.regs.r[3];
  }
  return 0;
}

void Machine::set_reg(ThreadState& t, Reg r, std::uint32_t v) {
  switch (r) {
    case Reg::kEax: t.regs.eax = v; break;
    case Reg::kEdx: t.regs.edx = v; break;
    case Reg::kEsp: t.regs.esp = v; break;
    case Reg::kR0: t.regs.r[0] = v; break;
    case Reg::kR1: t.regs.r[1] = v; break;
    case Reg::kR2: t.regs.r[2] = v; break;
    case Reg::kR3: t.regs.r[3] = v; break;
  }
}

std::uint32_t Machine::value_of(const ThreadState& t, const Operand& o) const {
  return o.kind == Operand::Kind::kReg ? reg(t, o.reg) : o.imm;
}

Addr Machine::effective(const ThreadState& t, const Operand& o) const {
  return o.has_base ? reg(t, o.reg) + o.imm : o.imm;
}

bool Machine::push(ThreadState& t, std::uint32_t value) {
  Addr esp = t.regs.esp - 4;
  if (t.regs.esp < t.stack.lo + 4) return false;
  if (!processes_.at(t.pid).memory.write32(esp, value)) return false;
  t.regs.esp = esp;
  return true;
}

void Machine::step(ThreadState& t) {
  Process& p = processes_.at(t.pid);
  Addr eip = t.regs.eip;

  if (hooks_.count(eip)) emit(BreakpointHit{t.pid, t.tid, eip, t.regs});

  const image::ModuleImage* m = p.modules.containing(eip);
  const Instruction* insn = nullptr;
  if (m && m->in_code(eip)) {
    const ModuleDecl* decl = scenario_.module(m->name);
    auto it = decl->code.find(eip - m->base);
    if (it != decl->code.end()) insn = &it->second;
  }
  ++clock_;
  if (!insn) {
    end_thread(t, "instruction fetch outside code");
    return;
  }

  StepInfo info;
  info.pid = t.pid;
  info.tid = t.tid;
  info.site = eip;
  info.insn = insn;
  info.before = t.regs;

  std::string fault;
  bool ended = false;
  Addr next = eip + kInsnSize;
  switch (insn->op) {
    case Opcode::kNop:
      t.regs.eip = next;
      break;
    case Opcode::kCall:
      if (!push(t, next)) {
        fault = "stack fault on CALL";
        break;
      }
      t.regs.eip = value_of(t, insn->a);
      break;
    case Opcode::kTailJmp:
      t.regs.eip = value_of(t, insn->a);
      break;
    case Opcode::kJz:
    case Opcode::kJnz: {
      bool zero = reg(t, insn->a.reg) == 0;
      bool taken = insn->op == Opcode::kJz ? zero : !zero;
      t.regs.eip = taken ? insn->b.imm : next;
      break;
    }
    case Opcode::kRet: {
      auto ra = p.memory.read32(t.regs.esp);
      if (!ra) {
        fault = "stack fault on RET";
        break;
      }
      info.popped = *ra;
      t.regs.esp += 4 + insn->a.imm;
      t.regs.eip = *ra;
      if (*ra == 0) ended = true;
      break;
    }
    case Opcode::kPush:
      if (!push(t, value_of(t, insn->a))) fault = "stack fault on PUSH";
      else t.regs.eip = next;
      break;
    case Opcode::kPop: {
      auto v = p.memory.read32(t.regs.esp);
      if (!v) {
        fault = "stack fault on POP";
        break;
      }
      t.regs.esp += 4;
      set_reg(t, insn->a.reg, *v);
      t.regs.eip = next;
      break;
    }
    case Opcode::kSet:
      set_reg(t, insn->a.reg, value_of(t, insn->b));
      t.regs.eip = next;
      break;
    case Opcode::kStore: {
      Addr at = effective(t, insn->a);
      bool ok;
      if (insn->b.kind == Operand::Kind::kBytes) {
        ok = p.memory.write(at, {reinterpret_cast<const std::uint8_t*>(insn->b.bytes.data()),
                                 insn->b.bytes.size()});
      } else {
        ok = p.memory.write32(at, value_of(t, insn->b));
      }
      if (!ok) fault = "write to invalid address " + hex(at);
      else t.regs.eip = next;
      break;
    }
    case Opcode::kLoad: {
      Addr at = effective(t, insn->b);
      auto v = p.memory.read32(at);
      if (!v) {
        fault = "read from invalid address " + hex(at);
        break;
      }
      set_reg(t, insn->a.reg, *v);
      t.regs.eip = next;
      break;
    }
    case Opcode::kSyscall: {
      std::uint32_t ordinal = t.regs.eax;
      Addr esp = t.regs.esp;
      emit(SyscallEnter{t.pid, t.tid, ordinal, esp, eip});
      std::uint32_t result = syscall(t);
      if (t.alive) {
        t.regs.eax = result;
        t.regs.eip = next;
        emit(SyscallExit{t.pid, t.tid, ordinal, result, esp, eip});
      }
      break;
    }
    case Opcode::kHalt:
      ended = true;
      break;
  }

  if (fault.empty() && !ended && t.alive &&
      (t.regs.esp < t.stack.lo || t.regs.esp > t.stack.hi))
    fault = "stack pointer " + hex(t.regs.esp) + " left the thread stack";

  info.faulted = !fault.empty();
  info.after = t.regs;
  for (StepObserver* o : observers_) o->on_step(info, *this);

  if (!fault.empty()) end_thread(t, fault);
  else if (ended) end_thread(t, "");
}

std::optional<std::string> Machine::read_name(Pid pid, Addr a) const {
  const Memory& mem = processes_.at(pid).memory;
  std::string out;
  for (std::size_t i = 0; i < kMaxModuleName; ++i) {
    std::uint8_t c;
    if (!mem.read(a + static_cast<Addr>(i), {&c, 1})) return std::nullopt;
    if (c == 0) return out;
    out.push_back(static_cast<char>(c));
  }
  return std::nullopt;
}

std::uint32_t Machine::syscall(ThreadState& t) {
  const Memory& mem = processes_.at(t.pid).memory;
  auto arg = [&](int i) { return mem.read32(t.regs.esp + 4 + 4 * i); };

  switch (t.regs.eax) {
    case kSysCreateThread: {
      auto pid = arg(0), entry = arg(1), out = arg(2);
      if (!pid || !entry || !out) return kStatusAccessViolation;
      return sys_create_thread(t, *pid, *entry, *out);
    }
    case kSysTerminateThread: {
      auto tid = arg(0);
      if (!tid) return kStatusAccessViolation;
      return sys_terminate_thread(t, *tid);
    }
    case kSysCreateProcess: {
      auto pid = arg(0);
      if (!pid) return kStatusAccessViolation;
      return sys_create_process(t, *pid);
    }
    case kSysLoadModule: {
      auto name = arg(0);
      if (!name) return kStatusAccessViolation;
      return sys_load_module(t, *name);
    }
    case kSysUnloadModule: {
      auto name = arg(0);
      if (!name) return kStatusAccessViolation;
      return sys_unload_module(t, *name);
    }
    default:
      return t.regs.eax >= kFirstInertSyscall ? kStatusSuccess : kStatusInvalidService;
  }
}

std::uint32_t Machine::sys_create_thread(ThreadState& t, Pid target, Addr entry,
                                         Addr out) {
  if (target == 0) target = t.pid;
  auto it = processes_.find(target);
  if (it == processes_.end() || !it->second.started) return kStatusInvalidCid;
  Process& p = it->second;
  const image::ModuleImage* m = p.modules.containing(entry);
  if (!m || !m->in_code(entry) || !m->flow.count(entry - m->base))
    return kStatusInvalidParameter;
  auto tid = spawn_thread(p, entry);
  if (!tid) return kStatusNoMemory;
  if (out != 0) processes_.at(t.pid).memory.write32(out, *tid);
  emit(ThreadCreated{t.pid, t.tid, target, *tid, entry});
  return kStatusSuccess;
}

std::uint32_t Machine::sys_terminate_thread(ThreadState& t, Tid target) {
  if (target == 0) target = t.tid;
  auto it = threads_.find(target);
  if (it == threads_.end() || !it->second.alive) return kStatusInvalidCid;
  ThreadState& victim = it->second;
  victim.alive = false;
  emit(ThreadTerminated{t.pid, t.tid, victim.pid, victim.tid});
  return kStatusSuccess;
}

std::uint32_t Machine::sys_create_process(ThreadState& t, Pid target) {
  auto it = processes_.find(target);
  if (it == processes_.end() || it->second.started || !it->second.decl->dormant)
    return kStatusInvalidCid;
  try {
    start_process(it->second, /*emit_events=*/true, t.pid, t.tid);
  } catch (const LoadError& e) {
    faults_.push_back(e.what());
    return kStatusUnsuccessful;
  }
  return target;
}

std::uint32_t Machine::sys_load_module(ThreadState& t, Addr name_ptr) {
  auto name = read_name(t.pid, name_ptr);
  if (!name) return 0;
  const ModuleDecl* m = scenario_.module(*name);
  if (!m) return 0;
  Process& p = processes_.at(t.pid);
  try {
    p.modules.add(m->image);
  } catch (const LoadError&) {
    return 0;
  }
  map_module(p, *m);
  emit(ModuleLoad{t.pid, m->image});
  return m->image->base;
}

std::uint32_t Machine::sys_unload_module(ThreadState& t, Addr name_ptr) {
  auto name = read_name(t.pid, name_ptr);
  if (!name) return kStatusAccessViolation;
  Process& p = processes_.at(t.pid);
  const image::ModuleImage* loaded = p.modules.find(*name);
  if (!loaded) return kStatusInvalidParameter;
  auto image = scenario_.module(*name)->image;
  p.modules.remove(*name);
  p.memory.unmap(image->extent());
  emit(ModuleUnload{t.pid, image});
  return kStatusSuccess;
}

}  // namespace apimon::vm
