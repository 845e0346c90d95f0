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

#include "apimon/vm/oracle.h"

#include <variant>

namespace apimon::vm {

GroundTruth::GroundTruth(const Scenario& scenario) : scenario_(scenario) {
  processes_.insert(scenario.root());
}

bool GroundTruth::monitored(Pid pid, Tid tid) const {
  return processes_.count(pid) != 0 || threads_.count({pid, tid}) != 0;
}

bool GroundTruth::program_code(MachineAccess& machine, Pid pid, Addr a) const {
  const image::ModuleSet* mods = machine.modules(pid);
  const image::ModuleImage* m = mods ? mods->containing(a) : nullptr;
  return m && !m->is_system && m->in_code(a);
}

const GroundTruth::ApiName* GroundTruth::api_at(MachineAccess& machine, Pid pid, Addr a) {
  const image::ModuleSet* mods = machine.modules(pid);
  const image::ModuleImage* m = mods ? mods->containing(a) : nullptr;
  if (!m || !m->is_system) return nullptr;
  auto [it, fresh] = api_cache_.try_emplace(m);
  if (fresh) {
    for (const image::HookPoint& hp : image::collect_hook_points(*m, scenario_.prototypes))
      it->second[hp.address] = {hp.module, hp.symbol};
  }
  auto found = it->second.find(a);
  return found == it->second.end() ? nullptr : &found->second;
}

void GroundTruth::emit(TraceRecord r) {
  r.seq = records_.size();
  records_.push_back(std::move(r));
}

void GroundTruth::on_step(const StepInfo& step, MachineAccess& machine) {
  ThreadKey key{step.pid, step.tid};
  std::vector<Frame>& frames = frames_[key];
  const Instruction& insn = *step.insn;
  if (step.faulted) {
    frames.clear();
    return;
  }

  if (insn.op == Opcode::kRet && step.popped && !frames.empty() &&
      frames.back().slot == step.before.esp && frames.back().ra == *step.popped) {
    Frame f = std::move(frames.back());
    frames.pop_back();
    if (f.relevant && monitored(step.pid, step.tid)) {
      TraceRecord r;
      r.kind = RecordKind::kApiExit;
      r.pid = step.pid;
      r.tid = step.tid;
      r.module = f.module;
      r.symbol = f.symbol;
      r.ra = f.ra;
      r.esp = f.slot;
      emit(std::move(r));
    }
  }
  // Frames the stack pointer has moved past can no longer return normally.
  while (!frames.empty() && frames.back().slot < step.after.esp) frames.pop_back();

  if (insn.op == Opcode::kCall) {
    Frame f;
    f.slot = step.after.esp;
    f.ra = step.site + kInsnSize;
    f.from_program = program_code(machine, step.pid, step.site);
    if (const ApiName* api = api_at(machine, step.pid, step.after.eip);
        api && f.from_program) {
      f.relevant = true;
      f.module = api->module;
      f.symbol = api->symbol;
    }
    frames.push_back(f);
    if (f.relevant && monitored(step.pid, step.tid)) {
      TraceRecord r;
      r.kind = RecordKind::kApiEntry;
      r.pid = step.pid;
      r.tid = step.tid;
      r.module = f.module;
      r.symbol = f.symbol;
      r.ra = f.ra;
      r.esp = f.slot;
      emit(std::move(r));
    }
    return;
  }

  // A program-level thunk jumping onto an API: the call it serves becomes
  // the API call.
  if (frames.empty()) return;
  Frame& top = frames.back();
  if (!top.from_program || top.relevant || top.slot != step.after.esp) return;
  const ApiName* api = api_at(machine, step.pid, step.after.eip);
  if (!api) return;
  top.relevant = true;
  top.module = api->module;
  top.symbol = api->symbol;
  if (monitored(step.pid, step.tid)) {
    TraceRecord r;
    r.kind = RecordKind::kApiEntry;
    r.pid = step.pid;
    r.tid = step.tid;
    r.module = top.module;
    r.symbol = top.symbol;
    r.ra = top.ra;
    r.esp = top.slot;
    emit(std::move(r));
  }
}

void GroundTruth::on_event(const VmEvent& ev, MachineAccess& machine) {
  if (const auto* e = std::get_if<SyscallEnter>(&ev)) {
    ThreadKey key{e->pid, e->tid};
    PendingSyscall pending;
    pending.esp = e->esp;
    if (program_code(machine, e->pid, e->site)) {
      pending.relevant = true;
      pending.ra = e->site + kInsnSize;
    } else {
      const std::vector<Frame>& frames = frames_[key];
      if (!frames.empty() && frames.back().from_program) {
        pending.relevant = true;
        pending.ra = frames.back().ra;
      }
    }
    pending.relevant = pending.relevant && monitored(e->pid, e->tid);
    syscalls_[key] = pending;
    if (pending.relevant) {
      TraceRecord r;
      r.kind = RecordKind::kSyscallEnter;
      r.pid = e->pid;
      r.tid = e->tid;
      if (const proto::Prototype* p = scenario_.prototypes.find_syscall(e->ordinal))
        r.symbol = p->symbol;
      r.ordinal = e->ordinal;
      r.ra = pending.ra;
      r.esp = pending.esp;
      emit(std::move(r));
    }
  } else if (const auto* e = std::get_if<SyscallExit>(&ev)) {
    auto it = syscalls_.find({e->pid, e->tid});
    if (it == syscalls_.end()) return;
    PendingSyscall pending = it->second;
    syscalls_.erase(it);
    if (!pending.relevant || !monitored(e->pid, e->tid)) return;
    TraceRecord r;
    r.kind = RecordKind::kSyscallExit;
    r.pid = e->pid;
    r.tid = e->tid;
    if (const proto::Prototype* p = scenario_.prototypes.find_syscall(e->ordinal))
      r.symbol = p->symbol;
    r.ordinal = e->ordinal;
    r.ra = pending.ra;
    r.esp = pending.esp;
    emit(std::move(r));
  } else if (const auto* e = std::get_if<ProcessCreated>(&ev)) {
    if (monitored(e->creator_pid, e->creator_tid)) processes_.insert(e->pid);
  } else if (const auto* e = std::get_if<ThreadCreated>(&ev)) {
    if (monitored(e->creator_pid, e->creator_tid)) threads_.insert({e->pid, e->tid});
  } else if (const auto* e = std::get_if<ThreadTerminated>(&ev)) {
    threads_.erase({e->pid, e->tid});
    frames_.erase({e->pid, e->tid});
    syscalls_.erase({e->pid, e->tid});
  } else if (const auto* e = std::get_if<ModuleUnload>(&ev)) {
    api_cache_.erase(e->module.get());
  }
}

OracleRun ground_truth_trace(const Scenario& scenario, std::uint32_t quantum,
                             std::uint64_t budget) {
  Machine machine(scenario, quantum);
  GroundTruth truth(scenario);
  machine.add_sink(&truth);
  machine.add_observer(&truth);
  OracleRun run;
  run.report = machine.run(budget);
  run.records = truth.records();
  return run;
}

}  // namespace apimon::vm
