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

#include "apimon/monitor/monitor.h"

#include <variant>

#include "apimon/error.h"
#include "apimon/monitor/args.h"

namespace apimon::monitor {

Monitor::Monitor(const proto::PrototypeDb& db, Pid root, MonitorConfig config)
    : db_(db), config_(config), pool_(root) {}

const ShadowStack* Monitor::shadow_stack(Pid pid, Tid tid) const {
  auto it = stacks_.find({pid, tid});
  return it == stacks_.end() ? nullptr : &it->second;
}

const image::RangeBlacklist* Monitor::blacklist(Pid pid) const {
  auto it = blacklists_.find(pid);
  return it == blacklists_.end() ? nullptr : &it->second;
}

std::shared_ptr<const ApiBinding> Monitor::binding_at(Pid pid, Addr a) const {
  auto it = entry_hooks_.find(pid);
  if (it == entry_hooks_.end()) return nullptr;
  auto found = it->second.find(a);
  return found == it->second.end() ? nullptr : found->second;
}

std::set<Addr> Monitor::exit_hooks(Pid pid) const {
  auto it = exit_hooks_.find(pid);
  return it == exit_hooks_.end() ? std::set<Addr>{} : it->second;
}

std::set<Addr> Monitor::return_hooks(Pid pid) const {
  auto it = return_hooks_.find(pid);
  return it == return_hooks_.end() ? std::set<Addr>{} : it->second;
}

void Monitor::emit(TraceRecord r) {
  r.seq = records_.size();
  records_.push_back(std::move(r));
  if (callback_) callback_(records_.back());
}

TraceRecord Monitor::api_record(RecordKind kind, Pid pid, Tid tid,
                                const ShadowStackEntry& e) const {
  TraceRecord r;
  r.kind = kind;
  r.pid = pid;
  r.tid = tid;
  r.module = e.api->module;
  r.symbol = e.api->symbol;
  r.ra = e.ra;
  r.esp = e.esp;
  return r;
}

void Monitor::log_exit(Pid pid, Tid tid, const ShadowStackEntry& e,
                       const vm::Registers& regs, const vm::MemoryView& mem) {
  TraceRecord r = api_record(RecordKind::kApiExit, pid, tid, e);
  ExitValues v =
      parse_args_on_exit(e.esp, e.api->prototype, regs.eax, regs.edx, mem, db_.string_cap());
  r.args = std::move(v.args);
  r.ret = std::move(v.ret);
  emit(std::move(r));
}

void Monitor::on_event(const vm::VmEvent& ev, vm::MachineAccess& machine) {
  if (const auto* e = std::get_if<vm::BreakpointHit>(&ev)) {
    if (!pool_.monitored(e->pid, e->tid)) return;
    if (return_hooks_[e->pid].count(e->addr)) on_exit_b(machine, e->pid, e->tid, e->regs);
    if (auto api = binding_at(e->pid, e->addr)) on_entry(machine, e->pid, e->tid, e->regs, api);
    if (exit_hooks_[e->pid].count(e->addr)) on_exit_a(machine, e->pid, e->tid, e->regs);
  } else if (const auto* e = std::get_if<vm::SyscallEnter>(&ev)) {
    on_syscall_enter(machine, *e);
  } else if (const auto* e = std::get_if<vm::SyscallExit>(&ev)) {
    on_syscall_exit(machine, *e);
  } else if (const auto* e = std::get_if<vm::ModuleLoad>(&ev)) {
    on_module_load(machine, e->pid, e->module);
  } else if (const auto* e = std::get_if<vm::ModuleUnload>(&ev)) {
    on_module_unload(e->pid, *e->module);
  } else if (const auto* e = std::get_if<vm::ProcessCreated>(&ev)) {
    pool_.on_process_created(*e);
  } else if (const auto* e = std::get_if<vm::ThreadCreated>(&ev)) {
    pool_.on_thread_created(*e);
  } else if (const auto* e = std::get_if<vm::ThreadTerminated>(&ev)) {
    pool_.on_thread_terminated(*e);
    stacks_.erase({e->pid, e->tid});
    syscalls_.erase({e->pid, e->tid});
  }
}

void Monitor::on_module_load(vm::MachineAccess& machine, Pid pid,
                             const std::shared_ptr<const image::ModuleImage>& module) {
  if (!module->is_system) return;
  blacklists_[pid].add(module->code_ranges);

  const image::ModuleSet* loaded = machine.modules(pid);
  auto& bindings = entry_hooks_[pid];
  for (image::HookPoint& hp : image::collect_hook_points(*module, db_)) {
    auto api = std::make_shared<ApiBinding>();
    api->address = hp.address;
    api->module = std::move(hp.module);
    api->symbol = std::move(hp.symbol);
    api->prototype = std::move(hp.prototype);
    api->known_prototype = hp.known_prototype;
    api->return_hook = config_.strategy == Strategy::kReturnAddress;

    if (!api->return_hook) {
      std::set<Addr> exits;
      bool usable = loaded != nullptr;
      if (usable) {
        try {
          exits = image::compute_exit_points(*loaded, hp.address);
        } catch (const LoadError&) {
          usable = false;
        }
      }
      for (Addr x : exits) {
        const image::ModuleImage* owner = loaded->containing(x);
        if (!owner || owner->no_exit_hook.count(x)) usable = false;
      }
      if (usable) {
        for (Addr x : exits) {
          exit_hooks_[pid].insert(x);
          machine.add_hook(x);
        }
      } else {
        api->return_hook = true;
        ++counters_.exit_hook_fallbacks;
      }
    }
    bindings[api->address] = api;
    machine.add_hook(api->address);
  }
}

void Monitor::on_module_unload(Pid pid, const image::ModuleImage& module) {
  if (!module.is_system) return;
  auto& bl = blacklists_[pid];
  for (const AddrRange& r : module.code_ranges) bl.remove(r);
  AddrRange extent = module.extent();
  auto prune = [&](auto& container) {
    for (auto it = container.begin(); it != container.end();) {
      Addr a = [&] {
        if constexpr (requires { it->first; }) return it->first;
        else return *it;
      }();
      it = extent.contains(a) ? container.erase(it) : std::next(it);
    }
  };
  prune(entry_hooks_[pid]);
  prune(exit_hooks_[pid]);
}

void Monitor::on_entry(vm::MachineAccess& machine, Pid pid, Tid tid,
                       const vm::Registers& regs, const std::shared_ptr<const ApiBinding>& api) {
  if (!pool_.monitored(pid, tid)) return;
  const vm::MemoryView* mem = machine.memory(pid);
  std::optional<std::uint32_t> ra = mem ? mem->read32(regs.esp) : std::nullopt;
  if (!ra) {
    ++counters_.unreadable_stack;
    return;
  }
  ShadowStack& ss = stacks_[{pid, tid}];

  if (blacklists_[pid].contains(*ra)) {
    ++counters_.dll_internal_normal;
    bool recheck = config_.strategy == Strategy::kExitPoints && config_.exit_recheck &&
                   !api->return_hook;
    if (!recheck) return;
    if (!ss.empty() && ss.top().deferred && ss.top().ra == *ra && ss.top().esp == regs.esp)
      return;
    ss.remove_stale(regs.esp);
    ShadowStackEntry e{*ra, regs.esp, api, true,
                       parse_args_on_entry(regs.esp, api->prototype, *mem, db_.string_cap())};
    ss.push(std::move(e));
    return;
  }

  if (const ShadowStackEntry* top = ss.visible_top();
      top && *ra == top->ra && regs.esp == top->esp) {
    ++counters_.dll_internal_tail;
    return;
  }

  if (api->return_hook) {
    return_hooks_[pid].insert(*ra);
    machine.add_hook(*ra);
  }
  ss.remove_stale(regs.esp);
  ShadowStackEntry e{*ra, regs.esp, api, false, {}};
  TraceRecord r = api_record(RecordKind::kApiEntry, pid, tid, e);
  r.args = parse_args_on_entry(regs.esp, api->prototype, *mem, db_.string_cap());
  ss.push(std::move(e));
  emit(std::move(r));
}

bool Monitor::exit_accepted(Addr esp_now, const ShadowStackEntry& e) const {
  if (config_.esp_check == EspCheck::kRelaxed) return esp_now > e.esp;
  return std::uint64_t{esp_now} ==
         std::uint64_t{e.esp} + 4 + proto::ret_displacement(e.api->prototype);
}

void Monitor::on_exit_b(vm::MachineAccess& machine, Pid pid, Tid tid,
                        const vm::Registers& regs) {
  if (!pool_.monitored(pid, tid)) return;
  auto it = stacks_.find({pid, tid});
  if (it == stacks_.end()) {
    ++counters_.spurious_exits;
    return;
  }
  ShadowStack& ss = it->second;
  std::optional<std::size_t> idx;
  for (std::size_t i = ss.size(); i-- > 0;) {
    if (!ss[i].deferred && ss[i].ra == regs.eip) {
      idx = i;
      break;
    }
  }
  if (!idx || !exit_accepted(regs.esp, ss[*idx])) {
    ++counters_.spurious_exits;
    return;
  }
  log_exit(pid, tid, ss[*idx], regs, *machine.memory(pid));
  ss.resize(*idx);
}

void Monitor::on_exit_a(vm::MachineAccess& machine, Pid pid, Tid tid,
                        const vm::Registers& regs) {
  if (!pool_.monitored(pid, tid)) return;
  const vm::MemoryView* mem = machine.memory(pid);
  std::optional<std::uint32_t> ra = mem ? mem->read32(regs.esp) : std::nullopt;
  if (!ra) {
    ++counters_.unreadable_stack;
    return;
  }
  ShadowStack& ss = stacks_[{pid, tid}];

  std::optional<std::size_t> idx = ss.find_ra(*ra);
  if (idx && ss[*idx].esp != regs.esp) idx.reset();
  if (!idx && config_.exit_recheck) idx = ss.find_deferred_esp(regs.esp);
  if (!idx) {
    ++counters_.spurious_exits;
    return;
  }

  ShadowStackEntry e = ss[*idx];
  ss.resize(*idx);
  if (!e.deferred) {
    log_exit(pid, tid, e, regs, *mem);
    return;
  }
  if (blacklists_[pid].contains(*ra)) return;
  // The return address seen at entry was not the one the call returns to.
  e.ra = *ra;
  TraceRecord r = api_record(RecordKind::kApiEntry, pid, tid, e);
  r.args = std::move(e.entry_args);
  emit(std::move(r));
  ++counters_.late_records;
  log_exit(pid, tid, e, regs, *mem);
}

std::optional<Addr> Monitor::walk_epilogue(const vm::MemoryView& mem, Addr site, Addr esp) {
  Addr pc = site;
  for (int i = 0; i < kMaxEpilogueWalk; ++i, pc += vm::kInsnSize) {
    std::array<std::uint8_t, vm::kInsnSize> bytes;
    if (!mem.read(pc, bytes)) return std::nullopt;
    auto head = vm::decode_head(bytes);
    if (!head) return std::nullopt;
    switch (head->op) {
      case vm::Opcode::kNop:
      case vm::Opcode::kSet:
        break;
      case vm::Opcode::kPop:
        esp += 4;
        break;
      case vm::Opcode::kRet:
        return mem.read32(esp);
      default:
        return std::nullopt;
    }
  }
  return std::nullopt;
}

void Monitor::on_syscall_enter(vm::MachineAccess& machine, const vm::SyscallEnter& ev) {
  if (!pool_.monitored(ev.pid, ev.tid)) return;
  const vm::MemoryView* mem = machine.memory(ev.pid);
  const image::RangeBlacklist& bl = blacklists_[ev.pid];
  std::optional<Addr> ra;
  if (!bl.contains(ev.site)) {
    ra = ev.site + vm::kInsnSize;
  } else if (auto back = walk_epilogue(*mem, ev.site + vm::kInsnSize, ev.esp);
             back && !bl.contains(*back)) {
    ra = back;
  }
  if (!ra) {
    ++counters_.syscalls_internal;
    return;
  }

  const proto::Prototype* p = db_.find_syscall(ev.ordinal);
  TraceRecord r;
  r.kind = RecordKind::kSyscallEnter;
  r.pid = ev.pid;
  r.tid = ev.tid;
  r.symbol = p ? p->symbol : "";
  r.ordinal = ev.ordinal;
  r.ra = *ra;
  r.esp = ev.esp;
  if (p) r.args = parse_args_on_entry(ev.esp, *p, *mem, db_.string_cap());
  syscalls_[{ev.pid, ev.tid}] = {*ra, ev.esp, p};
  emit(std::move(r));
}

void Monitor::on_syscall_exit(vm::MachineAccess& machine, const vm::SyscallExit& ev) {
  auto it = syscalls_.find({ev.pid, ev.tid});
  if (it == syscalls_.end()) return;
  PendingSyscall pending = it->second;
  syscalls_.erase(it);
  if (!pool_.monitored(ev.pid, ev.tid)) return;

  TraceRecord r;
  r.kind = RecordKind::kSyscallExit;
  r.pid = ev.pid;
  r.tid = ev.tid;
  r.symbol = pending.prototype ? pending.prototype->symbol : "";
  r.ordinal = ev.ordinal;
  r.ra = pending.ra;
  r.esp = pending.esp;
  if (pending.prototype) {
    ExitValues v = parse_args_on_exit(pending.esp, *pending.prototype, ev.eax, 0,
                                      *machine.memory(ev.pid), db_.string_cap());
    r.args = std::move(v.args);
    r.ret = std::move(v.ret);
  } else {
    proto::Prototype plain;
    r.ret = render_return(plain, ev.eax, 0);
  }
  emit(std::move(r));
}

}  // namespace apimon::monitor
