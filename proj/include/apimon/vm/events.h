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

#ifndef APIMON_VM_EVENTS_H_
#define APIMON_VM_EVENTS_H_

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <variant>

#include "apimon/image.h"
#include "apimon/types.h"

namespace apimon::vm {

struct Registers {
  Addr eip = 0;
  Addr esp = 0;
  std::uint32_t eax = 0;
  std::uint32_t edx = 0;
  std::array<std::uint32_t, 4> r{};

  friend bool operator==(const Registers&, const Registers&) = default;
};

// Raised before the instruction at a hooked address executes.
struct BreakpointHit {
  Pid pid;
  Tid tid;
  Addr addr;
  Registers regs;
};

// `site` is the address of the SYSCALL instruction; `esp` is ESP at that
// point. Stack arguments start at esp + 4.
struct SyscallEnter {
  Pid pid;
  Tid tid;
  std::uint32_t ordinal;
  Addr esp;
  Addr site;
};

struct SyscallExit {
  Pid pid;
  Tid tid;
  std::uint32_t ordinal;
  std::uint32_t eax;
  Addr esp;
  Addr site;
};

struct ModuleLoad {
  Pid pid;
  std::shared_ptr<const image::ModuleImage> module;
};

struct ModuleUnload {
  Pid pid;
  std::shared_ptr<const image::ModuleImage> module;
};

struct ThreadCreated {
  Pid creator_pid;
  Tid creator_tid;
  Pid pid;
  Tid tid;
  Addr entry;
};

// Also raised when a thread ends on its own (HALT, return from its entry
// function, fault); `by_tid == tid` then.
struct ThreadTerminated {
  Pid by_pid;
  Tid by_tid;
  Pid pid;
  Tid tid;
};

struct ProcessCreated {
  Pid creator_pid;
  Tid creator_tid;
  Pid pid;
};

using VmEvent = std::variant<BreakpointHit, SyscallEnter, SyscallExit, ModuleLoad,
                             ModuleUnload, ThreadCreated, ThreadTerminated,
                             ProcessCreated>;

// One-line rendering, used for event-stream determinism checks.
std::string describe(const VmEvent& ev);

}  // namespace apimon::vm

#endif  // APIMON_VM_EVENTS_H_
