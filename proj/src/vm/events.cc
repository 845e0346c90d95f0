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

#include "apimon/vm/events.h"

#include <cstdio>

namespace apimon::vm {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string regs_string(const Registers& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "eip=%08x esp=%08x eax=%08x edx=%08x r0=%08x r1=%08x r2=%08x r3=%08x",
                r.eip, r.esp, r.eax, r.edx, r.r[0], r.r[1], r.r[2], r.r[3]);
  return buf;
}

}  // namespace

std::string describe(const VmEvent& ev) {
  char buf[160];
  return std::visit(
      Overloaded{
          [&](const BreakpointHit& e) {
            std::snprintf(buf, sizeof buf, "bp pid=%u tid=%u addr=%08x ", e.pid, e.tid,
                          e.addr);
            return buf + regs_string(e.regs);
          },
          [&](const SyscallEnter& e) {
            std::snprintf(buf, sizeof buf, "sysenter pid=%u tid=%u ord=%u esp=%08x site=%08x",
                          e.pid, e.tid, e.ordinal, e.esp, e.site);
            return std::string(buf);
          },
          [&](const SyscallExit& e) {
            std::snprintf(buf, sizeof buf,
                          "sysexit pid=%u tid=%u ord=%u eax=%08x esp=%08x site=%08x", e.pid,
                          e.tid, e.ordinal, e.eax, e.esp, e.site);
            return std::string(buf);
          },
          [&](const ModuleLoad& e) {
            std::snprintf(buf, sizeof buf, "load pid=%u base=%08x ", e.pid, e.module->base);
            return buf + e.module->name;
          },
          [&](const ModuleUnload& e) {
            std::snprintf(buf, sizeof buf, "unload pid=%u base=%08x ", e.pid, e.module->base);
            return buf + e.module->name;
          },
          [&](const ThreadCreated& e) {
            std::snprintf(buf, sizeof buf, "thread+ by=%u/%u pid=%u tid=%u entry=%08x",
                          e.creator_pid, e.creator_tid, e.pid, e.tid, e.entry);
            return std::string(buf);
          },
          [&](const ThreadTerminated& e) {
            std::snprintf(buf, sizeof buf, "thread- by=%u/%u pid=%u tid=%u", e.by_pid,
                          e.by_tid, e.pid, e.tid);
            return std::string(buf);
          },
          [&](const ProcessCreated& e) {
            std::snprintf(buf, sizeof buf, "process+ by=%u/%u pid=%u", e.creator_pid,
                          e.creator_tid, e.pid);
            return std::string(buf);
          },
      },
      ev);
}

}  // namespace apimon::vm
