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

// Prototype-driven argument extraction from a stopped thread's stack.
//
// Renderings:
//   PRIM            0x0000002a
//   NULL pointer    NULL
//   bad pointer     0x00123000:<invalid>
//   PTR(PRIM)       0x00401000:0x0000002a
//   PTR(STRUCT)     0x00401000:{0a0b0c0d}
//   PTR(CSTR)       "text"       (a trailing ... marks truncation)
//   PTR(BUF)        [616263]     (same)
// OUT pointers are shown as the bare address at entry.

#ifndef APIMON_MONITOR_ARGS_H_
#define APIMON_MONITOR_ARGS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "apimon/proto.h"
#include "apimon/trace_record.h"
#include "apimon/types.h"
#include "apimon/vm/memory.h"

namespace apimon::monitor {

inline constexpr std::uint32_t kMaxBufferFetch = 4096;
inline constexpr char kInvalidMarker[] = "<invalid>";

// Bytes readable from `a` onward, stopping at the first invalid page and
// never exceeding `limit`.
std::uint32_t readable_span(const vm::MemoryView& mem, Addr a, std::uint32_t limit);

// Renders argument `index` as seen from entry-time `esp`. `deref` selects
// whether pointer arguments are followed.
std::string render_arg(const vm::MemoryView& mem, Addr esp, const proto::Prototype& p,
                       std::size_t index, bool deref, std::uint32_t string_cap);

// IN and INOUT values dereferenced; OUT pointers as raw addresses.
std::vector<RenderedArg> parse_args_on_entry(Addr esp, const proto::Prototype& p,
                                             const vm::MemoryView& mem,
                                             std::uint32_t string_cap);

struct ExitValues {
  std::vector<RenderedArg> args;  // OUT and INOUT only
  std::string ret;
};

ExitValues parse_args_on_exit(Addr entry_esp, const proto::Prototype& p, std::uint32_t eax,
                              std::uint32_t edx, const vm::MemoryView& mem,
                              std::uint32_t string_cap);

std::string render_return(const proto::Prototype& p, std::uint32_t eax, std::uint32_t edx);

}  // namespace apimon::monitor

#endif  // APIMON_MONITOR_ARGS_H_
