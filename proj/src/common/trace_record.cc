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

#include "apimon/trace_record.h"

namespace apimon {

std::string_view to_string(RecordKind kind) {
  switch (kind) {
    case RecordKind::kApiEntry: return "api-entry";
    case RecordKind::kApiExit: return "api-exit";
    case RecordKind::kSyscallEnter: return "syscall-enter";
    case RecordKind::kSyscallExit: return "syscall-exit";
  }
  return "?";
}

std::optional<RecordKind> record_kind_from_string(std::string_view s) {
  for (RecordKind k : {RecordKind::kApiEntry, RecordKind::kApiExit,
                       RecordKind::kSyscallEnter, RecordKind::kSyscallExit})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

bool same_identity(const TraceRecord& a, const TraceRecord& b) {
  return a.kind == b.kind && a.pid == b.pid && a.tid == b.tid && a.module == b.module &&
         a.symbol == b.symbol && a.ordinal == b.ordinal && a.ra == b.ra && a.esp == b.esp;
}

}  // namespace apimon
