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

// Logged events shared by the monitor, the oracle and the serializers.

#ifndef APIMON_TRACE_RECORD_H_
#define APIMON_TRACE_RECORD_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "apimon/proto.h"
#include "apimon/types.h"

namespace apimon {

enum class RecordKind { kApiEntry, kApiExit, kSyscallEnter, kSyscallExit };

std::string_view to_string(RecordKind kind);
std::optional<RecordKind> record_kind_from_string(std::string_view s);

struct RenderedArg {
  std::string name;
  proto::Modifier modifier = proto::Modifier::kIn;
  std::string value;

  friend bool operator==(const RenderedArg&, const RenderedArg&) = default;
};

struct TraceRecord {
  std::uint64_t seq = 0;
  RecordKind kind = RecordKind::kApiEntry;
  Pid pid = 0;
  Tid tid = 0;
  // Empty for syscalls.
  std::string module;
  // Syscall name from the database; empty when the ordinal is unknown.
  std::string symbol;
  std::optional<std::uint32_t> ordinal;
  // Return address into program code and ESP at entry.
  Addr ra = 0;
  Addr esp = 0;
  std::vector<RenderedArg> args;
  // Exit records only.
  std::optional<std::string> ret;

  bool is_entry() const {
    return kind == RecordKind::kApiEntry || kind == RecordKind::kSyscallEnter;
  }
  bool is_syscall() const {
    return kind == RecordKind::kSyscallEnter || kind == RecordKind::kSyscallExit;
  }

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

// Fields that say which call was observed, leaving out seq and values.
bool same_identity(const TraceRecord& a, const TraceRecord& b);

}  // namespace apimon

#endif  // APIMON_TRACE_RECORD_H_
