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

// Per-run statistics in the shape of the monitor's evaluation tables.

#ifndef APIMON_CLI_STATS_H_
#define APIMON_CLI_STATS_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "apimon/trace_record.h"

namespace apimon::cli {

// Events discarded by the monitor; not visible in the trace itself.
struct DiscardCounts {
  std::uint64_t syscalls_internal = 0;
  std::uint64_t dll_internal_tail = 0;
  std::uint64_t dll_internal_normal = 0;
};

struct RunStats {
  std::uint64_t syscalls_from_program = 0;
  std::uint64_t syscalls_internal = 0;
  std::uint64_t dll_calls_from_program = 0;
  std::uint64_t dll_internal_tail = 0;
  std::uint64_t dll_internal_normal = 0;
  std::uint64_t distinct_apis_from_program = 0;
  std::uint64_t apis_with_output_args = 0;
  double avg_args_per_call = 0;

  friend bool operator==(const RunStats&, const RunStats&) = default;
};

RunStats compute_stats(const std::vector<TraceRecord>& records, const DiscardCounts& discards);

// key=value lines; the average has two decimals.
std::string format_stats(const RunStats& s);
// Throws ParseError on unknown keys, bad values or missing keys.
RunStats parse_stats(std::string_view text);

DiscardCounts discards_of(const RunStats& s);

}  // namespace apimon::cli

#endif  // APIMON_CLI_STATS_H_
