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

// JSON Lines trace files and trace comparison.

#ifndef APIMON_CLI_TRACE_IO_H_
#define APIMON_CLI_TRACE_IO_H_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "apimon/trace_record.h"

namespace apimon::cli {

// Keys in fixed order: seq kind pid tid module symbol [ordinal] ra esp args
// [ret]. Addresses are 0x-prefixed 8-digit hex strings.
std::string to_json_line(const TraceRecord& r);
// Throws ParseError (line 0 means unknown) on malformed input.
TraceRecord from_json_line(std::string_view line, std::size_t line_no = 0);

void write_trace(std::ostream& out, const std::vector<TraceRecord>& records);
std::vector<TraceRecord> read_trace(std::istream& in);
std::vector<TraceRecord> read_trace_file(const std::filesystem::path& path);

enum class DiffMode {
  kFull,      // every field except seq
  kIdentity,  // which call was observed: no argument or return values
};

struct DiffEntry {
  enum class Side { kLeftOnly, kRightOnly };
  Side side;
  TraceRecord record;
};

// Compares the per-thread subsequences of both traces (records of one
// thread keep their order; threads may interleave differently). Empty
// exactly when the traces are equivalent.
std::vector<DiffEntry> diff_traces(const std::vector<TraceRecord>& left,
                                   const std::vector<TraceRecord>& right,
                                   DiffMode mode = DiffMode::kFull);

std::string format_diff(const std::vector<DiffEntry>& diff);

}  // namespace apimon::cli

#endif  // APIMON_CLI_TRACE_IO_H_
