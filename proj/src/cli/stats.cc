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

#include "apimon/cli/stats.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <utility>

#include "apimon/error.h"

namespace apimon::cli {

RunStats compute_stats(const std::vector<TraceRecord>& records, const DiscardCounts& discards) {
  RunStats s;
  s.syscalls_internal = discards.syscalls_internal;
  s.dll_internal_tail = discards.dll_internal_tail;
  s.dll_internal_normal = discards.dll_internal_normal;
  std::set<std::pair<std::string, std::string>> apis, with_output;
  std::uint64_t args = 0;
  for (const TraceRecord& r : records) {
    if (r.kind == RecordKind::kSyscallEnter) ++s.syscalls_from_program;
    if (r.kind != RecordKind::kApiEntry) continue;
    ++s.dll_calls_from_program;
    args += r.args.size();
    apis.emplace(r.module, r.symbol);
    for (const RenderedArg& a : r.args)
      if (a.modifier != proto::Modifier::kIn) with_output.emplace(r.module, r.symbol);
  }
  s.distinct_apis_from_program = apis.size();
  s.apis_with_output_args = with_output.size();
  if (s.dll_calls_from_program != 0) {
    double avg = static_cast<double>(args) / static_cast<double>(s.dll_calls_from_program);
    s.avg_args_per_call = std::round(avg * 100) / 100;
  }
  return s;
}

std::string format_stats(const RunStats& s) {
  char avg[32];
  std::snprintf(avg, sizeof avg, "%.2f", s.avg_args_per_call);
  std::string out;
  auto line = [&](const char* key, std::uint64_t v) {
    out += key;
    out += '=';
    out += std::to_string(v);
    out += '\n';
  };
  line("syscallsFromProgram", s.syscalls_from_program);
  line("syscallsInternal", s.syscalls_internal);
  line("dllCallsFromProgram", s.dll_calls_from_program);
  line("dllInternalTail", s.dll_internal_tail);
  line("dllInternalNormal", s.dll_internal_normal);
  line("distinctApisFromProgram", s.distinct_apis_from_program);
  line("apisWithOutputArgs", s.apis_with_output_args);
  out += "avgArgsPerCall=";
  out += avg;
  out += '\n';
  return out;
}

RunStats parse_stats(std::string_view text) {
  RunStats s;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, 0, "expected key=value");
    std::string key(line.substr(0, eq));
    std::string_view value = line.substr(eq + 1);
    if (!seen.insert(key).second) throw ParseError(line_no, 0, "duplicate key '" + key + "'");
    if (key == "avgArgsPerCall") {
      double v = 0;
      auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc{} || end != value.data() + value.size())
        throw ParseError(line_no, eq + 2, "bad number");
      s.avg_args_per_call = v;
      continue;
    }
    std::uint64_t* field = key == "syscallsFromProgram"       ? &s.syscalls_from_program
                           : key == "syscallsInternal"        ? &s.syscalls_internal
                           : key == "dllCallsFromProgram"     ? &s.dll_calls_from_program
                           : key == "dllInternalTail"         ? &s.dll_internal_tail
                           : key == "dllInternalNormal"       ? &s.dll_internal_normal
                           : key == "distinctApisFromProgram" ? &s.distinct_apis_from_program
                           : key == "apisWithOutputArgs"      ? &s.apis_with_output_args
                                                              : nullptr;
    if (!field) throw ParseError(line_no, 1, "unknown key '" + key + "'");
    auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), *field);
    if (ec != std::errc{} || end != value.data() + value.size())
      throw ParseError(line_no, eq + 2, "bad number");
  }
  if (seen.size() != 8) throw ParseError(0, 0, "stats file is missing keys");
  return s;
}

DiscardCounts discards_of(const RunStats& s) {
  return {s.syscalls_internal, s.dll_internal_tail, s.dll_internal_normal};
}

}  // namespace apimon::cli
