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

#include "apimon/cli/trace_io.h"

#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <nlohmann/json.hpp>
#include <ostream>

#include "apimon/error.h"

namespace apimon::cli {
namespace {

using Json = nlohmann::ordered_json;

std::string hex32(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08x", v);
  return buf;
}

std::uint32_t parse_hex32(const Json& j, const char* key) {
  const std::string& s = j.at(key).get_ref<const std::string&>();
  if (s.size() < 3 || s[0] != '0' || (s[1] != 'x' && s[1] != 'X'))
    throw std::invalid_argument(std::string(key) + " is not a hex address");
  std::size_t used = 0;
  unsigned long v = std::stoul(s.substr(2), &used, 16);
  if (used != s.size() - 2 || v > 0xffffffffUL)
    throw std::invalid_argument(std::string(key) + " is not a hex address");
  return static_cast<std::uint32_t>(v);
}

proto::Modifier parse_modifier(const std::string& s) {
  for (proto::Modifier m : {proto::Modifier::kIn, proto::Modifier::kOut, proto::Modifier::kInOut})
    if (proto::to_string(m) == s) return m;
  throw std::invalid_argument("unknown modifier '" + s + "'");
}

bool equal(const TraceRecord& a, const TraceRecord& b, DiffMode mode) {
  if (!same_identity(a, b)) return false;
  return mode == DiffMode::kIdentity || (a.args == b.args && a.ret == b.ret);
}

void diff_sequence(const std::vector<const TraceRecord*>& l,
                   const std::vector<const TraceRecord*>& r, DiffMode mode,
                   std::vector<DiffEntry>& out) {
  std::size_t lo = 0;
  while (lo < l.size() && lo < r.size() && equal(*l[lo], *r[lo], mode)) ++lo;
  std::size_t le = l.size(), re = r.size();
  while (le > lo && re > lo && equal(*l[le - 1], *r[re - 1], mode)) --le, --re;
  std::size_t n = le - lo, m = re - lo;
  // lcs[i][j]: LCS length of l[lo+i..le) and r[lo+j..re).
  std::vector<std::vector<std::uint32_t>> lcs(n + 1, std::vector<std::uint32_t>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;)
    for (std::size_t j = m; j-- > 0;)
      lcs[i][j] = equal(*l[lo + i], *r[lo + j], mode)
                      ? lcs[i + 1][j + 1] + 1
                      : std::max(lcs[i + 1][j], lcs[i][j + 1]);
  std::size_t i = 0, j = 0;
  while (i < n || j < m) {
    if (i < n && j < m && equal(*l[lo + i], *r[lo + j], mode)) {
      ++i, ++j;
    } else if (j == m || (i < n && lcs[i + 1][j] >= lcs[i][j + 1])) {
      out.push_back({DiffEntry::Side::kLeftOnly, *l[lo + i++]});
    } else {
      out.push_back({DiffEntry::Side::kRightOnly, *r[lo + j++]});
    }
  }
}

}  // namespace

std::string to_json_line(const TraceRecord& r) {
  Json j;
  j["seq"] = r.seq;
  j["kind"] = std::string(to_string(r.kind));
  j["pid"] = r.pid;
  j["tid"] = r.tid;
  j["module"] = r.module;
  j["symbol"] = r.symbol;
  if (r.ordinal) j["ordinal"] = *r.ordinal;
  j["ra"] = hex32(r.ra);
  j["esp"] = hex32(r.esp);
  Json args = Json::array();
  for (const RenderedArg& a : r.args)
    args.push_back({{"name", a.name},
                    {"mod", std::string(proto::to_string(a.modifier))},
                    {"value", a.value}});
  j["args"] = std::move(args);
  if (r.ret) j["ret"] = *r.ret;
  return j.dump(-1, ' ', false, Json::error_handler_t::replace);
}

TraceRecord from_json_line(std::string_view line, std::size_t line_no) {
  try {
    Json j = Json::parse(line);
    TraceRecord r;
    r.seq = j.at("seq").get<std::uint64_t>();
    auto kind = record_kind_from_string(j.at("kind").get<std::string>());
    if (!kind) throw std::invalid_argument("unknown record kind");
    r.kind = *kind;
    r.pid = j.at("pid").get<Pid>();
    r.tid = j.at("tid").get<Tid>();
    r.module = j.at("module").get<std::string>();
    r.symbol = j.at("symbol").get<std::string>();
    if (j.contains("ordinal")) r.ordinal = j.at("ordinal").get<std::uint32_t>();
    r.ra = parse_hex32(j, "ra");
    r.esp = parse_hex32(j, "esp");
    for (const Json& a : j.at("args"))
      r.args.push_back({a.at("name").get<std::string>(),
                        parse_modifier(a.at("mod").get<std::string>()),
                        a.at("value").get<std::string>()});
    if (j.contains("ret")) r.ret = j.at("ret").get<std::string>();
    return r;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(line_no, 0, std::string("malformed trace record: ") + e.what());
  }
}

void write_trace(std::ostream& out, const std::vector<TraceRecord>& records) {
  for (const TraceRecord& r : records) out << to_json_line(r) << '\n';
}

std::vector<TraceRecord> read_trace(std::istream& in) {
  std::vector<TraceRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(from_json_line(line, line_no));
  }
  return out;
}

std::vector<TraceRecord> read_trace_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_trace(in);
}

std::vector<DiffEntry> diff_traces(const std::vector<TraceRecord>& left,
                                   const std::vector<TraceRecord>& right, DiffMode mode) {
  std::map<ThreadKey, std::pair<std::vector<const TraceRecord*>, std::vector<const TraceRecord*>>>
      threads;
  for (const TraceRecord& r : left) threads[{r.pid, r.tid}].first.push_back(&r);
  for (const TraceRecord& r : right) threads[{r.pid, r.tid}].second.push_back(&r);
  std::vector<DiffEntry> out;
  for (const auto& [key, seqs] : threads) diff_sequence(seqs.first, seqs.second, mode, out);
  return out;
}

std::string format_diff(const std::vector<DiffEntry>& diff) {
  std::string out;
  for (const DiffEntry& d : diff) {
    out += d.side == DiffEntry::Side::kLeftOnly ? "- " : "+ ";
    out += to_json_line(d.record);
    out += '\n';
  }
  return out;
}

}  // namespace apimon::cli
