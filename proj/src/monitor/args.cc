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

#include "apimon/monitor/args.h"

#include <algorithm>
#include <cinttypes>
#include <cstdio>

namespace apimon::monitor {
namespace {

std::string hex32(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08" PRIx32, v);
  return buf;
}

std::string hex_bytes(const std::vector<std::uint8_t>& bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

std::string prim_value(const std::vector<std::uint8_t>& bytes) {
  std::uint64_t v = 0;
  for (std::size_t i = bytes.size(); i-- > 0;) v = (v << 8) | bytes[i];
  char buf[32];
  std::snprintf(buf, sizeof buf, "0x%0*" PRIx64, static_cast<int>(bytes.size() * 2), v);
  return buf;
}

std::string quote(const std::vector<std::uint8_t>& bytes) {
  std::string out = "\"";
  for (std::uint8_t c : bytes) {
    if (c == '"' || c == '\\') {
      out.push_back('\\');
      out.push_back(static_cast<char>(c));
    } else if (c >= 0x20 && c < 0x7f) {
      out.push_back(static_cast<char>(c));
    } else {
      char buf[8];
      std::snprintf(buf, sizeof buf, "\\x%02x", c);
      out += buf;
    }
  }
  out.push_back('"');
  return out;
}

std::optional<std::vector<std::uint8_t>> read_bytes(const vm::MemoryView& mem, Addr a,
                                                    std::uint32_t n) {
  std::vector<std::uint8_t> out(n);
  if (!mem.read(a, out)) return std::nullopt;
  return out;
}

std::optional<std::uint64_t> read_prim(const vm::MemoryView& mem, Addr a, std::uint32_t n) {
  auto bytes = read_bytes(mem, a, n);
  if (!bytes) return std::nullopt;
  std::uint64_t v = 0;
  for (std::size_t i = bytes->size(); i-- > 0;) v = (v << 8) | (*bytes)[i];
  return v;
}

std::string render_pointee(const vm::MemoryView& mem, Addr esp, const proto::Prototype& p,
                           Addr ptr, const proto::Pointee& pointee,
                           std::uint32_t string_cap) {
  using K = proto::Pointee::Kind;
  std::string invalid = hex32(ptr) + ":" + kInvalidMarker;
  switch (pointee.kind) {
    case K::kPrim: {
      auto bytes = read_bytes(mem, ptr, pointee.size);
      return bytes ? hex32(ptr) + ":" + prim_value(*bytes) : invalid;
    }
    case K::kStruct: {
      std::uint32_t n = readable_span(mem, ptr, pointee.size);
      if (n == 0 && pointee.size != 0) return invalid;
      auto bytes = read_bytes(mem, ptr, n);
      return hex32(ptr) + ":{" + hex_bytes(*bytes) + "}" + (n < pointee.size ? "..." : "");
    }
    case K::kCString: {
      std::uint32_t n = readable_span(mem, ptr, string_cap);
      if (n == 0 && string_cap != 0) return invalid;
      auto bytes = *read_bytes(mem, ptr, n);
      auto nul = std::find(bytes.begin(), bytes.end(), 0);
      bool terminated = nul != bytes.end();
      bytes.erase(nul, bytes.end());
      return quote(bytes) + (terminated ? "" : "...");
    }
    case K::kBuffer: {
      const proto::ArgDescriptor& len_arg = p.args.at(pointee.length_arg);
      auto len = read_prim(mem, esp + proto::stack_offset(p, pointee.length_arg),
                           len_arg.is_pointer() ? 4 : len_arg.size);
      if (!len) return invalid;
      std::uint32_t want =
          static_cast<std::uint32_t>(std::min<std::uint64_t>(*len, kMaxBufferFetch));
      std::uint32_t n = readable_span(mem, ptr, want);
      if (n == 0 && *len != 0) return invalid;
      auto bytes = *read_bytes(mem, ptr, n);
      return "[" + hex_bytes(bytes) + "]" + (n < *len ? "..." : "");
    }
  }
  return invalid;
}

}  // namespace

std::uint32_t readable_span(const vm::MemoryView& mem, Addr a, std::uint32_t limit) {
  std::uint64_t at = a;
  std::uint64_t end = std::min<std::uint64_t>(std::uint64_t{a} + limit, std::uint64_t{1} << 32);
  while (at < end && mem.is_valid(static_cast<Addr>(at)))
    at = (at / kPageSize + 1) * kPageSize;
  return static_cast<std::uint32_t>(std::min(at, end) - a);
}

std::string render_arg(const vm::MemoryView& mem, Addr esp, const proto::Prototype& p,
                       std::size_t index, bool deref, std::uint32_t string_cap) {
  const proto::ArgDescriptor& arg = p.args.at(index);
  Addr slot = esp + proto::stack_offset(p, index);
  if (!arg.is_pointer()) {
    auto bytes = read_bytes(mem, slot, arg.size);
    return bytes ? prim_value(*bytes) : std::string(kInvalidMarker);
  }
  auto ptr = mem.read32(slot);
  if (!ptr) return kInvalidMarker;
  if (*ptr == 0) return "NULL";
  if (!deref) return hex32(*ptr);
  return render_pointee(mem, esp, p, *ptr, arg.pointee, string_cap);
}

std::vector<RenderedArg> parse_args_on_entry(Addr esp, const proto::Prototype& p,
                                             const vm::MemoryView& mem,
                                             std::uint32_t string_cap) {
  std::vector<RenderedArg> out;
  out.reserve(p.args.size());
  for (std::size_t i = 0; i < p.args.size(); ++i) {
    const proto::ArgDescriptor& arg = p.args[i];
    out.push_back({arg.name, arg.modifier, render_arg(mem, esp, p, i, arg.is_input(), string_cap)});
  }
  return out;
}

ExitValues parse_args_on_exit(Addr entry_esp, const proto::Prototype& p, std::uint32_t eax,
                              std::uint32_t edx, const vm::MemoryView& mem,
                              std::uint32_t string_cap) {
  ExitValues out;
  for (std::size_t i = 0; i < p.args.size(); ++i) {
    const proto::ArgDescriptor& arg = p.args[i];
    if (!arg.is_output()) continue;
    out.args.push_back({arg.name, arg.modifier, render_arg(mem, entry_esp, p, i, true, string_cap)});
  }
  out.ret = render_return(p, eax, edx);
  return out;
}

std::string render_return(const proto::Prototype& p, std::uint32_t eax, std::uint32_t edx) {
  char buf[32];
  if (p.return_size == 8)
    std::snprintf(buf, sizeof buf, "0x%08" PRIx32 "%08" PRIx32, edx, eax);
  else
    std::snprintf(buf, sizeof buf, "0x%08" PRIx32, eax);
  return buf;
}

}  // namespace apimon::monitor
