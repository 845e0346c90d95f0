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

#include "apimon/proto.h"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "apimon/error.h"
#include "common/cursor.h"

namespace apimon::proto {
namespace {

bool valid_prim_size(std::uint32_t n) {
  return n == 1 || n == 2 || n == 4 || n == 8;
}

void validate(const Prototype& proto) {
  for (std::size_t i = 0; i < proto.args.size(); ++i) {
    const ArgDescriptor& arg = proto.args[i];
    if (!arg.is_pointer() || arg.pointee.kind != Pointee::Kind::kBuffer)
      continue;
    std::size_t k = arg.pointee.length_arg;
    if (k >= proto.args.size() || k == i ||
        proto.args[k].kind != ArgDescriptor::Kind::kPrim) {
      throw LoadError(proto.module + "!" + proto.symbol + ": argument '" +
                      arg.name + "' has dangling BUF length index " +
                      std::to_string(k));
    }
  }
}

Modifier parse_modifier(detail::Cursor& cur) {
  std::string word = cur.identifier("IN, OUT or INOUT");
  if (word == "IN") return Modifier::kIn;
  if (word == "OUT") return Modifier::kOut;
  if (word == "INOUT") return Modifier::kInOut;
  cur.fail("unknown modifier '" + word + "'");
}

std::uint32_t parse_prim_size(detail::Cursor& cur) {
  cur.expect("PRIM");
  std::uint32_t n = cur.number("primitive size");
  if (!valid_prim_size(n)) cur.fail("primitive size must be 1, 2, 4 or 8");
  return n;
}

ArgDescriptor parse_arg(detail::Cursor& cur) {
  ArgDescriptor arg;
  arg.modifier = parse_modifier(cur);
  arg.name = cur.identifier("argument name");
  cur.expect(":");
  if (cur.accept("PTR(")) {
    arg.kind = ArgDescriptor::Kind::kPointer;
    arg.size = 4;
    if (cur.accept("STRUCT")) {
      arg.pointee.kind = Pointee::Kind::kStruct;
      arg.pointee.size = cur.number("struct size");
      if (arg.pointee.size == 0) cur.fail("struct size must be positive");
    } else if (cur.accept("CSTR")) {
      arg.pointee.kind = Pointee::Kind::kCString;
    } else if (cur.accept("BUF")) {
      arg.pointee.kind = Pointee::Kind::kBuffer;
      cur.expect("len");
      cur.expect("=");
      arg.pointee.length_arg = cur.number("argument index");
    } else if (cur.peek() == 'P') {
      arg.pointee.kind = Pointee::Kind::kPrim;
      arg.pointee.size = parse_prim_size(cur);
    } else {
      cur.fail("expected PRIM<n>, STRUCT<n>, CSTR or BUF len=<k>");
    }
    cur.expect(")");
  } else {
    arg.kind = ArgDescriptor::Kind::kPrim;
    arg.size = parse_prim_size(cur);
  }
  return arg;
}

std::vector<ArgDescriptor> parse_args(detail::Cursor& cur) {
  cur.expect("args");
  cur.expect("=");
  cur.expect("[");
  std::vector<ArgDescriptor> args;
  if (cur.accept("]")) return args;
  do {
    args.push_back(parse_arg(cur));
  } while (cur.accept(","));
  cur.expect("]");
  return args;
}

void expect_end(detail::Cursor& cur) {
  if (!cur.done()) cur.fail("unexpected trailing text");
}

}  // namespace

bool Prototype::has_output_args() const {
  return std::any_of(args.begin(), args.end(),
                     [](const ArgDescriptor& a) { return a.is_output(); });
}

std::uint32_t footprint(const ArgDescriptor& arg) {
  if (arg.is_pointer()) return 4;
  return (arg.size + 3) & ~3u;
}

std::uint32_t stack_offset(const Prototype& proto, std::size_t index) {
  if (index >= proto.args.size())
    throw std::out_of_range("argument index " + std::to_string(index) +
                            " out of range for " + proto.symbol);
  std::uint32_t offset = 4;
  for (std::size_t i = 0; i < index; ++i) offset += footprint(proto.args[i]);
  return offset;
}

std::uint32_t ret_displacement(const Prototype& proto) {
  if (proto.convention == Convention::kCdecl) return 0;
  return std::accumulate(
      proto.args.begin(), proto.args.end(), std::uint32_t{0},
      [](std::uint32_t acc, const ArgDescriptor& a) { return acc + footprint(a); });
}

const Prototype* PrototypeDb::find(std::string_view module,
                                   std::string_view symbol) const {
  auto it = entries_.find(Key{std::string(module), std::string(symbol)});
  return it == entries_.end() ? nullptr : &it->second;
}

const Prototype* PrototypeDb::find_syscall(std::uint32_t ordinal) const {
  auto it = syscalls_.find(ordinal);
  return it == syscalls_.end() ? nullptr : &it->second;
}

void PrototypeDb::add(Prototype proto) {
  validate(proto);
  Key key{proto.module, proto.symbol};
  if (entries_.count(key))
    throw LoadError("duplicate prototype " + proto.module + "!" + proto.symbol);
  entries_.emplace(std::move(key), std::move(proto));
}

void PrototypeDb::add_syscall(std::uint32_t ordinal, Prototype proto) {
  validate(proto);
  if (syscalls_.count(ordinal))
    throw LoadError("duplicate syscall ordinal " + std::to_string(ordinal));
  syscalls_.emplace(ordinal, std::move(proto));
}

PrototypeDb parse_prototype_db(std::string_view text, std::size_t first_line) {
  PrototypeDb db;
  bool seen_strcap = false;
  std::size_t line_no = first_line;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = detail::strip_comment(text.substr(start, end - start));
    detail::Cursor cur(line, line_no);

    if (!cur.done()) {
      std::string keyword = cur.identifier("keyword");
      try {
        if (keyword == "strcap") {
          if (seen_strcap) cur.fail("duplicate strcap directive");
          seen_strcap = true;
          db.set_string_cap(cur.number("byte count"));
          expect_end(cur);
        } else if (keyword == "api") {
          Prototype p;
          p.module = cur.identifier("module name");
          cur.expect("!");
          p.symbol = cur.identifier("symbol name");
          std::string conv = cur.identifier("calling convention");
          if (conv == "stdcall") p.convention = Convention::kStdcall;
          else if (conv == "cdecl") p.convention = Convention::kCdecl;
          else cur.fail("calling convention must be stdcall or cdecl");
          cur.expect("ret");
          cur.expect("=");
          p.return_size = parse_prim_size(cur);
          if (p.return_size != 4 && p.return_size != 8)
            cur.fail("return size must be 4 or 8");
          p.args = parse_args(cur);
          expect_end(cur);
          db.add(std::move(p));
        } else if (keyword == "sys") {
          std::uint32_t ordinal = cur.number("syscall ordinal");
          Prototype p;
          p.symbol = cur.identifier("syscall name");
          p.convention = Convention::kStdcall;
          p.args = parse_args(cur);
          expect_end(cur);
          db.add_syscall(ordinal, std::move(p));
        } else {
          throw ParseError(line_no, 1, "unknown directive '" + keyword + "'");
        }
      } catch (const LoadError& e) {
        throw LoadError("line " + std::to_string(line_no) + ": " + e.what());
      }
    }

    if (end == text.size()) break;
    start = end + 1;
    ++line_no;
  }
  return db;
}

std::string_view to_string(Modifier m) {
  switch (m) {
    case Modifier::kIn: return "IN";
    case Modifier::kOut: return "OUT";
    case Modifier::kInOut: return "INOUT";
  }
  return "?";
}

std::string_view to_string(Convention c) {
  return c == Convention::kStdcall ? "stdcall" : "cdecl";
}

std::string kind_string(const ArgDescriptor& arg) {
  if (!arg.is_pointer()) return "PRIM" + std::to_string(arg.size);
  switch (arg.pointee.kind) {
    case Pointee::Kind::kPrim:
      return "PTR(PRIM" + std::to_string(arg.pointee.size) + ")";
    case Pointee::Kind::kStruct:
      return "PTR(STRUCT" + std::to_string(arg.pointee.size) + ")";
    case Pointee::Kind::kCString:
      return "PTR(CSTR)";
    case Pointee::Kind::kBuffer:
      return "PTR(BUF len=" + std::to_string(arg.pointee.length_arg) + ")";
  }
  return "?";
}

namespace {

std::string args_string(const std::vector<ArgDescriptor>& args) {
  std::string out = "args=[";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ", ";
    out += std::string(to_string(args[i].modifier)) + " " + args[i].name + ":" +
           kind_string(args[i]);
  }
  return out + "]";
}

}  // namespace

std::string serialize_prototype_db(const PrototypeDb& db) {
  std::string out = "strcap " + std::to_string(db.string_cap()) + "\n";
  for (const auto& [key, p] : db.entries()) {
    out += "api " + p.module + "!" + p.symbol + " " +
           std::string(to_string(p.convention)) + " ret=PRIM" +
           std::to_string(p.return_size) + " " + args_string(p.args) + "\n";
  }
  for (const auto& [ordinal, p] : db.syscalls()) {
    out += "sys " + std::to_string(ordinal) + " " + p.symbol + " " +
           args_string(p.args) + "\n";
  }
  return out;
}

}  // namespace apimon::proto
