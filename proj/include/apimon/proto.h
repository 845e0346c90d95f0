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

// Prototype database: calling convention and argument layout for every
// monitored API and syscall. Layout follows the 32-bit flat model: each
// argument occupies a whole number of 4-byte stack slots and the first
// argument sits right above the return address.

#ifndef APIMON_PROTO_H_
#define APIMON_PROTO_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace apimon::proto {

enum class Modifier { kIn, kOut, kInOut };
enum class Convention { kStdcall, kCdecl };

// What a pointer argument refers to.
struct Pointee {
  enum class Kind { kPrim, kStruct, kCString, kBuffer };
  Kind kind = Kind::kPrim;
  // Byte size for kPrim/kStruct; unused otherwise.
  std::uint32_t size = 0;
  // For kBuffer: index of the argument that carries the length.
  std::size_t length_arg = 0;

  friend bool operator==(const Pointee&, const Pointee&) = default;
};

struct ArgDescriptor {
  enum class Kind { kPrim, kPointer };

  std::string name;
  Modifier modifier = Modifier::kIn;
  Kind kind = Kind::kPrim;
  std::uint32_t size = 4;  // kPrim only: 1, 2, 4 or 8
  Pointee pointee;         // kPointer only

  bool is_pointer() const { return kind == Kind::kPointer; }
  bool is_input() const { return modifier != Modifier::kOut; }
  bool is_output() const { return modifier != Modifier::kIn; }

  friend bool operator==(const ArgDescriptor&, const ArgDescriptor&) = default;
};

struct Prototype {
  std::string module;
  std::string symbol;
  Convention convention = Convention::kStdcall;
  std::vector<ArgDescriptor> args;
  std::uint32_t return_size = 4;  // 4 or 8

  bool has_output_args() const;

  friend bool operator==(const Prototype&, const Prototype&) = default;
};

// Bytes an argument takes on the stack.
std::uint32_t footprint(const ArgDescriptor& arg);

// Offset of argument `index` from the ESP value seen at API entry, i.e. with
// the return address at offset 0. Throws std::out_of_range for a bad index.
std::uint32_t stack_offset(const Prototype& proto, std::size_t index);

// Bytes the callee pops in addition to the return address (the N of
// `ret N`): the total argument footprint for stdcall, zero for cdecl.
std::uint32_t ret_displacement(const Prototype& proto);

inline constexpr std::uint32_t kDefaultStringCap = 64;

class PrototypeDb {
 public:
  using Key = std::pair<std::string, std::string>;  // (module, symbol)

  const Prototype* find(std::string_view module, std::string_view symbol) const;
  const Prototype* find_syscall(std::uint32_t ordinal) const;

  // Both throw LoadError on duplicates or an invalid buffer length index.
  void add(Prototype proto);
  void add_syscall(std::uint32_t ordinal, Prototype proto);

  const std::map<Key, Prototype>& entries() const { return entries_; }
  const std::map<std::uint32_t, Prototype>& syscalls() const {
    return syscalls_;
  }

  std::uint32_t string_cap() const { return string_cap_; }
  void set_string_cap(std::uint32_t cap) { string_cap_ = cap; }

  friend bool operator==(const PrototypeDb&, const PrototypeDb&) = default;

 private:
  std::map<Key, Prototype> entries_;
  std::map<std::uint32_t, Prototype> syscalls_;
  std::uint32_t string_cap_ = kDefaultStringCap;
};

// Parses the line-oriented prototype format:
//
//   strcap 64
//   api k32!Beep stdcall ret=PRIM4 args=[IN freq:PRIM4, IN dur:PRIM4]
//   sys 1 NtCreateThreadEx args=[IN pid:PRIM4, OUT tid:PTR(PRIM4)]
//
// `first_line` offsets reported line numbers when the text is embedded in a
// larger document. Throws ParseError or LoadError.
PrototypeDb parse_prototype_db(std::string_view text, std::size_t first_line = 1);

// Inverse of parse_prototype_db (canonical spelling, sorted by key).
std::string serialize_prototype_db(const PrototypeDb& db);

std::string_view to_string(Modifier m);
std::string_view to_string(Convention c);
// Kind spelling as used in the text format, e.g. "PTR(BUF len=2)".
std::string kind_string(const ArgDescriptor& arg);

}  // namespace apimon::proto

#endif  // APIMON_PROTO_H_
