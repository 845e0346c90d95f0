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

// Instruction set of the micro-VM. Every instruction occupies kInsnSize
// bytes of module memory; the bytes are a fixed encoding used only so that
// code pages have observable contents (execution uses the decoded form).

#ifndef APIMON_VM_ISA_H_
#define APIMON_VM_ISA_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "apimon/types.h"

namespace apimon::vm {

inline constexpr std::uint32_t kInsnSize = 8;

enum class Opcode : std::uint8_t {
  kNop = 0x90,
  kCall = 0xe8,
  kTailJmp = 0xe9,
  kRet = 0xc2,
  kPush = 0x68,
  kPop = 0x58,
  kSet = 0xb8,
  kStore = 0x89,
  kLoad = 0x8b,
  kSyscall = 0x0f,
  kHalt = 0xf4,
  kJz = 0x74,
  kJnz = 0x75,
};

enum class Reg : std::uint8_t { kEax, kEdx, kEsp, kR0, kR1, kR2, kR3 };
inline constexpr int kRegCount = 7;

struct Operand {
  enum class Kind : std::uint8_t { kNone, kReg, kImm, kMem, kBytes };
  Kind kind = Kind::kNone;
  Reg reg = Reg::kEax;       // kReg, or base register of kMem
  bool has_base = false;     // kMem only
  std::uint32_t imm = 0;     // kImm value, or kMem displacement
  std::string bytes;         // kBytes payload

  static Operand none() { return {}; }
  static Operand of_reg(Reg r) {
    Operand o;
    o.kind = Kind::kReg;
    o.reg = r;
    return o;
  }
  static Operand of_imm(std::uint32_t v) {
    Operand o;
    o.kind = Kind::kImm;
    o.imm = v;
    return o;
  }
  static Operand of_mem(std::uint32_t disp) {
    Operand o;
    o.kind = Kind::kMem;
    o.imm = disp;
    return o;
  }
  static Operand of_mem(Reg base, std::uint32_t disp) {
    Operand o = of_mem(disp);
    o.reg = base;
    o.has_base = true;
    return o;
  }
  static Operand of_bytes(std::string b) {
    Operand o;
    o.kind = Kind::kBytes;
    o.bytes = std::move(b);
    return o;
  }

  friend bool operator==(const Operand&, const Operand&) = default;
};

// Operand roles per opcode:
//   CALL t | TAILJMP t          t: reg or imm
//   JZ r, t | JNZ r, t          branch when r is (not) zero
//   RET n                       a: imm (bytes popped after the return address)
//   PUSH s                      s: reg or imm
//   POP r
//   SET r, s                    s: reg or imm
//   STORE m, s                  m: mem; s: reg, imm (4 bytes) or bytes
//   LOAD r, m                   4-byte load
//   SYSCALL | HALT | NOP
struct Instruction {
  Opcode op = Opcode::kNop;
  Operand a;
  Operand b;

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

std::array<std::uint8_t, kInsnSize> encode(const Instruction& insn);

// Recovers opcode and primary immediate from encoded bytes; enough for
// epilogue walking (POP, RET n) without access to the decoded program.
struct DecodedHead {
  Opcode op;
  std::uint32_t imm;
};
std::optional<DecodedHead> decode_head(const std::array<std::uint8_t, kInsnSize>& bytes);

std::string_view mnemonic(Opcode op);
std::optional<Opcode> opcode_from_mnemonic(std::string_view m);
std::string_view reg_name(Reg r);
std::optional<Reg> reg_from_name(std::string_view name);

std::string to_string(const Instruction& insn);

}  // namespace apimon::vm

#endif  // APIMON_VM_ISA_H_
