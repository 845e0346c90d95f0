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

#include "apimon/vm/isa.h"

#include <cstdio>

namespace apimon::vm {
namespace {

struct OpName {
  Opcode op;
  std::string_view name;
};

constexpr OpName kOps[] = {
    {Opcode::kNop, "NOP"},         {Opcode::kCall, "CALL"},
    {Opcode::kTailJmp, "TAILJMP"}, {Opcode::kRet, "RET"},
    {Opcode::kPush, "PUSH"},       {Opcode::kPop, "POP"},
    {Opcode::kSet, "SET"},         {Opcode::kStore, "STORE"},
    {Opcode::kLoad, "LOAD"},       {Opcode::kSyscall, "SYSCALL"},
    {Opcode::kHalt, "HALT"},       {Opcode::kJz, "JZ"},
    {Opcode::kJnz, "JNZ"},
};

constexpr std::string_view kRegNames[kRegCount] = {"EAX", "EDX", "ESP", "R0",
                                                   "R1",  "R2",  "R3"};

std::uint32_t primary_imm(const Instruction& insn) {
  if (insn.a.kind == Operand::Kind::kImm || insn.a.kind == Operand::Kind::kMem)
    return insn.a.imm;
  if (insn.b.kind == Operand::Kind::kImm || insn.b.kind == Operand::Kind::kMem)
    return insn.b.imm;
  if (insn.b.kind == Operand::Kind::kBytes)
    return static_cast<std::uint32_t>(insn.b.bytes.size());
  return 0;
}

std::string operand_string(const Operand& o) {
  char buf[32];
  switch (o.kind) {
    case Operand::Kind::kNone:
      return "";
    case Operand::Kind::kReg:
      return std::string(reg_name(o.reg));
    case Operand::Kind::kImm:
      std::snprintf(buf, sizeof buf, "0x%x", o.imm);
      return buf;
    case Operand::Kind::kMem:
      if (!o.has_base) {
        std::snprintf(buf, sizeof buf, "[0x%x]", o.imm);
      } else {
        std::int32_t d = static_cast<std::int32_t>(o.imm);
        std::snprintf(buf, sizeof buf, "[%s%c0x%x]",
                      std::string(reg_name(o.reg)).c_str(), d < 0 ? '-' : '+',
                      d < 0 ? static_cast<std::uint32_t>(-static_cast<std::int64_t>(d))
                            : o.imm);
      }
      return buf;
    case Operand::Kind::kBytes:
      return "<" + std::to_string(o.bytes.size()) + " bytes>";
  }
  return "";
}

}  // namespace

std::array<std::uint8_t, kInsnSize> encode(const Instruction& insn) {
  std::array<std::uint8_t, kInsnSize> out{};
  out[0] = static_cast<std::uint8_t>(insn.op);
  out[1] = static_cast<std::uint8_t>((static_cast<unsigned>(insn.a.kind) << 4) |
                                     static_cast<unsigned>(insn.b.kind));
  out[2] = static_cast<std::uint8_t>(insn.a.reg) |
           static_cast<std::uint8_t>(insn.a.has_base ? 0x80 : 0);
  out[3] = static_cast<std::uint8_t>(insn.b.reg) |
           static_cast<std::uint8_t>(insn.b.has_base ? 0x80 : 0);
  std::uint32_t imm = primary_imm(insn);
  for (int i = 0; i < 4; ++i) out[4 + i] = static_cast<std::uint8_t>(imm >> (8 * i));
  return out;
}

std::optional<DecodedHead> decode_head(const std::array<std::uint8_t, kInsnSize>& bytes) {
  for (const OpName& e : kOps) {
    if (static_cast<std::uint8_t>(e.op) == bytes[0]) {
      std::uint32_t imm = 0;
      for (int i = 0; i < 4; ++i) imm |= std::uint32_t{bytes[4 + i]} << (8 * i);
      return DecodedHead{e.op, imm};
    }
  }
  return std::nullopt;
}

std::string_view mnemonic(Opcode op) {
  for (const OpName& e : kOps)
    if (e.op == op) return e.name;
  return "?";
}

std::optional<Opcode> opcode_from_mnemonic(std::string_view m) {
  if (m == "JMP") return Opcode::kTailJmp;
  for (const OpName& e : kOps)
    if (e.name == m) return e.op;
  return std::nullopt;
}

std::string_view reg_name(Reg r) { return kRegNames[static_cast<int>(r)]; }

std::optional<Reg> reg_from_name(std::string_view name) {
  for (int i = 0; i < kRegCount; ++i)
    if (kRegNames[i] == name) return static_cast<Reg>(i);
  return std::nullopt;
}

std::string to_string(const Instruction& insn) {
  std::string out(mnemonic(insn.op));
  std::string a = operand_string(insn.a), b = operand_string(insn.b);
  if (!a.empty()) out += " " + a;
  if (!b.empty()) out += ", " + b;
  return out;
}

}  // namespace apimon::vm
