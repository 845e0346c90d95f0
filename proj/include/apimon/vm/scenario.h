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

// Scenario documents: prototype DB, module descriptors with assembler-style
// code listings, and process/thread declarations.
//
//   name forwarders
//   quantum 1
//
//   [protos]
//   api k32!Beep stdcall ret=PRIM4 args=[IN freq:PRIM4, IN dur:PRIM4]
//
//   [module k32]
//   base 0x70000000
//   size 0x1000
//   system
//   export Beep = beep
//   text 0x100
//   beep:
//     SET EAX, 1
//     RET 8
//
//   [module prog]
//   base 0x00400000
//   size 0x1000
//   text 0x0
//   main:
//     PUSH 20
//     PUSH 10
//     CALL k32!Beep
//     HALT
//
//   [process 1]
//   root
//   load prog k32
//   stack 0x00100000 0x1000 2
//   thread prog:main
//
// Address expressions: a number, a label of the current module, `mod:label`,
// or `mod!export` (forwarders resolved), each optionally followed by +n/-n.

#ifndef APIMON_VM_SCENARIO_H_
#define APIMON_VM_SCENARIO_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "apimon/image.h"
#include "apimon/proto.h"
#include "apimon/types.h"
#include "apimon/vm/isa.h"

namespace apimon::vm {

using CodeMap = std::map<std::uint32_t, Instruction>;  // keyed by RVA

struct ModuleDecl {
  std::shared_ptr<const image::ModuleImage> image;
  CodeMap code;
  std::vector<std::pair<std::uint32_t, std::string>> data;  // (rva, bytes)
};

struct ProcessDecl {
  Pid pid = 0;
  bool root = false;
  // Started only when another process creates it.
  bool dormant = false;
  std::vector<std::string> modules;  // load order
  AddrRange stack_area;
  std::uint32_t stack_slot = 0;
  std::vector<Addr> threads;  // entry points, one stack slot each
  std::vector<AddrRange> valid;
  std::vector<std::pair<Addr, std::string>> init;  // initial memory contents
};

struct Scenario {
  std::string name;
  proto::PrototypeDb prototypes;
  std::map<std::string, ModuleDecl, std::less<>> modules;
  std::vector<ProcessDecl> processes;
  std::uint32_t quantum = 1;
  std::uint64_t budget = 1'000'000;
  // Tampers with the stack on purpose; excluded from oracle comparisons.
  bool adversarial = false;

  Pid root() const;
  const ProcessDecl* process(Pid pid) const;
  const ModuleDecl* module(std::string_view name) const;
};

// Throws ParseError (with location) or LoadError.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario_file(const std::filesystem::path& path);

}  // namespace apimon::vm

#endif  // APIMON_VM_SCENARIO_H_
