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

// Loaded-module model: exports and forwarders, entry hook points, and
// exit-point discovery over the declared control flow of API bodies.

#ifndef APIMON_IMAGE_H_
#define APIMON_IMAGE_H_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "apimon/proto.h"
#include "apimon/types.h"

namespace apimon::image {

struct ExportEntry {
  std::string symbol;
  // Code (or data) export when set; forwarder otherwise.
  std::optional<std::uint32_t> rva;
  std::string forward_module;
  std::string forward_symbol;

  bool is_forwarder() const { return !rva.has_value(); }
};

// Control-flow facts about one instruction of a module, used by exit-point
// analysis. Successors are absolute addresses and may lie in other modules.
struct FlowNode {
  bool is_return = false;
  // Continuations that do not leave the current function: the next
  // instruction, the return site of a CALL, both arms of a branch.
  std::vector<Addr> local;
  // Tail jump target, if any.
  std::optional<Addr> tail;
};

struct ModuleImage {
  std::string name;
  Addr base = 0;
  std::uint32_t size = 0;
  bool is_system = false;
  // Absolute, sorted, disjoint.
  std::vector<AddrRange> code_ranges;
  std::vector<ExportEntry> exports;
  // Keyed by RVA.
  std::map<std::uint32_t, FlowNode> flow;
  // Absolute addresses where an exit hook cannot be placed.
  std::set<Addr> no_exit_hook;

  AddrRange extent() const { return {base, base + size}; }
  bool in_code(Addr a) const;
  const FlowNode* flow_at(Addr a) const;
  const ExportEntry* find_export(std::string_view symbol) const;
};

// The modules mapped into one process, addressable by name and address.
class ModuleSet {
 public:
  ModuleSet() = default;

  // Throws LoadError on a duplicate name or overlapping extent.
  void add(std::shared_ptr<const ModuleImage> module);
  bool remove(std::string_view name);

  const ModuleImage* find(std::string_view name) const;
  const ModuleImage* containing(Addr a) const;
  std::vector<const ModuleImage*> modules() const;

 private:
  std::map<std::string, std::shared_ptr<const ModuleImage>, std::less<>> by_name_;
};

struct ResolvedExport {
  const ModuleImage* module = nullptr;
  std::string symbol;
  Addr address = 0;
};

// Follows forwarders transitively. Throws LoadError for an unknown symbol,
// a forwarder cycle, or a forwarder into a module that is not loaded.
ResolvedExport resolve_export(const ModuleSet& modules, std::string_view module,
                              std::string_view symbol);

using ModuleLookup = std::function<const ModuleImage*(std::string_view)>;
ResolvedExport resolve_export(const ModuleLookup& find, std::string_view module,
                              std::string_view symbol);

struct HookPoint {
  Addr address = 0;
  std::string module;
  std::string symbol;
  // Copy of the database entry, or a symbol-only prototype with no
  // arguments when the database does not know the export.
  proto::Prototype prototype;
  bool known_prototype = false;
};

// One hook per unique non-forwarder export RVA that falls in code. The
// symbol is the first alias (declaration order) with a known prototype,
// else the first alias.
std::vector<HookPoint> collect_hook_points(const ModuleImage& module,
                                           const proto::PrototypeDb& db);
std::vector<HookPoint> collect_hook_points(const ModuleSet& modules,
                                           const proto::PrototypeDb& db);

// Every RET reachable from `entry` without returning to the caller,
// following tail jumps across modules. Throws LoadError when the walk
// reaches code outside the loaded modules or a tail jump re-enters an
// export already on the current chain.
std::set<Addr> compute_exit_points(const ModuleSet& modules, Addr entry);

}  // namespace apimon::image

#endif  // APIMON_IMAGE_H_
