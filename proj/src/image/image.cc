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

#include "apimon/image.h"

#include <algorithm>
#include <cstdio>
#include <unordered_set>
#include <utility>

#include "apimon/error.h"

namespace apimon::image {
namespace {

std::string hex(Addr a) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08x", a);
  return buf;
}

bool is_export_entry(const ModuleImage& m, Addr a) {
  std::uint32_t rva = a - m.base;
  return std::any_of(m.exports.begin(), m.exports.end(), [&](const ExportEntry& e) {
    return !e.is_forwarder() && *e.rva == rva;
  });
}

}  // namespace

bool ModuleImage::in_code(Addr a) const {
  return std::any_of(code_ranges.begin(), code_ranges.end(),
                     [a](const AddrRange& r) { return r.contains(a); });
}

const FlowNode* ModuleImage::flow_at(Addr a) const {
  if (!extent().contains(a)) return nullptr;
  auto it = flow.find(a - base);
  return it == flow.end() ? nullptr : &it->second;
}

const ExportEntry* ModuleImage::find_export(std::string_view symbol) const {
  for (const ExportEntry& e : exports)
    if (e.symbol == symbol) return &e;
  return nullptr;
}

void ModuleSet::add(std::shared_ptr<const ModuleImage> module) {
  if (by_name_.count(module->name))
    throw LoadError("module '" + module->name + "' is already loaded");
  for (const auto& [name, other] : by_name_) {
    if (other->extent().overlaps(module->extent()))
      throw LoadError("module '" + module->name + "' overlaps '" + name + "'");
  }
  by_name_.emplace(module->name, std::move(module));
}

bool ModuleSet::remove(std::string_view name) {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return false;
  by_name_.erase(it);
  return true;
}

const ModuleImage* ModuleSet::find(std::string_view name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : it->second.get();
}

const ModuleImage* ModuleSet::containing(Addr a) const {
  for (const auto& [name, m] : by_name_)
    if (m->extent().contains(a)) return m.get();
  return nullptr;
}

std::vector<const ModuleImage*> ModuleSet::modules() const {
  std::vector<const ModuleImage*> out;
  for (const auto& [name, m] : by_name_) out.push_back(m.get());
  return out;
}

ResolvedExport resolve_export(const ModuleSet& modules, std::string_view module,
                              std::string_view symbol) {
  return resolve_export(
      [&modules](std::string_view name) { return modules.find(name); }, module,
      symbol);
}

ResolvedExport resolve_export(const ModuleLookup& find, std::string_view module,
                              std::string_view symbol) {
  std::set<std::pair<std::string, std::string>> seen;
  std::string mod(module), sym(symbol);
  while (true) {
    if (!seen.emplace(mod, sym).second)
      throw LoadError("forwarder cycle through " + mod + "!" + sym);
    const ModuleImage* m = find(mod);
    if (!m) throw LoadError("export " + mod + "!" + sym + " refers to unloaded module");
    const ExportEntry* e = m->find_export(sym);
    if (!e) throw LoadError("unknown export " + mod + "!" + sym);
    if (!e->is_forwarder()) return {m, sym, m->base + *e->rva};
    mod = e->forward_module;
    sym = e->forward_symbol;
  }
}

std::vector<HookPoint> collect_hook_points(const ModuleImage& module,
                                           const proto::PrototypeDb& db) {
  std::vector<HookPoint> out;
  std::map<std::uint32_t, std::size_t> by_rva;
  for (const ExportEntry& e : module.exports) {
    if (e.is_forwarder()) continue;
    Addr addr = module.base + *e.rva;
    if (!module.in_code(addr)) continue;  // data export
    const proto::Prototype* p = db.find(module.name, e.symbol);
    auto it = by_rva.find(*e.rva);
    if (it == by_rva.end()) {
      HookPoint hp;
      hp.address = addr;
      hp.module = module.name;
      hp.symbol = e.symbol;
      if (p) {
        hp.prototype = *p;
        hp.known_prototype = true;
      } else {
        hp.prototype.module = module.name;
        hp.prototype.symbol = e.symbol;
      }
      by_rva.emplace(*e.rva, out.size());
      out.push_back(std::move(hp));
    } else if (p && !out[it->second].known_prototype) {
      HookPoint& hp = out[it->second];
      hp.symbol = e.symbol;
      hp.prototype = *p;
      hp.known_prototype = true;
    }
  }
  return out;
}

std::vector<HookPoint> collect_hook_points(const ModuleSet& modules,
                                           const proto::PrototypeDb& db) {
  std::vector<HookPoint> out;
  for (const ModuleImage* m : modules.modules()) {
    auto hooks = collect_hook_points(*m, db);
    out.insert(out.end(), std::make_move_iterator(hooks.begin()),
               std::make_move_iterator(hooks.end()));
  }
  return out;
}

std::set<Addr> compute_exit_points(const ModuleSet& modules, Addr entry) {
  struct Item {
    Addr addr;
    std::vector<Addr> chain;  // export entries reached through tail jumps
  };
  std::set<Addr> exits;
  std::unordered_set<Addr> visited;
  std::vector<Item> work{{entry, {entry}}};

  while (!work.empty()) {
    Item item = std::move(work.back());
    work.pop_back();
    if (!visited.insert(item.addr).second) continue;

    const ModuleImage* m = modules.containing(item.addr);
    if (!m || !m->in_code(item.addr))
      throw LoadError("exit-point walk from " + hex(entry) + " reached " +
                      hex(item.addr) + " outside loaded code");
    const FlowNode* node = m->flow_at(item.addr);
    if (!node)
      throw LoadError("no instruction at " + hex(item.addr) + " in " + m->name);

    if (node->is_return) exits.insert(item.addr);
    for (Addr next : node->local) work.push_back({next, item.chain});
    if (node->tail) {
      Addr target = *node->tail;
      const ModuleImage* tm = modules.containing(target);
      if (!tm)
        throw LoadError("tail jump at " + hex(item.addr) + " into unloaded code " +
                        hex(target));
      std::vector<Addr> chain = item.chain;
      if (is_export_entry(*tm, target)) {
        if (std::find(chain.begin(), chain.end(), target) != chain.end())
          throw LoadError("tail-call cycle through " + hex(target));
        chain.push_back(target);
      }
      work.push_back({target, std::move(chain)});
    }
  }
  return exits;
}

}  // namespace apimon::image
