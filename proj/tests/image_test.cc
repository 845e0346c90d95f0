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

#include <gtest/gtest.h>

#include <functional>
#include <memory>
#include <random>

#include "apimon/error.h"
#include "apimon/image.h"

namespace apimon::image {
namespace {

ExportEntry code_export(std::string sym, std::uint32_t rva) {
  ExportEntry e;
  e.symbol = std::move(sym);
  e.rva = rva;
  return e;
}

ExportEntry forwarder(std::string sym, std::string mod, std::string target) {
  ExportEntry e;
  e.symbol = std::move(sym);
  e.forward_module = std::move(mod);
  e.forward_symbol = std::move(target);
  return e;
}

std::shared_ptr<ModuleImage> module(std::string name, Addr base, bool system = true) {
  auto m = std::make_shared<ModuleImage>();
  m->name = std::move(name);
  m->base = base;
  m->size = 0x1000;
  m->is_system = system;
  m->code_ranges = {{base, base + 0x800}};
  return m;
}

FlowNode ret() {
  FlowNode n;
  n.is_return = true;
  return n;
}

FlowNode next(Addr a) {
  FlowNode n;
  n.local = {a};
  return n;
}

FlowNode jump(Addr target) {
  FlowNode n;
  n.tail = target;
  return n;
}

class ForwarderChain : public ::testing::Test {
 protected:
  void SetUp() override {
    auto a = module("A", 0x10000000);
    a->exports = {forwarder("Open", "B", "Open")};
    auto b = module("B", 0x20000000);
    b->exports = {forwarder("Open", "C", "OpenImpl")};
    auto c = module("C", 0x30000000);
    c->exports = {code_export("OpenImpl", 0x40)};
    set.add(a);
    set.add(b);
    set.add(c);
  }
  ModuleSet set;
};

TEST_F(ForwarderChain, ResolvesToFinalTarget) {
  ResolvedExport r = resolve_export(set, "A", "Open");
  ASSERT_NE(r.module, nullptr);
  EXPECT_EQ(r.module->name, "C");
  EXPECT_EQ(r.symbol, "OpenImpl");
  EXPECT_EQ(r.address, 0x30000040u);
}

TEST_F(ForwarderChain, Idempotent) {
  ResolvedExport first = resolve_export(set, "A", "Open");
  ResolvedExport again = resolve_export(set, first.module->name, first.symbol);
  EXPECT_EQ(again.address, first.address);
  EXPECT_EQ(again.symbol, first.symbol);
}

TEST_F(ForwarderChain, UnloadedTargetFails) {
  set.remove("C");
  EXPECT_THROW(resolve_export(set, "A", "Open"), LoadError);
}

TEST_F(ForwarderChain, UnknownSymbolFails) {
  EXPECT_THROW(resolve_export(set, "A", "Close"), LoadError);
}

TEST(ResolveExport, CycleFails) {
  ModuleSet set;
  auto x = module("X", 0x10000000);
  x->exports = {forwarder("F", "Y", "G")};
  auto y = module("Y", 0x20000000);
  y->exports = {forwarder("G", "X", "F")};
  set.add(x);
  set.add(y);
  EXPECT_THROW(resolve_export(set, "X", "F"), LoadError);
}

TEST(ModuleSet, RejectsOverlapAndDuplicates) {
  ModuleSet set;
  set.add(module("X", 0x10000000));
  EXPECT_THROW(set.add(module("X", 0x20000000)), LoadError);
  EXPECT_THROW(set.add(module("Y", 0x10000800)), LoadError);
  EXPECT_EQ(set.containing(0x10000fff)->name, "X");
  EXPECT_EQ(set.containing(0x10001000), nullptr);
}

TEST(HookPoints, AliasesShareOneHook) {
  auto m = module("K", 0x10000000);
  m->exports = {code_export("Alias", 0x10), code_export("Real", 0x10),
                code_export("Other", 0x20)};
  proto::PrototypeDb db;
  proto::Prototype p;
  p.module = "K";
  p.symbol = "Real";
  db.add(p);
  auto hooks = collect_hook_points(*m, db);
  ASSERT_EQ(hooks.size(), 2u);
  EXPECT_EQ(hooks[0].address, 0x10000010u);
  EXPECT_EQ(hooks[0].symbol, "Real");
  EXPECT_TRUE(hooks[0].known_prototype);
  EXPECT_FALSE(hooks[1].known_prototype);
  EXPECT_TRUE(hooks[1].prototype.args.empty());
}

TEST(HookPoints, ForwardersAndDataExportsAreSkipped) {
  auto m = module("F", 0x10000000);
  m->exports = {forwarder("A", "K", "A"), forwarder("B", "K", "B"),
                code_export("Table", 0x900)};
  EXPECT_TRUE(collect_hook_points(*m, proto::PrototypeDb{}).empty());
}

TEST(HookPoints, CountIsDistinctCodeRvasAcrossModules) {
  std::mt19937 rng(3);
  for (int round = 0; round < 100; ++round) {
    ModuleSet set;
    std::size_t expected = 0;
    for (int k = 0; k < 2; ++k) {
      auto m = module("M" + std::to_string(k), 0x10000000u * (k + 1));
      std::set<std::uint32_t> rvas;
      int n = std::uniform_int_distribution<int>(0, 12)(rng);
      for (int i = 0; i < n; ++i) {
        int kind = std::uniform_int_distribution<int>(0, 2)(rng);
        std::string sym = "s" + std::to_string(i);
        if (kind == 0) {
          m->exports.push_back(forwarder(sym, "Z", "z"));
        } else {
          std::uint32_t rva = 0x10 * std::uniform_int_distribution<std::uint32_t>(0, 0x8f)(rng);
          m->exports.push_back(code_export(sym, rva));
          if (rva < 0x800) rvas.insert(rva);
        }
      }
      expected += rvas.size();
      set.add(m);
    }
    EXPECT_EQ(collect_hook_points(set, proto::PrototypeDb{}).size(), expected);
  }
}

TEST(ExitPoints, StraightLine) {
  ModuleSet set;
  auto k = module("K", 0x10000000);
  k->exports = {code_export("F", 0)};
  k->flow = {{0, next(0x10000008)}, {8, next(0x10000010)}, {0x10, ret()}};
  set.add(k);
  EXPECT_EQ(compute_exit_points(set, 0x10000000), (std::set<Addr>{0x10000010}));
}

TEST(ExitPoints, FollowsTailJumpsAcrossModules) {
  ModuleSet set;
  auto a = module("A", 0x10000000);
  a->exports = {code_export("F", 0)};
  a->flow = {{0, jump(0x20000000)}};
  auto b = module("B", 0x20000000);
  b->exports = {code_export("G", 0)};
  b->flow = {{0, next(0x20000008)}, {8, jump(0x30000000)}};
  auto c = module("C", 0x30000000);
  c->exports = {code_export("H", 0)};
  c->flow = {{0, ret()}};
  set.add(a);
  set.add(b);
  set.add(c);
  EXPECT_EQ(compute_exit_points(set, 0x10000000), (std::set<Addr>{0x30000000}));
}

TEST(ExitPoints, BranchWithTwoReturns) {
  ModuleSet set;
  auto k = module("K", 0x10000000);
  k->exports = {code_export("F", 0)};
  FlowNode branch;
  branch.local = {0x10000008, 0x10000010};
  k->flow = {{0, branch}, {8, ret()}, {0x10, ret()}};
  set.add(k);
  EXPECT_EQ(compute_exit_points(set, 0x10000000),
            (std::set<Addr>{0x10000008, 0x10000010}));
}

TEST(ExitPoints, WalkOutsideCodeFails) {
  ModuleSet set;
  auto k = module("K", 0x10000000);
  k->exports = {code_export("F", 0)};
  k->flow = {{0, jump(0x50000000)}};
  set.add(k);
  EXPECT_THROW(compute_exit_points(set, 0x10000000), LoadError);
}

TEST(ExitPoints, TailCallCycleFails) {
  ModuleSet set;
  auto k = module("K", 0x10000000);
  k->exports = {code_export("F", 0), code_export("G", 0x10)};
  k->flow = {{0, jump(0x10000010)}, {0x10, jump(0x10000000)}};
  set.add(k);
  EXPECT_THROW(compute_exit_points(set, 0x10000000), LoadError);
}

// Random acyclic graphs against a recursive reachability walk.
TEST(ExitPoints, MatchesExhaustiveWalkOnRandomGraphs) {
  std::mt19937 rng(19);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  for (int round = 0; round < 300; ++round) {
    ModuleSet set;
    auto k = module("K", 0x10000000);
    k->exports = {code_export("F", 0)};
    int n = pick(1, 30);
    for (int i = 0; i < n; ++i) {
      FlowNode node;
      Addr self = 0x10000000 + 8 * i;
      int later = n - 1 - i;
      if (later == 0) {
        node.is_return = true;
      } else {
        int kind = pick(0, 3);
        auto target = [&] { return self + 8 * pick(1, later); };
        if (kind == 0) node.is_return = true;
        else if (kind == 1) node.local = {target()};
        else if (kind == 2) node.local = {target(), target()};
        else node.tail = target();
      }
      k->flow.emplace(8 * i, node);
    }
    set.add(k);

    std::set<Addr> expect;
    std::set<Addr> seen;
    std::function<void(Addr)> walk = [&](Addr a) {
      if (!seen.insert(a).second) return;
      const FlowNode& node = k->flow.at(a - k->base);
      if (node.is_return) expect.insert(a);
      for (Addr s : node.local) walk(s);
      if (node.tail) walk(*node.tail);
    };
    walk(0x10000000);
    EXPECT_EQ(compute_exit_points(set, 0x10000000), expect);
  }
}

}  // namespace
}  // namespace apimon::image
