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

// Runs every acceptance criterion and prints one PASS/FAIL line for each.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <variant>

#include "apimon/cli/run.h"
#include "apimon/cli/trace_io.h"
#include "apimon/monitor/args.h"
#include "apimon/monitor/monitor.h"
#include "apimon/range_blacklist.h"
#include "apimon/vm/machine.h"
#include "apimon/vm/oracle.h"
#include "support/fake_machine.h"
#include "support/harness.h"
#include "support/scenario_gen.h"

namespace apimon {
namespace {

using Clock = std::chrono::steady_clock;
using monitor::EspCheck;
using monitor::MonitorConfig;
using monitor::Strategy;

// Collects failure notes for one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (notes_.size() < 5) notes_.push_back(what);
  }
  bool ok() const { return failures_ == 0; }
  std::string summary() const {
    std::string out = std::to_string(failures_) + " failure(s)";
    for (const std::string& n : notes_) out += "; " + n;
    return out;
  }

 private:
  int failures_ = 0;
  std::vector<std::string> notes_;
};

std::vector<vm::Scenario> bundled() {
  std::vector<vm::Scenario> out;
  for (const auto& p : testing::bundled_scenarios()) out.push_back(vm::load_scenario_file(p));
  return out;
}

std::string detail(const vm::Scenario& s, const MonitorConfig& c) {
  return s.name + " " + testing::describe(c);
}

// 1. Oracle equivalence.
std::string oracle_equivalence(Check& check) {
  auto start = Clock::now();
  std::size_t scenarios = 0, runs = 0;
  auto verify = [&](const vm::Scenario& s) {
    if (s.adversarial) return;
    ++scenarios;
    auto truth = vm::ground_truth_trace(s, s.quantum, s.budget);
    for (const auto& cfg : testing::all_configs()) {
      ++runs;
      auto out = testing::run(s, cfg);
      auto diff = cli::diff_traces(out.records, truth.records, cli::DiffMode::kIdentity);
      check.expect(diff.empty(), detail(s, cfg) + ": " + std::to_string(diff.size()) +
                                     " differing records");
      check.expect(out.report.status == vm::RunReport::Status::kHalted,
                   detail(s, cfg) + ": did not halt");
    }
  };
  for (const vm::Scenario& s : bundled()) verify(s);
  std::size_t max_threads = 0;
  for (std::uint32_t seed = 0; seed < 500; ++seed) {
    vm::Scenario s = vm::parse_scenario(testing::generate_scenario(seed));
    std::size_t threads = 0;
    for (const auto& p : s.processes) threads += p.threads.size();
    max_threads = std::max(max_threads, threads);
    verify(s);
  }
  double secs = std::chrono::duration<double>(Clock::now() - start).count();
  check.expect(secs < 60.0, "took " + std::to_string(secs) + " s");
  char buf[128];
  std::snprintf(buf, sizeof buf, "%zu scenarios (up to %zu initial threads), %zu runs, %.2f s",
                scenarios, max_threads, runs, secs);
  return buf;
}

// 2. Strategy agreement.
std::string strategy_agreement(Check& check) {
  std::size_t compared = 0, byte_equal = 0;
  auto verify = [&](const vm::Scenario& s) {
    if (s.adversarial) return;
    for (EspCheck esp : {EspCheck::kExact, EspCheck::kRelaxed}) {
      auto a = testing::run(s, {Strategy::kExitPoints, esp, false});
      auto b = testing::run(s, {Strategy::kReturnAddress, esp, false});
      auto diff = cli::diff_traces(a.records, b.records, cli::DiffMode::kFull);
      ++compared;
      check.expect(diff.empty(), s.name + ": " + std::to_string(diff.size()) + " differences");
      check.expect(a.stats == b.stats, s.name + ": stats differ");
      std::ostringstream ta, tb;
      cli::write_trace(ta, a.records);
      cli::write_trace(tb, b.records);
      if (ta.str() == tb.str()) ++byte_equal;
    }
  };
  for (const vm::Scenario& s : bundled()) verify(s);
  for (std::uint32_t seed = 0; seed < 500; ++seed)
    verify(vm::parse_scenario(testing::generate_scenario(seed)));
  return std::to_string(compared) + " pairs, " + std::to_string(byte_equal) +
         " byte-identical before per-thread grouping";
}

// Forwards events to the monitor and inspects each hit at one address.
class JoinProbe final : public vm::EventSink {
 public:
  JoinProbe(monitor::Monitor& mon, Addr join) : mon_(mon), join_(join) {}

  void on_event(const vm::VmEvent& ev, vm::MachineAccess& machine) override {
    const auto* hit = std::get_if<vm::BreakpointHit>(&ev);
    if (!hit || hit->addr != join_) {
      mon_.on_event(ev, machine);
      return;
    }
    auto snapshot = [&] {
      std::vector<std::pair<Addr, Addr>> out;
      if (const auto* ss = mon_.shadow_stack(hit->pid, hit->tid))
        for (const auto& e : ss->entries()) out.emplace_back(e.ra, e.esp);
      return out;
    };
    auto before = snapshot();
    std::size_t records = mon_.records().size();
    mon_.on_event(ev, machine);
    // R0 is zero only on the path that jumps to the join point.
    if (hit->regs.r[0] == 0) {
      ++jump_visits;
      if (!before.empty()) ++nonempty_visits;
      if (snapshot() != before) ++changed;
      spurious_records += mon_.records().size() - records;
    } else {
      ++return_visits;
    }
  }

  int jump_visits = 0, nonempty_visits = 0, return_visits = 0, changed = 0;
  std::size_t spurious_records = 0;

 private:
  monitor::Monitor& mon_;
  Addr join_;
};

// 3. Join-point return address.
std::string join_point(Check& check) {
  vm::Scenario s = testing::load_bundled("join_point");
  const vm::ModuleDecl* prog = s.module("prog");
  constexpr std::uint32_t kJoinRva = 0x58;
  check.expect(prog->code.at(kJoinRva - vm::kInsnSize).op == vm::Opcode::kCall,
               "join point layout changed");
  Addr join = prog->image->base + kJoinRva;
  auto truth = vm::ground_truth_trace(s, s.quantum, s.budget);
  int probed = 0;
  for (const auto& cfg : testing::all_configs()) {
    vm::Machine machine(s, s.quantum);
    monitor::Monitor mon(s.prototypes, s.root(), cfg);
    JoinProbe probe(mon, join);
    machine.add_sink(&probe);
    machine.run(s.budget);
    auto diff = cli::diff_traces(mon.records(), truth.records, cli::DiffMode::kIdentity);
    check.expect(diff.empty(), testing::describe(cfg) + ": trace differs from ground truth");
    check.expect(probe.spurious_records == 0, testing::describe(cfg) + ": spurious record");
    check.expect(probe.changed == 0, testing::describe(cfg) + ": shadow stack changed");
    if (cfg.strategy == Strategy::kReturnAddress) {
      check.expect(probe.jump_visits >= 1 && probe.nonempty_visits >= 1,
                   testing::describe(cfg) + ": join point never reached by a jump");
      check.expect(probe.return_visits >= 1,
                   testing::describe(cfg) + ": join point never reached by a return");
      probed += probe.jump_visits;
    }
  }
  return std::to_string(probed) + " jump visits inspected";
}

// 4. Exit acceptance arithmetic.
std::string exit_arithmetic(Check& check) {
  constexpr Addr kApi = 0x70000100, kRa = 0x00400010, kEsp = 0x00100800;
  auto module = std::make_shared<image::ModuleImage>();
  module->name = "K";
  module->base = 0x70000000;
  module->size = 0x1000;
  module->is_system = true;
  module->code_ranges = {{0x70000000, 0x70000800}};
  image::ExportEntry e;
  e.symbol = "F";
  e.rva = kApi - module->base;
  module->exports = {e};

  const std::uint32_t sizes[] = {1, 2, 4, 8};
  std::size_t cases = 0;
  std::vector<std::uint32_t> shape;
  std::function<void(int)> walk = [&](int remaining) {
    for (proto::Convention conv : {proto::Convention::kStdcall, proto::Convention::kCdecl}) {
      proto::Prototype p;
      p.module = "K";
      p.symbol = "F";
      p.convention = conv;
      std::uint32_t expected = 4;
      for (std::size_t i = 0; i < shape.size(); ++i) {
        proto::ArgDescriptor a;
        a.name = "a" + std::to_string(i);
        a.size = shape[i];
        p.args.push_back(a);
        if (conv == proto::Convention::kStdcall) expected += (shape[i] + 3) / 4 * 4;
      }
      proto::PrototypeDb db;
      db.add(p);
      for (EspCheck esp_check : {EspCheck::kExact}) {
        testing::FakeMachine machine;
        machine.memories[1].map({kEsp - 0x100, kEsp + 0x100});
        machine.memories[1].write32(kEsp, kRa);
        monitor::Monitor mon(db, 1, {Strategy::kReturnAddress, esp_check, false});
        mon.on_module_load(machine, 1, module);
        vm::Registers regs;
        regs.eip = kApi;
        regs.esp = kEsp;
        mon.on_entry(machine, 1, 1, regs, mon.binding_at(1, kApi));
        ++cases;
        std::optional<Addr> accepted;
        for (Addr esp = kEsp; esp <= kEsp + 4 + 64 && !accepted; esp += 4) {
          vm::Registers at;
          at.eip = kRa;
          at.esp = esp;
          mon.on_exit_b(machine, 1, 1, at);
          if (mon.shadow_stack(1, 1)->empty()) accepted = esp;
        }
        check.expect(accepted == kEsp + expected,
                     std::to_string(shape.size()) + " args " +
                         std::string(proto::to_string(conv)) + ": accepted at wrong ESP");
        check.expect(mon.records().size() == 2, "exit record missing");
      }
    }
    if (remaining == 0) return;
    for (std::uint32_t s : sizes) {
      shape.push_back(s);
      walk(remaining - 1);
      shape.pop_back();
    }
  };
  walk(6);
  return std::to_string(cases) + " prototypes";
}

// 5. Tail-call discard.
std::string tail_call(Check& check) {
  vm::Scenario s = testing::load_bundled("tail_call");
  for (const auto& cfg : testing::all_configs()) {
    auto out = testing::run(s, cfg);
    auto entries = testing::count_kind(out.records, RecordKind::kApiEntry);
    check.expect(entries == 1, testing::describe(cfg) + ": " + std::to_string(entries) +
                                   " entries");
    check.expect(!out.records.empty() && out.records[0].symbol == "Outer",
                 testing::describe(cfg) + ": first record is not the outer API");
    check.expect(out.counters.dll_internal_tail == 1,
                 testing::describe(cfg) + ": tail counter " +
                     std::to_string(out.counters.dll_internal_tail));
  }
  return "entries=1, dllInternalTail=1";
}

// 6. Blacklist correctness and scale.
std::string blacklist_scale(Check& check) {
  std::mt19937 rng(2024);
  std::uniform_int_distribution<std::uint32_t> any;
  std::set<Addr> points;
  while (points.size() < 20000) points.insert(any(rng));
  std::vector<AddrRange> ranges;
  for (auto it = points.begin(); it != points.end(); std::advance(it, 2))
    ranges.push_back({*it, *std::next(it)});
  std::vector<AddrRange> shuffled = ranges;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  image::RangeBlacklist bl;
  for (const AddrRange& r : shuffled) bl.add(r);

  std::vector<Addr> probes;
  probes.reserve(1'000'000);
  while (probes.size() < 1'000'000) {
    const AddrRange& r = ranges[any(rng) % ranges.size()];
    switch (any(rng) % 5) {
      case 0: probes.push_back(r.lo); break;
      case 1: probes.push_back(r.hi - 1); break;
      case 2: probes.push_back(r.hi); break;
      case 3: probes.push_back(r.lo - 1); break;
      default: probes.push_back(any(rng)); break;
    }
  }

  // Sweep oracle: one forward pass over probes and ranges, both sorted.
  std::vector<std::size_t> order(probes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return probes[x] < probes[y];
  });
  std::size_t mismatches = 0, hits = 0, k = 0;
  for (std::size_t i : order) {
    Addr a = probes[i];
    while (k < ranges.size() && ranges[k].hi <= a) ++k;
    bool expect = k < ranges.size() && ranges[k].lo <= a;
    hits += expect;
    if (bl.contains(a) != expect) ++mismatches;
  }
  // Plain linear scan on a sample, as a second opinion on the sweep.
  auto linear = [&](Addr a) {
    for (const AddrRange& r : ranges)
      if (a >= r.lo && a < r.hi) return true;
    return false;
  };
  for (std::size_t i = 0; i < 20000; ++i)
    if (bl.contains(probes[i]) != linear(probes[i])) ++mismatches;
  check.expect(mismatches == 0, std::to_string(mismatches) + " mismatches");

  constexpr std::size_t kBatch = 2000;
  std::vector<double> ratios;
  volatile std::size_t sink = 0;
  for (int rep = 0; rep < 7; ++rep) {
    std::size_t base = rep * kBatch;
    auto t0 = Clock::now();
    for (std::size_t i = 0; i < kBatch; ++i) sink = sink + bl.contains(probes[base + i]);
    auto t1 = Clock::now();
    for (std::size_t i = 0; i < kBatch; ++i) sink = sink + linear(probes[base + i]);
    auto t2 = Clock::now();
    double tree = std::chrono::duration<double>(t1 - t0).count();
    double scan = std::chrono::duration<double>(t2 - t1).count();
    ratios.push_back(scan / std::max(tree, 1e-9));
  }
  std::sort(ratios.begin(), ratios.end());
  double median = ratios[ratios.size() / 2];
  check.expect(median > 10.0, "median speedup only " + std::to_string(median));
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu ranges, %zu probes (%zu inside), median speedup %.0fx",
                bl.size(), probes.size(), hits, median);
  return buf;
}

// 7. Syscall relevance.
std::string syscall_relevance(Check& check) {
  struct Case {
    const char* stem;
    bool logged;
  };
  for (const Case& c : {Case{"direct_syscall", true}, Case{"wrapper_syscall", true},
                        Case{"internal_syscall", false}}) {
    vm::Scenario s = testing::load_bundled(c.stem);
    for (const auto& cfg : testing::all_configs()) {
      auto out = testing::run(s, cfg);
      auto logged = testing::count_kind(out.records, RecordKind::kSyscallEnter);
      std::string where = std::string(c.stem) + " " + testing::describe(cfg);
      if (c.logged) {
        check.expect(logged > 0, where + ": syscall not logged");
        check.expect(out.counters.syscalls_internal == 0, where + ": syscall discarded");
      } else {
        check.expect(logged == 0, where + ": internal syscall logged");
        check.expect(out.counters.syscalls_internal > 0, where + ": discard not counted");
      }
    }
  }
  return "logged/logged/discarded";
}

// 8. Injected threads and child processes.
std::string derived_flows(Check& check) {
  vm::Scenario inj = testing::load_bundled("remote_injection");
  const auto* victim = inj.module("victim")->image.get();
  const auto* payload = inj.module("payload")->image.get();
  std::size_t injected = 0;
  for (const auto& cfg : testing::all_configs()) {
    auto out = testing::run(inj, cfg);
    injected = 0;
    for (const TraceRecord& r : out.records) {
      if (r.pid != 2) continue;
      check.expect(!victim->extent().contains(r.ra),
                   testing::describe(cfg) + ": victim thread call logged");
      if (r.kind == RecordKind::kApiEntry && payload->extent().contains(r.ra)) ++injected;
    }
    // Beep, NtCreateThreadEx and Sleep from `start`, Beep from `second`.
    check.expect(injected == 4, testing::describe(cfg) + ": " + std::to_string(injected) +
                                    " injected calls");
  }
  vm::Scenario child = testing::load_bundled("child_process");
  std::size_t grandchild = 0;
  for (const auto& cfg : testing::all_configs()) {
    auto out = testing::run(child, cfg);
    grandchild = 0;
    for (const TraceRecord& r : out.records)
      if (r.pid == 3 && r.kind == RecordKind::kApiEntry) ++grandchild;
    check.expect(grandchild > 0, testing::describe(cfg) + ": grandchild calls missing");
  }
  return std::to_string(injected) + " injected calls, " + std::to_string(grandchild) +
         " grandchild calls";
}

// 9. Return-address tampering.
std::string tocttou(Check& check) {
  vm::Scenario s = testing::load_bundled("tocttou");
  for (EspCheck esp : {EspCheck::kExact, EspCheck::kRelaxed}) {
    auto b = testing::run(s, {Strategy::kReturnAddress, esp, false});
    check.expect(b.records.empty(), "strategy b logged the tampered call");
  }
  auto a = testing::run(s, {Strategy::kExitPoints, EspCheck::kExact, true});
  bool entry = false, exit = false;
  for (const TraceRecord& r : a.records) {
    if (r.symbol != "Work") continue;
    entry |= r.kind == RecordKind::kApiEntry;
    exit |= r.kind == RecordKind::kApiExit;
  }
  check.expect(entry && exit, "strategy a with exit recheck missed the call");
  return "b: 0 records, a+recheck: " + std::to_string(a.records.size()) + " records";
}

// 10. Argument extraction.
std::string arguments(Check& check) {
  auto find_value = [](const std::vector<TraceRecord>& recs, RecordKind kind,
                       const std::string& symbol, const std::string& arg,
                       const std::string& value) {
    for (const TraceRecord& r : recs)
      if (r.kind == kind && r.symbol == symbol)
        for (const RenderedArg& a : r.args)
          if (a.name == arg && a.value == value) return true;
    return false;
  };
  for (const char* stem : {"arg_page_boundary", "arg_out_capture", "arg_poison"}) {
    vm::Scenario s = testing::load_bundled(stem);
    for (const auto& cfg : testing::all_configs()) {
      std::vector<TraceRecord> recs;
      try {
        auto out = testing::run(s, cfg);
        recs = out.records;
        check.expect(out.report.status == vm::RunReport::Status::kHalted &&
                         out.report.faults.empty(),
                     std::string(stem) + ": abnormal termination");
      } catch (const std::exception& e) {
        check.expect(false, std::string(stem) + ": " + e.what());
        continue;
      }
      const auto E = RecordKind::kApiEntry, X = RecordKind::kApiExit;
      std::string where = std::string(stem) + " " + testing::describe(cfg);
      if (std::string(stem) == "arg_page_boundary") {
        check.expect(find_value(recs, E, "OutputString", "text", "\"AAAAAAAA\"..."),
                     where + ": CSTR not truncated at the page end");
        check.expect(find_value(recs, E, "WriteBuffer", "data", "[41414141]..."),
                     where + ": BUF not clamped at the page end");
        check.expect(find_value(recs, E, "WriteBuffer", "data", "[616263]"),
                     where + ": BUF of exact length");
        bool capped = false;
        for (const TraceRecord& r : recs)
          for (const RenderedArg& a : r.args)
            if (a.name == "data" && a.value.size() == 2 + 2 * monitor::kMaxBufferFetch + 3)
              capped = true;
        check.expect(capped, where + ": BUF not clamped to the fetch cap");
      } else if (std::string(stem) == "arg_out_capture") {
        check.expect(find_value(recs, E, "GetValue", "value", "0x00500000"),
                     where + ": OUT pointer at entry");
        check.expect(find_value(recs, X, "GetValue", "value", "0x00500000:0x0000002a"),
                     where + ": OUT value at exit");
        check.expect(find_value(recs, X, "GetPair", "pair", "0x00500010:{01020304efbe0000}"),
                     where + ": INOUT struct at exit");
      } else {
        check.expect(find_value(recs, E, "Consume", "text", "0xdead0000:<invalid>"),
                     where + ": invalid CSTR pointer");
        check.expect(find_value(recs, E, "Consume", "value", "NULL"), where + ": NULL");
        check.expect(find_value(recs, X, "Fill", "data", "0xfffff000:<invalid>"),
                     where + ": invalid OUT pointer");
      }
    }
  }
  return "truncation, markers, OUT capture and clamping verified";
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 11. Determinism.
std::string determinism(Check& check) {
  auto dir = std::filesystem::temp_directory_path() / "apimon_acceptance";
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> inputs = testing::bundled_scenarios();
  for (std::uint32_t seed = 0; seed < 20; ++seed) {
    auto p = dir / ("random_" + std::to_string(seed) + ".scn");
    std::ofstream(p) << testing::generate_scenario(seed);
    inputs.push_back(p);
  }
  std::size_t runs = 0;
  for (const auto& input : inputs) {
    for (const auto& mcfg : testing::all_configs()) {
      std::string outputs[2];
      for (int i = 0; i < 2; ++i) {
        cli::RunConfig cfg;
        cfg.scenario = input;
        cfg.monitor = mcfg;
        cfg.trace_path = dir / ("trace" + std::to_string(i));
        cfg.stats_path = dir / ("stats" + std::to_string(i));
        std::ostringstream out, err;
        cli::run_cli(cfg, out, err);
        outputs[i] = read_file(*cfg.trace_path) + "\n--\n" + read_file(*cfg.stats_path);
      }
      ++runs;
      check.expect(outputs[0] == outputs[1], input.filename().string() + " " +
                                                 testing::describe(mcfg) + ": outputs differ");
    }
  }
  return std::to_string(runs) + " paired runs";
}

}  // namespace
}  // namespace apimon

int main() {
  using Criterion = std::pair<const char*, std::string (*)(apimon::Check&)>;
  const Criterion criteria[] = {
      {"oracle equivalence", apimon::oracle_equivalence},
      {"strategy agreement", apimon::strategy_agreement},
      {"join-point return address", apimon::join_point},
      {"exit ESP arithmetic", apimon::exit_arithmetic},
      {"tail-call discard", apimon::tail_call},
      {"blacklist correctness and scale", apimon::blacklist_scale},
      {"syscall relevance", apimon::syscall_relevance},
      {"injected threads and child processes", apimon::derived_flows},
      {"return-address tampering", apimon::tocttou},
      {"argument extraction", apimon::arguments},
      {"determinism", apimon::determinism},
  };
  int failed = 0;
  int n = 0;
  for (const auto& [name, fn] : criteria) {
    ++n;
    apimon::Check check;
    std::string info;
    try {
      info = fn(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("exception: ") + e.what());
    }
    std::printf("%s %2d %s: %s\n", check.ok() ? "PASS" : "FAIL", n, name,
                check.ok() ? info.c_str() : check.summary().c_str());
    if (!check.ok()) ++failed;
  }
  std::printf("%d/%d criteria passed\n", n - failed, n);
  return failed == 0 ? 0 : 1;
}
