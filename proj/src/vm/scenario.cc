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

#include "apimon/vm/scenario.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "apimon/error.h"
#include "common/cursor.h"

namespace apimon::vm {
namespace {

using detail::Cursor;

struct Expr {
  enum class Kind { kNumber, kLocal, kLabel, kExport };
  Kind kind = Kind::kNumber;
  std::string module;
  std::string name;
  std::int64_t value = 0;  // number, or offset added to a symbol
  std::size_t line = 0;
  std::size_t column = 0;
};

struct PendingOperand {
  Operand::Kind kind = Operand::Kind::kNone;
  Reg reg = Reg::kEax;
  bool has_base = false;
  std::int64_t disp = 0;
  std::optional<Expr> expr;
  std::string bytes;
};

struct PendingInsn {
  Opcode op = Opcode::kNop;
  PendingOperand a;
  PendingOperand b;
  std::size_t line = 0;
};

struct Literal {
  std::string bytes;
  std::optional<Expr> word;  // u32 <expr>
};

struct ModuleBuilder {
  struct Export {
    std::string symbol;
    std::optional<Expr> target;
    std::string forward_module;
    std::string forward_symbol;
    std::size_t line = 0;
  };
  struct Block {
    std::uint32_t rva = 0;
    std::vector<PendingInsn> insns;
  };

  std::string name;
  std::size_t line = 0;
  std::optional<std::uint32_t> base;
  std::optional<std::uint32_t> size;
  bool system = false;
  std::vector<Export> exports;
  std::vector<Expr> no_exit_hook;
  std::vector<Block> blocks;
  std::map<std::string, std::uint32_t> labels;
  std::vector<std::pair<std::uint32_t, Literal>> data;
};

struct ProcessBuilder {
  ProcessDecl decl;
  std::size_t line = 0;
  bool has_stack = false;
  std::vector<Expr> threads;
  std::vector<std::pair<Expr, Literal>> init;
};

[[noreturn]] void load_fail(std::size_t line, const std::string& msg) {
  throw LoadError("line " + std::to_string(line) + ": " + msg);
}

bool is_register_name(const std::string& s) { return reg_from_name(s).has_value(); }

Expr parse_expr_after_ident(Cursor& cur, std::string ident, std::size_t column) {
  Expr e;
  e.line = cur.line_no();
  e.column = column;
  if (cur.accept("!")) {
    e.kind = Expr::Kind::kExport;
    e.module = std::move(ident);
    e.name = cur.identifier("export name");
  } else if (cur.peek() == ':' ) {
    cur.expect(":");
    e.kind = Expr::Kind::kLabel;
    e.module = std::move(ident);
    e.name = cur.identifier("label");
  } else {
    e.kind = Expr::Kind::kLocal;
    e.name = std::move(ident);
  }
  return e;
}

void parse_offsets(Cursor& cur, Expr& e) {
  while (true) {
    if (cur.accept("+")) e.value += cur.number("offset");
    else if (cur.accept("-")) e.value -= cur.number("offset");
    else break;
  }
}

Expr parse_expr(Cursor& cur) {
  cur.skip_space();
  std::size_t column = cur.column();
  Expr e;
  if (cur.at_number()) {
    e.line = cur.line_no();
    e.column = column;
    e.value = cur.number();
  } else {
    e = parse_expr_after_ident(cur, cur.identifier("address expression"), column);
  }
  parse_offsets(cur, e);
  return e;
}

PendingOperand parse_operand(Cursor& cur) {
  PendingOperand op;
  char c = cur.peek();
  if (c == '[') {
    cur.expect("[");
    op.kind = Operand::Kind::kMem;
    cur.skip_space();
    std::size_t column = cur.column();
    if (cur.at_identifier()) {
      std::string ident = cur.identifier();
      if (is_register_name(ident)) {
        op.has_base = true;
        op.reg = *reg_from_name(ident);
        if (cur.accept("+")) op.disp = cur.number("displacement");
        else if (cur.accept("-")) op.disp = -static_cast<std::int64_t>(cur.number("displacement"));
      } else {
        Expr e = parse_expr_after_ident(cur, std::move(ident), column);
        parse_offsets(cur, e);
        op.expr = std::move(e);
      }
    } else {
      op.expr = parse_expr(cur);
    }
    cur.expect("]");
    return op;
  }
  if (c == '"') {
    op.kind = Operand::Kind::kBytes;
    op.bytes = cur.quoted();
    return op;
  }
  cur.skip_space();
  std::size_t column = cur.column();
  if (cur.at_identifier()) {
    std::string ident = cur.identifier();
    if (is_register_name(ident)) {
      op.kind = Operand::Kind::kReg;
      op.reg = *reg_from_name(ident);
      return op;
    }
    Expr e = parse_expr_after_ident(cur, std::move(ident), column);
    parse_offsets(cur, e);
    op.kind = Operand::Kind::kImm;
    op.expr = std::move(e);
    return op;
  }
  op.kind = Operand::Kind::kImm;
  op.expr = parse_expr(cur);
  return op;
}

void check_operands(Cursor& cur, const PendingInsn& insn, int count) {
  using K = Operand::Kind;
  auto is = [](const PendingOperand& o, std::initializer_list<K> kinds) {
    return std::find(kinds.begin(), kinds.end(), o.kind) != kinds.end();
  };
  bool ok = true;
  switch (insn.op) {
    case Opcode::kCall:
    case Opcode::kTailJmp:
      ok = count == 1 && is(insn.a, {K::kReg, K::kImm});
      break;
    case Opcode::kJz:
    case Opcode::kJnz:
      ok = count == 2 && is(insn.a, {K::kReg}) && is(insn.b, {K::kImm});
      break;
    case Opcode::kRet:
      ok = count == 0 || (count == 1 && is(insn.a, {K::kImm}));
      break;
    case Opcode::kPush:
      ok = count == 1 && is(insn.a, {K::kReg, K::kImm});
      break;
    case Opcode::kPop:
      ok = count == 1 && is(insn.a, {K::kReg});
      break;
    case Opcode::kSet:
      ok = count == 2 && is(insn.a, {K::kReg}) && is(insn.b, {K::kReg, K::kImm});
      break;
    case Opcode::kStore:
      ok = count == 2 && is(insn.a, {K::kMem}) &&
           is(insn.b, {K::kReg, K::kImm, K::kBytes});
      break;
    case Opcode::kLoad:
      ok = count == 2 && is(insn.a, {K::kReg}) && is(insn.b, {K::kMem});
      break;
    case Opcode::kSyscall:
    case Opcode::kHalt:
    case Opcode::kNop:
      ok = count == 0;
      break;
  }
  if (!ok) cur.fail("bad operands for " + std::string(mnemonic(insn.op)));
}

PendingInsn parse_instruction(Cursor& cur, const std::string& word) {
  auto op = opcode_from_mnemonic(word);
  if (!op) cur.fail("unknown opcode '" + word + "'");
  PendingInsn insn;
  insn.op = *op;
  insn.line = cur.line_no();
  int count = 0;
  if (!cur.done()) {
    insn.a = parse_operand(cur);
    ++count;
    if (cur.accept(",")) {
      insn.b = parse_operand(cur);
      ++count;
    }
  }
  if (!cur.done()) cur.fail("unexpected trailing text");
  check_operands(cur, insn, count);
  return insn;
}

Literal parse_literal(Cursor& cur) {
  Literal lit;
  if (cur.peek() == '"') {
    lit.bytes = cur.quoted();
  } else {
    std::string kind = cur.identifier("literal");
    if (kind == "u32") {
      lit.word = parse_expr(cur);
    } else if (kind == "bytes") {
      while (!cur.done()) {
        std::uint32_t b = cur.number("byte");
        if (b > 0xff) cur.fail("byte out of range");
        lit.bytes.push_back(static_cast<char>(b));
      }
    } else {
      cur.fail("expected string, u32 or bytes literal");
    }
  }
  if (!cur.done()) cur.fail("unexpected trailing text");
  return lit;
}

struct Line {
  std::string_view text;
  std::size_t number;
};

class Parser {
 public:
  explicit Parser(std::string_view text) {
    std::size_t start = 0, number = 1;
    while (start <= text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      std::string_view line = text.substr(start, end - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines_.push_back({line, number++});
      if (end == text.size()) break;
      start = end + 1;
    }
  }

  Scenario parse() {
    enum class Section { kTop, kProtos, kModule, kProcess } section = Section::kTop;
    std::string protos_text;
    std::size_t protos_first = 0;
    std::size_t rep_start = 0;  // line of the open .rep, 0 if none
    std::uint32_t rep_count = 0;
    std::vector<Line> rep_lines;

    for (const Line& raw : lines_) {
      std::string_view body = detail::strip_comment(raw.text);
      Cursor cur(body, raw.number);

      if (cur.peek() == '[') {
        cur.expect("[");
        std::string kind = cur.identifier("section name");
        if (kind == "protos") {
          if (protos_first) cur.fail("duplicate [protos] section");
          section = Section::kProtos;
          protos_first = raw.number + 1;
        } else if (kind == "module") {
          section = Section::kModule;
          ModuleBuilder mb;
          mb.name = cur.identifier("module name");
          mb.line = raw.number;
          modules_.push_back(std::move(mb));
        } else if (kind == "process") {
          section = Section::kProcess;
          ProcessBuilder pb;
          pb.decl.pid = cur.number("pid");
          pb.line = raw.number;
          processes_.push_back(std::move(pb));
        } else {
          cur.fail("unknown section '" + kind + "'");
        }
        cur.expect("]");
        if (!cur.done()) cur.fail("unexpected trailing text");
        text_open_ = false;
        continue;
      }

      switch (section) {
        case Section::kTop:
          if (!cur.done()) parse_top(cur);
          break;
        case Section::kProtos:
          // Keep line numbering aligned with the document.
          while (protos_first + count_lines(protos_text) < raw.number)
            protos_text += '\n';
          protos_text += std::string(raw.text);
          break;
        case Section::kModule:
          if (rep_start) {
            Cursor peek(body, raw.number);
            if (peek.accept(".endr")) {
              for (std::uint32_t i = 0; i < rep_count; ++i)
                for (const Line& l : rep_lines) parse_module_line(l);
              rep_start = 0;
              rep_lines.clear();
            } else {
              rep_lines.push_back(raw);
            }
            break;
          }
          if (cur.accept(".rep")) {
            rep_count = cur.number("repeat count");
            rep_start = raw.number;
            break;
          }
          parse_module_line(raw);
          break;
        case Section::kProcess:
          if (!cur.done()) parse_process(cur);
          break;
      }
    }
    if (rep_start) load_fail(rep_start, ".rep without .endr");

    if (protos_first)
      scenario_.prototypes = proto::parse_prototype_db(protos_text, protos_first);
    build_modules();
    build_processes();
    return std::move(scenario_);
  }

 private:
  static std::size_t count_lines(const std::string& s) {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
  }

  void parse_top(Cursor& cur) {
    std::string word = cur.identifier("directive");
    if (word == "name") {
      scenario_.name = cur.identifier("scenario name");
    } else if (word == "quantum") {
      scenario_.quantum = cur.number("quantum");
      if (scenario_.quantum == 0) cur.fail("quantum must be positive");
    } else if (word == "budget") {
      scenario_.budget = cur.number("budget");
    } else if (word == "adversarial") {
      scenario_.adversarial = true;
    } else {
      cur.fail("unknown directive '" + word + "'");
    }
    if (!cur.done()) cur.fail("unexpected trailing text");
  }

  void parse_module_line(const Line& raw) {
    std::string_view body = detail::strip_comment(raw.text);
    Cursor cur(body, raw.number);
    if (cur.done()) return;
    ModuleBuilder& mb = modules_.back();

    // Label definitions: `name:` optionally followed by an instruction.
    if (cur.at_identifier()) {
      Cursor probe = cur;
      std::string ident = probe.identifier();
      probe.skip_space();
      std::string_view after = probe.rest();
      if (!after.empty() && after.front() == ':' &&
          (after.size() == 1 || std::isspace(static_cast<unsigned char>(after[1])))) {
        if (!text_open_) cur.fail("label outside a text block");
        if (is_register_name(ident) || opcode_from_mnemonic(ident))
          cur.fail("reserved label name '" + ident + "'");
        std::uint32_t rva = next_rva(mb);
        if (!mb.labels.emplace(ident, rva).second)
          cur.fail("duplicate label '" + ident + "'");
        cur = probe;
        cur.expect(":");
        if (cur.done()) return;
      }
    }

    std::string word = cur.identifier("directive or instruction");
    if (word == "base") {
      mb.base = cur.number("base address");
    } else if (word == "size") {
      mb.size = cur.number("size");
    } else if (word == "system") {
      mb.system = true;
    } else if (word == "export") {
      ModuleBuilder::Export e;
      e.line = raw.number;
      e.symbol = cur.identifier("export name");
      if (cur.accept("->")) {
        e.forward_module = cur.identifier("module name");
        cur.expect("!");
        e.forward_symbol = cur.identifier("export name");
      } else {
        cur.expect("=");
        e.target = parse_expr(cur);
      }
      mb.exports.push_back(std::move(e));
    } else if (word == "noexithook") {
      mb.no_exit_hook.push_back(parse_expr(cur));
    } else if (word == "text") {
      mb.blocks.push_back({cur.number("rva"), {}});
      text_open_ = true;
    } else if (word == "data") {
      std::uint32_t rva = cur.number("rva");
      mb.data.emplace_back(rva, parse_literal(cur));
      return;
    } else if (!word.empty() && std::isupper(static_cast<unsigned char>(word[0])) &&
               opcode_from_mnemonic(word)) {
      if (!text_open_) cur.fail("instruction outside a text block");
      mb.blocks.back().insns.push_back(parse_instruction(cur, word));
      return;
    } else {
      cur.fail("unknown directive or opcode '" + word + "'");
    }
    if (!cur.done()) cur.fail("unexpected trailing text");
  }

  static std::uint32_t next_rva(const ModuleBuilder& mb) {
    const auto& block = mb.blocks.back();
    return block.rva + static_cast<std::uint32_t>(block.insns.size()) * kInsnSize;
  }

  void parse_process(Cursor& cur) {
    ProcessBuilder& pb = processes_.back();
    std::string word = cur.identifier("directive");
    if (word == "root") {
      pb.decl.root = true;
    } else if (word == "dormant") {
      pb.decl.dormant = true;
    } else if (word == "load") {
      while (!cur.done()) pb.decl.modules.push_back(cur.identifier("module name"));
    } else if (word == "stack") {
      Addr base = cur.number("stack base");
      std::uint32_t slot = cur.number("slot size");
      std::uint32_t count = cur.number("slot count");
      if (slot == 0 || slot % 4 != 0 || count == 0)
        cur.fail("stack slot size must be a positive multiple of 4");
      std::uint64_t end = std::uint64_t{base} + std::uint64_t{slot} * count;
      if (end > 0xffffffffull) cur.fail("stack area exceeds the address space");
      pb.decl.stack_area = {base, static_cast<Addr>(end)};
      pb.decl.stack_slot = slot;
      pb.has_stack = true;
    } else if (word == "thread") {
      pb.threads.push_back(parse_expr(cur));
    } else if (word == "valid") {
      Addr lo = cur.number("address");
      std::uint32_t size = cur.number("size");
      pb.decl.valid.push_back({lo, lo + size});
    } else if (word == "mem") {
      Expr at = parse_expr(cur);
      pb.init.emplace_back(std::move(at), parse_literal(cur));
      return;
    } else {
      cur.fail("unknown directive '" + word + "'");
    }
    if (!cur.done()) cur.fail("unexpected trailing text");
  }

  const image::ModuleImage* find_image(std::string_view name) const {
    auto it = images_.find(name);
    return it == images_.end() ? nullptr : it->second.get();
  }

  Addr resolve(const Expr& e, const ModuleBuilder* current) const {
    std::int64_t v = e.value;
    switch (e.kind) {
      case Expr::Kind::kNumber:
        break;
      case Expr::Kind::kLocal: {
        if (!current) throw ParseError(e.line, e.column, "unqualified label '" + e.name + "'");
        auto it = current->labels.find(e.name);
        if (it == current->labels.end())
          throw ParseError(e.line, e.column, "unknown label '" + e.name + "'");
        v += *current->base + it->second;
        break;
      }
      case Expr::Kind::kLabel: {
        auto mb = std::find_if(modules_.begin(), modules_.end(),
                               [&](const ModuleBuilder& m) { return m.name == e.module; });
        if (mb == modules_.end())
          throw ParseError(e.line, e.column, "unknown module '" + e.module + "'");
        auto it = mb->labels.find(e.name);
        if (it == mb->labels.end())
          throw ParseError(e.line, e.column,
                           "unknown label '" + e.module + ":" + e.name + "'");
        v += *mb->base + it->second;
        break;
      }
      case Expr::Kind::kExport: {
        try {
          auto r = image::resolve_export(
              [this](std::string_view n) { return find_image(n); }, e.module, e.name);
          v += r.address;
        } catch (const LoadError& err) {
          throw ParseError(e.line, e.column, err.what());
        }
        break;
      }
    }
    return static_cast<Addr>(static_cast<std::uint64_t>(v));
  }

  Operand resolve_operand(const PendingOperand& p, const ModuleBuilder& mb) const {
    switch (p.kind) {
      case Operand::Kind::kNone:
        return Operand::none();
      case Operand::Kind::kReg:
        return Operand::of_reg(p.reg);
      case Operand::Kind::kImm:
        return Operand::of_imm(resolve(*p.expr, &mb));
      case Operand::Kind::kMem:
        if (p.has_base)
          return Operand::of_mem(p.reg, static_cast<std::uint32_t>(p.disp));
        return Operand::of_mem(resolve(*p.expr, &mb));
      case Operand::Kind::kBytes:
        return Operand::of_bytes(p.bytes);
    }
    return Operand::none();
  }

  std::string literal_bytes(const Literal& lit, const ModuleBuilder* mb) const {
    if (!lit.word) return lit.bytes;
    Addr v = resolve(*lit.word, mb);
    return std::string{static_cast<char>(v), static_cast<char>(v >> 8),
                       static_cast<char>(v >> 16), static_cast<char>(v >> 24)};
  }

  void build_modules() {
    // Pass 1: images with exports and code ranges.
    for (const ModuleBuilder& mb : modules_) {
      if (scenario_.modules.count(mb.name) || images_.count(mb.name))
        load_fail(mb.line, "duplicate module '" + mb.name + "'");
      if (!mb.base) load_fail(mb.line, "module '" + mb.name + "' has no base");
      if (!mb.size || *mb.size == 0)
        load_fail(mb.line, "module '" + mb.name + "' has no size");
      if (std::uint64_t{*mb.base} + *mb.size > 0x100000000ull)
        load_fail(mb.line, "module '" + mb.name + "' exceeds the address space");

      auto img = std::make_shared<image::ModuleImage>();
      img->name = mb.name;
      img->base = *mb.base;
      img->size = *mb.size;
      img->is_system = mb.system;

      std::vector<AddrRange> ranges;
      for (const auto& block : mb.blocks) {
        std::uint64_t end =
            std::uint64_t{block.rva} + std::uint64_t{block.insns.size()} * kInsnSize;
        if (end > *mb.size)
          load_fail(mb.line, "text block at rva " + std::to_string(block.rva) +
                                 " exceeds module '" + mb.name + "'");
        if (block.insns.empty()) continue;
        ranges.push_back({img->base + block.rva, img->base + static_cast<Addr>(end)});
      }
      std::sort(ranges.begin(), ranges.end());
      for (std::size_t i = 0; i < ranges.size(); ++i) {
        if (i > 0 && ranges[i].lo < ranges[i - 1].hi)
          load_fail(mb.line, "overlapping text blocks in '" + mb.name + "'");
        if (!img->code_ranges.empty() && img->code_ranges.back().hi == ranges[i].lo)
          img->code_ranges.back().hi = ranges[i].hi;
        else
          img->code_ranges.push_back(ranges[i]);
      }

      for (const auto& e : mb.exports) {
        image::ExportEntry entry;
        entry.symbol = e.symbol;
        if (img->find_export(e.symbol))
          load_fail(e.line, "duplicate export '" + e.symbol + "'");
        if (e.target) {
          Addr abs = resolve(*e.target, &mb);
          std::uint32_t rva = e.target->kind == Expr::Kind::kNumber
                                  ? static_cast<std::uint32_t>(e.target->value)
                                  : abs - img->base;
          if (rva >= img->size)
            load_fail(e.line, "export '" + e.symbol + "' lies outside the module");
          entry.rva = rva;
        } else {
          entry.forward_module = e.forward_module;
          entry.forward_symbol = e.forward_symbol;
        }
        img->exports.push_back(std::move(entry));
      }
      for (const auto& [rva, lit] : mb.data) {
        (void)lit;
        if (rva >= img->size) load_fail(mb.line, "data outside module '" + mb.name + "'");
      }
      images_.emplace(mb.name, img);
    }

    // Forwarder chains must terminate.
    for (const auto& [name, img] : images_) {
      for (const auto& e : img->exports) {
        if (!e.is_forwarder()) continue;
        try {
          image::resolve_export([this](std::string_view n) { return find_image(n); },
                                name, e.symbol);
        } catch (const LoadError& err) {
          // Forwarders into modules that are never declared are tolerated
          // (they simply fail to resolve at run time); cycles are not.
          if (std::string(err.what()).find("cycle") != std::string::npos) throw;
        }
      }
    }

    // Pass 2: code, data and control-flow facts.
    for (const ModuleBuilder& mb : modules_) {
      auto img = images_.at(mb.name);
      ModuleDecl decl;
      for (const auto& block : mb.blocks) {
        std::uint32_t rva = block.rva;
        for (const PendingInsn& p : block.insns) {
          Instruction insn;
          insn.op = p.op;
          try {
            insn.a = resolve_operand(p.a, mb);
            insn.b = resolve_operand(p.b, mb);
          } catch (const LoadError& err) {
            load_fail(p.line, err.what());
          }
          img->flow.emplace(rva, flow_of(insn, img->base + rva));
          decl.code.emplace(rva, std::move(insn));
          rva += kInsnSize;
        }
      }
      for (const Expr& e : mb.no_exit_hook) img->no_exit_hook.insert(resolve(e, &mb));
      for (const auto& [rva, lit] : mb.data) {
        std::string bytes = literal_bytes(lit, &mb);
        if (std::uint64_t{rva} + bytes.size() > img->size)
          load_fail(mb.line, "data outside module '" + mb.name + "'");
        decl.data.emplace_back(rva, std::move(bytes));
      }
      decl.image = img;
      scenario_.modules.emplace(mb.name, std::move(decl));
    }
  }

  static image::FlowNode flow_of(const Instruction& insn, Addr at) {
    image::FlowNode node;
    Addr next = at + kInsnSize;
    switch (insn.op) {
      case Opcode::kRet:
        node.is_return = true;
        break;
      case Opcode::kHalt:
        break;
      case Opcode::kTailJmp:
        if (insn.a.kind == Operand::Kind::kImm) node.tail = insn.a.imm;
        break;
      case Opcode::kJz:
      case Opcode::kJnz:
        node.local = {next, insn.b.imm};
        break;
      default:
        node.local = {next};
        break;
    }
    return node;
  }

  void build_processes() {
    std::set<Pid> pids;
    int roots = 0;
    for (ProcessBuilder& pb : processes_) {
      ProcessDecl& d = pb.decl;
      if (!pids.insert(d.pid).second)
        load_fail(pb.line, "duplicate process " + std::to_string(d.pid));
      if (d.root) {
        ++roots;
        if (d.dormant) load_fail(pb.line, "the root process cannot be dormant");
      }
      if (!pb.has_stack) load_fail(pb.line, "process has no stack directive");

      image::ModuleSet set;
      for (const std::string& name : d.modules) {
        const ModuleDecl* m = scenario_.module(name);
        if (!m) load_fail(pb.line, "process loads unknown module '" + name + "'");
        try {
          set.add(m->image);
        } catch (const LoadError& err) {
          load_fail(pb.line, err.what());
        }
        if (m->image->extent().overlaps(d.stack_area))
          load_fail(pb.line, "stack area overlaps module '" + name + "'");
      }
      std::uint64_t slots = (std::uint64_t{d.stack_area.hi} - d.stack_area.lo) / d.stack_slot;
      if (pb.threads.size() > slots) load_fail(pb.line, "not enough stack slots");

      for (const Expr& e : pb.threads) {
        Addr entry = resolve(e, nullptr);
        const image::ModuleImage* m = set.containing(entry);
        if (!m || !m->in_code(entry) || !m->flow.count(entry - m->base))
          throw LoadError("line " + std::to_string(e.line) +
                          ": thread entry is not an instruction of a loaded module");
        d.threads.push_back(entry);
      }
      for (const auto& [at, lit] : pb.init) d.init.emplace_back(resolve(at, nullptr), literal_bytes(lit, nullptr));
      scenario_.processes.push_back(std::move(d));
    }
    if (roots != 1) throw LoadError("scenario must declare exactly one root process");
  }

  std::vector<Line> lines_;
  std::vector<ModuleBuilder> modules_;
  std::vector<ProcessBuilder> processes_;
  std::map<std::string, std::shared_ptr<image::ModuleImage>, std::less<>> images_;
  Scenario scenario_;
  bool text_open_ = false;
};

}  // namespace

Pid Scenario::root() const {
  for (const ProcessDecl& p : processes)
    if (p.root) return p.pid;
  return 0;
}

const ProcessDecl* Scenario::process(Pid pid) const {
  for (const ProcessDecl& p : processes)
    if (p.pid == pid) return &p;
  return nullptr;
}

const ModuleDecl* Scenario::module(std::string_view name) const {
  auto it = modules.find(name);
  return it == modules.end() ? nullptr : &it->second;
}

Scenario parse_scenario(std::string_view text) { return Parser(text).parse(); }

Scenario load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read scenario file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  Scenario s = parse_scenario(ss.str());
  if (s.name.empty()) s.name = path.stem().string();
  return s;
}

}  // namespace apimon::vm
