// Copyright 2026 The boundtag Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <set>

#include "boundtag/analysis.hpp"
#include "boundtag/ir.hpp"

namespace boundtag::ir {
namespace {

class Validator {
 public:
  Validator(const Program& prog, const Function& fn, std::vector<Diagnostic>& out)
      : prog_(prog), fn_(fn), out_(out) {}

  void run() {
    if (!structure()) return;
    cfg_ = build_cfg(fn_);
    if (!cfg_.preds[0].empty()) {
      report(fn_.blocks[0].instrs.front().line, "entry block ^" + fn_.blocks[0].label + " cannot have predecessors");
      return;
    }
    for (std::size_t b = 0; b < fn_.blocks.size(); ++b) {
      if (!cfg_.reachable[b]) {
        report(fn_.blocks[b].instrs.front().line, "block ^" + fn_.blocks[b].label + " is unreachable");
      }
    }
    dom_ = DominatorTree::dominators(cfg_);
    defs_ = def_sites(fn_);
    for (std::size_t b = 0; b < fn_.blocks.size(); ++b) {
      const auto& instrs = fn_.blocks[b].instrs;
      for (std::size_t i = 0; i < instrs.size(); ++i) {
        block_ = static_cast<BlockId>(b);
        types(instrs[i]);
        dominance(instrs[i], static_cast<BlockId>(b), static_cast<int>(i));
      }
    }
  }

 private:
  void report(int line, std::string msg) { out_.push_back({fn_.name, line, std::move(msg)}); }

  bool structure() {
    bool ok = true;
    if (fn_.blocks.empty()) {
      report(fn_.line, "function has no blocks");
      return false;
    }
    for (const auto& b : fn_.blocks) {
      if (b.instrs.empty() || !b.instrs.back().is_terminator()) {
        report(b.instrs.empty() ? fn_.line : b.instrs.back().line, "block ^" + b.label + " does not end in a terminator");
        ok = false;
        continue;
      }
      bool phis_done = false;
      for (std::size_t i = 0; i < b.instrs.size(); ++i) {
        const Instr& in = b.instrs[i];
        if (in.is_terminator() && i + 1 != b.instrs.size()) {
          report(in.line, "terminator in the middle of block ^" + b.label);
          ok = false;
        }
        if (in.op == Opcode::Phi) {
          if (phis_done) report(in.line, "phi %" + fn_.name_of(in.result) + " is not at the head of its block");
        } else {
          phis_done = true;
        }
        for (BlockId t : in.blocks) {
          if (t < 0 || static_cast<std::size_t>(t) >= fn_.blocks.size()) {
            report(in.line, "branch to a nonexistent block");
            ok = false;
          }
        }
      }
    }
    for (ValueId v = 0; v < static_cast<ValueId>(fn_.values.size()); ++v) {
      if (!fn_.values[static_cast<std::size_t>(v)].defined) {
        report(fn_.line, "use of undefined value %" + fn_.name_of(v));
        ok = false;
      }
    }
    return ok;
  }

  Type type_of(const Operand& o) const { return o.is_value() ? fn_.type_of(o.value) : Type::Int; }

  std::string describe(const Operand& o) const {
    return o.is_value() ? "%" + fn_.name_of(o.value) : std::to_string(o.imm);
  }

  void want(const Instr& in, const Operand& o, Type t, const char* role) {
    const Type got = type_of(o);
    if (got == t) return;
    std::string msg = std::string(to_string(in.op)) + ": " + role + " " + describe(o) + " is " +
                      std::string(to_string(got)) + ", expected " + std::string(to_string(t));
    if (got == Type::Ptr && t == Type::Int) msg += " (use ptrtoint or psub)";
    report(in.line, std::move(msg));
  }

  void arity(const Instr& in, std::size_t n) {
    if (in.args.size() != n) {
      report(in.line, std::string(to_string(in.op)) + " takes " + std::to_string(n) + " operands, got " +
                          std::to_string(in.args.size()));
    }
  }

  void types(const Instr& in) {
    switch (in.op) {
      case Opcode::Const:
      case Opcode::Null:
        break;
      case Opcode::GlobalAddr:
        if (prog_.find_global(in.callee) == nullptr) report(in.line, "unknown global @" + in.callee);
        break;
      case Opcode::Alloc:
      case Opcode::AllocaDyn:
        arity(in, 1);
        if (in.args.size() == 1) want(in, in.args[0], Type::Int, "size");
        break;
      case Opcode::Alloca:
        if (in.imm < 0) report(in.line, "alloca size must be non-negative");
        break;
      case Opcode::Free:
      case Opcode::PtrToInt:
      case Opcode::Mask:
        arity(in, 1);
        if (in.args.size() == 1) want(in, in.args[0], Type::Ptr, "operand");
        break;
      case Opcode::Gep:
        arity(in, 1);
        if (in.args.size() == 1) want(in, in.args[0], Type::Ptr, "base");
        for (const auto& t : in.terms) want(in, Operand::of(t.index), Type::Int, "index");
        break;
      case Opcode::Load:
        arity(in, 1);
        if (in.args.size() == 1) want(in, in.args[0], Type::Ptr, "address");
        if (in.imm < 1 || in.imm > 8 || (in.type == Type::Ptr && in.imm != 8)) report(in.line, "bad access width");
        break;
      case Opcode::Store:
        arity(in, 2);
        if (in.args.size() == 2) {
          want(in, in.args[0], Type::Ptr, "address");
          want(in, in.args[1], in.type, "stored value");
        }
        if (in.imm < 1 || in.imm > 8 || (in.type == Type::Ptr && in.imm != 8)) report(in.line, "bad access width");
        break;
      case Opcode::Phi: phi(in); break;
      case Opcode::Select:
        arity(in, 3);
        if (in.args.size() == 3) {
          want(in, in.args[0], Type::Int, "condition");
          want(in, in.args[1], in.type, "operand");
          want(in, in.args[2], in.type, "operand");
        }
        break;
      case Opcode::Call: {
        const Function* callee = prog_.find_function(in.callee);
        if (callee == nullptr) {
          report(in.line, "call to unknown function @" + in.callee);
          break;
        }
        if (callee->params.size() != in.args.size()) {
          report(in.line, "call to @" + in.callee + " passes " + std::to_string(in.args.size()) + " arguments, expected " +
                              std::to_string(callee->params.size()));
          break;
        }
        for (std::size_t k = 0; k < in.args.size(); ++k) want(in, in.args[k], callee->type_of(callee->params[k]), "argument");
        break;
      }
      case Opcode::Extern: {
        const ExternSignature* sig = find_extern(in.callee);
        if (sig == nullptr) {
          report(in.line, "unknown extern @" + in.callee);
          break;
        }
        if (sig->params.size() != in.args.size()) {
          report(in.line, "extern @" + in.callee + " takes " + std::to_string(sig->params.size()) + " arguments");
          break;
        }
        for (std::size_t k = 0; k < in.args.size(); ++k) want(in, in.args[k], sig->params[k], "argument");
        break;
      }
      case Opcode::Bin:
      case Opcode::Cmp:
        arity(in, 2);
        for (const auto& o : in.args) want(in, o, Type::Int, "operand");
        break;
      case Opcode::PtrCmp:
      case Opcode::PtrSub:
      case Opcode::Retag:
        arity(in, 2);
        for (const auto& o : in.args) want(in, o, Type::Ptr, "operand");
        break;
      case Opcode::Check:
        arity(in, 2);
        for (const auto& o : in.args) want(in, o, Type::Ptr, "operand");
        if (in.check.lo > in.check.hi) report(in.line, "check window has lo > hi");
        break;
      case Opcode::Ret:
        if (fn_.ret_type == Type::Void) {
          if (!in.args.empty()) report(in.line, "ret with a value in a void function");
        } else if (in.args.size() != 1) {
          report(in.line, "ret needs a " + std::string(to_string(fn_.ret_type)) + " value");
        } else {
          want(in, in.args[0], fn_.ret_type, "return value");
        }
        break;
      case Opcode::Br:
        if (in.blocks.size() != 1) report(in.line, "br takes one target");
        break;
      case Opcode::CondBr:
        arity(in, 1);
        if (in.blocks.size() != 2) report(in.line, "condbr takes two targets");
        if (in.args.size() == 1) want(in, in.args[0], Type::Int, "condition");
        break;
    }
  }

  void phi(const Instr& in) {
    const std::string name = "phi %" + fn_.name_of(in.result);
    if (in.args.size() != in.blocks.size()) {
      report(in.line, name + " is malformed");
      return;
    }
    for (const auto& o : in.args) want(in, o, in.type, "incoming value");
    const auto& preds = cfg_.preds[static_cast<std::size_t>(block_)];
    if (in.args.size() != preds.size()) {
      report(in.line, name + " has " + std::to_string(in.args.size()) + " incoming values but its block has " +
                          std::to_string(preds.size()) + " predecessors");
      return;
    }
    std::set<BlockId> seen;
    for (BlockId b : in.blocks) {
      if (std::find(preds.begin(), preds.end(), b) == preds.end()) {
        report(in.line, name + " names ^" + fn_.blocks[static_cast<std::size_t>(b)].label + ", which is not a predecessor");
      } else if (!seen.insert(b).second) {
        report(in.line, name + " names ^" + fn_.blocks[static_cast<std::size_t>(b)].label + " twice");
      }
    }
  }

  void dominance(const Instr& in, BlockId b, int idx) {
    if (!cfg_.reachable[static_cast<std::size_t>(b)]) return;
    auto check = [&](ValueId v, BlockId at_block, int at_idx) {
      if (v == kNoValue) return;
      if (!def_dominates_use(dom_, defs_[static_cast<std::size_t>(v)], at_block, at_idx)) {
        report(in.line, "%" + fn_.name_of(v) + " is used before its definition dominates the use");
      }
    };
    if (in.op == Opcode::Phi) {
      for (std::size_t k = 0; k < in.args.size() && k < in.blocks.size(); ++k) {
        const BlockId from = in.blocks[k];
        if (!cfg_.reachable[static_cast<std::size_t>(from)]) continue;
        check(in.args[k].value, from, static_cast<int>(fn_.blocks[static_cast<std::size_t>(from)].instrs.size()));
      }
      return;
    }
    for (const auto& o : in.args) check(o.value, b, idx);
    for (const auto& t : in.terms) check(t.index, b, idx);
  }

  const Program& prog_;
  const Function& fn_;
  std::vector<Diagnostic>& out_;
  Cfg cfg_;
  DominatorTree dom_;
  std::vector<DefSite> defs_;
  BlockId block_ = kNoBlock;
};

// Static roots of a pointer: follows gep/mask bases and merge operands.
void collect_roots(const Function& fn, const std::vector<const Instr*>& def_of, ValueId v, std::set<ValueId>& seen,
                   std::vector<const Instr*>& roots) {
  if (!seen.insert(v).second) return;
  const Instr* d = def_of[static_cast<std::size_t>(v)];
  if (d == nullptr) return;
  switch (d->op) {
    case Opcode::Gep:
    case Opcode::Mask:
      collect_roots(fn, def_of, d->args[0].value, seen, roots);
      break;
    case Opcode::Phi:
      for (const auto& o : d->args) {
        if (o.is_value()) collect_roots(fn, def_of, o.value, seen, roots);
      }
      break;
    case Opcode::Select:
      for (std::size_t k = 1; k < 3; ++k) {
        if (d->args[k].is_value()) collect_roots(fn, def_of, d->args[k].value, seen, roots);
      }
      break;
    default:
      roots.push_back(d);
  }
}

void global_escapes(const Program& prog, const Function& fn, std::vector<Diagnostic>& out) {
  std::vector<const Instr*> def_of(fn.values.size(), nullptr);
  for (const auto& b : fn.blocks) {
    for (const auto& in : b.instrs) {
      if (in.result != kNoValue) def_of[static_cast<std::size_t>(in.result)] = &in;
    }
  }
  auto escaping = [&](const Instr& in, const Operand& o) {
    if (!o.is_value() || fn.type_of(o.value) != Type::Ptr) return;
    std::set<ValueId> seen;
    std::vector<const Instr*> roots;
    collect_roots(fn, def_of, o.value, seen, roots);
    for (const Instr* r : roots) {
      if (r->op != Opcode::GlobalAddr) continue;
      const Global* g = prog.find_global(r->callee);
      if (g != nullptr && !g->escapes) {
        out.push_back({fn.name, in.line, "address of @" + g->name + " escapes but it is declared escapes=false"});
      }
    }
  };
  for (const auto& b : fn.blocks) {
    for (const auto& in : b.instrs) {
      if (in.op == Opcode::Store && in.args.size() == 2) escaping(in, in.args[1]);
      if (in.op == Opcode::Call || in.op == Opcode::Ret) {
        for (const auto& o : in.args) escaping(in, o);
      }
    }
  }
}

}  // namespace

std::vector<Diagnostic> validate(const Program& program) {
  std::vector<Diagnostic> out;
  std::set<std::string> names;
  for (const auto& g : program.globals) {
    if (!names.insert(g.name).second) out.push_back({"", 0, "global @" + g.name + " is defined more than once"});
  }
  std::set<std::string> fnames;
  for (const auto& f : program.functions) {
    if (!fnames.insert(f.name).second) out.push_back({"", f.line, "function @" + f.name + " is defined more than once"});
  }
  const Function* entry = program.find_function("main");
  if (entry == nullptr) {
    out.push_back({"", 0, "program has no entry function @main"});
  } else {
    for (ValueId p : entry->params) {
      if (entry->type_of(p) != Type::Int) {
        out.push_back({"main", entry->line, "entry parameters must be int"});
        break;
      }
    }
  }
  for (const auto& f : program.functions) {
    const std::size_t before = out.size();
    Validator(program, f, out).run();
    if (out.size() == before) global_escapes(program, f, out);
  }
  return out;
}

}  // namespace boundtag::ir
