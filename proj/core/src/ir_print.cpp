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

#include <sstream>

#include "boundtag/ir.hpp"

namespace boundtag::ir {
namespace {

class Printer {
 public:
  explicit Printer(const Function& fn) : fn_(fn) {}

  void function(std::ostringstream& os) const {
    os << "fn @" << fn_.name << "(";
    for (std::size_t i = 0; i < fn_.params.size(); ++i) {
      if (i > 0) os << ", ";
      os << "%" << fn_.name_of(fn_.params[i]) << ": " << to_string(fn_.type_of(fn_.params[i]));
    }
    os << ")";
    if (fn_.ret_type != Type::Void) os << " -> " << to_string(fn_.ret_type);
    os << " {\n";
    for (const auto& b : fn_.blocks) {
      os << "^" << b.label << ":\n";
      for (const auto& in : b.instrs) {
        os << "  ";
        instr(os, in);
        os << "\n";
      }
    }
    os << "}\n";
  }

 private:
  void operand(std::ostringstream& os, const Operand& o) const {
    if (o.is_value()) {
      os << "%" << fn_.name_of(o.value);
    } else {
      os << o.imm;
    }
  }

  void label(std::ostringstream& os, BlockId b) const { os << "^" << fn_.blocks[static_cast<std::size_t>(b)].label; }

  void args(std::ostringstream& os, const Instr& in) const {
    for (std::size_t i = 0; i < in.args.size(); ++i) {
      if (i > 0) os << ", ";
      operand(os, in.args[i]);
    }
  }

  void gep_offset(std::ostringstream& os, const Instr& in) const {
    bool first = true;
    for (const auto& t : in.terms) {
      std::int64_t s = t.scale;
      if (first) {
        os << ", ";
        if (s < 0) {
          os << "-";
          s = -s;
        }
      } else {
        os << (s < 0 ? " - " : " + ");
        if (s < 0) s = -s;
      }
      os << "%" << fn_.name_of(t.index);
      if (s != 1) os << "*" << s;
      first = false;
    }
    if (in.imm != 0 || in.terms.empty()) {
      if (first) {
        if (in.imm != 0) os << ", " << in.imm;
      } else {
        os << (in.imm < 0 ? " - " : " + ") << (in.imm < 0 ? -in.imm : in.imm);
      }
    }
  }

  void instr(std::ostringstream& os, const Instr& in) const {
    if (in.result != kNoValue) os << "%" << fn_.name_of(in.result) << " = ";
    switch (in.op) {
      case Opcode::Const: os << "const " << in.imm; break;
      case Opcode::Null: os << "null"; break;
      case Opcode::GlobalAddr: os << "global @" << in.callee; break;
      case Opcode::Alloc:
      case Opcode::AllocaDyn:
      case Opcode::Free:
      case Opcode::PtrToInt:
      case Opcode::Mask:
        os << to_string(in.op) << " ";
        args(os, in);
        break;
      case Opcode::Alloca: os << "alloca " << in.imm; break;
      case Opcode::Gep:
        os << "gep ";
        operand(os, in.args[0]);
        gep_offset(os, in);
        break;
      case Opcode::Load:
        if (in.type == Type::Ptr) {
          os << "loadp ";
        } else {
          os << "load." << in.imm << " ";
        }
        operand(os, in.args[0]);
        if (in.site >= 0) os << " #" << in.site;
        break;
      case Opcode::Store:
        if (in.type == Type::Ptr) {
          os << "storep ";
        } else {
          os << "store." << in.imm << " ";
        }
        args(os, in);
        if (in.site >= 0) os << " #" << in.site;
        break;
      case Opcode::Phi:
        os << "phi " << to_string(in.type) << " ";
        for (std::size_t i = 0; i < in.args.size(); ++i) {
          if (i > 0) os << ", ";
          os << "[";
          operand(os, in.args[i]);
          os << ", ";
          label(os, in.blocks[i]);
          os << "]";
        }
        break;
      case Opcode::Select:
        os << "select ";
        args(os, in);
        break;
      case Opcode::Call:
      case Opcode::Extern:
        os << to_string(in.op) << " @" << in.callee << "(";
        args(os, in);
        os << ")";
        break;
      case Opcode::Bin:
        os << to_string(in.bin) << " ";
        args(os, in);
        break;
      case Opcode::Cmp:
      case Opcode::PtrCmp:
        os << to_string(in.op) << "." << to_string(in.cmp) << " ";
        args(os, in);
        break;
      case Opcode::PtrSub:
      case Opcode::Retag:
        os << to_string(in.op) << " ";
        args(os, in);
        break;
      case Opcode::Check: {
        const CheckInfo& c = in.check;
        os << "check #" << c.site << " ";
        args(os, in);
        os << ", " << c.lo << ", " << c.hi;
        if (c.upper_only) os << " upper";
        if (c.guard) os << " guard";
        if (c.escape) os << " escape";
        if (c.hoisted) os << " hoisted";
        if (c.static_extent) os << " static=" << *c.static_extent;
        break;
      }
      case Opcode::Ret:
        os << "ret";
        if (!in.args.empty()) {
          os << " ";
          operand(os, in.args[0]);
        }
        break;
      case Opcode::Br:
        os << "br ";
        label(os, in.blocks[0]);
        break;
      case Opcode::CondBr:
        os << "condbr ";
        operand(os, in.args[0]);
        os << ", ";
        label(os, in.blocks[0]);
        os << ", ";
        label(os, in.blocks[1]);
        break;
    }
  }

  const Function& fn_;
};

}  // namespace

std::string print(const Function& fn) {
  std::ostringstream os;
  Printer(fn).function(os);
  return os.str();
}

std::string print(const Program& program) {
  std::ostringstream os;
  for (const auto& g : program.globals) {
    os << "global @" << g.name << " size=" << g.size << " escapes=" << (g.escapes ? "true" : "false") << "\n";
  }
  for (std::size_t i = 0; i < program.functions.size(); ++i) {
    if (i > 0 || !program.globals.empty()) os << "\n";
    Printer(program.functions[i]).function(os);
  }
  return os.str();
}

}  // namespace boundtag::ir
