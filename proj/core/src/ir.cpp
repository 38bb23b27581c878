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
#include <unordered_set>

#include "boundtag/ir.hpp"

namespace boundtag::ir {

ValueId Function::find_value(std::string_view n) const {
  auto it = by_name_.find(std::string(n));
  return it == by_name_.end() ? kNoValue : it->second;
}

BlockId Function::find_block(std::string_view label) const {
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].label == label) return static_cast<BlockId>(i);
  }
  return kNoBlock;
}

ValueId Function::intern_value(std::string_view n) {
  std::string key(n);
  if (auto it = by_name_.find(key); it != by_name_.end()) return it->second;
  const auto id = static_cast<ValueId>(values.size());
  values.push_back(ValueInfo{key, Type::Void, false});
  by_name_.emplace(std::move(key), id);
  return id;
}

ValueId Function::add_value(std::string_view stem, Type type) {
  std::string name(stem);
  if (by_name_.contains(name)) {
    int& n = stem_counters_[name];
    do {
      name = std::string(stem) + "." + std::to_string(++n);
    } while (by_name_.contains(name));
  }
  const ValueId id = intern_value(name);
  values[static_cast<std::size_t>(id)].type = type;
  values[static_cast<std::size_t>(id)].defined = true;
  return id;
}

const Function* Program::find_function(std::string_view name) const {
  for (const auto& f : functions) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

const Global* Program::find_global(std::string_view name) const {
  for (const auto& g : globals) {
    if (g.name == name) return &g;
  }
  return nullptr;
}

const std::vector<ExternSignature>& extern_registry() {
  static const std::vector<ExternSignature> registry = {
      {"memcpy", {Type::Ptr, Type::Ptr, Type::Int}, Type::Void, ExternContract::Copy},
      {"memmove", {Type::Ptr, Type::Ptr, Type::Int}, Type::Void, ExternContract::Copy},
      {"memset", {Type::Ptr, Type::Int, Type::Int}, Type::Void, ExternContract::Fill},
      {"recv", {Type::Ptr, Type::Int}, Type::Int, ExternContract::Fill},
      {"buffer", {Type::Int}, Type::Ptr, ExternContract::FreshBuffer},
      {"abs", {Type::Int}, Type::Int, ExternContract::Pure},
      {"min", {Type::Int, Type::Int}, Type::Int, ExternContract::Pure},
      {"max", {Type::Int, Type::Int}, Type::Int, ExternContract::Pure},
      {"hash", {Type::Int}, Type::Int, ExternContract::Pure},
  };
  return registry;
}

const ExternSignature* find_extern(std::string_view name) {
  for (const auto& e : extern_registry()) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

ParseError::ParseError(int line, int column, const std::string& msg)
    : std::runtime_error("line " + std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
      line_(line),
      column_(column) {}

std::string to_string(const Diagnostic& d) {
  std::string out;
  if (d.line > 0) out += "line " + std::to_string(d.line) + ": ";
  if (!d.function.empty()) out += "@" + d.function + ": ";
  return out + d.message;
}

Program parse(std::string_view text) {
  Program p = parse_unvalidated(text);
  const auto diags = validate(p);
  if (!diags.empty()) throw ParseError(diags.front().line, 0, to_string(diags.front()));
  return p;
}

std::string_view to_string(Type t) {
  switch (t) {
    case Type::Void: return "void";
    case Type::Int: return "int";
    case Type::Ptr: return "ptr";
  }
  return "?";
}

std::string_view to_string(Opcode op) {
  switch (op) {
    case Opcode::Const: return "const";
    case Opcode::Null: return "null";
    case Opcode::GlobalAddr: return "global";
    case Opcode::Alloc: return "alloc";
    case Opcode::Alloca: return "alloca";
    case Opcode::AllocaDyn: return "alloca_dyn";
    case Opcode::Free: return "free";
    case Opcode::Gep: return "gep";
    case Opcode::Load: return "load";
    case Opcode::Store: return "store";
    case Opcode::Phi: return "phi";
    case Opcode::Select: return "select";
    case Opcode::Call: return "call";
    case Opcode::Extern: return "extern";
    case Opcode::Bin: return "bin";
    case Opcode::Cmp: return "cmp";
    case Opcode::PtrCmp: return "pcmp";
    case Opcode::PtrSub: return "psub";
    case Opcode::PtrToInt: return "ptrtoint";
    case Opcode::Mask: return "mask";
    case Opcode::Retag: return "retag";
    case Opcode::Check: return "check";
    case Opcode::Ret: return "ret";
    case Opcode::Br: return "br";
    case Opcode::CondBr: return "condbr";
  }
  return "?";
}

std::string_view to_string(BinKind k) {
  switch (k) {
    case BinKind::Add: return "add";
    case BinKind::Sub: return "sub";
    case BinKind::Mul: return "mul";
    case BinKind::Div: return "div";
    case BinKind::Rem: return "rem";
    case BinKind::And: return "and";
    case BinKind::Or: return "or";
    case BinKind::Xor: return "xor";
    case BinKind::Shl: return "shl";
    case BinKind::Shr: return "shr";
  }
  return "?";
}

std::string_view to_string(CmpKind k) {
  switch (k) {
    case CmpKind::Eq: return "eq";
    case CmpKind::Ne: return "ne";
    case CmpKind::Lt: return "lt";
    case CmpKind::Le: return "le";
    case CmpKind::Gt: return "gt";
    case CmpKind::Ge: return "ge";
    case CmpKind::Ult: return "ult";
    case CmpKind::Ule: return "ule";
    case CmpKind::Ugt: return "ugt";
    case CmpKind::Uge: return "uge";
  }
  return "?";
}

std::string_view to_string(Origin o) {
  switch (o) {
    case Origin::AllocSite: return "alloc_site";
    case Origin::StackSlot: return "stack_slot";
    case Origin::DynStackSlot: return "dyn_stack_slot";
    case Origin::Param: return "param";
    case Origin::LoadedFromMemory: return "loaded_from_memory";
    case Origin::Global: return "global";
    case Origin::Null: return "null";
    case Origin::ExternResult: return "extern_result";
    case Origin::CallResult: return "call_result";
    case Origin::Merge: return "merge";
    case Origin::Retagged: return "retagged";
    case Origin::Derived: return "derived";
  }
  return "?";
}

std::vector<std::optional<Provenance>> compute_provenance(const Function& fn) {
  std::vector<std::optional<Provenance>> prov(fn.values.size());
  for (ValueId p : fn.params) {
    if (fn.type_of(p) == Type::Ptr) prov[static_cast<std::size_t>(p)] = Provenance{Origin::Param, kNoValue};
  }
  for (const auto& b : fn.blocks) {
    for (const auto& in : b.instrs) {
      if (in.result == kNoValue || fn.type_of(in.result) != Type::Ptr) continue;
      Provenance pv;
      switch (in.op) {
        case Opcode::Alloc: pv.origin = Origin::AllocSite; break;
        case Opcode::Alloca: pv.origin = Origin::StackSlot; break;
        case Opcode::AllocaDyn: pv.origin = Origin::DynStackSlot; break;
        case Opcode::Load: pv.origin = Origin::LoadedFromMemory; break;
        case Opcode::GlobalAddr: pv.origin = Origin::Global; break;
        case Opcode::Null: pv.origin = Origin::Null; break;
        case Opcode::Extern: pv.origin = Origin::ExternResult; break;
        case Opcode::Call: pv.origin = Origin::CallResult; break;
        case Opcode::Phi:
        case Opcode::Select: pv.origin = Origin::Merge; break;
        case Opcode::Retag: pv.origin = Origin::Retagged; break;
        case Opcode::Gep:
        case Opcode::Mask:
          pv.origin = Origin::Derived;
          pv.base = in.args.at(0).value;
          break;
        default: continue;
      }
      prov[static_cast<std::size_t>(in.result)] = pv;
    }
  }
  return prov;
}

}  // namespace boundtag::ir
