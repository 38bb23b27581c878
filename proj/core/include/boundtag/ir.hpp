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

// Miniature SSA IR.
//
// Programs are lists of globals and functions; functions are lists of basic
// blocks whose last instruction is a terminator. Values are named (%x) and
// identified by their index in Function::values. Pointer arithmetic is a
// single `gep` whose offset is an affine expression c + sum(idx * scale) in
// bytes. See docs/pir-format.md for the textual syntax.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace boundtag::ir {

enum class Type : std::uint8_t { Void, Int, Ptr };

using ValueId = std::int32_t;
using BlockId = std::int32_t;
inline constexpr ValueId kNoValue = -1;
inline constexpr BlockId kNoBlock = -1;

enum class Opcode : std::uint8_t {
  Const,
  Null,
  GlobalAddr,
  Alloc,
  Alloca,
  AllocaDyn,
  Free,
  Gep,
  Load,
  Store,
  Phi,
  Select,
  Call,
  Extern,
  Bin,
  Cmp,
  PtrCmp,
  PtrSub,
  PtrToInt,
  Mask,
  Retag,
  Check,
  Ret,
  Br,
  CondBr,
};

enum class BinKind : std::uint8_t { Add, Sub, Mul, Div, Rem, And, Or, Xor, Shl, Shr };
enum class CmpKind : std::uint8_t { Eq, Ne, Lt, Le, Gt, Ge, Ult, Ule, Ugt, Uge };

// Signed kinds compare as int64, U-prefixed kinds as uint64.
constexpr bool evaluate(CmpKind k, std::int64_t a, std::int64_t b) {
  const auto ua = static_cast<std::uint64_t>(a);
  const auto ub = static_cast<std::uint64_t>(b);
  switch (k) {
    case CmpKind::Eq: return a == b;
    case CmpKind::Ne: return a != b;
    case CmpKind::Lt: return a < b;
    case CmpKind::Le: return a <= b;
    case CmpKind::Gt: return a > b;
    case CmpKind::Ge: return a >= b;
    case CmpKind::Ult: return ua < ub;
    case CmpKind::Ule: return ua <= ub;
    case CmpKind::Ugt: return ua > ub;
    case CmpKind::Uge: return ua >= ub;
  }
  return false;
}

struct Operand {
  ValueId value = kNoValue;  // kNoValue means an integer immediate
  std::int64_t imm = 0;

  static Operand of(ValueId v) { return Operand{v, 0}; }
  static Operand constant(std::int64_t c) { return Operand{kNoValue, c}; }
  bool is_value() const { return value != kNoValue; }
  friend bool operator==(const Operand&, const Operand&) = default;
};

struct GepTerm {
  ValueId index = kNoValue;
  std::int64_t scale = 1;
  friend bool operator==(const GepTerm&, const GepTerm&) = default;
};

// Operands of a check: args[0] is the KSA, args[1] the checked pointer. The
// checked byte range is [ptr + lo, ptr + hi).
struct CheckInfo {
  int site = -1;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  bool upper_only = false;
  bool escape = false;
  bool guard = false;    // skip when ptr == ksa at run time
  bool hoisted = false;
  std::optional<std::uint64_t> static_extent;  // ksa is a stack/global root of this size
};

struct Instr {
  Opcode op = Opcode::Const;
  ValueId result = kNoValue;
  Type type = Type::Void;  // result type; for stores, the stored value's type
  std::vector<Operand> args;
  std::vector<BlockId> blocks;  // phi incoming blocks (parallel to args) or branch targets
  std::vector<GepTerm> terms;   // gep variable part
  std::int64_t imm = 0;         // const value, gep constant, access size, alloca size
  std::string callee;           // call / extern target, global symbol
  BinKind bin = BinKind::Add;
  CmpKind cmp = CmpKind::Eq;
  int site = -1;                // access site id on load/store
  CheckInfo check;
  int line = 0;                 // source line, 0 when synthesized

  bool is_terminator() const { return op == Opcode::Ret || op == Opcode::Br || op == Opcode::CondBr; }
};

struct ValueInfo {
  std::string name;
  Type type = Type::Void;
  bool defined = false;
};

struct Block {
  std::string label;
  std::vector<Instr> instrs;
};

struct Function {
  std::string name;
  Type ret_type = Type::Void;
  std::vector<ValueId> params;
  std::vector<Block> blocks;
  std::vector<ValueInfo> values;
  int line = 0;

  ValueId find_value(std::string_view n) const;
  BlockId find_block(std::string_view label) const;
  // Id for `n`, creating an undefined placeholder on first mention.
  ValueId intern_value(std::string_view n);
  // Adds a defined value named after `stem`, unique within the function.
  ValueId add_value(std::string_view stem, Type type);
  const std::string& name_of(ValueId v) const { return values[static_cast<std::size_t>(v)].name; }
  Type type_of(ValueId v) const { return values[static_cast<std::size_t>(v)].type; }

 private:
  std::unordered_map<std::string, ValueId> by_name_;
  std::unordered_map<std::string, int> stem_counters_;
};

struct Global {
  std::string name;
  std::uint64_t size = 0;
  bool escapes = false;
};

struct Program {
  std::vector<Global> globals;
  std::vector<Function> functions;

  const Function* find_function(std::string_view name) const;
  const Global* find_global(std::string_view name) const;
};

// Library routines callable through `extern`. Pointer arguments cross the
// boundary untagged; pointer results come back tagged.
enum class ExternContract : std::uint8_t {
  Pure,         // integer in, integer out
  FreshBuffer,  // returns a new allocation of args[0] bytes
  Copy,         // (dst, src, len)
  Fill,         // (dst, byte-or-len...) writes len bytes into dst
};

struct ExternSignature {
  std::string_view name;
  std::vector<Type> params;
  Type ret = Type::Void;
  ExternContract contract = ExternContract::Pure;
};

const ExternSignature* find_extern(std::string_view name);
const std::vector<ExternSignature>& extern_registry();

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& msg);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

struct Diagnostic {
  std::string function;
  int line = 0;
  std::string message;
};

std::string to_string(const Diagnostic& d);

// Parses and validates; throws ParseError on syntax errors and on the first
// validation diagnostic.
Program parse(std::string_view text);
// Syntax only.
Program parse_unvalidated(std::string_view text);
std::vector<Diagnostic> validate(const Program& program);

std::string print(const Program& program);
std::string print(const Function& fn);

std::string_view to_string(Type t);
std::string_view to_string(Opcode op);
std::string_view to_string(BinKind k);
std::string_view to_string(CmpKind k);

// Pointer provenance: where a pointer value comes from. Derived values point
// back at their base; the chain always ends at a non-derived origin.
enum class Origin : std::uint8_t {
  AllocSite,
  StackSlot,
  DynStackSlot,
  Param,
  LoadedFromMemory,
  Global,
  Null,
  ExternResult,
  CallResult,
  Merge,
  Retagged,
  Derived,
};

struct Provenance {
  Origin origin = Origin::Derived;
  ValueId base = kNoValue;  // Derived only
};

std::string_view to_string(Origin o);
std::vector<std::optional<Provenance>> compute_provenance(const Function& fn);

}  // namespace boundtag::ir
