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

// Line-oriented parser for the .pir text format.

#include <cctype>
#include <charconv>
#include <unordered_map>

#include "boundtag/ir.hpp"

namespace boundtag::ir {
namespace {

enum class Tok : std::uint8_t { Ident, Local, Symbol, Label, Int, Punct, Arrow, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::int64_t num = 0;
  int column = 0;
};

bool name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '.' || c == '$';
}

std::vector<Token> lex_line(std::string_view line, int lineno) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    const int col = static_cast<int>(i) + 1;
    if (c == ';') break;
    if (std::isspace(static_cast<unsigned char>(c)) != 0) {
      ++i;
      continue;
    }
    if (c == '%' || c == '@' || c == '^') {
      std::size_t j = i + 1;
      while (j < line.size() && name_char(line[j])) ++j;
      if (j == i + 1) throw ParseError(lineno, col, std::string("expected a name after '") + c + "'");
      const Tok kind = c == '%' ? Tok::Local : (c == '@' ? Tok::Symbol : Tok::Label);
      out.push_back({kind, std::string(line.substr(i + 1, j - i - 1)), 0, col});
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) != 0) {
      std::size_t j = i;
      int base = 10;
      if (c == '0' && i + 1 < line.size() && (line[i + 1] == 'x' || line[i + 1] == 'X')) {
        base = 16;
        j = i + 2;
      }
      const std::size_t digits = j;
      while (j < line.size() && std::isxdigit(static_cast<unsigned char>(line[j])) != 0) ++j;
      std::uint64_t v = 0;
      auto [ptr, ec] = std::from_chars(line.data() + digits, line.data() + j, v, base);
      if (ec != std::errc() || ptr != line.data() + j || (base == 10 && v > static_cast<std::uint64_t>(INT64_MAX))) {
        throw ParseError(lineno, col, "malformed integer literal");
      }
      if (j < line.size() && name_char(line[j])) throw ParseError(lineno, col, "malformed integer literal");
      out.push_back({Tok::Int, std::string(line.substr(i, j - i)), static_cast<std::int64_t>(v), col});
      i = j;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_') {
      std::size_t j = i;
      while (j < line.size() && name_char(line[j])) ++j;
      out.push_back({Tok::Ident, std::string(line.substr(i, j - i)), 0, col});
      i = j;
      continue;
    }
    if (c == '-' && i + 1 < line.size() && line[i + 1] == '>') {
      out.push_back({Tok::Arrow, "->", 0, col});
      i += 2;
      continue;
    }
    if (std::string_view("=,()[]{}:*+-#").find(c) != std::string_view::npos) {
      out.push_back({Tok::Punct, std::string(1, c), 0, col});
      ++i;
      continue;
    }
    throw ParseError(lineno, col, std::string("unexpected character '") + c + "'");
  }
  return out;
}

struct PendingLabel {
  int line = 0;
  int column = 0;
  bool defined = false;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Program run() {
    std::size_t start = 0;
    while (start <= text_.size()) {
      std::size_t nl = text_.find('\n', start);
      if (nl == std::string_view::npos) nl = text_.size();
      ++lineno_;
      toks_ = lex_line(text_.substr(start, nl - start), lineno_);
      pos_ = 0;
      if (!toks_.empty()) line();
      start = nl + 1;
    }
    if (fn_ != nullptr) throw ParseError(lineno_, 1, "unterminated function @" + fn_->name);
    infer_types();
    return std::move(prog_);
  }

 private:
  // Token cursor ----------------------------------------------------------

  const Token& peek() const {
    static const Token end{};
    return pos_ < toks_.size() ? toks_[pos_] : end;
  }
  int col() const { return pos_ < toks_.size() ? toks_[pos_].column : (toks_.empty() ? 1 : toks_.back().column + 1); }
  bool at_end() const { return pos_ >= toks_.size(); }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(lineno_, col(), msg); }

  Token next() {
    if (at_end()) fail("unexpected end of line");
    return toks_[pos_++];
  }
  bool accept_punct(char c) {
    if (!at_end() && peek().kind == Tok::Punct && peek().text[0] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect_punct(char c) {
    if (!accept_punct(c)) fail(std::string("expected '") + c + "'");
  }
  bool accept_ident(std::string_view word) {
    if (!at_end() && peek().kind == Tok::Ident && peek().text == word) {
      ++pos_;
      return true;
    }
    return false;
  }
  Token expect(Tok kind, const char* what) {
    if (at_end() || peek().kind != kind) fail(std::string("expected ") + what);
    return next();
  }
  void expect_end() {
    if (!at_end()) fail("unexpected trailing token '" + peek().text + "'");
  }

  std::int64_t signed_int() {
    const bool neg = accept_punct('-');
    const Token t = expect(Tok::Int, "integer");
    return neg ? -t.num : t.num;
  }

  Type type_name() {
    const Token t = expect(Tok::Ident, "type");
    if (t.text == "int") return Type::Int;
    if (t.text == "ptr") return Type::Ptr;
    if (t.text == "void") return Type::Void;
    pos_--;
    fail("unknown type '" + t.text + "'");
  }

  // Values and blocks -----------------------------------------------------

  ValueId use(const Token& t) {
    const ValueId v = fn_->intern_value(t.text);
    if (first_use_.size() <= static_cast<std::size_t>(v)) first_use_.resize(static_cast<std::size_t>(v) + 1);
    if (first_use_[static_cast<std::size_t>(v)].line == 0) first_use_[static_cast<std::size_t>(v)] = {lineno_, t.column};
    return v;
  }

  ValueId define(const Token& t, Type type) {
    const ValueId v = fn_->intern_value(t.text);
    auto& info = fn_->values[static_cast<std::size_t>(v)];
    if (info.defined) throw ParseError(lineno_, t.column, "value %" + t.text + " is defined more than once");
    info.defined = true;
    info.type = type;
    return v;
  }

  Operand operand() {
    if (!at_end() && peek().kind == Tok::Local) return Operand::of(use(next()));
    if (!at_end() && (peek().kind == Tok::Int || (peek().kind == Tok::Punct && peek().text == "-"))) {
      return Operand::constant(signed_int());
    }
    fail("expected a value or integer");
  }

  ValueId value_operand() { return use(expect(Tok::Local, "value name")); }

  BlockId block_ref() {
    const Token t = expect(Tok::Label, "block label");
    return intern_block(t, false);
  }

  BlockId intern_block(const Token& t, bool defining) {
    auto it = label_ids_.find(t.text);
    BlockId id;
    if (it == label_ids_.end()) {
      id = static_cast<BlockId>(fn_->blocks.size());
      fn_->blocks.push_back(Block{t.text, {}});
      labels_.push_back({lineno_, t.column, false});
      label_ids_.emplace(t.text, id);
    } else {
      id = it->second;
    }
    if (defining) {
      auto& pl = labels_[static_cast<std::size_t>(id)];
      if (pl.defined) throw ParseError(lineno_, t.column, "block ^" + t.text + " is defined more than once");
      pl.defined = true;
      block_order_.push_back(id);
    }
    return id;
  }

  std::vector<Operand> call_args() {
    std::vector<Operand> args;
    expect_punct('(');
    if (!accept_punct(')')) {
      do {
        args.push_back(operand());
      } while (accept_punct(','));
      expect_punct(')');
    }
    return args;
  }

  // Top level -------------------------------------------------------------

  void line() {
    if (fn_ == nullptr) {
      if (accept_ident("global")) return global();
      if (accept_ident("fn")) return function_header();
      fail("expected 'global' or 'fn'");
    }
    if (accept_punct('}')) {
      expect_end();
      return finish_function();
    }
    if (peek().kind == Tok::Label && pos_ + 1 < toks_.size() && toks_[pos_ + 1].text == ":") {
      const Token t = next();
      next();
      block_ = intern_block(t, true);
      expect_end();
      return;
    }
    if (block_ == kNoBlock) fail("instruction outside of a block; add a label such as ^entry:");
    instruction();
  }

  void global() {
    Global g;
    g.name = expect(Tok::Symbol, "global name").text;
    bool have_size = false;
    while (!at_end()) {
      const Token key = expect(Tok::Ident, "attribute");
      expect_punct('=');
      if (key.text == "size") {
        const std::int64_t n = signed_int();
        if (n < 0) fail("global size must be non-negative");
        g.size = static_cast<std::uint64_t>(n);
        have_size = true;
      } else if (key.text == "escapes") {
        const Token v = expect(Tok::Ident, "true or false");
        if (v.text != "true" && v.text != "false") fail("expected true or false");
        g.escapes = v.text == "true";
      } else {
        fail("unknown global attribute '" + key.text + "'");
      }
    }
    if (!have_size) fail("global @" + g.name + " needs size=N");
    prog_.globals.push_back(std::move(g));
  }

  void function_header() {
    prog_.functions.emplace_back();
    fn_ = &prog_.functions.back();
    fn_->line = lineno_;
    fn_->name = expect(Tok::Symbol, "function name").text;
    expect_punct('(');
    if (!accept_punct(')')) {
      do {
        const Token p = expect(Tok::Local, "parameter name");
        expect_punct(':');
        const Type t = type_name();
        if (t == Type::Void) fail("parameters cannot be void");
        fn_->params.push_back(define(p, t));
      } while (accept_punct(','));
      expect_punct(')');
    }
    fn_->ret_type = Type::Void;
    if (!at_end() && peek().kind == Tok::Arrow) {
      next();
      fn_->ret_type = type_name();
    }
    expect_punct('{');
    expect_end();
    block_ = kNoBlock;
  }

  void finish_function() {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (!labels_[i].defined) {
        throw ParseError(labels_[i].line, labels_[i].column, "undefined block ^" + fn_->blocks[i].label);
      }
    }
    for (std::size_t v = 0; v < fn_->values.size(); ++v) {
      if (!fn_->values[v].defined) {
        const auto at = v < first_use_.size() ? first_use_[v] : PendingLabel{};
        throw ParseError(at.line, at.column, "use of undefined value %" + fn_->values[v].name);
      }
    }
    // Blocks are numbered by first mention; renumber to definition order so
    // the entry block is block 0.
    std::vector<BlockId> remap(fn_->blocks.size());
    std::vector<Block> ordered;
    for (std::size_t i = 0; i < block_order_.size(); ++i) {
      remap[static_cast<std::size_t>(block_order_[i])] = static_cast<BlockId>(i);
      ordered.push_back(std::move(fn_->blocks[static_cast<std::size_t>(block_order_[i])]));
    }
    for (auto& b : ordered) {
      for (auto& in : b.instrs) {
        for (auto& t : in.blocks) t = remap[static_cast<std::size_t>(t)];
      }
    }
    fn_->blocks = std::move(ordered);
    if (fn_->blocks.empty()) throw ParseError(fn_->line, 1, "function @" + fn_->name + " has no blocks");
    fn_ = nullptr;
    block_ = kNoBlock;
    label_ids_.clear();
    labels_.clear();
    block_order_.clear();
    first_use_.clear();
  }

  // Instructions ----------------------------------------------------------

  void instruction() {
    Instr in;
    in.line = lineno_;
    std::optional<Token> result;
    if (peek().kind == Tok::Local && pos_ + 1 < toks_.size() && toks_[pos_ + 1].text == "=") {
      result = next();
      next();
    }
    const Token op = expect(Tok::Ident, "opcode");
    const std::string& name = op.text;
    const auto dot = name.find('.');
    const std::string head = name.substr(0, dot);
    const std::string suffix = dot == std::string::npos ? "" : name.substr(dot + 1);

    auto needs_result = [&](bool want) {
      if (want && !result) fail("'" + name + "' produces a value; write %name = " + name);
      if (!want && result) fail("'" + name + "' does not produce a value");
    };
    auto no_suffix = [&] {
      if (dot != std::string::npos) fail("unknown opcode '" + name + "'");
    };
    Type rtype = Type::Void;

    if (head == "const") {
      no_suffix();
      needs_result(true);
      in.op = Opcode::Const;
      in.imm = signed_int();
      rtype = Type::Int;
    } else if (head == "null") {
      no_suffix();
      needs_result(true);
      in.op = Opcode::Null;
      rtype = Type::Ptr;
    } else if (head == "global") {
      no_suffix();
      needs_result(true);
      in.op = Opcode::GlobalAddr;
      in.callee = expect(Tok::Symbol, "global name").text;
      rtype = Type::Ptr;
    } else if (head == "alloc" || head == "alloca_dyn") {
      no_suffix();
      needs_result(true);
      in.op = head == "alloc" ? Opcode::Alloc : Opcode::AllocaDyn;
      in.args.push_back(operand());
      rtype = Type::Ptr;
    } else if (head == "alloca") {
      no_suffix();
      needs_result(true);
      in.op = Opcode::Alloca;
      in.imm = signed_int();
      if (in.imm < 0) fail("alloca size must be non-negative");
      rtype = Type::Ptr;
    } else if (head == "free") {
      no_suffix();
      needs_result(false);
      in.op = Opcode::Free;
      in.args.push_back(operand());
    } else if (head == "gep") {
      no_suffix();
      needs_result(true);
      in.op = Opcode::Gep;
      in.args.push_back(Operand::of(value_operand()));
      if (accept_punct(',')) gep_offset(in);
      rtype = Type::Ptr;
    } else if (head == "load" || head == "loadp") {
      needs_result(true);
      in.op = Opcode::Load;
      if (head == "loadp") {
        no_suffix();
        in.imm = 8;
        rtype = Type::Ptr;
      } else {
        in.imm = access_width(suffix);
        rtype = Type::Int;
      }
      in.args.push_back(operand());
      site_attr(in);
    } else if (head == "store" || head == "storep") {
      needs_result(false);
      in.op = Opcode::Store;
      if (head == "storep") {
        no_suffix();
        in.imm = 8;
        in.type = Type::Ptr;
      } else {
        in.imm = access_width(suffix);
        in.type = Type::Int;
      }
      in.args.push_back(operand());
      expect_punct(',');
      in.args.push_back(operand());
      site_attr(in);
    } else if (head == "phi") {
      no_suffix();
      needs_result(true);
      in.op = Opcode::Phi;
      rtype = type_name();
      if (rtype == Type::Void) fail("phi cannot be void");
      do {
        expect_punct('[');
        in.args.push_back(operand());
        expect_punct(',');
        in.blocks.push_back(block_ref());
        expect_punct(']');
      } while (accept_punct(','));
    } else if (head == "select") {
      no_suffix();
      needs_result(true);
      in.op = Opcode::Select;
      in.args.push_back(operand());
      expect_punct(',');
      in.args.push_back(operand());
      expect_punct(',');
      in.args.push_back(operand());
    } else if (head == "call" || head == "extern") {
      no_suffix();
      in.op = head == "call" ? Opcode::Call : Opcode::Extern;
      in.callee = expect(Tok::Symbol, "callee").text;
      in.args = call_args();
      if (in.op == Opcode::Extern) {
        const ExternSignature* sig = find_extern(in.callee);
        if (sig == nullptr) fail("unknown extern @" + in.callee);
        rtype = sig->ret;
        if (result && rtype == Type::Void) fail("extern @" + in.callee + " returns nothing");
      }
    } else if (auto bk = bin_kind(head)) {
      no_suffix();
      needs_result(true);
      in.op = Opcode::Bin;
      in.bin = *bk;
      binary_operands(in);
      rtype = Type::Int;
    } else if (head == "cmp" || head == "pcmp") {
      needs_result(true);
      in.op = head == "cmp" ? Opcode::Cmp : Opcode::PtrCmp;
      const auto ck = cmp_kind(suffix);
      if (!ck) fail("unknown comparison '" + name + "'");
      in.cmp = *ck;
      binary_operands(in);
      rtype = Type::Int;
    } else if (head == "psub") {
      no_suffix();
      needs_result(true);
      in.op = Opcode::PtrSub;
      binary_operands(in);
      rtype = Type::Int;
    } else if (head == "ptrtoint") {
      no_suffix();
      needs_result(true);
      in.op = Opcode::PtrToInt;
      in.args.push_back(operand());
      rtype = Type::Int;
    } else if (head == "mask") {
      no_suffix();
      needs_result(true);
      in.op = Opcode::Mask;
      in.args.push_back(operand());
      rtype = Type::Ptr;
    } else if (head == "retag") {
      no_suffix();
      needs_result(true);
      in.op = Opcode::Retag;
      binary_operands(in);
      rtype = Type::Ptr;
    } else if (head == "check") {
      no_suffix();
      needs_result(false);
      in.op = Opcode::Check;
      check_body(in);
    } else if (head == "ret") {
      no_suffix();
      needs_result(false);
      in.op = Opcode::Ret;
      if (!at_end()) in.args.push_back(operand());
    } else if (head == "br") {
      no_suffix();
      needs_result(false);
      in.op = Opcode::Br;
      in.blocks.push_back(block_ref());
    } else if (head == "condbr") {
      no_suffix();
      needs_result(false);
      in.op = Opcode::CondBr;
      in.args.push_back(operand());
      expect_punct(',');
      in.blocks.push_back(block_ref());
      expect_punct(',');
      in.blocks.push_back(block_ref());
    } else {
      pos_--;
      fail("unknown opcode '" + name + "'");
    }
    expect_end();
    if (result) {
      // Call results are typed after all signatures are known.
      in.result = define(*result, in.op == Opcode::Call ? Type::Void : rtype);
    }
    in.type = in.op == Opcode::Store ? in.type : rtype;
    fn_->blocks[static_cast<std::size_t>(block_)].instrs.push_back(std::move(in));
  }

  std::int64_t access_width(const std::string& suffix) {
    std::int64_t w = 0;
    auto [p, ec] = std::from_chars(suffix.data(), suffix.data() + suffix.size(), w);
    if (suffix.empty() || ec != std::errc() || p != suffix.data() + suffix.size() || w < 1 || w > 8) {
      fail("access width must be 1..8 bytes, as in load.4");
    }
    return w;
  }

  void site_attr(Instr& in) {
    if (accept_punct('#')) {
      const Token t = expect(Tok::Int, "site id");
      in.site = static_cast<int>(t.num);
    }
  }

  void binary_operands(Instr& in) {
    in.args.push_back(operand());
    expect_punct(',');
    in.args.push_back(operand());
  }

  void gep_offset(Instr& in) {
    bool first = true;
    while (true) {
      bool neg = false;
      if (accept_punct('-')) {
        neg = true;
      } else if (!first && !accept_punct('+')) {
        break;
      }
      first = false;
      if (!at_end() && peek().kind == Tok::Local) {
        const ValueId idx = value_operand();
        std::int64_t scale = 1;
        if (accept_punct('*')) scale = signed_int();
        if (neg) scale = -scale;
        add_term(in, idx, scale);
      } else {
        const std::int64_t c = expect(Tok::Int, "offset term").num;
        if (accept_punct('*')) {
          const ValueId idx = value_operand();
          add_term(in, idx, neg ? -c : c);
        } else {
          in.imm += neg ? -c : c;
        }
      }
      if (at_end()) break;
    }
  }

  static void add_term(Instr& in, ValueId idx, std::int64_t scale) {
    for (auto& t : in.terms) {
      if (t.index == idx) {
        t.scale += scale;
        return;
      }
    }
    in.terms.push_back({idx, scale});
  }

  void check_body(Instr& in) {
    expect_punct('#');
    in.check.site = static_cast<int>(expect(Tok::Int, "site id").num);
    in.args.push_back(Operand::of(value_operand()));
    expect_punct(',');
    in.args.push_back(Operand::of(value_operand()));
    expect_punct(',');
    in.check.lo = signed_int();
    expect_punct(',');
    in.check.hi = signed_int();
    while (!at_end()) {
      const Token flag = expect(Tok::Ident, "check flag");
      if (flag.text == "upper") {
        in.check.upper_only = true;
      } else if (flag.text == "guard") {
        in.check.guard = true;
      } else if (flag.text == "escape") {
        in.check.escape = true;
      } else if (flag.text == "hoisted") {
        in.check.hoisted = true;
      } else if (flag.text == "static") {
        expect_punct('=');
        const std::int64_t n = signed_int();
        if (n < 0) fail("static extent must be non-negative");
        in.check.static_extent = static_cast<std::uint64_t>(n);
      } else {
        pos_--;
        fail("unknown check flag '" + flag.text + "'");
      }
    }
  }

  static std::optional<BinKind> bin_kind(const std::string& s) {
    static const std::unordered_map<std::string, BinKind> m = {
        {"add", BinKind::Add}, {"sub", BinKind::Sub}, {"mul", BinKind::Mul}, {"div", BinKind::Div},
        {"rem", BinKind::Rem}, {"and", BinKind::And}, {"or", BinKind::Or},   {"xor", BinKind::Xor},
        {"shl", BinKind::Shl}, {"shr", BinKind::Shr},
    };
    auto it = m.find(s);
    if (it == m.end()) return std::nullopt;
    return it->second;
  }

  static std::optional<CmpKind> cmp_kind(const std::string& s) {
    static const std::unordered_map<std::string, CmpKind> m = {
        {"eq", CmpKind::Eq}, {"ne", CmpKind::Ne},   {"lt", CmpKind::Lt},   {"le", CmpKind::Le},
        {"gt", CmpKind::Gt}, {"ge", CmpKind::Ge},   {"ult", CmpKind::Ult}, {"ule", CmpKind::Ule},
        {"ugt", CmpKind::Ugt}, {"uge", CmpKind::Uge},
    };
    auto it = m.find(s);
    if (it == m.end()) return std::nullopt;
    return it->second;
  }

  // Result types that depend on other definitions. Select operands dominate
  // the select, so a few sweeps always settle.
  void infer_types() {
    for (auto& f : prog_.functions) {
      for (auto& b : f.blocks) {
        for (auto& in : b.instrs) {
          if (in.op != Opcode::Call) continue;
          const Function* callee = prog_.find_function(in.callee);
          if (callee == nullptr) throw ParseError(in.line, 1, "call to unknown function @" + in.callee);
          in.type = callee->ret_type;
          if (in.result != kNoValue) {
            if (callee->ret_type == Type::Void) {
              throw ParseError(in.line, 1, "function @" + in.callee + " returns nothing");
            }
            f.values[static_cast<std::size_t>(in.result)].type = callee->ret_type;
          }
        }
      }
      bool changed = true;
      while (changed) {
        changed = false;
        for (auto& b : f.blocks) {
          for (auto& in : b.instrs) {
            if (in.op != Opcode::Select || in.type != Type::Void) continue;
            Type t = Type::Void;
            for (std::size_t k = 1; k < 3; ++k) {
              const Operand& o = in.args[k];
              const Type ot = o.is_value() ? f.type_of(o.value) : Type::Int;
              if (ot != Type::Void) t = ot;
            }
            if (t != Type::Void) {
              in.type = t;
              f.values[static_cast<std::size_t>(in.result)].type = t;
              changed = true;
            }
          }
        }
      }
      for (auto& b : f.blocks) {
        for (auto& in : b.instrs) {
          if (in.op == Opcode::Select && in.type == Type::Void) {
            throw ParseError(in.line, 1, "cannot infer the type of select %" + f.name_of(in.result));
          }
        }
      }
    }
  }

  std::string_view text_;
  Program prog_;
  Function* fn_ = nullptr;
  BlockId block_ = kNoBlock;
  int lineno_ = 0;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::unordered_map<std::string, BlockId> label_ids_;
  std::vector<PendingLabel> labels_;
  std::vector<BlockId> block_order_;
  std::vector<PendingLabel> first_use_;
};

}  // namespace

Program parse_unvalidated(std::string_view text) { return Parser(text).run(); }

}  // namespace boundtag::ir
