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

#include "boundtag/instrument.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "instrument_detail.hpp"

namespace boundtag {

using ir::BlockId;
using ir::Function;
using ir::Instr;
using ir::kNoBlock;
using ir::kNoValue;
using ir::Opcode;
using ir::Operand;
using ir::Type;
using ir::ValueId;

namespace detail {

DefIndex::DefIndex(const Function& fn) : site(ir::def_sites(fn)), instr(fn.values.size(), nullptr) {
  for (const auto& b : fn.blocks) {
    for (const auto& in : b.instrs) {
      if (in.result != kNoValue) instr[static_cast<std::size_t>(in.result)] = &in;
    }
  }
}

Insertions::Insertions(const Function& fn)
    : before_(fn.blocks.size()), after_(fn.blocks.size()), head_(fn.blocks.size()), tail_(fn.blocks.size()) {
  for (std::size_t b = 0; b < fn.blocks.size(); ++b) {
    before_[b].resize(fn.blocks[b].instrs.size());
    after_[b].resize(fn.blocks[b].instrs.size());
  }
}

void Insertions::after_def(const DefIndex& defs, ValueId v, Instr in) {
  const ir::DefSite d = defs.site[static_cast<std::size_t>(v)];
  if (d.index < 0) {
    head(0, std::move(in));
  } else {
    after(d.block, d.index, std::move(in));
  }
}

void Insertions::apply(Function& fn) {
  for (std::size_t b = 0; b < fn.blocks.size(); ++b) {
    auto& old = fn.blocks[b].instrs;
    std::vector<Instr> out;
    out.reserve(old.size() + head_[b].size() + tail_[b].size());
    std::size_t k = 0;
    while (k < old.size() && old[k].op == Opcode::Phi) out.push_back(std::move(old[k++]));
    for (auto& h : head_[b]) {
      if (h.op == Opcode::Phi) out.push_back(std::move(h));
    }
    for (std::size_t j = 0; j < k; ++j) {
      for (auto& a : after_[b][j]) out.push_back(std::move(a));
    }
    for (auto& h : head_[b]) {
      if (h.op != Opcode::Phi) out.push_back(std::move(h));
    }
    for (std::size_t j = k; j < old.size(); ++j) {
      if (j + 1 == old.size()) {
        for (auto& t : tail_[b]) out.push_back(std::move(t));
      }
      for (auto& x : before_[b][j]) out.push_back(std::move(x));
      out.push_back(std::move(old[j]));
      for (auto& a : after_[b][j]) out.push_back(std::move(a));
    }
    old = std::move(out);
  }
  for (auto& v : before_) v.assign(v.size(), {});
  for (auto& v : after_) v.assign(v.size(), {});
  head_.assign(head_.size(), {});
  tail_.assign(tail_.size(), {});
}

Instr make_mask(ValueId result, ValueId v) {
  Instr in;
  in.op = Opcode::Mask;
  in.result = result;
  in.type = Type::Ptr;
  in.args = {Operand::of(v)};
  return in;
}

Instr make_retag(ValueId result, ValueId p, ValueId root) {
  Instr in;
  in.op = Opcode::Retag;
  in.result = result;
  in.type = Type::Ptr;
  in.args = {Operand::of(p), Operand::of(root)};
  return in;
}

ValueId static_root(const DefIndex& defs, ValueId v) {
  while (v != kNoValue) {
    const Instr* d = defs.def(v);
    if (d == nullptr) return kNoValue;
    if (d->op == Opcode::Alloca || d->op == Opcode::GlobalAddr) return v;
    if (d->op != Opcode::Gep && d->op != Opcode::Mask) return kNoValue;
    v = d->args[0].value;
  }
  return kNoValue;
}

std::optional<std::uint64_t> static_extent(const ir::Program& prog, const DefIndex& defs, ValueId root) {
  if (root == kNoValue) return std::nullopt;
  const Instr* d = defs.def(root);
  if (d == nullptr) return std::nullopt;
  if (d->op == Opcode::Alloca) return static_cast<std::uint64_t>(d->imm);
  if (d->op == Opcode::GlobalAddr) {
    if (const ir::Global* g = prog.find_global(d->callee)) return g->size;
  }
  return std::nullopt;
}

FunctionAnalysis::FunctionAnalysis(const Function& fn)
    : cfg(ir::build_cfg(fn)),
      dom(ir::DominatorTree::dominators(cfg)),
      pdom(ir::DominatorTree::postdominators(cfg)),
      loops(ir::natural_loops(cfg, dom)) {}

bool FunctionAnalysis::dominates(BlockId ab, int ai, BlockId bb, int bi) const {
  if (ab == bb) return ai < bi;
  return dom.dominates(ab, bb);
}

bool FunctionAnalysis::postdominates(BlockId ab, int ai, BlockId bb, int bi) const {
  if (ab == bb) return ai > bi;
  return pdom.dominates(ab, bb);
}

bool FunctionAnalysis::cycles_avoiding(BlockId from, BlockId avoid) const {
  std::vector<bool> seen(cfg.size(), false);
  std::vector<BlockId> work(cfg.succs[static_cast<std::size_t>(from)].begin(),
                            cfg.succs[static_cast<std::size_t>(from)].end());
  while (!work.empty()) {
    const BlockId x = work.back();
    work.pop_back();
    if (x == from) return true;
    if (x == avoid || seen[static_cast<std::size_t>(x)]) continue;
    seen[static_cast<std::size_t>(x)] = true;
    for (BlockId s : cfg.succs[static_cast<std::size_t>(x)]) work.push_back(s);
  }
  return false;
}

}  // namespace detail

using detail::DefIndex;
using detail::Insertions;

void AffineOffset::add(ValueId v, std::int64_t scale) {
  if (scale == 0) return;
  auto it = std::lower_bound(terms.begin(), terms.end(), v, [](const auto& t, ValueId x) { return t.first < x; });
  if (it != terms.end() && it->first == v) {
    it->second += scale;
    if (it->second == 0) terms.erase(it);
  } else {
    terms.insert(it, {v, scale});
  }
}

std::string_view to_string(SiteKind k) {
  switch (k) {
    case SiteKind::Access: return "access";
    case SiteKind::Escape: return "escape";
    case SiteKind::LoopHoisted: return "loop_hoisted";
  }
  return "?";
}

std::string_view to_string(SiteStatus s) {
  switch (s) {
    case SiteStatus::Active: return "active";
    case SiteStatus::ElidedByQ: return "elided_by_q";
    case SiteStatus::ElidedByCombine: return "elided_by_combine";
    case SiteStatus::ElidedByDominance: return "elided_by_dominance";
    case SiteStatus::ElidedByHoist: return "elided_by_hoist";
    case SiteStatus::LowerBoundDropped: return "lower_bound_dropped";
  }
  return "?";
}

OptSet OptSet::parse(std::string_view list) {
  OptSet s = none();
  std::size_t start = 0;
  while (start <= list.size()) {
    std::size_t comma = list.find(',', start);
    if (comma == std::string_view::npos) comma = list.size();
    std::string_view word = list.substr(start, comma - start);
    while (!word.empty() && word.front() == ' ') word.remove_prefix(1);
    while (!word.empty() && word.back() == ' ') word.remove_suffix(1);
    if (word == "qpad") {
      s.qpad = true;
    } else if (word == "lower" || word == "lower_bound") {
      s.lower_bound = true;
    } else if (word == "combine") {
      s.combine = true;
    } else if (word == "hoist") {
      s.hoist = true;
    } else if (word == "all") {
      s = all();
    } else if (!word.empty() && word != "none") {
      throw std::invalid_argument("unknown optimization '" + std::string(word) + "'");
    }
    start = comma + 1;
  }
  return s;
}

std::string OptSet::to_string() const {
  std::vector<std::string> parts;
  if (qpad) parts.emplace_back("qpad");
  if (lower_bound) parts.emplace_back("lower");
  if (combine) parts.emplace_back("combine");
  if (hoist) parts.emplace_back("hoist");
  if (parts.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "," : "") + parts[i];
  return out;
}

const CheckSite* InstrumentResult::site(int id) const {
  for (const auto& s : sites) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

// KSA --------------------------------------------------------------------

namespace {

enum class Shape : std::uint8_t { Root, Derived, Merge };

Shape shape_of(const DefIndex& defs, ValueId v) {
  const Instr* d = defs.def(v);
  if (d == nullptr) return Shape::Root;
  if (d->op == Opcode::Gep || d->op == Opcode::Mask) return Shape::Derived;
  if (d->op == Opcode::Phi || d->op == Opcode::Select) return Shape::Merge;
  return Shape::Root;
}

std::vector<ValueId> merge_operands(const Instr& in) {
  std::vector<ValueId> ops;
  if (in.op == Opcode::Phi) {
    for (const auto& o : in.args) ops.push_back(o.value);
  } else {
    ops = {in.args[1].value, in.args[2].value};
  }
  return ops;
}

ValueId chain_base(const DefIndex& defs, ValueId v) {
  while (shape_of(defs, v) == Shape::Derived) v = defs.def(v)->args[0].value;
  return v;
}

}  // namespace

KsaMap compute_ksa(Function& fn) {
  const DefIndex defs(fn);
  const std::size_t n = fn.values.size();
  auto is_ptr = [&](ValueId v) { return fn.type_of(v) == Type::Ptr; };

  std::vector<ValueId> merges;
  for (const auto& b : fn.blocks) {
    for (const auto& in : b.instrs) {
      if ((in.op == Opcode::Phi || in.op == Opcode::Select) && in.type == Type::Ptr) merges.push_back(in.result);
    }
  }

  // A merge needs a mirror when some operand is not its own KSA; least
  // fixpoint, so cycles made only of merges over roots stay mirror-free.
  std::vector<char> needs(n, 0);
  for (bool changed = true; changed;) {
    changed = false;
    for (ValueId m : merges) {
      if (needs[static_cast<std::size_t>(m)]) continue;
      for (ValueId o : merge_operands(*defs.def(m))) {
        if (o == m) continue;
        const Shape s = shape_of(defs, o);
        if (s == Shape::Derived || (s == Shape::Merge && needs[static_cast<std::size_t>(o)])) {
          needs[static_cast<std::size_t>(m)] = 1;
          changed = true;
          break;
        }
      }
    }
  }

  // References: [0, n) are values, n + k is mirror k.
  struct Mirror {
    ValueId origin;
    std::vector<std::size_t> ops;
    std::size_t replaced = SIZE_MAX;
    ValueId value = kNoValue;
  };
  std::vector<Mirror> mirrors;
  std::vector<std::size_t> mirror_of(n, SIZE_MAX);
  for (ValueId m : merges) {
    if (needs[static_cast<std::size_t>(m)]) {
      mirror_of[static_cast<std::size_t>(m)] = mirrors.size();
      mirrors.push_back({m, {}, SIZE_MAX, kNoValue});
    }
  }
  auto resolve = [&](ValueId v) -> std::size_t {
    const ValueId b = chain_base(defs, v);
    if (mirror_of[static_cast<std::size_t>(b)] != SIZE_MAX) return n + mirror_of[static_cast<std::size_t>(b)];
    return static_cast<std::size_t>(b);
  };
  for (auto& mr : mirrors) {
    for (ValueId o : merge_operands(*defs.def(mr.origin))) mr.ops.push_back(resolve(o));
  }
  auto find = [&](std::size_t r) {
    while (r >= n && mirrors[r - n].replaced != SIZE_MAX) r = mirrors[r - n].replaced;
    return r;
  };
  // Drop mirrors whose operands, self-references aside, all agree.
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t k = 0; k < mirrors.size(); ++k) {
      if (mirrors[k].replaced != SIZE_MAX) continue;
      std::size_t unique = SIZE_MAX;
      bool trivial = true;
      for (std::size_t op : mirrors[k].ops) {
        const std::size_t r = find(op);
        if (r == n + k) continue;
        if (unique == SIZE_MAX) {
          unique = r;
        } else if (r != unique) {
          trivial = false;
          break;
        }
      }
      if (trivial && unique != SIZE_MAX) {
        mirrors[k].replaced = unique;
        changed = true;
      }
    }
  }

  Insertions ins(fn);
  for (auto& mr : mirrors) {
    if (mr.replaced == SIZE_MAX) mr.value = fn.add_value("ksa." + fn.name_of(mr.origin), Type::Ptr);
  }
  auto concrete = [&](std::size_t r) -> ValueId {
    r = find(r);
    return r < n ? static_cast<ValueId>(r) : mirrors[r - n].value;
  };
  for (const auto& mr : mirrors) {
    if (mr.replaced != SIZE_MAX) continue;
    const Instr& orig = *defs.def(mr.origin);
    const ir::DefSite site = defs.site[static_cast<std::size_t>(mr.origin)];
    Instr in;
    in.op = orig.op;
    in.result = mr.value;
    in.type = Type::Ptr;
    if (orig.op == Opcode::Phi) {
      for (std::size_t op : mr.ops) in.args.push_back(Operand::of(concrete(op)));
      in.blocks = orig.blocks;
      ins.head(site.block, std::move(in));
    } else {
      in.args = {orig.args[0], Operand::of(concrete(mr.ops[0])), Operand::of(concrete(mr.ops[1]))};
      ins.after(site.block, site.index, std::move(in));
    }
  }

  KsaMap km;
  const std::size_t total = fn.values.size();
  km.ksa.assign(total, kNoValue);
  km.offset.assign(total, std::nullopt);
  km.mirror.assign(total, false);
  for (std::size_t v = 0; v < n; ++v) {
    if (!is_ptr(static_cast<ValueId>(v))) continue;
    km.ksa[v] = concrete(resolve(static_cast<ValueId>(v)));
  }
  for (const auto& mr : mirrors) {
    if (mr.value == kNoValue) continue;
    km.ksa[static_cast<std::size_t>(mr.value)] = mr.value;
    km.mirror[static_cast<std::size_t>(mr.value)] = true;
    km.offset[static_cast<std::size_t>(mr.value)] = AffineOffset{};
  }
  // Offsets follow def order within each chain; recursion depth is the chain
  // length.
  std::function<const AffineOffset&(ValueId)> offset = [&](ValueId v) -> const AffineOffset& {
    auto& slot = km.offset[static_cast<std::size_t>(v)];
    if (slot) return *slot;
    AffineOffset off;
    if (km.ksa[static_cast<std::size_t>(v)] != v) {
      const Instr* d = defs.def(v);
      if (d != nullptr && (d->op == Opcode::Gep || d->op == Opcode::Mask)) {
        off = offset(d->args[0].value);
        if (d->op == Opcode::Gep) {
          off.c += d->imm;
          for (const auto& t : d->terms) off.add(t.index, t.scale);
        }
      } else {
        off.add(v, 1);  // merge with a mirror KSA: opaque distance
      }
    }
    slot = off;
    return *slot;
  };
  for (std::size_t v = 0; v < n; ++v) {
    if (is_ptr(static_cast<ValueId>(v))) offset(static_cast<ValueId>(v));
  }
  ins.apply(fn);
  return km;
}

// Metadata reset -----------------------------------------------------------

namespace {

class MaskPlanner {
 public:
  MaskPlanner(Function& fn, const DefIndex& defs, Insertions& ins)
      : fn_(fn), defs_(defs), ins_(ins), memo_(fn.values.size(), kNoValue) {}

  std::size_t masks() const { return masks_; }

  ValueId masked(ValueId v) {
    if (static_cast<std::size_t>(v) < memo_.size() && memo_[static_cast<std::size_t>(v)] != kNoValue) {
      return memo_[static_cast<std::size_t>(v)];
    }
    const Instr* d = defs_.def(v);
    if (d != nullptr && (d->op == Opcode::Mask || d->op == Opcode::Alloca || d->op == Opcode::GlobalAddr)) {
      return remember(v, v);
    }
    const ValueId m = fn_.add_value(fn_.name_of(v) + ".m", Type::Ptr);
    remember(v, m);
    if (d == nullptr || (d->op != Opcode::Gep && d->op != Opcode::Phi && d->op != Opcode::Select)) {
      ins_.after_def(defs_, v, detail::make_mask(m, v));
      ++masks_;
      return m;
    }
    Instr clone = *d;
    clone.result = m;
    clone.line = 0;
    if (d->op == Opcode::Gep) {
      clone.args[0] = Operand::of(masked(d->args[0].value));
      ins_.after_def(defs_, v, std::move(clone));
    } else if (d->op == Opcode::Phi) {
      for (auto& o : clone.args) o = Operand::of(masked(o.value));
      ins_.head(defs_.site[static_cast<std::size_t>(v)].block, std::move(clone));
    } else {
      clone.args[1] = Operand::of(masked(d->args[1].value));
      clone.args[2] = Operand::of(masked(d->args[2].value));
      ins_.after_def(defs_, v, std::move(clone));
    }
    return m;
  }

 private:
  ValueId remember(ValueId v, ValueId m) {
    if (memo_.size() <= static_cast<std::size_t>(v)) memo_.resize(static_cast<std::size_t>(v) + 1, kNoValue);
    memo_[static_cast<std::size_t>(v)] = m;
    return m;
  }

  Function& fn_;
  const DefIndex& defs_;
  Insertions& ins_;
  std::vector<ValueId> memo_;
  std::size_t masks_ = 0;
};

void mask_accesses(Function& fn, MaskPlanner& mp) {
  for (auto& b : fn.blocks) {
    for (auto& in : b.instrs) {
      if (in.op == Opcode::Load || in.op == Opcode::Store) in.args[0] = Operand::of(mp.masked(in.args[0].value));
    }
  }
}

}  // namespace

std::size_t reset_metadata(Function& fn) {
  const DefIndex defs(fn);
  Insertions ins(fn);
  MaskPlanner mp(fn, defs, ins);
  mask_accesses(fn, mp);
  ins.apply(fn);
  return mp.masks();
}

// Plan ---------------------------------------------------------------------

namespace {

// Static-rooted pointers entering a phi/select are retagged right after
// their definition, so merges only ever carry tagged pointers.
void retag_merge_operands(Function& fn) {
  const DefIndex defs(fn);
  Insertions ins(fn);
  std::map<ValueId, ValueId> memo;
  auto retagged = [&](ValueId o) {
    const ValueId root = detail::static_root(defs, o);
    if (root == kNoValue) return o;
    auto it = memo.find(o);
    if (it != memo.end()) return it->second;
    const ValueId r = fn.add_value(fn.name_of(o) + ".tag", Type::Ptr);
    ins.after_def(defs, o, detail::make_retag(r, o, root));
    memo.emplace(o, r);
    return r;
  };
  for (auto& b : fn.blocks) {
    for (auto& in : b.instrs) {
      if (in.type != Type::Ptr) continue;
      if (in.op == Opcode::Phi) {
        for (auto& o : in.args) o = Operand::of(retagged(o.value));
      } else if (in.op == Opcode::Select) {
        in.args[1] = Operand::of(retagged(in.args[1].value));
        in.args[2] = Operand::of(retagged(in.args[2].value));
      }
    }
  }
  ins.apply(fn);
}

// Escape positions of an instruction: stored pointer, pointer arguments,
// returned pointer.
std::vector<int> escaping_operands(const Function& fn, const Instr& in) {
  std::vector<int> out;
  auto ptr_value = [&](const Operand& o) { return o.is_value() && fn.type_of(o.value) == Type::Ptr; };
  switch (in.op) {
    case Opcode::Store:
      if (in.type == Type::Ptr && ptr_value(in.args[1])) out.push_back(1);
      break;
    case Opcode::Call:
    case Opcode::Extern:
    case Opcode::Ret:
      for (std::size_t k = 0; k < in.args.size(); ++k) {
        if (ptr_value(in.args[k])) out.push_back(static_cast<int>(k));
      }
      break;
    default:
      break;
  }
  return out;
}

ValueId strip_zero_geps(const DefIndex& defs, ValueId v) {
  while (true) {
    const Instr* d = defs.def(v);
    if (d == nullptr) return v;
    if (d->op == Opcode::Mask || (d->op == Opcode::Gep && d->imm == 0 && d->terms.empty())) {
      v = d->args[0].value;
      continue;
    }
    return v;
  }
}

}  // namespace

InstrumentPlan InstrumentPlan::build(const ir::Program& program, const ModeConfig& mode) {
  InstrumentPlan plan;
  plan.prog_ = program;
  plan.mode_ = mode;
  for (auto& fn : plan.prog_.functions) {
    retag_merge_operands(fn);
    plan.ksa_.push_back(compute_ksa(fn));
  }

  int next_id = 0;
  for (std::size_t f = 0; f < plan.prog_.functions.size(); ++f) {
    Function& fn = plan.prog_.functions[f];
    const KsaMap& km = plan.ksa_[f];
    const DefIndex defs(fn);
    for (std::size_t b = 0; b < fn.blocks.size(); ++b) {
      for (std::size_t i = 0; i < fn.blocks[b].instrs.size(); ++i) {
        Instr& in = fn.blocks[b].instrs[i];
        auto base_site = [&](SiteKind kind, ValueId ptr, ValueId ksa) {
          CheckSite s;
          s.id = next_id++;
          s.kind = kind;
          s.q_used = mode.q;
          s.function = static_cast<int>(f);
          s.block = static_cast<BlockId>(b);
          s.index = static_cast<int>(i);
          s.line = in.line;
          s.ptr = ptr;
          s.ksa = ksa;
          s.ptr_offset = *km.offset[static_cast<std::size_t>(ptr)];
          s.lo = s.ptr_offset.c;
          s.hi = s.ptr_offset.c;
          s.terms = s.ptr_offset.terms;
          s.static_extent = detail::static_extent(plan.prog_, defs, detail::static_root(defs, ksa));
          return s;
        };

        if (in.op == Opcode::Load || in.op == Opcode::Store) {
          const ValueId p = in.args[0].value;
          CheckSite s = base_site(SiteKind::Access, p, km.of(p));
          s.access_size = static_cast<std::uint64_t>(in.imm);
          s.hi = s.lo + in.imm;
          in.site = s.id;
          plan.sites_.push_back(std::move(s));
        }

        if (in.op == Opcode::Retag) {
          const ValueId p = in.args[0].value;
          const ValueId root = in.args[1].value;
          if (p != root && detail::static_root(defs, root) == root && detail::static_root(defs, p) == root) {
            CheckSite s = base_site(SiteKind::Escape, p, root);
            s.operand = 0;
            s.retag_point = true;
            plan.sites_.push_back(std::move(s));
          }
          continue;
        }

        for (int k : escaping_operands(fn, in)) {
          const ValueId p = in.args[static_cast<std::size_t>(k)].value;
          const ValueId ksa = km.of(p);
          const ValueId root = detail::static_root(defs, p);
          const ValueId stripped = strip_zero_geps(defs, p);
          if (stripped == ksa) {
            if (root != kNoValue) {
              plan.retag_only_.push_back({static_cast<int>(f), static_cast<BlockId>(b), static_cast<int>(i), k, root});
            }
            continue;
          }
          CheckSite s = base_site(SiteKind::Escape, p, ksa);
          s.operand = k;
          const Instr* sd = defs.def(stripped);
          s.guarded = sd != nullptr && (sd->op == Opcode::Phi || sd->op == Opcode::Select);
          plan.sites_.push_back(std::move(s));
        }
      }
    }
  }
  return plan;
}

void InstrumentPlan::run(const OptSet& opts) {
  if (opts.qpad) opt_qpad();
  if (opts.lower_bound) opt_lower_bound();
  if (opts.combine) opt_combine();
  if (opts.hoist) opt_loop_hoist();
}

namespace {

Instr make_check(const CheckSite& s) {
  Instr c;
  c.op = Opcode::Check;
  ValueId ptr = s.ptr;
  std::int64_t lo = 0;
  std::int64_t hi = static_cast<std::int64_t>(s.access_size);
  if (s.kind == SiteKind::LoopHoisted || (s.widened && s.terms.empty())) {
    ptr = s.ksa;
    lo = s.lo;
    hi = s.hi;
  } else if (s.widened) {
    lo = s.lo - s.ptr_offset.c;
    hi = s.hi - s.ptr_offset.c;
  } else if (s.kind == SiteKind::Escape) {
    hi = 0;
  }
  c.args = {Operand::of(s.ksa), Operand::of(ptr)};
  c.line = s.line;
  c.check.site = s.id;
  c.check.lo = lo;
  c.check.hi = hi;
  c.check.upper_only = s.status == SiteStatus::LowerBoundDropped;
  c.check.escape = s.kind == SiteKind::Escape;
  c.check.guard = s.guarded;
  c.check.hoisted = s.kind == SiteKind::LoopHoisted;
  c.check.static_extent = s.static_extent;
  return c;
}

// Pointer comparison/subtraction operands that may be a tagged duplicate of
// an untagged static object.
class DuplicateTags {
 public:
  DuplicateTags(const ir::Program& prog, std::set<std::pair<int, ValueId>> escaped_allocas)
      : prog_(prog), escaped_allocas_(std::move(escaped_allocas)) {
    any_escaping_static_ = !escaped_allocas_.empty();
    for (const auto& g : prog.globals) any_escaping_static_ = any_escaping_static_ || g.escapes;
  }

  bool may_carry_duplicate(int f, const DefIndex& defs, ValueId v) const {
    std::set<ValueId> seen;
    std::vector<ValueId> work{v};
    while (!work.empty()) {
      const ValueId x = work.back();
      work.pop_back();
      if (!seen.insert(x).second) continue;
      const Instr* d = defs.def(x);
      if (d == nullptr) {
        if (any_escaping_static_) return true;
        continue;
      }
      switch (d->op) {
        case Opcode::Gep:
        case Opcode::Mask: work.push_back(d->args[0].value); break;
        case Opcode::Phi:
          for (const auto& o : d->args) work.push_back(o.value);
          break;
        case Opcode::Select:
          work.push_back(d->args[1].value);
          work.push_back(d->args[2].value);
          break;
        case Opcode::GlobalAddr:
          if (const ir::Global* g = prog_.find_global(d->callee); g != nullptr && g->escapes) return true;
          break;
        case Opcode::Alloca:
          if (escaped_allocas_.contains({f, x})) return true;
          break;
        case Opcode::Retag: return true;
        case Opcode::Load:
        case Opcode::Call:
          if (any_escaping_static_) return true;
          break;
        default: break;
      }
    }
    return false;
  }

 private:
  const ir::Program& prog_;
  std::set<std::pair<int, ValueId>> escaped_allocas_;
  bool any_escaping_static_ = false;
};

}  // namespace

InstrumentResult InstrumentPlan::materialize() const {
  InstrumentResult r;
  r.program = prog_;
  r.sites = sites_;
  r.options = InstrumentOptions{mode_, applied_};
  for (const auto& fn : prog_.functions) r.function_names.push_back(fn.name);

  std::set<std::pair<int, ValueId>> escaped_allocas;
  {
    auto note = [&](int f, ValueId root) {
      const DefIndex defs(prog_.functions[static_cast<std::size_t>(f)]);
      const Instr* d = defs.def(root);
      if (d != nullptr && d->op == Opcode::Alloca) escaped_allocas.insert({f, root});
    };
    for (const auto& s : sites_) {
      if (s.kind == SiteKind::Escape && s.static_extent) note(s.function, s.ksa);
    }
    for (const auto& ro : retag_only_) note(ro.function, ro.root);
  }
  const DuplicateTags dup(prog_, escaped_allocas);

  for (std::size_t f = 0; f < r.program.functions.size(); ++f) {
    Function& fn = r.program.functions[f];
    const DefIndex defs(fn);
    Insertions ins(fn);

    auto retag_operand = [&](BlockId b, int i, int k, ValueId root) {
      Instr& in = fn.blocks[static_cast<std::size_t>(b)].instrs[static_cast<std::size_t>(i)];
      const ValueId p = in.args[static_cast<std::size_t>(k)].value;
      const ValueId t = fn.add_value(fn.name_of(p) + ".tag", Type::Ptr);
      ins.before(b, i, detail::make_retag(t, p, root));
      in.args[static_cast<std::size_t>(k)] = Operand::of(t);
    };

    for (const auto& s : sites_) {
      if (s.function != static_cast<int>(f)) continue;
      if (is_materialized(s.status)) {
        if (s.kind == SiteKind::LoopHoisted) {
          ins.tail(s.block, make_check(s));
        } else {
          ins.before(s.block, s.index, make_check(s));
        }
      }
      if (s.kind == SiteKind::Escape && s.static_extent && !s.retag_point) {
        retag_operand(s.block, s.index, s.operand, s.ksa);
      }
    }
    for (const auto& ro : retag_only_) {
      if (ro.function == static_cast<int>(f)) retag_operand(ro.block, ro.index, ro.operand, ro.root);
    }

    MaskPlanner mp(fn, defs, ins);
    mask_accesses(fn, mp);

    for (std::size_t b = 0; b < fn.blocks.size(); ++b) {
      for (std::size_t i = 0; i < fn.blocks[b].instrs.size(); ++i) {
        Instr& in = fn.blocks[b].instrs[i];
        if (in.op != Opcode::PtrCmp && in.op != Opcode::PtrSub) continue;
        const bool needed = dup.may_carry_duplicate(static_cast<int>(f), defs, in.args[0].value) ||
                            dup.may_carry_duplicate(static_cast<int>(f), defs, in.args[1].value);
        if (!needed) continue;
        for (auto& o : in.args) {
          const ValueId m = fn.add_value(fn.name_of(o.value) + ".m", Type::Ptr);
          ins.before(static_cast<BlockId>(b), static_cast<int>(i), detail::make_mask(m, o.value));
          o = Operand::of(m);
        }
      }
    }
    ins.apply(fn);
  }
  return r;
}

InstrumentResult instrument(const ir::Program& program, const InstrumentOptions& options) {
  InstrumentPlan plan = InstrumentPlan::build(program, options.mode);
  plan.run(options.opts);
  return plan.materialize();
}

}  // namespace boundtag
