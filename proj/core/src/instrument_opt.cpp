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
#include <cstdlib>
#include <map>
#include <optional>

#include "boundtag/instrument.hpp"
#include "instrument_detail.hpp"

namespace boundtag {

using ir::BlockId;
using ir::Function;
using ir::Instr;
using ir::kNoValue;
using ir::Opcode;
using ir::ValueId;

void InstrumentPlan::opt_qpad() {
  applied_.qpad = true;
  const auto q = static_cast<std::int64_t>(mode_.q);
  for (auto& s : sites_) {
    if (s.kind != SiteKind::Access || !is_materialized(s.status) || !s.window_constant()) continue;
    if (s.lo >= 0 && s.hi <= q) s.status = SiteStatus::ElidedByQ;
  }
}

void InstrumentPlan::opt_lower_bound() {
  applied_.lower_bound = true;
  for (auto& s : sites_) {
    if (s.kind != SiteKind::Access || s.status != SiteStatus::Active || !s.window_constant()) continue;
    if (s.lo >= 0 && s.lo <= s.hi && s.hi <= kLowerBoundDropCap) s.status = SiteStatus::LowerBoundDropped;
  }
}

namespace {

bool within_cap(const CheckSite& s) {
  return std::llabs(s.lo) <= kCombineConstantCap && std::llabs(s.hi) <= kCombineConstantCap &&
         s.hi - s.lo <= kCombineConstantCap;
}

// Both windows constant with non-negative starts: they may be read as
// [0, hi) because the KSA itself is always in bounds.
bool ksa_invariant_pair(const CheckSite& x, const CheckSite& y) {
  return x.window_constant() && y.window_constant() && x.lo >= 0 && y.lo >= 0;
}

bool covers(const CheckSite& x, const CheckSite& y) {
  if (ksa_invariant_pair(x, y)) return y.hi <= x.hi;
  return x.terms == y.terms && x.lo <= y.lo && y.hi <= x.hi;
}

}  // namespace

void InstrumentPlan::opt_combine() {
  applied_.combine = true;
  std::map<int, detail::FunctionAnalysis> analyses;
  auto analysis = [&](int f) -> const detail::FunctionAnalysis& {
    auto it = analyses.find(f);
    if (it == analyses.end()) {
      it = analyses.emplace(f, detail::FunctionAnalysis(prog_.functions[static_cast<std::size_t>(f)])).first;
    }
    return it->second;
  };
  auto candidate = [](const CheckSite& s) { return s.kind == SiteKind::Access && is_materialized(s.status); };

  for (auto& y : sites_) {
    if (!candidate(y) || !within_cap(y)) continue;
    const auto& fa = analysis(y.function);
    CheckSite* widen_into = nullptr;
    for (auto& x : sites_) {
      if (&x == &y) break;
      if (!candidate(x) || x.function != y.function || x.ksa != y.ksa || !within_cap(x)) continue;
      if (!fa.dominates(x.block, x.index, y.block, y.index)) continue;
      if (covers(x, y)) {
        y.status = SiteStatus::ElidedByDominance;
        y.covered_by = x.id;
        widen_into = nullptr;
        break;
      }
      if (widen_into != nullptr) continue;
      if (!ksa_invariant_pair(x, y) && x.terms != y.terms) continue;
      if (!fa.postdominates(y.block, y.index, x.block, x.index)) continue;
      const bool co_execute = x.block == y.block || !fa.cycles_avoiding(x.block, y.block);
      if (!co_execute) continue;
      const std::int64_t lo = ksa_invariant_pair(x, y) ? 0 : std::min(x.lo, y.lo);
      const std::int64_t hi = std::max(x.hi, y.hi);
      if (hi - lo > kCombineConstantCap) continue;
      widen_into = &x;
    }
    if (y.status == SiteStatus::ElidedByDominance || widen_into == nullptr) continue;
    CheckSite& x = *widen_into;
    if (ksa_invariant_pair(x, y)) {
      x.lo = 0;
    } else {
      x.lo = std::min(x.lo, y.lo);
    }
    x.hi = std::max(x.hi, y.hi);
    x.widened = true;
    if (x.status == SiteStatus::LowerBoundDropped && x.lo < 0) x.status = SiteStatus::Active;
    y.status = SiteStatus::ElidedByCombine;
    y.covered_by = x.id;
  }
}

namespace {

struct Induction {
  ValueId phi = kNoValue;
  std::int64_t min = 0;
  std::int64_t max = 0;
};

std::optional<std::int64_t> constant_of(const detail::DefIndex& defs, const ir::Operand& o) {
  if (!o.is_value()) return o.imm;
  const Instr* d = defs.def(o.value);
  if (d != nullptr && d->op == Opcode::Const) return d->imm;
  return std::nullopt;
}

// Rotated loop with a single latch exit, a dedicated preheader and one
// constant-stepped induction phi driving the exit compare. Returns the range
// of values the phi takes inside the body.
std::optional<Induction> analyze_loop(const Function& fn, const detail::DefIndex& defs,
                                      const detail::FunctionAnalysis& fa, const ir::Loop& loop, ValueId var,
                                      BlockId& preheader) {
  if (loop.latches.size() != 1) return std::nullopt;
  const BlockId h = loop.header;
  const BlockId latch = loop.latches[0];
  const Instr& term = fn.blocks[static_cast<std::size_t>(latch)].instrs.back();
  if (term.op != Opcode::CondBr) return std::nullopt;
  const bool stay_on_true = term.blocks[0] == h;
  const BlockId exit = stay_on_true ? term.blocks[1] : term.blocks[0];
  if (term.blocks[stay_on_true ? 0 : 1] != h || loop.contains(exit)) return std::nullopt;
  for (std::size_t b = 0; b < fa.cfg.size(); ++b) {
    if (!loop.body[b]) continue;
    for (BlockId s : fa.cfg.succs[b]) {
      if (!loop.contains(s) && !(static_cast<BlockId>(b) == latch && s == exit)) return std::nullopt;
    }
  }
  preheader = ir::kNoBlock;
  for (BlockId p : fa.cfg.preds[static_cast<std::size_t>(h)]) {
    if (loop.contains(p)) continue;
    if (preheader != ir::kNoBlock) return std::nullopt;
    preheader = p;
  }
  if (preheader == ir::kNoBlock) return std::nullopt;
  const Instr& pterm = fn.blocks[static_cast<std::size_t>(preheader)].instrs.back();
  if (pterm.op != Opcode::Br) return std::nullopt;

  const Instr* phi = defs.def(var);
  if (phi == nullptr || phi->op != Opcode::Phi || defs.site[static_cast<std::size_t>(var)].block != h ||
      phi->args.size() != 2) {
    return std::nullopt;
  }
  std::optional<std::int64_t> start;
  ValueId next = kNoValue;
  for (std::size_t k = 0; k < 2; ++k) {
    if (phi->blocks[k] == preheader) {
      start = constant_of(defs, phi->args[k]);
    } else if (phi->blocks[k] == latch && phi->args[k].is_value()) {
      next = phi->args[k].value;
    }
  }
  if (!start || next == kNoValue) return std::nullopt;
  const Instr* inc = defs.def(next);
  if (inc == nullptr || inc->op != Opcode::Bin || inc->bin != ir::BinKind::Add) return std::nullopt;
  std::optional<std::int64_t> step;
  if (inc->args[0].is_value() && inc->args[0].value == var) step = constant_of(defs, inc->args[1]);
  if (!step && inc->args[1].is_value() && inc->args[1].value == var) step = constant_of(defs, inc->args[0]);
  if (!step || *step == 0) return std::nullopt;

  if (!term.args[0].is_value()) return std::nullopt;
  const Instr* cmp = defs.def(term.args[0].value);
  if (cmp == nullptr || cmp->op != Opcode::Cmp || !cmp->args[0].is_value()) return std::nullopt;
  const ValueId tested = cmp->args[0].value;
  if (tested != var && tested != next) return std::nullopt;
  const auto bound = constant_of(defs, cmp->args[1]);
  if (!bound) return std::nullopt;

  Induction ind{var, *start, *start};
  std::int64_t i = *start;
  for (std::uint64_t trip = 1;; ++trip) {
    if (trip > kHoistTripCap) return std::nullopt;
    ind.min = std::min(ind.min, i);
    ind.max = std::max(ind.max, i);
    std::int64_t n = 0;
    if (__builtin_add_overflow(i, *step, &n)) return std::nullopt;
    const bool c = ir::evaluate(cmp->cmp, tested == var ? i : n, *bound);
    if (c != stay_on_true) break;
    i = n;
  }
  return ind;
}

}  // namespace

void InstrumentPlan::opt_loop_hoist() {
  applied_.hoist = true;
  int next_id = 0;
  for (const auto& s : sites_) next_id = std::max(next_id, s.id + 1);
  std::vector<CheckSite> hoisted;

  for (std::size_t f = 0; f < prog_.functions.size(); ++f) {
    const Function& fn = prog_.functions[f];
    std::optional<detail::FunctionAnalysis> fa;
    std::optional<detail::DefIndex> defs;
    for (auto& s : sites_) {
      if (s.function != static_cast<int>(f) || s.kind != SiteKind::Access || s.status != SiteStatus::Active) continue;
      if (s.terms.size() != 1) continue;
      if (!fa) {
        fa.emplace(fn);
        defs.emplace(fn);
      }
      // Innermost loop containing the access.
      const ir::Loop* loop = nullptr;
      for (const auto& l : fa->loops) {
        if (!l.contains(s.block)) continue;
        if (loop == nullptr || fa->dom.dominates(loop->header, l.header)) loop = &l;
      }
      if (loop == nullptr || !fa->pdom.dominates(s.block, loop->header)) continue;
      const ir::DefSite kd = defs->site[static_cast<std::size_t>(s.ksa)];
      if (kd.index >= 0 && loop->contains(kd.block)) continue;
      BlockId preheader = ir::kNoBlock;
      const auto ind = analyze_loop(fn, *defs, *fa, *loop, s.terms[0].first, preheader);
      if (!ind) continue;
      const std::int64_t scale = s.terms[0].second;
      std::int64_t a = 0;
      std::int64_t b = 0;
      if (__builtin_mul_overflow(scale, ind->min, &a) || __builtin_mul_overflow(scale, ind->max, &b)) continue;
      constexpr std::int64_t kLimit = std::int64_t{1} << 47;
      if (std::llabs(a) > kLimit || std::llabs(b) > kLimit) continue;
      const std::int64_t lo = s.lo + std::min(a, b);
      const std::int64_t hi = s.hi + std::max(a, b);

      CheckSite h;
      h.id = next_id++;
      h.kind = SiteKind::LoopHoisted;
      h.status = SiteStatus::Active;
      h.q_used = s.q_used;
      h.function = s.function;
      h.block = preheader;
      h.index = -1;
      h.ksa = s.ksa;
      h.ptr = s.ksa;
      h.access_size = s.access_size;
      h.lo = lo;
      h.hi = hi;
      h.static_extent = s.static_extent;
      s.status = SiteStatus::ElidedByHoist;
      s.covered_by = h.id;
      hoisted.push_back(std::move(h));
    }
  }
  for (auto& h : hoisted) sites_.push_back(std::move(h));
}

}  // namespace boundtag
