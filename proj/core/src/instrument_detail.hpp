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

// Helpers shared by the instrumentation translation units.

#pragma once

#include <optional>
#include <vector>

#include "boundtag/analysis.hpp"
#include "boundtag/instrument.hpp"
#include "boundtag/ir.hpp"

namespace boundtag::detail {

struct DefIndex {
  std::vector<ir::DefSite> site;
  std::vector<const ir::Instr*> instr;  // nullptr for parameters

  explicit DefIndex(const ir::Function& fn);
  const ir::Instr* def(ir::ValueId v) const { return instr[static_cast<std::size_t>(v)]; }
};

// Buffered edits against fixed (block, index) coordinates, applied at once.
class Insertions {
 public:
  explicit Insertions(const ir::Function& fn);

  void before(ir::BlockId b, int i, ir::Instr in) { before_[ub(b)][static_cast<std::size_t>(i)].push_back(std::move(in)); }
  void after(ir::BlockId b, int i, ir::Instr in) { after_[ub(b)][static_cast<std::size_t>(i)].push_back(std::move(in)); }
  // After the block's leading phis (phis are kept contiguous).
  void head(ir::BlockId b, ir::Instr in) { head_[ub(b)].push_back(std::move(in)); }
  // Just before the terminator.
  void tail(ir::BlockId b, ir::Instr in) { tail_[ub(b)].push_back(std::move(in)); }
  // Places `in` right after the definition of v (block head for parameters).
  void after_def(const DefIndex& defs, ir::ValueId v, ir::Instr in);

  void apply(ir::Function& fn);

 private:
  static std::size_t ub(ir::BlockId b) { return static_cast<std::size_t>(b); }

  std::vector<std::vector<std::vector<ir::Instr>>> before_;
  std::vector<std::vector<std::vector<ir::Instr>>> after_;
  std::vector<std::vector<ir::Instr>> head_;
  std::vector<std::vector<ir::Instr>> tail_;
};

ir::Instr make_mask(ir::ValueId result, ir::ValueId v);
ir::Instr make_retag(ir::ValueId result, ir::ValueId p, ir::ValueId root);

// Alloca or global address reached through gep/mask bases, or kNoValue.
ir::ValueId static_root(const DefIndex& defs, ir::ValueId v);
std::optional<std::uint64_t> static_extent(const ir::Program& prog, const DefIndex& defs, ir::ValueId root);

struct FunctionAnalysis {
  ir::Cfg cfg;
  ir::DominatorTree dom;
  ir::DominatorTree pdom;
  std::vector<ir::Loop> loops;

  explicit FunctionAnalysis(const ir::Function& fn);

  bool dominates(ir::BlockId ab, int ai, ir::BlockId bb, int bi) const;
  bool postdominates(ir::BlockId ab, int ai, ir::BlockId bb, int bi) const;
  // Some path leaves `from` and comes back to it without entering `avoid`.
  bool cycles_avoiding(ir::BlockId from, ir::BlockId avoid) const;
};

}  // namespace boundtag::detail
