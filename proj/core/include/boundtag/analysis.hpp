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

// Control-flow analyses over ir::Function: CFG, (post)dominator trees,
// natural loops and definition sites.

#pragma once

#include <vector>

#include "boundtag/ir.hpp"

namespace boundtag::ir {

struct Cfg {
  std::vector<std::vector<BlockId>> succs;
  std::vector<std::vector<BlockId>> preds;
  std::vector<BlockId> rpo;     // reachable blocks, reverse postorder from entry
  std::vector<bool> reachable;
  std::vector<bool> exits;      // ends in ret

  std::size_t size() const { return succs.size(); }
};

Cfg build_cfg(const Function& fn);

// Dominator tree over a CFG. The post-dominator variant adds a virtual exit
// fed by every ret block; blocks that cannot reach an exit are postdominated
// by nothing but themselves.
class DominatorTree {
 public:
  static DominatorTree dominators(const Cfg& cfg);
  static DominatorTree postdominators(const Cfg& cfg);

  // Reflexive.
  bool dominates(BlockId a, BlockId b) const;
  BlockId idom(BlockId b) const;  // kNoBlock for roots and unreachable nodes

 private:
  void build(const std::vector<std::vector<int>>& succs, const std::vector<std::vector<int>>& preds, int root);

  std::vector<int> idom_;
  std::vector<int> pre_;
  std::vector<int> post_;
  std::size_t real_nodes_ = 0;
};

struct Loop {
  BlockId header = kNoBlock;
  std::vector<BlockId> latches;
  std::vector<bool> body;  // indexed by block

  bool contains(BlockId b) const { return body[static_cast<std::size_t>(b)]; }
};

std::vector<Loop> natural_loops(const Cfg& cfg, const DominatorTree& dom);

struct DefSite {
  BlockId block = kNoBlock;
  int index = -1;  // -1 for parameters
};

std::vector<DefSite> def_sites(const Function& fn);

// True when the definition at `def` is available at instruction `idx` of
// block `b` (strictly before it when in the same block).
bool def_dominates_use(const DominatorTree& dom, DefSite def, BlockId b, int idx);

}  // namespace boundtag::ir
