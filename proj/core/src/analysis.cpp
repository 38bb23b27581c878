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

#include "boundtag/analysis.hpp"

#include <algorithm>
#include <functional>

namespace boundtag::ir {

Cfg build_cfg(const Function& fn) {
  const std::size_t n = fn.blocks.size();
  Cfg cfg;
  cfg.succs.resize(n);
  cfg.preds.resize(n);
  cfg.reachable.assign(n, false);
  cfg.exits.assign(n, false);
  for (std::size_t b = 0; b < n; ++b) {
    const auto& instrs = fn.blocks[b].instrs;
    if (instrs.empty()) continue;
    const Instr& term = instrs.back();
    if (term.op == Opcode::Ret) cfg.exits[b] = true;
    if (term.op != Opcode::Br && term.op != Opcode::CondBr) continue;
    for (BlockId s : term.blocks) {
      auto& out = cfg.succs[b];
      if (std::find(out.begin(), out.end(), s) == out.end()) {
        out.push_back(s);
        cfg.preds[static_cast<std::size_t>(s)].push_back(static_cast<BlockId>(b));
      }
    }
  }
  if (n == 0) return cfg;
  // Iterative DFS; postorder reversed.
  std::vector<BlockId> post;
  std::vector<std::pair<BlockId, std::size_t>> stack{{0, 0}};
  cfg.reachable[0] = true;
  while (!stack.empty()) {
    auto& [b, next] = stack.back();
    const auto& s = cfg.succs[static_cast<std::size_t>(b)];
    if (next < s.size()) {
      const BlockId t = s[next++];
      if (!cfg.reachable[static_cast<std::size_t>(t)]) {
        cfg.reachable[static_cast<std::size_t>(t)] = true;
        stack.emplace_back(t, 0);
      }
    } else {
      post.push_back(b);
      stack.pop_back();
    }
  }
  cfg.rpo.assign(post.rbegin(), post.rend());
  return cfg;
}

DominatorTree DominatorTree::dominators(const Cfg& cfg) {
  std::vector<std::vector<int>> succs(cfg.size()), preds(cfg.size());
  for (std::size_t b = 0; b < cfg.size(); ++b) {
    succs[b].assign(cfg.succs[b].begin(), cfg.succs[b].end());
    preds[b].assign(cfg.preds[b].begin(), cfg.preds[b].end());
  }
  DominatorTree t;
  t.real_nodes_ = cfg.size();
  if (cfg.size() > 0) t.build(succs, preds, 0);
  return t;
}

DominatorTree DominatorTree::postdominators(const Cfg& cfg) {
  // Reverse graph, rooted at a virtual exit node n.
  const std::size_t n = cfg.size();
  std::vector<std::vector<int>> succs(n + 1), preds(n + 1);
  for (std::size_t b = 0; b < n; ++b) {
    for (BlockId s : cfg.succs[b]) {
      succs[static_cast<std::size_t>(s)].push_back(static_cast<int>(b));
      preds[b].push_back(s);
    }
    if (cfg.exits[b]) {
      succs[n].push_back(static_cast<int>(b));
      preds[b].push_back(static_cast<int>(n));
    }
  }
  DominatorTree t;
  t.real_nodes_ = n;
  t.build(succs, preds, static_cast<int>(n));
  return t;
}

// Cooper, Harvey and Kennedy's iterative scheme over reverse postorder.
void DominatorTree::build(const std::vector<std::vector<int>>& succs, const std::vector<std::vector<int>>& preds,
                          int root) {
  const std::size_t n = succs.size();
  std::vector<int> order;
  std::vector<int> rpo_index(n, -1);
  {
    std::vector<bool> seen(n, false);
    std::vector<std::pair<int, std::size_t>> stack{{root, 0}};
    seen[static_cast<std::size_t>(root)] = true;
    while (!stack.empty()) {
      auto& [b, next] = stack.back();
      const auto& s = succs[static_cast<std::size_t>(b)];
      if (next < s.size()) {
        const int t = s[next++];
        if (!seen[static_cast<std::size_t>(t)]) {
          seen[static_cast<std::size_t>(t)] = true;
          stack.emplace_back(t, 0);
        }
      } else {
        order.push_back(b);
        stack.pop_back();
      }
    }
    std::reverse(order.begin(), order.end());
    for (std::size_t i = 0; i < order.size(); ++i) rpo_index[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
  }

  idom_.assign(n, -1);
  idom_[static_cast<std::size_t>(root)] = root;
  auto intersect = [&](int a, int b) {
    while (a != b) {
      while (rpo_index[static_cast<std::size_t>(a)] > rpo_index[static_cast<std::size_t>(b)]) a = idom_[static_cast<std::size_t>(a)];
      while (rpo_index[static_cast<std::size_t>(b)] > rpo_index[static_cast<std::size_t>(a)]) b = idom_[static_cast<std::size_t>(b)];
    }
    return a;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (int b : order) {
      if (b == root) continue;
      int nd = -1;
      for (int p : preds[static_cast<std::size_t>(b)]) {
        if (rpo_index[static_cast<std::size_t>(p)] < 0 || idom_[static_cast<std::size_t>(p)] < 0) continue;
        nd = nd < 0 ? p : intersect(p, nd);
      }
      if (nd >= 0 && idom_[static_cast<std::size_t>(b)] != nd) {
        idom_[static_cast<std::size_t>(b)] = nd;
        changed = true;
      }
    }
  }

  // Pre/post numbering of the tree for O(1) dominance queries.
  std::vector<std::vector<int>> kids(n);
  for (std::size_t b = 0; b < n; ++b) {
    const int d = idom_[b];
    if (d >= 0 && d != static_cast<int>(b)) kids[static_cast<std::size_t>(d)].push_back(static_cast<int>(b));
  }
  pre_.assign(n, -1);
  post_.assign(n, -1);
  int clock = 0;
  std::vector<std::pair<int, std::size_t>> stack{{root, 0}};
  pre_[static_cast<std::size_t>(root)] = clock++;
  while (!stack.empty()) {
    auto& [b, next] = stack.back();
    if (next < kids[static_cast<std::size_t>(b)].size()) {
      const int c = kids[static_cast<std::size_t>(b)][next++];
      pre_[static_cast<std::size_t>(c)] = clock++;
      stack.emplace_back(c, 0);
    } else {
      post_[static_cast<std::size_t>(b)] = clock++;
      stack.pop_back();
    }
  }
}

bool DominatorTree::dominates(BlockId a, BlockId b) const {
  if (a == b) return true;
  const auto ua = static_cast<std::size_t>(a);
  const auto ub = static_cast<std::size_t>(b);
  if (ua >= pre_.size() || ub >= pre_.size() || pre_[ua] < 0 || pre_[ub] < 0) return false;
  return pre_[ua] <= pre_[ub] && post_[ub] <= post_[ua];
}

BlockId DominatorTree::idom(BlockId b) const {
  const int d = idom_[static_cast<std::size_t>(b)];
  if (d < 0 || d == b || static_cast<std::size_t>(d) >= real_nodes_) return kNoBlock;
  return d;
}

std::vector<Loop> natural_loops(const Cfg& cfg, const DominatorTree& dom) {
  std::vector<Loop> loops;
  for (BlockId b : cfg.rpo) {
    for (BlockId h : cfg.succs[static_cast<std::size_t>(b)]) {
      if (!dom.dominates(h, b)) continue;
      auto it = std::find_if(loops.begin(), loops.end(), [&](const Loop& l) { return l.header == h; });
      if (it == loops.end()) {
        loops.push_back(Loop{h, {}, std::vector<bool>(cfg.size(), false)});
        it = std::prev(loops.end());
        it->body[static_cast<std::size_t>(h)] = true;
      }
      it->latches.push_back(b);
      std::vector<BlockId> work{b};
      while (!work.empty()) {
        const BlockId x = work.back();
        work.pop_back();
        if (it->body[static_cast<std::size_t>(x)]) continue;
        it->body[static_cast<std::size_t>(x)] = true;
        for (BlockId p : cfg.preds[static_cast<std::size_t>(x)]) {
          if (cfg.reachable[static_cast<std::size_t>(p)]) work.push_back(p);
        }
      }
    }
  }
  return loops;
}

std::vector<DefSite> def_sites(const Function& fn) {
  std::vector<DefSite> defs(fn.values.size());
  for (ValueId p : fn.params) defs[static_cast<std::size_t>(p)] = DefSite{0, -1};
  for (std::size_t b = 0; b < fn.blocks.size(); ++b) {
    const auto& instrs = fn.blocks[b].instrs;
    for (std::size_t i = 0; i < instrs.size(); ++i) {
      if (instrs[i].result != kNoValue) {
        defs[static_cast<std::size_t>(instrs[i].result)] = DefSite{static_cast<BlockId>(b), static_cast<int>(i)};
      }
    }
  }
  return defs;
}

bool def_dominates_use(const DominatorTree& dom, DefSite def, BlockId b, int idx) {
  if (def.block == kNoBlock) return false;
  if (def.block == b) return def.index < idx;
  return dom.dominates(def.block, b);
}

}  // namespace boundtag::ir
