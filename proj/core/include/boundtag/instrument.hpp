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

// Check instrumentation over ir::Program.
//
// Pipeline, per function:
//   1. static-rooted pointers flowing into phi/select are retagged, so merge
//      nodes only ever see tagged pointers;
//   2. compute_ksa rolls every pointer back to its KSA, adding mirror
//      phi/select nodes where a merge is not its own KSA;
//   3. every load/store gets an Access site and every escaping pointer an
//      Escape site;
//   4. the selected optimizations rewrite site statuses;
//   5. materialize() emits `check` instructions, reroutes memory accesses
//      through masked (tag-free) address chains and masks pointer
//      comparison/subtraction operands that may carry a duplicate tag.
//
// Site windows are byte ranges relative to the KSA: an access of n bytes at
// ksa + c touches [c, c + n). A window is constant when it has no terms.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "boundtag/ir.hpp"
#include "boundtag/tagging.hpp"

namespace boundtag {

enum class SiteKind : std::uint8_t { Access, Escape, LoopHoisted };

enum class SiteStatus : std::uint8_t {
  Active,
  ElidedByQ,
  ElidedByCombine,
  ElidedByDominance,
  ElidedByHoist,
  LowerBoundDropped,  // still executed, upper half only
};

std::string_view to_string(SiteKind k);
std::string_view to_string(SiteStatus s);

// A materialized check executes at run time.
inline bool is_materialized(SiteStatus s) { return s == SiteStatus::Active || s == SiteStatus::LowerBoundDropped; }

struct AffineOffset {
  std::int64_t c = 0;
  std::vector<std::pair<ir::ValueId, std::int64_t>> terms;  // sorted by value id, nonzero scales

  bool constant() const { return terms.empty(); }
  bool same_terms(const AffineOffset& o) const { return terms == o.terms; }
  void add(ir::ValueId v, std::int64_t scale);
  friend bool operator==(const AffineOffset&, const AffineOffset&) = default;
};

struct CheckSite {
  int id = -1;
  SiteKind kind = SiteKind::Access;
  SiteStatus status = SiteStatus::Active;
  std::uint64_t q_used = 0;

  // IR coordinates in the prepared (pre-materialization) function.
  int function = -1;
  ir::BlockId block = ir::kNoBlock;
  int index = -1;
  int operand = -1;  // escape sites: which operand escapes
  int line = 0;      // source line of the guarded instruction

  ir::ValueId ksa = ir::kNoValue;
  ir::ValueId ptr = ir::kNoValue;
  AffineOffset ptr_offset;     // ptr - ksa
  std::uint64_t access_size = 0;

  // Current window [lo, hi) relative to the KSA, over `terms`.
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  std::vector<std::pair<ir::ValueId, std::int64_t>> terms;

  std::optional<std::uint64_t> static_extent;  // KSA is an untagged stack/global root
  bool guarded = false;       // escape of a merge that may equal its KSA
  bool retag_point = false;   // escape into a phi/select through an inserted retag
  bool widened = false;
  int covered_by = -1;        // elided sites: the site whose check subsumes this one

  bool window_constant() const { return terms.empty(); }
};

struct OptSet {
  bool qpad = true;
  bool lower_bound = true;
  bool combine = true;
  bool hoist = true;

  static OptSet all() { return {}; }
  static OptSet none() { return {false, false, false, false}; }
  // Comma-separated subset of qpad, lower, combine, hoist; "" selects none.
  static OptSet parse(std::string_view list);
  std::string to_string() const;
};

struct InstrumentOptions {
  ModeConfig mode;
  OptSet opts;
};

// KSA of every pointer value. Mirror nodes added by compute_ksa are their own
// KSA.
struct KsaMap {
  std::vector<ir::ValueId> ksa;                 // kNoValue for non-pointers
  std::vector<std::optional<AffineOffset>> offset;  // value - ksa(value)
  std::vector<bool> mirror;                     // value is an inserted mirror node

  ir::ValueId of(ir::ValueId v) const { return ksa[static_cast<std::size_t>(v)]; }
};

// Rolls back pointer arithmetic; may append mirror phi/select instructions to
// `fn`. Idempotent on its own output.
KsaMap compute_ksa(ir::Function& fn);

// Reroutes every load/store address through a tag-free clone of its address
// chain. Returns the number of `mask` instructions inserted.
std::size_t reset_metadata(ir::Function& fn);

struct InstrumentResult {
  ir::Program program;
  std::vector<CheckSite> sites;
  InstrumentOptions options;
  std::vector<std::string> function_names;  // indexed by CheckSite::function

  const CheckSite* site(int id) const;
};

class InstrumentPlan {
 public:
  // Steps 1-3: preparation, KSA computation, access and escape sites.
  static InstrumentPlan build(const ir::Program& program, const ModeConfig& mode);

  std::vector<CheckSite>& sites() { return sites_; }
  const std::vector<CheckSite>& sites() const { return sites_; }
  const ir::Program& prepared() const { return prog_; }
  const KsaMap& ksa_map(int function) const { return ksa_[static_cast<std::size_t>(function)]; }

  void opt_qpad();
  void opt_lower_bound();
  void opt_combine();
  void opt_loop_hoist();
  void run(const OptSet& opts);

  InstrumentResult materialize() const;

 private:
  // Static-rooted pointers whose escape is a static alias: no check, but the
  // escaping operand is still retagged.
  struct RetagOnly {
    int function = -1;
    ir::BlockId block = ir::kNoBlock;
    int index = -1;
    int operand = -1;
    ir::ValueId root = ir::kNoValue;
  };

  ir::Program prog_;
  ModeConfig mode_;
  OptSet applied_ = OptSet::none();
  std::vector<KsaMap> ksa_;
  std::vector<CheckSite> sites_;
  std::vector<RetagOnly> retag_only_;
};

InstrumentResult instrument(const ir::Program& program, const InstrumentOptions& options);

// Caps from the combine and lower-bound rules.
inline constexpr std::int64_t kCombineConstantCap = 1LL << 22;
inline constexpr std::int64_t kLowerBoundDropCap = 1LL << 30;
inline constexpr std::uint64_t kHoistTripCap = 1ULL << 20;

}  // namespace boundtag
