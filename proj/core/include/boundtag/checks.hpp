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

// Bounds-check predicates and their slow-path accounting.
//
// All predicates operate on raw (tag-stripped) addresses; the tagged KSA is
// only consulted for the bounds it encodes. The upper bound is end-exclusive:
// an access [ptr, ptr + size) passes when ptr + size <= EA.

#pragma once

#include <cstdint>
#include <string_view>

#include "boundtag/memory.hpp"
#include "boundtag/tagging.hpp"

namespace boundtag {

enum class AbortReason : std::uint8_t { None, UpperBound, LowerBound, EscapeInvariant };

std::string_view to_string(AbortReason reason);

struct CheckOutcome {
  bool pass = true;
  AbortReason reason = AbortReason::None;
  bool sa_fetched = false;

  static CheckOutcome ok(bool fetched = false) { return {true, AbortReason::None, fetched}; }
  static CheckOutcome abort(AbortReason r, bool fetched = false) { return {false, r, fetched}; }
};

struct CheckStats {
  std::uint64_t dynamic_checks = 0;
  std::uint64_t sa_fetches = 0;
  std::uint64_t xor_lower_paths = 0;
  std::uint64_t aborts = 0;
};

// Prism, 47-bit. The SA is read from ea + q only when ptr < ksa.
CheckOutcome bounds_check(TaggedAddress ksa, Addr ptr, std::uint64_t access_size, const SimMemory& mem,
                          std::uint64_t q = 0);

// Pow2. Aborts when the access leaves the A-aligned block holding ksa.
CheckOutcome bounds_check_2k(TaggedAddress ksa, Addr ptr, std::uint64_t access_size);

// Prism32: EA comes straight from the upper pointer half.
CheckOutcome bounds_check32(TaggedAddress ksa, Addr ptr, std::uint64_t access_size, const SimMemory& mem,
                            std::uint64_t q = 0);

// Mode-dispatching front end used by the interpreter. Tracks counters and
// handles the variants the instrumentation emits.
class Checker {
 public:
  struct Range {
    Addr ptr = 0;            // raw base pointer
    std::int64_t lo = 0;     // access covers [ptr + lo, ptr + hi)
    std::int64_t hi = 0;
  };

  Checker(ModeConfig cfg, const SimMemory& mem) : cfg_(cfg), mem_(mem) {}

  const ModeConfig& config() const { return cfg_; }
  const CheckStats& stats() const { return stats_; }
  CheckStats& stats() { return stats_; }

  // Tag-derived bounds. upper_only skips the lower half (no SA fetch).
  CheckOutcome access(TaggedAddress ksa, Range r, bool upper_only = false);

  // Bounds known statically: object [sa, sa + extent), ksa == sa.
  CheckOutcome access_static(Addr sa, std::uint64_t extent, Range r);

  // Escape of p: statically aliased escapes cost nothing, runtime-equal ones
  // skip the predicate, everything else is a zero-size access check.
  CheckOutcome escape(TaggedAddress p, TaggedAddress ksa, bool statically_aliased, bool maybe_equal_at_runtime);
  CheckOutcome escape_static(Addr p, Addr sa, std::uint64_t extent);

  // Testing hook: widen every upper bound by one byte.
  void inject_upper_off_by_one(bool on) { off_by_one_ = on; }

 private:
  CheckOutcome record(CheckOutcome o);
  CheckOutcome tagged_range(TaggedAddress ksa, Addr start, Addr end, bool underflow, bool overflow, bool upper_only);

  ModeConfig cfg_;
  const SimMemory& mem_;
  CheckStats stats_;
  bool off_by_one_ = false;
};

}  // namespace boundtag
