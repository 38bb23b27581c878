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

#include "boundtag/checks.hpp"

namespace boundtag {
namespace {

// ptr + size saturated at the top of the 64-bit space; a saturated end can
// only ever fail an upper-bound comparison.
Addr saturating_end(Addr ptr, std::uint64_t size) {
  Addr end = 0;
  if (__builtin_add_overflow(ptr, size, &end)) return ~0ULL;
  return end;
}

}  // namespace

std::string_view to_string(AbortReason reason) {
  switch (reason) {
    case AbortReason::None: return "none";
    case AbortReason::UpperBound: return "upper_bound";
    case AbortReason::LowerBound: return "lower_bound";
    case AbortReason::EscapeInvariant: return "escape_invariant";
  }
  return "?";
}

CheckOutcome bounds_check(TaggedAddress ksa, Addr ptr, std::uint64_t access_size, const SimMemory& mem,
                          std::uint64_t q) {
  const Addr ea = compute_ea(ksa);
  const Addr k = ksa.value() & kRawMask;
  if (saturating_end(ptr, access_size) > ea) return CheckOutcome::abort(AbortReason::UpperBound);
  if (ptr < k) {
    const Addr sa = mem.read_u64(ea + q);
    if (ptr < sa) return CheckOutcome::abort(AbortReason::LowerBound, true);
    return CheckOutcome::ok(true);
  }
  return CheckOutcome::ok();
}

CheckOutcome bounds_check_2k(TaggedAddress ksa, Addr ptr, std::uint64_t access_size) {
  const std::uint64_t aligned_size = pow2_aligned_size(ksa);
  const Addr k = ksa.value() & kRawMask;
  if ((k ^ saturating_end(ptr, access_size)) >= aligned_size) return CheckOutcome::abort(AbortReason::UpperBound);
  if (ptr < k && (k ^ ptr) >= aligned_size) return CheckOutcome::abort(AbortReason::LowerBound);
  return CheckOutcome::ok();
}

CheckOutcome bounds_check32(TaggedAddress ksa, Addr ptr, std::uint64_t access_size, const SimMemory& mem,
                            std::uint64_t q) {
  const Addr ea = decode_ea32(ksa);
  const Addr k = ksa.value() & kRaw32Mask;
  if (saturating_end(ptr, access_size) > ea) return CheckOutcome::abort(AbortReason::UpperBound);
  if (ptr < k) {
    const Addr sa = mem.read_u64(ea + q);
    if (ptr < sa) return CheckOutcome::abort(AbortReason::LowerBound, true);
    return CheckOutcome::ok(true);
  }
  return CheckOutcome::ok();
}

CheckOutcome Checker::record(CheckOutcome o) {
  if (o.sa_fetched) ++stats_.sa_fetches;
  if (!o.pass) ++stats_.aborts;
  return o;
}

CheckOutcome Checker::tagged_range(TaggedAddress ksa, Addr start, Addr end, bool underflow, bool overflow,
                                   bool upper_only) {
  ++stats_.dynamic_checks;
  if (overflow || (!underflow && end < start)) return record(CheckOutcome::abort(AbortReason::UpperBound));
  if (off_by_one_ && end > 0) --end;

  switch (cfg_.mode) {
    case Mode::Prism:
    case Mode::Prism32: {
      const bool is32 = cfg_.mode == Mode::Prism32;
      const Addr ea = is32 ? decode_ea32(ksa) : compute_ea(ksa);
      const Addr k = ksa.value() & strip_mask(cfg_.mode);
      if (end > ea) return record(CheckOutcome::abort(AbortReason::UpperBound));
      if (upper_only) return record(CheckOutcome::ok());
      if (underflow || start < k) {
        const Addr sa = mem_.read_u64(ea + cfg_.q);
        if (underflow || start < sa) return record(CheckOutcome::abort(AbortReason::LowerBound, true));
        return record(CheckOutcome::ok(true));
      }
      return record(CheckOutcome::ok());
    }
    case Mode::Pow2: {
      const std::uint64_t aligned_size = pow2_aligned_size(ksa);
      const Addr k = ksa.value() & kRawMask;
      if ((k ^ end) >= aligned_size) return record(CheckOutcome::abort(AbortReason::UpperBound));
      if (upper_only) return record(CheckOutcome::ok());
      if (underflow || start < k) {
        ++stats_.xor_lower_paths;
        if (underflow || (k ^ start) >= aligned_size) return record(CheckOutcome::abort(AbortReason::LowerBound));
      }
      return record(CheckOutcome::ok());
    }
  }
  return record(CheckOutcome::ok());
}

namespace {

struct Span {
  Addr start;
  Addr end;
  bool underflow;
  bool overflow;
};

Span resolve(Addr ptr, std::int64_t lo, std::int64_t hi, std::uint64_t mask) {
  Span s{};
  std::int64_t start = 0;
  if (lo < 0 && static_cast<std::uint64_t>(-(lo + 1)) + 1 > ptr) {
    s.underflow = true;
    s.start = 0;
  } else if (__builtin_add_overflow(static_cast<std::int64_t>(ptr), lo, &start)) {
    s.overflow = true;
  } else {
    s.start = static_cast<Addr>(start);
  }
  std::int64_t end = 0;
  if (hi < 0 && static_cast<std::uint64_t>(-(hi + 1)) + 1 > ptr) {
    s.underflow = true;
    s.end = 0;
  } else if (__builtin_add_overflow(static_cast<std::int64_t>(ptr), hi, &end) ||
             static_cast<std::uint64_t>(end) > mask) {
    s.overflow = true;
  } else {
    s.end = static_cast<Addr>(end);
  }
  return s;
}

}  // namespace

CheckOutcome Checker::access(TaggedAddress ksa, Range r, bool upper_only) {
  const Span s = resolve(r.ptr, r.lo, r.hi, strip_mask(cfg_.mode));
  return tagged_range(ksa, s.start, s.end, s.underflow, s.overflow, upper_only);
}

CheckOutcome Checker::access_static(Addr sa, std::uint64_t extent, Range r) {
  ++stats_.dynamic_checks;
  const Span s = resolve(r.ptr, r.lo, r.hi, strip_mask(cfg_.mode));
  Addr end = s.end;
  if (off_by_one_ && end > 0) --end;
  if (s.overflow || (!s.underflow && s.end < s.start) || end > sa + extent) {
    return record(CheckOutcome::abort(AbortReason::UpperBound));
  }
  if (s.underflow || s.start < sa) return record(CheckOutcome::abort(AbortReason::LowerBound));
  return record(CheckOutcome::ok());
}

CheckOutcome Checker::escape(TaggedAddress p, TaggedAddress ksa, bool statically_aliased,
                             bool maybe_equal_at_runtime) {
  if (statically_aliased) return CheckOutcome::ok();
  const Addr raw = strip_tag(p, cfg_.mode);
  if (maybe_equal_at_runtime && raw == strip_tag(ksa, cfg_.mode)) return CheckOutcome::ok();
  CheckOutcome o = tagged_range(ksa, raw, raw, false, false, false);
  if (!o.pass) o.reason = AbortReason::EscapeInvariant;
  return o;
}

CheckOutcome Checker::escape_static(Addr p, Addr sa, std::uint64_t extent) {
  ++stats_.dynamic_checks;
  Addr end = p;
  if (off_by_one_ && end > 0) --end;
  if (end > sa + extent || p < sa) return record(CheckOutcome::abort(AbortReason::EscapeInvariant));
  return record(CheckOutcome::ok());
}

}  // namespace boundtag
