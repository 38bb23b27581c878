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

// Simulated allocator for the three tagging modes.
//
// Prism:   small objects are bump-allocated from 64KB frames; large objects get
//          one k*64KB slot of a 4GB frame, right-aligned so that EA falls on
//          the slot end (a 64KB boundary).
// Pow2:    sizes round up to A = next_pow2(size + 1), SA aligned to A.
// Prism32: objects live below 4GB; EA is carried in the upper pointer half.
//
// Prism and Prism32 store the 8-byte SA, little-endian, at EA + q.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "boundtag/memory.hpp"
#include "boundtag/tagging.hpp"

namespace boundtag {

class AllocError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FreeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ObjectKind : std::uint8_t { Heap, Stack, Global };

struct AllocationRecord {
  Addr sa = 0;
  Addr ea = 0;
  std::uint64_t request_size = 0;
  std::uint64_t q = 0;
  Mode mode = Mode::Prism;
  bool live = true;
  ObjectKind kind = ObjectKind::Heap;
  FrameClass frame_class = FrameClass::Small;
  unsigned log2_align = 0;  // Pow2 only: log2(A)
  Addr reserved_begin = 0;  // everything the allocator set aside, headers included
  Addr reserved_end = 0;
  TaggedAddress tagged;     // tagged SA handed to the program
};

inline constexpr std::uint64_t kMaxObjectSize = kLargeFrameSize - kSmallFrameSize;

// Deterministic region bases.
inline constexpr Addr kSmallFrameBase = 1ULL << 32;
inline constexpr Addr kSmallFrameLimit = 1ULL << 33;
inline constexpr Addr kLargeFrameBase = 1ULL << 33;
inline constexpr Addr kLargeFrameLimit = 1ULL << 44;
inline constexpr Addr kPow2HeapBase = 1ULL << 32;
inline constexpr Addr kPow2HeapLimit = 1ULL << 44;
inline constexpr Addr kStackBase = 1ULL << 44;
inline constexpr Addr kGlobalBase = 1ULL << 45;
inline constexpr std::uint64_t kStaticRegionSize = 1ULL << 40;
inline constexpr Addr kHeap32Base = 1ULL << 30;
inline constexpr Addr kHeap32Limit = 3ULL << 30;
inline constexpr Addr kStack32Base = 3ULL << 30;
inline constexpr Addr kGlobal32Base = 7ULL << 29;
inline constexpr Addr kSpace32Limit = 1ULL << 32;

// True when [ptr, ptr + size] crosses a 64KB frame boundary.
inline bool straddles_small_frame(Addr ptr, std::uint64_t size) {
  return (ptr ^ (ptr + size)) >= kSmallFrameSize;
}

// Tag bits that make `raw` carry the bounds of `rec`. Pure bit composition:
// no precondition on where `raw` points.
TaggedAddress tag_pointer(Addr raw, const AllocationRecord& rec);

class Heap {
 public:
  struct StackMark {
    Addr sp = 0;
  };

  Heap(ModeConfig cfg, SimMemory& mem);

  const ModeConfig& config() const { return cfg_; }

  TaggedAddress alloc(std::uint64_t size);
  TaggedAddress alloc_small(std::uint64_t size);
  TaggedAddress alloc_large(std::uint64_t size);
  TaggedAddress alloc_pow2(std::uint64_t size);
  TaggedAddress alloc_32(std::uint64_t size);

  // Stack objects whose address leaves static scope, and the runtime-sized
  // variant. Both are released by release_stack.
  TaggedAddress alloc_stack_escaped(std::uint64_t size);
  TaggedAddress alloc_stack_dynamic(std::uint64_t size);
  TaggedAddress alloc_global(std::uint64_t size);

  void free(TaggedAddress p);

  StackMark stack_mark() const { return StackMark{stack_sp_}; }
  void release_stack(StackMark mark);

  const AllocationRecord* find_by_sa(Addr sa) const;
  std::vector<AllocationRecord> live_records() const;
  std::size_t live_count() const { return live_.size(); }

  // Number of frames opened so far, per class (Prism mode).
  std::size_t small_frames() const { return small_frames_.size(); }
  std::size_t large_frames() const { return large_frames_.size(); }

 private:
  struct SmallFrame {
    Addr base = 0;
    std::uint64_t bump = 0;
    std::uint64_t live = 0;
  };
  struct LargeFrame {
    Addr base = 0;
    std::uint64_t slot_size = 0;
    std::uint64_t next_slot = 0;
    std::uint64_t live = 0;
    bool single = false;  // slot 0 only, no header room in front of the object
  };

  bool slot_usable(const LargeFrame& f, std::uint64_t slot) const;
  TaggedAddress place_static(Addr& cursor, Addr limit, std::uint64_t size, ObjectKind kind, bool dynamic);
  TaggedAddress finish(AllocationRecord rec);
  void store_sa(const AllocationRecord& rec);

  ModeConfig cfg_;
  SimMemory& mem_;
  std::map<Addr, AllocationRecord> live_;  // keyed by SA

  std::vector<SmallFrame> small_frames_;
  std::size_t current_small_ = SIZE_MAX;
  Addr next_small_base_ = kSmallFrameBase;

  std::vector<LargeFrame> large_frames_;
  Addr next_large_base_ = kLargeFrameBase;

  Addr pow2_cursor_ = kPow2HeapBase;
  Addr heap32_cursor_ = kHeap32Base;

  Addr stack_base_ = 0;
  Addr stack_sp_ = 0;
  Addr stack_limit_ = 0;
  Addr global_cursor_ = 0;
  Addr global_limit_ = 0;
};

}  // namespace boundtag
