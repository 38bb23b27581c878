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

#include "boundtag/heap.hpp"

#include <sstream>

namespace boundtag {
namespace {

constexpr std::uint64_t align_up(std::uint64_t v, std::uint64_t a) { return (v + a - 1) & ~(a - 1); }

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}

// Largest Pow2 alignment the simulated heap hands out.
constexpr std::uint64_t kMaxPow2Align = 1ULL << 33;

}  // namespace

TaggedAddress tag_pointer(Addr raw, const AllocationRecord& rec) {
  switch (rec.mode) {
    case Mode::Prism:
      if (rec.frame_class == FrameClass::Small) {
        return TaggedAddress(((rec.ea & 0xFFFF) << kTagShift) | (raw & kRawMask));
      }
      return TaggedAddress(kLargeClassBit | ((((rec.ea & 0xFFFF'FFFFULL) >> 16) & 0xFFFF) << kTagShift) |
                           (raw & kRawMask));
    case Mode::Pow2:
      return TaggedAddress((static_cast<std::uint64_t>(rec.log2_align) << kTagShift) | (raw & kRawMask));
    case Mode::Prism32:
      return TaggedAddress((rec.ea << 32) | (raw & kRaw32Mask));
  }
  return TaggedAddress(raw);
}

Heap::Heap(ModeConfig cfg, SimMemory& mem) : cfg_(cfg), mem_(mem) {
  if (cfg_.mode == Mode::Prism32) {
    mem_.map(kHeap32Base, kHeap32Limit - kHeap32Base);
    stack_base_ = kStack32Base;
    stack_limit_ = kGlobal32Base;
    global_cursor_ = kGlobal32Base;
    global_limit_ = kSpace32Limit - kSmallFrameSize;
  } else {
    stack_base_ = kStackBase;
    stack_limit_ = kStackBase + kStaticRegionSize;
    global_cursor_ = kGlobalBase;
    global_limit_ = kGlobalBase + kStaticRegionSize;
  }
  stack_sp_ = stack_base_;
  mem_.map(stack_base_, stack_limit_ - stack_base_);
  mem_.map(global_cursor_, global_limit_ - global_cursor_);
}

TaggedAddress Heap::alloc(std::uint64_t size) {
  if (size < 1 || size > kMaxObjectSize) {
    throw AllocError("allocation of " + std::to_string(size) + " bytes outside [1, 4GB - 64KB]");
  }
  switch (cfg_.mode) {
    case Mode::Prism:
      return size + cfg_.q + 8 <= kSmallFrameSize ? alloc_small(size) : alloc_large(size);
    case Mode::Pow2:
      return alloc_pow2(size);
    case Mode::Prism32:
      return alloc_32(size);
  }
  throw AllocError("unknown mode");
}

TaggedAddress Heap::alloc_small(std::uint64_t size) {
  const std::uint64_t need = size + cfg_.q + 8;
  if (need > kSmallFrameSize) throw AllocError("alloc_small: " + std::to_string(size) + " bytes do not fit a small frame");

  auto fits = [&](const SmallFrame& f) { return align_up(f.bump, 8) + need <= kSmallFrameSize; };
  if (current_small_ == SIZE_MAX || !fits(small_frames_[current_small_])) {
    current_small_ = SIZE_MAX;
    for (std::size_t i = 0; i < small_frames_.size(); ++i) {
      if (small_frames_[i].live == 0 && fits(small_frames_[i])) {
        current_small_ = i;
        break;
      }
    }
    if (current_small_ == SIZE_MAX) {
      if (next_small_base_ >= kSmallFrameLimit) throw AllocError("small-frame region exhausted");
      mem_.map(next_small_base_, kSmallFrameSize);
      small_frames_.push_back(SmallFrame{next_small_base_, 0, 0});
      next_small_base_ += kSmallFrameSize;
      current_small_ = small_frames_.size() - 1;
    }
  }
  SmallFrame& f = small_frames_[current_small_];
  AllocationRecord rec;
  rec.sa = f.base + align_up(f.bump, 8);
  rec.ea = rec.sa + size;
  rec.request_size = size;
  rec.frame_class = FrameClass::Small;
  rec.reserved_begin = rec.sa;
  rec.reserved_end = rec.sa + need;
  f.bump = rec.reserved_end - f.base;
  ++f.live;
  return finish(rec);
}

bool Heap::slot_usable(const LargeFrame& f, std::uint64_t slot) const {
  if (f.single && slot != 0) return false;
  return (slot + 1) * f.slot_size + cfg_.q + 8 <= kLargeFrameSize;
}

TaggedAddress Heap::alloc_large(std::uint64_t size) {
  if (size < 1 || size > kMaxObjectSize) {
    throw AllocError("alloc_large: " + std::to_string(size) + " bytes outside [1, 4GB - 64KB]");
  }
  std::uint64_t slot_size = align_up(size + cfg_.q + 8, kSmallFrameSize);
  bool single = false;
  if (slot_size + cfg_.q + 8 > kLargeFrameSize) {
    // Only slot 0 can hold it; slot 0 has no predecessor whose SA needs a header.
    slot_size = align_up(size, kSmallFrameSize);
    single = true;
    if (slot_size + cfg_.q + 8 > kLargeFrameSize) {
      throw AllocError("alloc_large: " + std::to_string(size) + " bytes plus metadata exceed a 4GB frame");
    }
  }

  LargeFrame* frame = nullptr;
  for (auto& f : large_frames_) {
    if (f.slot_size == slot_size && f.single == single && slot_usable(f, f.next_slot)) {
      frame = &f;
      break;
    }
  }
  if (frame == nullptr) {
    for (auto& f : large_frames_) {
      if (f.live == 0) {
        f = LargeFrame{f.base, slot_size, 0, 0, single};
        frame = &f;
        break;
      }
    }
  }
  if (frame == nullptr) {
    if (next_large_base_ >= kLargeFrameLimit) throw AllocError("large-frame region exhausted");
    mem_.map(next_large_base_, kLargeFrameSize);
    large_frames_.push_back(LargeFrame{next_large_base_, slot_size, 0, 0, single});
    next_large_base_ += kLargeFrameSize;
    frame = &large_frames_.back();
  }

  const std::uint64_t slot = frame->next_slot++;
  const Addr y = frame->base + slot * slot_size;
  AllocationRecord rec;
  rec.ea = y + slot_size;
  rec.sa = rec.ea - size;
  rec.request_size = size;
  rec.frame_class = FrameClass::Large;
  rec.reserved_begin = slot == 0 ? y : y + cfg_.q + 8;
  rec.reserved_end = rec.ea + cfg_.q + 8;
  ++frame->live;
  return finish(rec);
}

TaggedAddress Heap::alloc_pow2(std::uint64_t size) {
  if (size < 1) throw AllocError("alloc_pow2: empty allocation");
  const std::uint64_t a = next_pow2(size + 1);
  if (a > kMaxPow2Align) throw AllocError("alloc_pow2: aligned size " + hex(a) + " exceeds the budget");
  const std::uint64_t reserve = cfg_.q == 0 ? a : a + cfg_.q - 1;
  const Addr sa = align_up(pow2_cursor_, a);
  if (sa + reserve > kPow2HeapLimit) throw AllocError("alloc_pow2: heap region exhausted");
  mem_.map(sa, reserve);
  pow2_cursor_ = sa + reserve;

  AllocationRecord rec;
  rec.sa = sa;
  rec.ea = sa + size;
  rec.request_size = size;
  rec.log2_align = log2_exact(a);
  rec.reserved_begin = sa;
  rec.reserved_end = sa + reserve;
  return finish(rec);
}

TaggedAddress Heap::alloc_32(std::uint64_t size) {
  if (size < 1) throw AllocError("alloc_32: empty allocation");
  const Addr sa = align_up(heap32_cursor_, 8);
  const std::uint64_t need = size + cfg_.q + 8;
  if (sa + need > kHeap32Limit || sa + need < sa) throw AllocError("alloc_32: 32-bit heap exhausted");
  AllocationRecord rec;
  rec.sa = sa;
  rec.ea = sa + size;
  rec.request_size = size;
  rec.reserved_begin = sa;
  rec.reserved_end = sa + need;
  heap32_cursor_ = rec.reserved_end;
  return finish(rec);
}

TaggedAddress Heap::place_static(Addr& cursor, Addr limit, std::uint64_t size, ObjectKind kind, bool dynamic) {
  const std::uint64_t q = cfg_.q;
  AllocationRecord rec;
  rec.kind = kind;
  rec.request_size = size;

  auto large_layout = [&](Addr from) {
    const std::uint64_t asize = align_up(size == 0 ? 1 : size, kSmallFrameSize);
    Addr start = align_up(from, kSmallFrameSize);
    if ((start >> 32) != ((start + asize + q + 8 - 1) >> 32)) start = align_up(start + 1, kLargeFrameSize);
    rec.frame_class = FrameClass::Large;
    rec.reserved_begin = start;
    rec.ea = start + asize;
    rec.sa = rec.ea - size;
    rec.reserved_end = rec.ea + q + 8;
  };

  switch (cfg_.mode) {
    case Mode::Prism:
      if (dynamic) {
        const Addr ptr = align_up(cursor, 8);
        if (!straddles_small_frame(ptr, size)) {
          rec.sa = ptr;
          rec.ea = ptr + size;
          rec.reserved_begin = ptr;
          rec.reserved_end = rec.ea + q + 8;
        } else {
          large_layout(cursor);
        }
      } else if (size + q + 8 <= kSmallFrameSize) {
        const std::uint64_t z = next_pow2(size + 1);
        rec.sa = align_up(cursor, z < 8 ? 8 : z);
        rec.ea = rec.sa + size;
        rec.reserved_begin = rec.sa;
        rec.reserved_end = rec.ea + q + 8;
      } else {
        large_layout(cursor);
      }
      break;
    case Mode::Pow2: {
      const std::uint64_t a = next_pow2(size + 1);
      if (a > kMaxPow2Align) throw AllocError("static object too large for pow2 layout");
      rec.sa = align_up(cursor, a);
      rec.ea = rec.sa + size;
      rec.log2_align = log2_exact(a);
      rec.reserved_begin = rec.sa;
      rec.reserved_end = rec.sa + (q == 0 ? a : a + q - 1);
      break;
    }
    case Mode::Prism32:
      rec.sa = align_up(cursor, 8);
      rec.ea = rec.sa + size;
      rec.reserved_begin = rec.sa;
      rec.reserved_end = rec.ea + q + 8;
      break;
  }
  if (rec.reserved_end > limit || rec.reserved_end < rec.reserved_begin) {
    throw AllocError(std::string(kind == ObjectKind::Stack ? "stack" : "global") + " region exhausted");
  }
  cursor = align_up(rec.reserved_end, 8);
  return finish(rec);
}

TaggedAddress Heap::alloc_stack_escaped(std::uint64_t size) {
  if (size > kMaxObjectSize) throw AllocError("stack object of " + std::to_string(size) + " bytes is too large");
  return place_static(stack_sp_, stack_limit_, size, ObjectKind::Stack, false);
}

TaggedAddress Heap::alloc_stack_dynamic(std::uint64_t size) {
  if (size > kMaxObjectSize) throw AllocError("dynamic stack object of " + std::to_string(size) + " bytes is too large");
  return place_static(stack_sp_, stack_limit_, size, ObjectKind::Stack, true);
}

TaggedAddress Heap::alloc_global(std::uint64_t size) {
  if (size > kMaxObjectSize) throw AllocError("global of " + std::to_string(size) + " bytes is too large");
  return place_static(global_cursor_, global_limit_, size, ObjectKind::Global, false);
}

TaggedAddress Heap::finish(AllocationRecord rec) {
  rec.q = cfg_.q;
  rec.mode = cfg_.mode;
  rec.live = true;
  switch (cfg_.mode) {
    case Mode::Prism:
      rec.tagged = encode_prism(rec.sa, rec.ea, rec.frame_class);
      break;
    case Mode::Pow2:
      rec.tagged = encode_pow2(rec.sa, rec.log2_align);
      break;
    case Mode::Prism32:
      rec.tagged = encode_ea32(rec.sa, rec.ea);
      break;
  }
  store_sa(rec);
  live_[rec.sa] = rec;
  return rec.tagged;
}

void Heap::store_sa(const AllocationRecord& rec) {
  if (rec.mode == Mode::Pow2) return;
  mem_.write_u64(rec.ea + rec.q, rec.sa);
}

void Heap::free(TaggedAddress p) {
  const Addr raw = strip_tag(p, cfg_.mode);
  auto it = live_.find(raw);
  if (it == live_.end()) {
    throw FreeError("free of " + hex(raw) + ": not the start of a live allocation");
  }
  if (it->second.kind != ObjectKind::Heap) throw FreeError("free of non-heap object at " + hex(raw));
  const AllocationRecord& rec = it->second;
  if (cfg_.mode == Mode::Prism) {
    if (rec.frame_class == FrameClass::Small) {
      const Addr base = rec.sa & ~(kSmallFrameSize - 1);
      for (auto& f : small_frames_) {
        if (f.base == base) {
          if (--f.live == 0) f.bump = 0;
          break;
        }
      }
    } else {
      const Addr base = rec.sa & ~(kLargeFrameSize - 1);
      for (auto& f : large_frames_) {
        if (f.base == base) {
          --f.live;
          break;
        }
      }
    }
  }
  live_.erase(it);
}

void Heap::release_stack(StackMark mark) {
  auto it = live_.lower_bound(mark.sp);
  while (it != live_.end() && it->first < stack_limit_) {
    if (it->second.kind == ObjectKind::Stack) {
      it = live_.erase(it);
    } else {
      ++it;
    }
  }
  stack_sp_ = mark.sp;
}

const AllocationRecord* Heap::find_by_sa(Addr sa) const {
  auto it = live_.find(sa);
  return it == live_.end() ? nullptr : &it->second;
}

std::vector<AllocationRecord> Heap::live_records() const {
  std::vector<AllocationRecord> out;
  out.reserve(live_.size());
  for (const auto& [sa, rec] : live_) out.push_back(rec);
  return out;
}

}  // namespace boundtag
