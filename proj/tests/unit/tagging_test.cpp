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

#include <doctest.h>

#include <random>

#include "boundtag/heap.hpp"
#include "boundtag/tagging.hpp"

using namespace boundtag;

namespace {

// EA recovered by hand from the documented bit layout, not via compute_ea.
Addr layout_ea_small(std::uint64_t v) { return (v & 0x7FFF'FFFF'0000ULL) | ((v >> 47) & 0xFFFF); }
Addr layout_ea_large(std::uint64_t v) { return (v & 0x7FFF'0000'0000ULL) | (((v >> 47) & 0xFFFF) << 16); }

}  // namespace

TEST_SUITE("tagging") {

TEST_CASE("small frame tag keeps the low 16 bits of EA") {
  const Addr sa = 0x1'0000'0100;
  const Addr ea = sa + 24;
  const TaggedAddress t = encode_prism(sa, ea, FrameClass::Small);
  CHECK(t.value() == ((0x0118ULL << 47) | sa));
  CHECK_FALSE(t.is_large());
  CHECK(compute_ea(t) == ea);
  CHECK(strip_tag(t) == sa);
}

TEST_CASE("large frame tag keeps bits 16-31 of the frame offset") {
  const Addr frame = 0x3'0000'0000;
  const Addr ea = frame + 0x0005'0000;
  const Addr sa = ea - 70000;
  const TaggedAddress t = encode_prism(sa, ea, FrameClass::Large);
  CHECK(t.is_large());
  CHECK(t.tag_area() == ((1ULL << 16) | 5));
  CHECK(compute_ea(t) == ea);
}

TEST_CASE("encode_prism rejects malformed objects") {
  CHECK_THROWS_AS(encode_prism(0x1'0000'0100, 0x1'0000'00FF, FrameClass::Small), EncodingError);
  CHECK_THROWS_AS(encode_prism(0x1'0000'FFF0, 0x1'0001'0010, FrameClass::Small), EncodingError);
  CHECK_THROWS_AS(encode_prism(0x3'0000'0000, 0x3'0000'1000, FrameClass::Large), EncodingError);
  CHECK_THROWS_AS(encode_prism(0x2'FFFF'0000, 0x3'0001'0000, FrameClass::Large), EncodingError);
  CHECK_THROWS_AS(encode_prism(0, kRawMask + 1, FrameClass::Small), EncodingError);
}

TEST_CASE("compute_ea is invariant over every pointer in [SA, EA]") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    const Addr frame = (std::uniform_int_distribution<Addr>(1, 0x7FFF'FFFE)(rng)) << 16;
    const std::uint64_t size = std::uniform_int_distribution<std::uint64_t>(1, 0xFFF0)(rng);
    const Addr sa = frame + std::uniform_int_distribution<std::uint64_t>(0, 0xFFFF - size)(rng);
    const Addr ea = sa + size;
    const TaggedAddress t = encode_prism(sa, ea, FrameClass::Small);
    for (Addr p : {sa, ea, sa + size / 2}) {
      const TaggedAddress tp((t.value() & ~kRawMask) | p);
      REQUIRE(compute_ea(tp) == ea);
      REQUIRE(layout_ea_small(tp.value()) == ea);
    }
  }
  for (int i = 0; i < 2000; ++i) {
    const Addr frame = (std::uniform_int_distribution<Addr>(1, 0x7FFE)(rng)) << 32;
    const std::uint64_t slots = std::uniform_int_distribution<std::uint64_t>(1, 0xFFFF)(rng);
    const Addr ea = frame + (slots << 16);
    const Addr sa = ea - std::uniform_int_distribution<std::uint64_t>(1, slots << 16)(rng);
    const TaggedAddress t = encode_prism(sa, ea, FrameClass::Large);
    for (Addr p : {sa, ea, sa + (ea - sa) / 3}) {
      const TaggedAddress tp((t.value() & ~kRawMask) | p);
      REQUIRE(compute_ea(tp) == ea);
      REQUIRE(layout_ea_large(tp.value()) == ea);
    }
  }
}

TEST_CASE("compute_ea_checked rejects pointers above EA") {
  const TaggedAddress t = encode_prism(0x1'0000'0000, 0x1'0000'0010, FrameClass::Small);
  CHECK(compute_ea_checked(t) == 0x1'0000'0010);
  CHECK_THROWS_AS(compute_ea_checked(TaggedAddress(t.value() + 0x11)), EncodingError);
  // The (void*)-1 placeholder decodes to an EA below its own address.
  CHECK_THROWS_AS(compute_ea_checked(TaggedAddress(~0ULL)), EncodingError);
}

TEST_CASE("pow2 tags carry log2 A") {
  const TaggedAddress t = encode_pow2(0x1'0000'0400, 10);
  CHECK(pow2_log2(t) == 10);
  CHECK(pow2_aligned_size(t) == 1024);
  CHECK(strip_tag(t, Mode::Pow2) == 0x1'0000'0400);
  CHECK_THROWS_AS(encode_pow2(0x1'0000'0200, 10), EncodingError);
  CHECK_THROWS_AS(encode_pow2(0, 47), EncodingError);
  CHECK(pow2_aligned_size(TaggedAddress(~0ULL)) == 0);
}

TEST_CASE("prism32 keeps EA in the upper half") {
  const TaggedAddress t = encode_ea32(0x4000'0000, 0x4000'0040);
  CHECK(decode_ea32(t) == 0x4000'0040);
  CHECK(strip_tag(t, Mode::Prism32) == 0x4000'0000);
  CHECK_THROWS_AS(encode_ea32(0, 1ULL << 32), EncodingError);
  CHECK_THROWS_AS(encode_ea32(0x20, 0x10), EncodingError);
}

TEST_CASE("next_pow2 and log2_exact") {
  CHECK(next_pow2(1) == 1);
  CHECK(next_pow2(2) == 2);
  CHECK(next_pow2(3) == 4);
  CHECK(next_pow2(33) == 64);
  CHECK(next_pow2(1ULL << 40) == 1ULL << 40);
  CHECK(log2_exact(1) == 0);
  CHECK(log2_exact(1ULL << 33) == 33);
}

TEST_CASE("mode names round-trip") {
  for (Mode m : {Mode::Prism, Mode::Pow2, Mode::Prism32}) CHECK(parse_mode(to_string(m)) == m);
  CHECK_THROWS_AS(parse_mode("asan"), std::invalid_argument);
}

TEST_CASE("tag_pointer reproduces the allocator's tag at any interior pointer") {
  for (Mode m : {Mode::Prism, Mode::Pow2, Mode::Prism32}) {
    SimMemory mem;
    Heap heap({m, 8}, mem);
    for (std::uint64_t size : {1ULL, 40ULL, 65528ULL, 70000ULL}) {
      const TaggedAddress p = heap.alloc(size);
      const AllocationRecord* rec = heap.find_by_sa(strip_tag(p, m));
      REQUIRE(rec != nullptr);
      CHECK(tag_pointer(rec->sa, *rec) == p);
      const TaggedAddress mid = tag_pointer(rec->sa + size / 2, *rec);
      CHECK(strip_tag(mid, m) == rec->sa + size / 2);
      CHECK((mid.value() & ~strip_mask(m)) == (p.value() & ~strip_mask(m)));
    }
  }
}

}  // TEST_SUITE
