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

#include "boundtag/checks.hpp"
#include "boundtag/heap.hpp"

using namespace boundtag;

namespace {

struct Obj {
  SimMemory mem;
  Heap heap;
  TaggedAddress p;
  const AllocationRecord* rec = nullptr;

  Obj(Mode m, std::uint64_t q, std::uint64_t size) : heap({m, q}, mem) {
    heap.alloc(24);  // not the first object of its frame
    p = heap.alloc(size);
    rec = heap.find_by_sa(strip_tag(p, m));
  }
};

}  // namespace

TEST_SUITE("checks") {

TEST_CASE("prism predicate equals exact bounds over the whole neighbourhood") {
  for (std::uint64_t q : {0ULL, 8ULL, 32ULL}) {
    for (std::uint64_t size : {1ULL, 24ULL, 100ULL, 70000ULL}) {
      Obj o(Mode::Prism, q, size);
      REQUIRE(o.rec != nullptr);
      const Addr sa = o.rec->sa;
      const Addr ea = o.rec->ea;
      for (Addr ksa_raw : {sa, sa + size / 2, ea}) {
        const TaggedAddress ksa = tag_pointer(ksa_raw, *o.rec);
        for (Addr ptr = sa - 40; ptr <= sa + 40; ++ptr) {
          for (std::uint64_t n : {1ULL, 4ULL, 8ULL}) {
            const CheckOutcome c = bounds_check(ksa, ptr, n, o.mem, q);
            CHECK(c.pass == (ptr >= sa && ptr + n <= ea));
            CHECK(c.sa_fetched == (ptr < ksa_raw && ptr + n <= ea));
          }
        }
        for (Addr ptr = ea - 40; ptr <= ea + 40; ++ptr) {
          const CheckOutcome c = bounds_check(ksa, ptr, 8, o.mem, q);
          CHECK(c.pass == (ptr >= sa && ptr + 8 <= ea));
        }
      }
    }
  }
}

TEST_CASE("prism32 predicate equals exact bounds") {
  Obj o(Mode::Prism32, 8, 48);
  const Addr sa = o.rec->sa;
  const Addr ea = o.rec->ea;
  for (Addr ptr = sa - 16; ptr <= ea + 16; ++ptr) {
    const CheckOutcome c = bounds_check32(tag_pointer(ea, *o.rec), ptr, 4, o.mem, 8);
    CHECK(c.pass == (ptr >= sa && ptr + 4 <= ea));
  }
}

TEST_CASE("pow2 predicate passes exactly inside [SA, SA + A - 1)") {
  Obj o(Mode::Pow2, 0, 20);
  const Addr sa = o.rec->sa;
  const std::uint64_t a = pow2_aligned_size(o.p);
  REQUIRE(a == 32);
  for (Addr ptr = sa - 40; ptr <= sa + a + 40; ++ptr) {
    for (std::uint64_t n = 1; n <= 8; ++n) {
      const CheckOutcome c = bounds_check_2k(o.p, ptr, n);
      CHECK(c.pass == (ptr >= sa && ptr + n <= sa + a - 1));
      CHECK_FALSE(c.sa_fetched);
    }
  }
}

TEST_CASE("lower bound is fetched from EA + q only below the KSA") {
  Obj o(Mode::Prism, 16, 64);
  const Addr sa = o.rec->sa;
  Checker chk({Mode::Prism, 16}, o.mem);
  const TaggedAddress mid = tag_pointer(sa + 32, *o.rec);
  CHECK(chk.access(mid, {sa + 32, 0, 8}).pass);
  CHECK(chk.stats().sa_fetches == 0);
  CHECK(chk.access(mid, {sa + 32, -32, -24}).pass);
  CHECK(chk.stats().sa_fetches == 1);
  const CheckOutcome under = chk.access(mid, {sa + 32, -33, -25});
  CHECK_FALSE(under.pass);
  CHECK(under.reason == AbortReason::LowerBound);
  CHECK(chk.stats().sa_fetches == 2);
  CHECK(chk.stats().dynamic_checks == 3);
  // Upper-only checks never look below.
  CHECK(chk.access(mid, {sa + 32, -33, -25}, true).pass);
  CHECK(chk.stats().sa_fetches == 2);
}

TEST_CASE("ranges that wrap or run past the raw space abort") {
  Obj o(Mode::Prism, 0, 64);
  Checker chk({Mode::Prism, 0}, o.mem);
  const Addr sa = o.rec->sa;
  CHECK_FALSE(chk.access(o.p, {sa, 0, INT64_MAX}).pass);
  CHECK_FALSE(chk.access(o.p, {sa, INT64_MIN, 0}).pass);
  CHECK_FALSE(chk.access(o.p, {sa, 8, 4}).pass);
}

TEST_CASE("escape checks accept [SA, EA] and skip statically aliased pointers") {
  Obj o(Mode::Prism, 0, 64);
  Checker chk({Mode::Prism, 0}, o.mem);
  const Addr sa = o.rec->sa;
  const Addr ea = o.rec->ea;
  CHECK(chk.escape(tag_pointer(ea, *o.rec), o.p, false, false).pass);
  CHECK(chk.escape(tag_pointer(sa, *o.rec), o.p, false, false).pass);
  const CheckOutcome past = chk.escape(tag_pointer(ea + 1, *o.rec), o.p, false, false);
  CHECK_FALSE(past.pass);
  CHECK(past.reason == AbortReason::EscapeInvariant);
  CHECK_FALSE(chk.escape(tag_pointer(sa - 1, *o.rec), o.p, false, false).pass);
  const auto before = chk.stats().dynamic_checks;
  CHECK(chk.escape(tag_pointer(ea + 100, *o.rec), o.p, true, false).pass);
  CHECK(chk.stats().dynamic_checks == before);
  CHECK(chk.escape(o.p, o.p, false, true).pass);
  CHECK(chk.stats().dynamic_checks == before);
}

TEST_CASE("static checks use the recorded extent") {
  SimMemory mem;
  Checker chk({Mode::Prism, 0}, mem);
  const Addr sa = 0x1000'0000'0000;
  CHECK(chk.access_static(sa, 32, {sa, 24, 32}).pass);
  CHECK_FALSE(chk.access_static(sa, 32, {sa, 25, 33}).pass);
  CHECK_FALSE(chk.access_static(sa, 32, {sa, -1, 0}).pass);
  CHECK(chk.escape_static(sa + 32, sa, 32).pass);
  CHECK_FALSE(chk.escape_static(sa + 33, sa, 32).pass);
}

TEST_CASE("off-by-one injection lets exactly one extra byte through") {
  Obj o(Mode::Prism, 0, 16);
  Checker chk({Mode::Prism, 0}, o.mem);
  chk.inject_upper_off_by_one(true);
  const Addr sa = o.rec->sa;
  CHECK(chk.access(o.p, {sa, 16, 17}).pass);
  CHECK_FALSE(chk.access(o.p, {sa, 17, 18}).pass);
}

}  // TEST_SUITE
