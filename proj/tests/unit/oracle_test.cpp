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

#include "boundtag/oracle.hpp"
#include "support.hpp"

using namespace boundtag;
using oracle::AccessClass;
using oracle::Divergence;

namespace {

vm::RunResult ok(std::int64_t ret, std::uint64_t clock) {
  vm::RunResult r;
  r.ret = ret;
  r.clock = clock;
  return r;
}

vm::RunResult violation(int site, std::uint64_t clock) {
  vm::RunResult r;
  r.exit = vm::ExitKind::Violation;
  r.violation = vm::ViolationReport{};
  r.violation->site = site;
  r.violation->clock = clock;
  r.clock = clock;
  return r;
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("classify against exact bounds and padding") {
  const oracle::ObjectBounds b{0x1000, 0x1010, 8, 0};
  CHECK(oracle::classify(0x1000, 16, b) == AccessClass::InBounds);
  CHECK(oracle::classify(0x1008, 8, b) == AccessClass::InBounds);
  CHECK(oracle::classify(0x100C, 8, b) == AccessClass::InPadding);
  CHECK(oracle::classify(0x1010, 8, b) == AccessClass::InPadding);
  CHECK(oracle::classify(0x1011, 8, b) == AccessClass::OutOfBounds);
  CHECK(oracle::classify(0x0FFF, 1, b) == AccessClass::OutOfBounds);
  CHECK(oracle::classify_escape(0x1010, b) == AccessClass::InBounds);
  CHECK(oracle::classify_escape(0x1011, b) == AccessClass::InvalidEscape);
  CHECK(oracle::classify_escape(0x0FFF, b) == AccessClass::InvalidEscape);
}

TEST_CASE("pow2 block membership stops one byte short of SA + A") {
  const oracle::ObjectBounds b{0x2000, 0x2014, 0, 32};
  CHECK(oracle::within_pow2_block(0x201B, 4, b));
  CHECK_FALSE(oracle::within_pow2_block(0x201C, 4, b));
  CHECK_FALSE(oracle::within_pow2_block(0x1FFF, 1, b));
  CHECK_FALSE(oracle::within_pow2_block(0x2000, 1, {0x2000, 0x2001, 0, 0}));
}

TEST_CASE("address-only classification picks the record holding the start") {
  AllocationRecord r;
  r.sa = 0x4000;
  r.ea = 0x4020;
  r.q = 0;
  const std::vector<AllocationRecord> recs{r};
  CHECK(oracle::classify(0x4018, 8, recs) == AccessClass::InBounds);
  CHECK(oracle::classify(0x401C, 8, recs) == AccessClass::OutOfBounds);
  CHECK(oracle::classify(0x5000, 1, recs) == AccessClass::OutOfBounds);
}

TEST_CASE("compare: matching results agree") {
  CHECK(oracle::compare(ok(3, 10), ok(3, 10), {}).agreement);
  const auto v = oracle::compare(ok(3, 10), ok(4, 10), {});
  CHECK_FALSE(v.agreement);
  CHECK(v.divergence == Divergence::ResultMismatch);
  CHECK(oracle::compare(violation(2, 7), violation(2, 7), {}).agreement);
}

TEST_CASE("compare: aborting later than the reference is a miss") {
  const auto late = oracle::compare(violation(2, 9), violation(2, 7), {});
  CHECK_FALSE(late.agreement);
  CHECK(late.divergence == Divergence::MissedViolation);
  const auto none = oracle::compare(ok(0, 20), violation(2, 7), {});
  CHECK(none.divergence == Divergence::MissedViolation);
}

TEST_CASE("compare: earlier aborts are allowed only at early sites") {
  const auto early = oracle::compare(violation(5, 3), violation(2, 7), {5});
  CHECK(early.agreement);
  CHECK(early.early_abort);
  const auto stray = oracle::compare(violation(4, 3), violation(2, 7), {5});
  CHECK_FALSE(stray.agreement);
  CHECK(stray.divergence == Divergence::FalseAbort);
}

TEST_CASE("compare: an abort where the reference finished needs a permit") {
  vm::RunResult ref = ok(0, 20);
  CHECK(oracle::compare(violation(1, 6), ref, {}).divergence == Divergence::FalseAbort);
  ref.permitted.push_back(6);
  const auto v = oracle::compare(violation(1, 6), ref, {});
  CHECK(v.agreement);
}

TEST_CASE("compare: faults must match") {
  vm::RunResult f = ok(0, 5);
  f.exit = vm::ExitKind::Fault;
  CHECK(oracle::compare(f, f, {}).agreement);
  CHECK(oracle::compare(f, ok(0, 5), {}).divergence == Divergence::ExitMismatch);
  CHECK(oracle::compare(ok(0, 5), f, {}).divergence == Divergence::ExitMismatch);
}

TEST_CASE("differential run agrees on a clean and a buggy program") {
  const ir::Program p = ir::parse(R"(fn @main(%i: int) -> int {
^entry:
  %a = alloc 40
  %p = gep %a, %i*8
  store.8 %p, 1
  %q = gep %a, 8
  %v = load.8 %q
  ret %v
}
)");
  for (Mode m : {Mode::Prism, Mode::Prism32}) {
    oracle::DifferentialOptions d;
    d.mode = {m, 8};
    const auto good = oracle::differential_run(p, {1}, d);
    CHECK(good.agreement);
    CHECK(good.checked == vm::ExitKind::Ok);
    const auto bad = oracle::differential_run(p, {5}, d);
    CHECK(bad.agreement);
    CHECK(bad.checked == vm::ExitKind::Violation);
    CHECK(bad.reference == vm::ExitKind::Violation);
    d.inject_upper_off_by_one = true;
    const auto mutant = oracle::differential_run(ir::parse(R"(fn @main(%i: int) -> int {
^entry:
  %a = alloc 40
  %p = gep %a, %i
  %v = load.8 %p
  ret %v
}
)"),
                                                 {33}, d);
    CHECK_FALSE(mutant.agreement);
    CHECK(mutant.divergence == Divergence::MissedViolation);
  }
}

TEST_CASE("padding accesses elided by q are permitted, not flagged") {
  const ir::Program p = ir::parse(R"(fn @main() -> int {
^entry:
  %a = alloc 16
  %p = gep %a, 16
  %v = load.8 %p
  ret %v
}
)");
  oracle::DifferentialOptions d;
  d.mode = {Mode::Prism, 24};
  const auto v = oracle::differential_run(p, {}, d);
  CHECK(v.agreement);
  CHECK(v.checked == vm::ExitKind::Ok);
  CHECK(v.reference == vm::ExitKind::Ok);
  CHECK(v.allowed_divergences == 1);
  d.mode = {Mode::Prism, 0};
  const auto strict = oracle::differential_run(p, {}, d);
  CHECK(strict.agreement);
  CHECK(strict.checked == vm::ExitKind::Violation);
}

}  // TEST_SUITE
