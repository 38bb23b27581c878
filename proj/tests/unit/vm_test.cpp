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
using testing::run_prism;

TEST_SUITE("vm") {

TEST_CASE("integer semantics") {
  const std::string text = R"(fn @main(%a: int, %b: int) -> int {
^entry:
  %s = shr %a, 1
  %d = div %a, %b
  %r = rem %a, %b
  %x = mul %s, 1000
  %y = add %x, %d
  %z = mul %y, 100
  %w = add %z, %r
  ret %w
}
)";
  // shr is arithmetic; div/rem truncate toward zero.
  CHECK(run_prism(text, {-7, 2}).ret == ((-4 * 1000 + -3) * 100 + -1));
  const vm::RunResult z = run_prism(text, {1, 0});
  CHECK(z.exit == vm::ExitKind::Fault);
  CHECK(z.fault.find("division") != std::string::npos);
  CHECK(run_prism(text, {INT64_MIN, -1}).exit == vm::ExitKind::Ok);
}

TEST_CASE("missing inputs are zero; extra inputs are rejected") {
  const std::string text = "fn @main(%a: int) -> int {\n^entry:\n  %b = add %a, 5\n  ret %b\n}\n";
  CHECK(run_prism(text).ret == 5);
  CHECK_THROWS_AS(run_prism(text, {1, 2}), std::invalid_argument);
}

TEST_CASE("step limit and call depth fault") {
  const ir::Program spin = ir::parse("fn @main() -> int {\n^entry:\n  br ^l\n^l:\n  br ^l\n}\n");
  vm::RunOptions o;
  o.step_limit = 1000;
  const vm::RunResult r = vm::run(spin, {}, o);
  CHECK(r.exit == vm::ExitKind::Fault);
  CHECK(r.clock <= 1001);

  const ir::Program rec = ir::parse(R"(fn @f(%n: int) -> int {
^entry:
  %m = add %n, 1
  %r = call @f(%m)
  ret %r
}

fn @main() -> int {
^entry:
  %r = call @f(0)
  ret %r
}
)");
  o.step_limit = 10'000'000;
  o.max_call_depth = 100;
  CHECK(vm::run(rec, {}, o).exit == vm::ExitKind::Fault);
}

TEST_CASE("memory round-trips through loads, stores and stored pointers") {
  const std::string text = R"(fn @main() -> int {
^entry:
  %a = alloc 32
  %b = alloc 8
  %p = gep %a, 8
  store.4 %p, 305419896
  storep %b, %p
  %q = loadp %b
  %v = load.2 %q
  %w = load.1 %a
  %s = add %v, %w
  free %a
  free %b
  ret %s
}
)";
  const vm::RunResult r = run_prism(text);
  REQUIRE(r.exit == vm::ExitKind::Ok);
  CHECK(r.ret == 0x5678);
}

TEST_CASE("double free and free of an interior pointer fault") {
  CHECK(run_prism("fn @main() -> int {\n^entry:\n  %a = alloc 8\n  free %a\n  free %a\n  ret 0\n}\n").exit ==
        vm::ExitKind::Fault);
  CHECK(run_prism("fn @main() -> int {\n^entry:\n  %a = alloc 8\n  %b = gep %a, 4\n  free %b\n  ret 0\n}\n").exit ==
        vm::ExitKind::Fault);
}

TEST_CASE("an off-the-end read aborts with a structured report") {
  const vm::RunResult r = run_prism(R"(fn @main(%i: int) -> int {
^entry:
  %a = alloc 16
  %p = gep %a, %i*8
  %v = load.8 %p
  ret %v
}
)",
                                    {2});
  REQUIRE(r.exit == vm::ExitKind::Violation);
  REQUIRE(r.violation.has_value());
  CHECK(r.violation->reason == AbortReason::UpperBound);
  CHECK(r.violation->function == "main");
  CHECK(r.violation->line == 5);
  CHECK(r.violation->access_size == 8);
  CHECK(r.violation->ea - (r.violation->ksa & kRawMask) == 16);
}

TEST_CASE("extern copies are checked against the destination and source") {
  const std::string text = R"(fn @main(%n: int) -> int {
^entry:
  %a = alloc 16
  %b = alloc 32
  extern @memset(%b, 65, 32)
  extern @memcpy(%a, %b, %n)
  %v = load.1 %a
  ret %v
}
)";
  CHECK(run_prism(text, {16}).ret == 65);
  const vm::RunResult over = run_prism(text, {17});
  REQUIRE(over.exit == vm::ExitKind::Violation);
  CHECK(over.violation->site == -1);
  CHECK(over.violation->detail.find("memcpy") != std::string::npos);
  CHECK(run_prism(text, {-1}).exit == vm::ExitKind::Violation);
}

TEST_CASE("recv fills a deterministic pattern and returns the count") {
  const vm::RunResult r = run_prism(R"(fn @main() -> int {
^entry:
  %a = alloc 8
  %n = extern @recv(%a, 8)
  %p = gep %a, 3
  %v = load.1 %p
  %m = mul %n, 1000
  %s = add %m, %v
  ret %s
}
)");
  CHECK(r.ret == 8 * 1000 + ((3 * 31 + 7) & 0xFF));
}

TEST_CASE("SA fetches happen only below the KSA and are counted both ways") {
  // The callee's KSA is the end pointer it receives.
  const std::string text = R"(fn @main() -> int {
^entry:
  %a = alloc 64
  %e = gep %a, 64
  %r = call @walk(%e)
  ret %r
}

fn @walk(%e: ptr) -> int {
^entry:
  br ^h
^h:
  %i = phi int [1, ^entry], [%inext, ^h]
  %s = phi int [0, ^entry], [%snext, ^h]
  %p = gep %e, %i*-8
  %v = load.8 %p
  %snext = add %s, %v
  %inext = add %i, 1
  %c = cmp.le %inext, 8
  condbr %c, ^h, ^x
^x:
  ret %snext
}
)";
  const vm::RunResult r = run_prism(text, {}, {Mode::Prism, 0}, OptSet::none());
  REQUIRE(r.exit == vm::ExitKind::Ok);
  // Eight loads plus the escape check on the call argument.
  CHECK(r.checks.dynamic_checks == 9);
  CHECK(r.checks.sa_fetches == 8);
  CHECK(r.fetches_below_ksa == 8);
}

TEST_CASE("pointer comparison sees through tags on escaped statics") {
  const vm::RunResult r = run_prism(R"(global @g size=32 escapes=true

fn @id(%p: ptr) -> ptr {
^entry:
  ret %p
}

fn @main() -> int {
^entry:
  %a = global @g
  %b = call @id(%a)
  %e = pcmp.eq %a, %b
  %d = psub %b, %a
  %s = add %e, %d
  ret %s
}
)");
  REQUIRE(r.exit == vm::ExitKind::Ok);
  CHECK(r.ret == 1);
}

TEST_CASE("trace lines describe each executed check") {
  const InstrumentResult inst = instrument(ir::parse(R"(fn @main(%i: int) -> int {
^entry:
  %a = alloc 16
  %p = gep %a, %i*8
  %v = load.8 %p
  ret %v
}
)"),
                                           {{Mode::Prism, 0}, OptSet::all()});
  vm::RunOptions o;
  o.trace = true;
  const vm::RunResult r = vm::run(inst.program, {1}, o);
  REQUIRE(r.trace.size() == 1);
  CHECK(r.trace[0].rfind("check #0 ", 0) == 0);
  CHECK(r.trace[0].find("[0,8) pass") != std::string::npos);
}

TEST_CASE("oracle backend classifies every access") {
  const InstrumentResult inst = instrument(ir::parse(R"(fn @main(%i: int) -> int {
^entry:
  %a = alloc 16
  %p = gep %a, %i
  %v = load.8 %p
  ret %v
}
)"),
                                           {{Mode::Prism, 0}, OptSet::none()});
  const vm::RunOptions ref = vm::reference_options(inst, {Mode::Prism, 0});
  CHECK(ref.backend == vm::Backend::Oracle);
  const vm::RunResult ok = vm::run(inst.program, {8}, ref);
  CHECK(ok.exit == vm::ExitKind::Ok);
  CHECK(ok.classes.in_bounds == 1);
  CHECK(ok.checks.dynamic_checks == 0);
  const vm::RunResult bad = vm::run(inst.program, {9}, ref);
  CHECK(bad.exit == vm::ExitKind::Violation);
  CHECK(bad.classes.out_of_bounds == 1);
}

TEST_CASE("every mode runs the corpus-style programs to the same result") {
  const std::string text = R"(fn @main() -> int {
^entry:
  %a = alloc 100000
  %b = alloc 24
  %p = gep %a, 99992
  store.8 %p, 7
  %q = gep %b, 16
  store.8 %q, 5
  %v = load.8 %p
  %w = load.8 %q
  %s = add %v, %w
  ret %s
}
)";
  for (Mode m : {Mode::Prism, Mode::Pow2, Mode::Prism32}) {
    for (std::uint64_t q : {0ULL, 8ULL, 32ULL}) {
      const vm::RunResult r = run_prism(text, {}, {m, q});
      CHECK(r.exit == vm::ExitKind::Ok);
      CHECK(r.ret == 12);
    }
  }
}

}  // TEST_SUITE
