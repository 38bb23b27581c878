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

#include <json.hpp>

#include "boundtag/stats.hpp"
#include "support.hpp"

using namespace boundtag;

namespace {

const char* kProgram = R"(fn @main(%i: int) -> int {
^entry:
  %a = alloc 64
  %b = gep %a, 8
  %v = load.8 %b
  %c = gep %a, %i*8
  %w = load.8 %c
  %s = add %v, %w
  ret %s
}
)";

}  // namespace

TEST_SUITE("stats") {

TEST_CASE("inserted equals active plus every elision") {
  for (std::uint64_t q : {0ULL, 8ULL, 16ULL, 64ULL}) {
    const InstrumentResult r = instrument(ir::parse(kProgram), {{Mode::Prism, q}, OptSet::all()});
    const StatsReport s = make_stats(r);
    CHECK(s.static_checks_inserted == r.sites.size());
    CHECK(s.static_checks_inserted == s.active + s.elided_by.total());
    CHECK(s.sites.size() == r.sites.size());
  }
}

TEST_CASE("json carries the schema, counters and per-site rows") {
  const InstrumentResult r = instrument(ir::parse(kProgram), {{Mode::Prism, 16}, OptSet::all()});
  vm::RunOptions o;
  o.mode = {Mode::Prism, 16};
  const vm::RunResult run = vm::run(r.program, {3}, o);
  const auto j = nlohmann::json::parse(to_json(make_stats(r, &run)));
  CHECK(j["schema"] == kStatsSchema);
  CHECK(j["mode"] == "prism");
  CHECK(j["q"] == 16);
  CHECK(j["elided_by"]["qpad"] == 1);
  CHECK(j["dynamic_checks"] == 1);
  CHECK(j["sa_fetches"] == 0);
  CHECK(j["sa_fetch_fraction"] == 0.0);
  CHECK(j["exit"] == "ok");
  CHECK(j["sites"].size() == 2);
  CHECK(j["sites"][0]["status"] == "elided_by_q");
}

TEST_CASE("sa_fetch_fraction divides by max(1, dynamic_checks)") {
  const InstrumentResult r = instrument(ir::parse(kProgram), {{Mode::Prism, 0}, OptSet::all()});
  vm::RunOptions o;
  const vm::RunResult run = vm::run(r.program, {-1}, o);
  REQUIRE(run.exit == vm::ExitKind::Violation);
  const StatsReport s = make_stats(r, &run);
  REQUIRE(s.run.has_value());
  CHECK(s.run->violations == 1);
  CHECK(s.run->sa_fetch_fraction ==
        doctest::Approx(static_cast<double>(s.run->sa_fetches) / std::max<std::uint64_t>(1, s.run->dynamic_checks)));
  const auto j = nlohmann::json::parse(to_json(*run.violation));
  CHECK(j["reason"] == "lower_bound");
}

}  // TEST_SUITE
