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

#include "boundtag/fuzz.hpp"
#include "boundtag/ir.hpp"

using namespace boundtag;

TEST_SUITE("fuzz") {

TEST_CASE("generation is a pure function of the seed") {
  const auto a = fuzz::generate(99);
  const auto b = fuzz::generate(99);
  CHECK(a.text == b.text);
  CHECK(a.inputs == b.inputs);
  CHECK(fuzz::generate(100).text != a.text);
  CHECK(fuzz::program_seed(1, 0) != fuzz::program_seed(1, 1));
  CHECK(fuzz::program_seed(1, 0) != fuzz::program_seed(2, 0));
}

TEST_CASE("generated programs parse and validate") {
  for (std::uint64_t i = 0; i < 500; ++i) {
    const auto g = fuzz::generate(fuzz::program_seed(5, i));
    CHECK_NOTHROW(ir::parse(g.text));
    CHECK(g.inputs.size() == 2);
  }
}

TEST_CASE("generator switches honour in-bounds and one-OOB requests") {
  fuzz::GeneratorConfig in;
  in.force_in_bounds = true;
  fuzz::GeneratorConfig one;
  one.force_one_oob = true;
  for (std::uint64_t i = 0; i < 200; ++i) {
    CHECK_FALSE(fuzz::generate(i, in).planned_oob);
    const auto g = fuzz::generate(i, one);
    CHECK(g.planned_oob);
    CHECK_FALSE(g.oob_kind.empty());
  }
}

TEST_CASE("in-bounds programs never abort under any mode") {
  for (Mode m : {Mode::Prism, Mode::Pow2, Mode::Prism32}) {
    fuzz::FuzzConfig c;
    c.seed = 17;
    c.count = 150;
    c.mode = {m, 8};
    c.gen.force_in_bounds = true;
    c.threads = 2;
    const fuzz::Summary s = fuzz::run(c);
    CHECK(s.disallowed == 0);
    CHECK(s.checked_violations == 0);
    CHECK(s.reference_violations == 0);
  }
}

TEST_CASE("every planned OOB is aborted in prism at q = 0") {
  fuzz::FuzzConfig c;
  c.seed = 23;
  c.count = 200;
  c.gen.force_one_oob = true;
  const fuzz::Summary s = fuzz::run(c);
  CHECK(s.disallowed == 0);
  CHECK(s.planned_oob == 200);
  CHECK(s.planned_oob_detected == 200);
}

TEST_CASE("the harness notices an off-by-one predicate") {
  fuzz::FuzzConfig c;
  c.seed = 1;
  c.count = 300;
  c.gen.force_one_oob = true;
  c.inject_upper_off_by_one = true;
  const fuzz::Summary s = fuzz::run(c);
  CHECK(s.disallowed > 0);
  REQUIRE_FALSE(s.failures.empty());
  CHECK(s.failures[0].divergence == "missed_violation");
}

TEST_CASE("an empty run has an empty summary") {
  fuzz::FuzzConfig c;
  c.count = 0;
  const fuzz::Summary s = fuzz::run(c);
  CHECK(s.agreements == 0);
  CHECK(s.failures.empty());
  const auto j = nlohmann::json::parse(fuzz::to_json(s));
  CHECK(j["schema"] == 1);
  CHECK(j["count"] == 0);
}

TEST_CASE("results do not depend on the thread count") {
  fuzz::FuzzConfig c;
  c.seed = 4;
  c.count = 120;
  c.threads = 1;
  const fuzz::Summary one = fuzz::run(c);
  c.threads = 4;
  const fuzz::Summary four = fuzz::run(c);
  CHECK(fuzz::to_json(one) == fuzz::to_json(four));
}

}  // TEST_SUITE
