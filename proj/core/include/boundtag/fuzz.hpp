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

// Random closed programs and the differential campaign over them.
//
// Programs are generated as .pir text (so every failure is its own repro),
// with fixed inputs chosen by the generator. Each program holds at most one
// planned out-of-bounds operation, always placed on the straight-line path
// of @main so that it executes unless an earlier check aborts.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "boundtag/instrument.hpp"
#include "boundtag/oracle.hpp"

namespace boundtag::fuzz {

inline constexpr int kFuzzSchema = 1;

struct GeneratorConfig {
  double oob_rate = 0.35;  // chance that a program holds one OOB operation
  bool force_in_bounds = false;
  bool force_one_oob = false;
  int min_statements = 4;
  int max_statements = 12;
};

struct GeneratedProgram {
  std::string text;
  std::vector<std::int64_t> inputs;
  bool planned_oob = false;
  std::string oob_kind;  // statement that carries the OOB operation
  // Variable-index access or escape: no q elides its check.
  bool oob_unelidable = false;
};

GeneratedProgram generate(std::uint64_t seed, const GeneratorConfig& cfg = {});

// Seed of program `index` in a campaign started from `seed`.
std::uint64_t program_seed(std::uint64_t seed, std::uint64_t index);

enum class Harness : std::uint8_t {
  Differential,  // checked Prism run vs Oracle reference
  OptDual,       // optimized Prism run vs unoptimized Prism run
};

struct FuzzConfig {
  std::uint64_t seed = 1;
  std::uint64_t count = 100;
  ModeConfig mode;
  OptSet opts = OptSet::all();
  GeneratorConfig gen;
  Harness harness = Harness::Differential;
  bool inject_upper_off_by_one = false;
  unsigned threads = 0;  // 0: hardware concurrency
  std::optional<std::string> repro_dir;
  std::uint64_t step_limit = 2'000'000;
};

struct Failure {
  std::uint64_t index = 0;
  std::uint64_t seed = 0;
  std::string divergence;
  std::string detail;
  std::string repro;  // path of the written .pir, if any
};

struct Summary {
  std::uint64_t seed = 0;
  std::uint64_t count = 0;
  std::string mode;
  std::uint64_t q = 0;
  std::string opts;
  std::string harness;
  std::uint64_t agreements = 0;
  std::uint64_t disallowed = 0;
  std::uint64_t allowed_divergences = 0;
  std::uint64_t checked_violations = 0;
  std::uint64_t reference_violations = 0;
  std::uint64_t early_aborts = 0;
  std::uint64_t faults = 0;
  std::uint64_t planned_oob = 0;
  std::uint64_t planned_oob_detected = 0;  // checked run aborted
  std::uint64_t unelidable_oob = 0;
  std::uint64_t unelidable_oob_detected = 0;
  std::vector<Failure> failures;
};

Summary run(const FuzzConfig& cfg);
std::string to_json(const Summary& s, int indent = 2);

}  // namespace boundtag::fuzz
