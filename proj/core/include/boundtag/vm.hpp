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

// Interpreter for instrumented programs.
//
// One interpreter, two check backends. The Prism backend executes `check`
// instructions with the tag predicates and lets every other access through.
// The Oracle backend ignores access checks and instead classifies every real
// load, store and escape against exact object bounds; it is the reference
// executor for differential runs.
//
// Pointer values carry a provenance object id next to their bits. Pointers
// stored to memory keep theirs in a shadow map keyed by address, so the
// oracle knows the intended referent of every address it sees.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "boundtag/checks.hpp"
#include "boundtag/instrument.hpp"
#include "boundtag/ir.hpp"
#include "boundtag/tagging.hpp"

namespace boundtag::vm {

enum class Backend : std::uint8_t { Prism, Oracle };

enum class ExitKind : std::uint8_t { Ok, Violation, Fault };

std::string_view to_string(ExitKind k);
std::string_view to_string(Backend b);

struct ViolationReport {
  int site = -1;  // -1 for extern contract violations
  AbortReason reason = AbortReason::None;
  bool escape = false;
  std::uint64_t ksa = 0;
  std::uint64_t ptr = 0;
  std::uint64_t ea = 0;
  std::uint64_t access_size = 0;
  std::string function;
  std::string block;
  int index = -1;
  int line = 0;
  std::uint64_t clock = 0;
  std::string detail;
};

struct RunOptions {
  Backend backend = Backend::Prism;
  ModeConfig mode;
  std::uint64_t step_limit = 50'000'000;
  std::size_t max_call_depth = 4096;
  bool trace = false;
  // Oracle backend: sites whose IN_PADDING accesses are tolerated.
  std::vector<int> padding_permits;
  // Oracle backend, Pow2 mode: tolerate accesses inside [SA, SA + A - 1).
  bool pow2_permits = true;
  // Mutation hook forwarded to the checker.
  bool inject_upper_off_by_one = false;
};

struct ClassCounts {
  std::uint64_t in_bounds = 0;
  std::uint64_t in_padding = 0;
  std::uint64_t out_of_bounds = 0;
  std::uint64_t invalid_escapes = 0;
};

struct RunResult {
  ExitKind exit = ExitKind::Ok;
  std::int64_t ret = 0;
  std::optional<ViolationReport> violation;
  std::string fault;

  // Executed instructions other than `check`; identical across check
  // configurations of the same program, so it orders events between runs.
  std::uint64_t clock = 0;
  CheckStats checks;
  std::uint64_t fetches_below_ksa = 0;  // SA fetches with raw(ptr) < raw(ksa)
  std::uint64_t memory_accesses = 0;
  ClassCounts classes;                 // oracle view of every executed access/escape
  std::vector<std::uint64_t> permitted;  // Oracle backend: clocks of tolerated events
  std::vector<std::string> trace;
};

// Runs @main. `inputs` fill its int parameters; missing ones are zero.
// Throws std::invalid_argument when there are more inputs than parameters.
RunResult run(const ir::Program& program, const std::vector<std::int64_t>& inputs, const RunOptions& options);

// Reference executor for an instrumentation result: Oracle backend with the
// padding permits implied by the result's ElidedByQ sites.
RunOptions reference_options(const InstrumentResult& result, ModeConfig mode);

}  // namespace boundtag::vm
