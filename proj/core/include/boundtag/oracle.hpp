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

// Exact-bounds ground truth and the differential harness.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "boundtag/heap.hpp"
#include "boundtag/instrument.hpp"
#include "boundtag/vm.hpp"

namespace boundtag::oracle {

enum class AccessClass : std::uint8_t { InBounds, InPadding, OutOfBounds, InvalidEscape };

std::string_view to_string(AccessClass c);

struct ObjectBounds {
  Addr sa = 0;
  Addr ea = 0;             // exclusive
  std::uint64_t q = 0;
  std::uint64_t align = 0;  // Pow2: A, else 0
};

ObjectBounds bounds_of(const AllocationRecord& rec);

// [start, start + size) against the object the access is meant for.
AccessClass classify(Addr start, std::uint64_t size, const ObjectBounds& obj);

// Address-only classification: the first record whose [SA, EA + q) holds
// `start` decides; an access touching no record is OOB.
AccessClass classify(Addr start, std::uint64_t size, const std::vector<AllocationRecord>& records);

// An escaping pointer must stay in [SA, EA].
AccessClass classify_escape(Addr p, const ObjectBounds& obj);

// Accesses a Pow2 check lets through: [SA, SA + A - 1).
bool within_pow2_block(Addr start, std::uint64_t size, const ObjectBounds& obj);

enum class Divergence : std::uint8_t {
  None,
  FalseAbort,       // checked run aborted where the reference did not
  MissedViolation,  // reference aborted, checked run did not (in time)
  ResultMismatch,   // both finished, different return values
  ExitMismatch,     // one of them faulted
};

std::string_view to_string(Divergence d);

struct Verdict {
  vm::ExitKind checked = vm::ExitKind::Ok;
  vm::ExitKind reference = vm::ExitKind::Ok;
  bool agreement = true;
  Divergence divergence = Divergence::None;
  std::uint64_t allowed_divergences = 0;  // tolerated events the checked run let through
  bool early_abort = false;               // checked run aborted first, at a widened/hoisted check
  std::string detail;
};

// `early_sites` are the sites allowed to abort before the reference does.
Verdict compare(const vm::RunResult& checked, const vm::RunResult& reference, const std::vector<int>& early_sites);

struct DifferentialOptions {
  ModeConfig mode;
  OptSet opts = OptSet::all();
  bool inject_upper_off_by_one = false;
  std::uint64_t step_limit = 5'000'000;
};

// Instruments `program` twice: with `opts` for the checked Prism run, with no
// optimizations for the Oracle reference run.
Verdict differential_run(const ir::Program& program, const std::vector<std::int64_t>& inputs,
                         const DifferentialOptions& options);

// Prism run with `opts` against a Prism run without optimizations; same
// acceptance rule as differential_run.
Verdict optimization_dual_run(const ir::Program& program, const std::vector<std::int64_t>& inputs,
                              const DifferentialOptions& options);

}  // namespace boundtag::oracle
