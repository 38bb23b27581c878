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

// Static and dynamic check statistics, serialized as versioned JSON.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "boundtag/instrument.hpp"
#include "boundtag/vm.hpp"

namespace boundtag {

inline constexpr int kStatsSchema = 1;

struct ElidedCounts {
  std::uint64_t qpad = 0;
  std::uint64_t combine = 0;
  std::uint64_t dominance = 0;
  std::uint64_t hoist = 0;

  std::uint64_t total() const { return qpad + combine + dominance + hoist; }
};

struct SiteRow {
  int id = -1;
  std::string kind;
  std::string status;
  std::string function;
  std::string ksa;
  std::string ptr;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  std::string terms;  // "" for constant windows
  int covered_by = -1;
  bool widened = false;
  bool guarded = false;
  bool is_static = false;
};

struct RunSummary {
  std::string exit;
  std::int64_t ret = 0;
  std::uint64_t dynamic_checks = 0;
  std::uint64_t sa_fetches = 0;
  double sa_fetch_fraction = 0.0;
  std::uint64_t violations = 0;
  std::optional<vm::ViolationReport> violation;
  std::string fault;
};

struct StatsReport {
  int schema = kStatsSchema;
  std::string mode;
  std::uint64_t q = 0;
  std::string opts;
  std::uint64_t static_checks_inserted = 0;  // every site, hoisted ones included
  std::uint64_t active = 0;                  // sites that execute a check
  std::uint64_t active_access = 0;
  ElidedCounts elided_by;
  std::uint64_t lower_bound = 0;  // active sites running the upper half only
  std::optional<RunSummary> run;
  std::vector<SiteRow> sites;
};

StatsReport make_stats(const InstrumentResult& result, const vm::RunResult* run = nullptr);
std::string to_json(const StatsReport& report, int indent = 2);
std::string to_json(const vm::ViolationReport& v, int indent = 2);

// Sites of `kind` in function `fn` ("" for all functions) that execute a check.
std::size_t count_active(const InstrumentResult& result, std::string_view fn, SiteKind kind);

}  // namespace boundtag
