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

// Command-line driver: run, instrument, corpus and fuzz subcommands.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "boundtag/instrument.hpp"
#include "boundtag/tagging.hpp"
#include "boundtag/vm.hpp"

namespace boundtag::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;  // faults, I/O and usage errors
inline constexpr int kExitBounds = 2;
inline constexpr int kExitEscape = 3;
inline constexpr int kExitParse = 4;

int exit_code(const vm::RunResult& r);

// Corpus --------------------------------------------------------------------

enum class Outcome : std::uint8_t { Ok, Bounds, Escape };

std::string_view to_string(Outcome o);
Outcome outcome_of(int exit_code);  // throws std::invalid_argument for 1 and 4

struct Expectation {
  std::vector<Mode> modes;
  std::vector<std::uint64_t> qs;
  Outcome outcome = Outcome::Ok;
  std::optional<std::int64_t> ret;
  std::optional<std::uint64_t> dynamic_checks;
  std::optional<std::uint64_t> sa_fetches;
  std::optional<std::uint64_t> min_sa_fetches;
};

struct CorpusCase {
  std::string name;
  std::string file;
  std::string description;
  std::vector<std::int64_t> inputs;
  std::vector<Expectation> expect;
  bool forward_traversal = false;  // member of the SA-fetch-free set
};

std::vector<CorpusCase> load_manifest(const std::filesystem::path& manifest);

// Directory of the bundled corpus, as configured at build time.
std::filesystem::path default_corpus_dir();

struct CaseRun {
  InstrumentResult instrumented;
  vm::RunResult run;
  int exit = kExitOk;
};

CaseRun run_case(const CorpusCase& c, const std::filesystem::path& dir, ModeConfig mode, OptSet opts = OptSet::all(),
                 bool trace = false);

// Mismatches of one run against one expectation, "" when it holds.
std::string check_expectation(const Expectation& e, const CaseRun& r);

// Entry point with explicit streams; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace boundtag::cli
