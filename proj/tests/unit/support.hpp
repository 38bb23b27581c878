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

// Shared helpers for the unit tests.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "boundtag/instrument.hpp"
#include "boundtag/ir.hpp"
#include "boundtag/stats.hpp"
#include "boundtag/vm.hpp"

namespace boundtag::testing {

inline ir::Program parse(const std::string& text) { return ir::parse(text); }

inline vm::RunResult run_prism(const std::string& text, std::vector<std::int64_t> inputs = {},
                               ModeConfig mode = {}, OptSet opts = OptSet::all()) {
  const InstrumentResult r = instrument(ir::parse(text), {mode, opts});
  vm::RunOptions o;
  o.mode = mode;
  return vm::run(r.program, inputs, o);
}

inline std::size_t active_access(const std::string& text, std::uint64_t q, const std::string& fn) {
  return count_active(instrument(ir::parse(text), {{Mode::Prism, q}, OptSet::all()}), fn, SiteKind::Access);
}

}  // namespace boundtag::testing
