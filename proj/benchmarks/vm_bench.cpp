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


#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>
#include <string>

#include "boundtag/instrument.hpp"
#include "boundtag/ir.hpp"
#include "boundtag/vm.hpp"

namespace {

using namespace boundtag;

ir::Program load(const char* name) {
  std::ifstream in(std::string(BOUNDTAG_CORPUS_DIR) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ir::parse(ss.str());
}

// Whole-program interpretation of the 1000-node list walk; Range(0) is q.
void BM_LinkedListRun(benchmark::State& state) {
  const ModeConfig mode{Mode::Prism, static_cast<std::uint64_t>(state.range(0))};
  const InstrumentResult r = instrument(load("linked_list.pir"), {mode, OptSet::all()});
  vm::RunOptions o;
  o.mode = mode;
  std::uint64_t checks = 0;
  for (auto _ : state) {
    const vm::RunResult run = vm::run(r.program, {-1}, o);
    checks = run.checks.dynamic_checks;
    benchmark::DoNotOptimize(run.ret);
  }
  state.counters["dynamic_checks"] = static_cast<double>(checks);
}
BENCHMARK(BM_LinkedListRun)->Arg(0)->Arg(8)->Arg(16)->Unit(benchmark::kMicrosecond);

void BM_Instrument(benchmark::State& state) {
  const ir::Program p = load("cost_compare.pir");
  for (auto _ : state) {
    benchmark::DoNotOptimize(instrument(p, {{Mode::Prism, 8}, OptSet::all()}).sites.size());
  }
}
BENCHMARK(BM_Instrument)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
