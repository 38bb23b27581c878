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

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "cli.hpp"

using namespace boundtag;

namespace {

struct Invocation {
  int code = 0;
  std::string out;
  std::string err;
};

Invocation cli_run(std::vector<std::string> args) {
  args.insert(args.begin(), "boundtag");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string corpus_file(const char* name) { return (cli::default_corpus_dir() / name).string(); }

std::filesystem::path temp_file(const char* name) { return std::filesystem::temp_directory_path() / name; }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("linked list at q = 16 runs with no dynamic checks") {
  const auto stats = temp_file("boundtag_cli_ll.json");
  const Invocation r =
      cli_run({"run", corpus_file("linked_list.pir"), "--mode", "prism", "--qpad", "16", "--stats", stats.string(), "--", "-1"});
  CHECK(r.code == cli::kExitOk);
  std::ifstream in(stats);
  const auto j = nlohmann::json::parse(in);
  CHECK(j["dynamic_checks"] == 0);
  CHECK(j["q"] == 16);
}

TEST_CASE("exit codes: bounds 2, escape 3, parse 4, usage 1") {
  CHECK(cli_run({"run", corpus_file("partial_struct.pir"), "--qpad", "0"}).code == cli::kExitBounds);
  CHECK(cli_run({"run", corpus_file("partial_struct.pir"), "--qpad", "48"}).code == cli::kExitOk);
  CHECK(cli_run({"run", corpus_file("nginx.pir"), "--", "4096"}).code == cli::kExitEscape);
  const Invocation bad = cli_run({"run", std::string(BOUNDTAG_TEST_DATA) + "/bad.pir"});
  CHECK(bad.code == cli::kExitParse);
  CHECK(bad.err.find("bad.pir:18:") != std::string::npos);
  CHECK(cli_run({"run", "/nonexistent.pir"}).code == cli::kExitInternal);
  CHECK(cli_run({"run", corpus_file("linked_list.pir"), "--mode", "asan"}).code == cli::kExitInternal);
  CHECK(cli_run({"frobnicate"}).code == cli::kExitInternal);
}

TEST_CASE("violations are reported on stderr and as json") {
  const auto vj = temp_file("boundtag_cli_violation.json");
  const Invocation r =
      cli_run({"run", corpus_file("negative_index.pir"), "--violation-json", vj.string(), "--", "-1"});
  CHECK(r.code == cli::kExitBounds);
  CHECK(r.err.find("lower_bound") != std::string::npos);
  std::ifstream in(vj);
  const auto j = nlohmann::json::parse(in);
  CHECK(j["reason"] == "lower_bound");
  CHECK(j["function"] == "lookup");
}

TEST_CASE("no-opt keeps every check and --opt selects a subset") {
  const auto a = temp_file("boundtag_cli_noopt.json");
  CHECK(cli_run({"instrument", corpus_file("cost_compare.pir"), "--no-opt", "--stats", a.string()}).code == 0);
  std::ifstream ina(a);
  const auto ja = nlohmann::json::parse(ina);
  CHECK(ja["opts"] == "none");
  CHECK(ja["active"] == ja["static_checks_inserted"]);
  const Invocation sub = cli_run({"instrument", corpus_file("cost_compare.pir"), "--qpad", "24", "--opt", "qpad"});
  const auto jb = nlohmann::json::parse(sub.out);
  CHECK(jb["opts"] == "qpad");
  CHECK(jb["elided_by"]["qpad"] == 14);
}

TEST_CASE("trace prints one line per check") {
  const Invocation r = cli_run({"run", corpus_file("loop_hoist.pir"), "--trace"});
  CHECK(r.code == 0);
  CHECK(r.out.find("check #") != std::string::npos);
  CHECK(r.out.find("hoisted") != std::string::npos);
}

TEST_CASE("oracle backend runs the exact-bounds reference") {
  CHECK(cli_run({"run", corpus_file("string_match.pir"), "--backend", "oracle"}).code == cli::kExitBounds);
  CHECK(cli_run({"run", corpus_file("string_match.pir"), "--backend", "oracle", "--mode", "pow2"}).code ==
        cli::kExitOk);
}

TEST_CASE("corpus subcommand") {
  const Invocation one = cli_run({"corpus", "negative_index"});
  CHECK(one.code == 0);
  CHECK(one.out.find("FAIL") == std::string::npos);
  CHECK(cli_run({"corpus", "no_such_case"}).code == cli::kExitInternal);
  CHECK(cli_run({"corpus", "--list"}).out.find("partial_struct") != std::string::npos);
}

TEST_CASE("a wrong expectation makes the corpus fail") {
  const auto dir = std::filesystem::temp_directory_path() / "boundtag_cli_corpus";
  std::filesystem::create_directories(dir);
  std::filesystem::copy_file(corpus_file("partial_struct.pir"), dir / "partial_struct.pir",
                             std::filesystem::copy_options::overwrite_existing);
  std::ofstream(dir / "manifest.json") << R"({"schema": 1, "cases": [{"name": "p", "file": "partial_struct.pir",
    "expect": [{"modes": ["prism"], "q": [0], "outcome": "ok"}]}]})";
  const Invocation r = cli_run({"corpus", "--dir", dir.string()});
  CHECK(r.code != 0);
  CHECK(r.out.find("FAIL p") != std::string::npos);
}

TEST_CASE("fuzz subcommand") {
  CHECK(cli_run({"fuzz", "--seed", "1", "--count", "200"}).code == 0);
  const Invocation empty = cli_run({"fuzz", "--count", "0"});
  CHECK(empty.code == 0);
  CHECK(cli_run({"fuzz", "--seed", "1", "--count", "200", "--one-oob", "--inject-off-by-one"}).code != 0);
  CHECK(cli_run({"fuzz", "--harness", "opt-dual", "--count", "100", "--mode", "pow2"}).code == 0);
  const auto sum = temp_file("boundtag_cli_fuzz.json");
  CHECK(cli_run({"fuzz", "--count", "10", "--summary", sum.string()}).code == 0);
  std::ifstream in(sum);
  CHECK(nlohmann::json::parse(in)["count"] == 10);
}

}  // TEST_SUITE
