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

#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "boundtag/fuzz.hpp"
#include "boundtag/ir.hpp"
#include "boundtag/stats.hpp"

#ifndef BOUNDTAG_CORPUS_DIR
#define BOUNDTAG_CORPUS_DIR "corpus"
#endif

namespace boundtag::cli {
namespace {

using nlohmann::json;

const std::vector<std::uint64_t> kMatrixQ = {0, 4, 8, 16, 24, 32, 48};
const std::vector<Mode> kAllModes = {Mode::Prism, Mode::Pow2, Mode::Prism32};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text << '\n';
}

Outcome parse_outcome(const std::string& s) {
  if (s == "ok" || s == "miss") return Outcome::Ok;
  if (s == "bounds") return Outcome::Bounds;
  if (s == "escape") return Outcome::Escape;
  throw std::invalid_argument("unknown outcome '" + s + "'");
}

std::string hex(std::uint64_t v) {
  std::ostringstream ss;
  ss << "0x" << std::hex << v;
  return ss.str();
}

void print_violation(std::ostream& err, const vm::ViolationReport& v) {
  err << "violation: " << (v.escape ? "escape" : "bounds") << " check";
  if (v.site >= 0) err << " #" << v.site;
  err << " in @" << v.function << " ^" << v.block << " (line " << v.line << "): " << to_string(v.reason)
      << " ksa=" << hex(v.ksa) << " ptr=" << hex(v.ptr) << " ea=" << hex(v.ea) << " size=" << v.access_size;
  if (!v.detail.empty()) err << " [" << v.detail << "]";
  err << '\n';
}

// Shared --mode/--qpad/--opt/--no-opt flags.
struct ModeFlags {
  std::string mode = "prism";
  std::uint64_t q = 0;
  std::string opt = "all";
  bool no_opt = false;

  void add(CLI::App* app) {
    app->add_option("--mode", mode, "prism | pow2 | prism32")->capture_default_str();
    app->add_option("--qpad", q, "bytes of q-padding")->capture_default_str();
    auto* o = app->add_option("--opt", opt, "comma list of qpad,lower,combine,hoist (or all, none)")
                  ->capture_default_str();
    app->add_flag("--no-opt", no_opt, "disable every optimization")->excludes(o);
  }
  ModeConfig config() const { return {parse_mode(mode), q}; }
  OptSet opts() const { return no_opt ? OptSet::none() : OptSet::parse(opt); }
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// run / instrument ----------------------------------------------------------

struct RunArgs {
  std::string file;
  ModeFlags flags;
  std::string stats;
  std::string violation_json;
  bool trace = false;
  std::string backend = "prism";
  std::vector<std::int64_t> inputs;
};

ir::Program load_program(const std::string& file, std::ostream& err, int& code) {
  try {
    return ir::parse(read_file(file));
  } catch (const ir::ParseError& e) {
    err << file << ":" << e.line() << ":" << e.column() << ": error: " << e.what() << '\n';
    code = kExitParse;
  }
  return {};
}

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  int code = kExitOk;
  ir::Program prog = load_program(a.file, err, code);
  if (code != kExitOk) return code;

  const InstrumentResult inst = instrument(prog, {a.flags.config(), a.flags.opts()});
  vm::RunOptions ro;
  if (a.backend == "oracle") {
    ro = vm::reference_options(inst, a.flags.config());
  } else if (a.backend == "prism") {
    ro.backend = vm::Backend::Prism;
    ro.mode = a.flags.config();
  } else {
    throw UsageError("unknown backend '" + a.backend + "'");
  }
  ro.trace = a.trace;
  const vm::RunResult r = vm::run(inst.program, a.inputs, ro);

  for (const std::string& line : r.trace) out << line << '\n';
  if (!a.stats.empty()) write_file(a.stats, to_json(make_stats(inst, &r)));
  if (!a.violation_json.empty() && r.violation) write_file(a.violation_json, to_json(*r.violation));

  switch (r.exit) {
    case vm::ExitKind::Ok:
      out << "ret " << r.ret << '\n';
      break;
    case vm::ExitKind::Violation:
      print_violation(err, *r.violation);
      break;
    case vm::ExitKind::Fault:
      err << "fault: " << r.fault << '\n';
      break;
  }
  return exit_code(r);
}

int cmd_instrument(const RunArgs& a, bool print_ir, std::ostream& out, std::ostream& err) {
  int code = kExitOk;
  ir::Program prog = load_program(a.file, err, code);
  if (code != kExitOk) return code;
  const InstrumentResult inst = instrument(prog, {a.flags.config(), a.flags.opts()});
  if (print_ir) out << ir::print(inst.program);
  const std::string stats = to_json(make_stats(inst));
  if (!a.stats.empty()) {
    write_file(a.stats, stats);
  } else if (!print_ir) {
    out << stats << '\n';
  }
  return kExitOk;
}

// corpus --------------------------------------------------------------------

struct CorpusArgs {
  std::vector<std::string> names;
  bool all = false;
  bool matrix = false;
  bool list = false;
  std::string dir;
  std::string report;
};

int cmd_corpus(const CorpusArgs& a, std::ostream& out, std::ostream& err) {
  const std::filesystem::path dir = a.dir.empty() ? default_corpus_dir() : std::filesystem::path(a.dir);
  std::vector<CorpusCase> cases = load_manifest(dir / "manifest.json");

  if (a.list) {
    for (const CorpusCase& c : cases) out << c.name << "  " << c.description << '\n';
    return kExitOk;
  }
  if (!a.all && !a.names.empty()) {
    std::vector<CorpusCase> picked;
    for (const std::string& n : a.names) {
      auto it = std::find_if(cases.begin(), cases.end(), [&](const CorpusCase& c) { return c.name == n; });
      if (it == cases.end()) throw UsageError("no corpus case named '" + n + "'");
      picked.push_back(*it);
    }
    cases = std::move(picked);
  }

  json report = {{"schema", 1}, {"cases", json::array()}};
  std::size_t failed = 0;
  std::size_t checked = 0;

  for (const CorpusCase& c : cases) {
    json jc = {{"name", c.name}, {"cells", json::array()}};
    std::map<std::pair<Mode, std::uint64_t>, CaseRun> cache;
    auto get = [&](Mode m, std::uint64_t q) -> const CaseRun& {
      auto key = std::make_pair(m, q);
      auto it = cache.find(key);
      if (it == cache.end()) it = cache.emplace(key, run_case(c, dir, {m, q})).first;
      return it->second;
    };

    for (const Expectation& e : c.expect) {
      for (Mode m : e.modes) {
        for (std::uint64_t q : e.qs) {
          const CaseRun& r = get(m, q);
          const std::string miss = check_expectation(e, r);
          ++checked;
          if (!miss.empty()) ++failed;
          out << (miss.empty() ? "PASS " : "FAIL ") << c.name << " mode=" << to_string(m) << " q=" << q
              << " expect=" << to_string(e.outcome) << " exit=" << r.exit << " checks=" << r.run.checks.dynamic_checks
              << " sa_fetches=" << r.run.checks.sa_fetches;
          if (!miss.empty()) out << "  (" << miss << ")";
          out << '\n';
          jc["cells"].push_back({{"mode", to_string(m)},
                                 {"q", q},
                                 {"expect", to_string(e.outcome)},
                                 {"exit", r.exit},
                                 {"dynamic_checks", r.run.checks.dynamic_checks},
                                 {"sa_fetches", r.run.checks.sa_fetches},
                                 {"pass", miss.empty()}});
        }
      }
    }

    if (a.matrix) {
      out << "  matrix " << c.name << ":\n";
      for (Mode m : kAllModes) {
        out << "    " << to_string(m) << ":";
        std::uint64_t prev = UINT64_MAX;
        bool monotone = true;
        for (std::uint64_t q : kMatrixQ) {
          const CaseRun& r = get(m, q);
          const StatsReport s = make_stats(r.instrumented);
          out << " q" << q << "=" << to_string(outcome_of(r.exit)) << "/" << s.active;
          if (s.active > prev) monotone = false;
          prev = s.active;
        }
        out << (monotone ? "  monotone\n" : "  NOT MONOTONE\n");
        ++checked;
        if (!monotone) ++failed;
      }
    }
    report["cases"].push_back(std::move(jc));
  }

  out << (failed == 0 ? "corpus: all " : "corpus: ") << (checked - failed) << "/" << checked
      << " expectations met\n";
  if (!a.report.empty()) write_file(a.report, report.dump(2));
  if (failed != 0) err << failed << " corpus expectation(s) failed\n";
  return failed == 0 ? kExitOk : kExitInternal;
}

// fuzz ----------------------------------------------------------------------

struct FuzzArgs {
  std::uint64_t seed = 1;
  std::uint64_t count = 100;
  ModeFlags flags;
  std::string harness = "differential";
  std::string repro_dir;
  std::string summary;
  bool inject = false;
  bool in_bounds_only = false;
  bool one_oob = false;
  unsigned threads = 0;
};

int cmd_fuzz(const FuzzArgs& a, std::ostream& out, std::ostream& err) {
  fuzz::FuzzConfig cfg;
  cfg.seed = a.seed;
  cfg.count = a.count;
  cfg.mode = a.flags.config();
  cfg.opts = a.flags.opts();
  cfg.inject_upper_off_by_one = a.inject;
  cfg.threads = a.threads;
  cfg.gen.force_in_bounds = a.in_bounds_only;
  cfg.gen.force_one_oob = a.one_oob;
  if (a.harness == "differential") {
    cfg.harness = fuzz::Harness::Differential;
  } else if (a.harness == "opt-dual") {
    cfg.harness = fuzz::Harness::OptDual;
  } else {
    throw UsageError("unknown harness '" + a.harness + "'");
  }
  if (!a.repro_dir.empty()) {
    std::filesystem::create_directories(a.repro_dir);
    cfg.repro_dir = a.repro_dir;
  }

  const fuzz::Summary s = fuzz::run(cfg);
  const std::string j = fuzz::to_json(s);
  if (!a.summary.empty()) write_file(a.summary, j);
  out << "fuzz " << s.harness << " mode=" << s.mode << " q=" << s.q << " opts=" << s.opts << " seed=" << s.seed
      << " count=" << s.count << ": agreements=" << s.agreements << " allowed=" << s.allowed_divergences
      << " disallowed=" << s.disallowed << " violations=" << s.checked_violations << "/" << s.reference_violations
      << " early=" << s.early_aborts << " oob_detected=" << s.planned_oob_detected << "/" << s.planned_oob
      << " unelidable_detected=" << s.unelidable_oob_detected << "/" << s.unelidable_oob << '\n';
  for (const fuzz::Failure& f : s.failures) {
    err << "divergence #" << f.index << " (seed " << f.seed << "): " << f.divergence << ": " << f.detail;
    if (!f.repro.empty()) err << " -> " << f.repro;
    err << '\n';
  }
  return s.disallowed == 0 ? kExitOk : kExitInternal;
}

}  // namespace

int exit_code(const vm::RunResult& r) {
  switch (r.exit) {
    case vm::ExitKind::Ok:
      return kExitOk;
    case vm::ExitKind::Violation:
      return r.violation && r.violation->escape ? kExitEscape : kExitBounds;
    case vm::ExitKind::Fault:
      return kExitInternal;
  }
  return kExitInternal;
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Ok:
      return "ok";
    case Outcome::Bounds:
      return "bounds";
    case Outcome::Escape:
      return "escape";
  }
  return "?";
}

Outcome outcome_of(int code) {
  switch (code) {
    case kExitOk:
      return Outcome::Ok;
    case kExitBounds:
      return Outcome::Bounds;
    case kExitEscape:
      return Outcome::Escape;
    default:
      throw std::invalid_argument("exit code " + std::to_string(code) + " is not a corpus outcome");
  }
}

std::filesystem::path default_corpus_dir() { return BOUNDTAG_CORPUS_DIR; }

std::vector<CorpusCase> load_manifest(const std::filesystem::path& manifest) {
  const json j = json::parse(read_file(manifest));
  if (j.value("schema", 0) != 1) throw std::runtime_error(manifest.string() + ": unsupported schema");
  std::vector<CorpusCase> out;
  for (const json& jc : j.at("cases")) {
    CorpusCase c;
    c.name = jc.at("name").get<std::string>();
    c.file = jc.at("file").get<std::string>();
    c.description = jc.value("description", "");
    c.inputs = jc.value("inputs", std::vector<std::int64_t>{});
    c.forward_traversal = jc.value("forward_traversal", false);
    for (const json& je : jc.at("expect")) {
      Expectation e;
      for (const json& m : je.at("modes")) e.modes.push_back(parse_mode(m.get<std::string>()));
      e.qs = je.at("q").get<std::vector<std::uint64_t>>();
      e.outcome = parse_outcome(je.at("outcome").get<std::string>());
      if (je.contains("ret")) e.ret = je["ret"].get<std::int64_t>();
      if (je.contains("dynamic_checks")) e.dynamic_checks = je["dynamic_checks"].get<std::uint64_t>();
      if (je.contains("sa_fetches")) e.sa_fetches = je["sa_fetches"].get<std::uint64_t>();
      if (je.contains("min_sa_fetches")) e.min_sa_fetches = je["min_sa_fetches"].get<std::uint64_t>();
      c.expect.push_back(std::move(e));
    }
    out.push_back(std::move(c));
  }
  return out;
}

CaseRun run_case(const CorpusCase& c, const std::filesystem::path& dir, ModeConfig mode, OptSet opts, bool trace) {
  const ir::Program prog = ir::parse(read_file(dir / c.file));
  CaseRun r{instrument(prog, {mode, opts}), {}, kExitOk};
  vm::RunOptions ro;
  ro.mode = mode;
  ro.trace = trace;
  r.run = vm::run(r.instrumented.program, c.inputs, ro);
  r.exit = exit_code(r.run);
  return r;
}

std::string check_expectation(const Expectation& e, const CaseRun& r) {
  std::vector<std::string> miss;
  if (r.exit == kExitInternal) {
    miss.push_back("fault: " + r.run.fault);
  } else if (outcome_of(r.exit) != e.outcome) {
    miss.push_back("outcome " + std::string(to_string(outcome_of(r.exit))));
  }
  if (e.ret && r.run.exit == vm::ExitKind::Ok && r.run.ret != *e.ret) {
    miss.push_back("ret " + std::to_string(r.run.ret) + " != " + std::to_string(*e.ret));
  }
  if (e.dynamic_checks && r.run.checks.dynamic_checks != *e.dynamic_checks) {
    miss.push_back("dynamic_checks " + std::to_string(r.run.checks.dynamic_checks) +
                   " != " + std::to_string(*e.dynamic_checks));
  }
  if (e.sa_fetches && r.run.checks.sa_fetches != *e.sa_fetches) {
    miss.push_back("sa_fetches " + std::to_string(r.run.checks.sa_fetches) + " != " + std::to_string(*e.sa_fetches));
  }
  if (e.min_sa_fetches && r.run.checks.sa_fetches < *e.min_sa_fetches) {
    miss.push_back("sa_fetches " + std::to_string(r.run.checks.sa_fetches) + " < " +
                   std::to_string(*e.min_sa_fetches));
  }
  if (r.run.checks.sa_fetches != r.run.fetches_below_ksa) miss.push_back("sa_fetch accounting");
  std::string s;
  for (const std::string& m : miss) s += (s.empty() ? "" : "; ") + m;
  return s;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"boundtag: tagged-pointer bounds checking on a small SSA IR"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "boundtag 0.1.0");

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "instrument and execute a .pir program");
  run->add_option("file", run_args.file, ".pir program")->required();
  run_args.flags.add(run);
  run->add_option("--stats", run_args.stats, "write stats JSON to this path");
  run->add_option("--violation-json", run_args.violation_json, "write the violation report JSON to this path");
  run->add_flag("--trace", run_args.trace, "print one line per executed check");
  run->add_option("--backend", run_args.backend, "prism | oracle")->capture_default_str();
  run->add_option("inputs", run_args.inputs, "integer arguments of @main");

  RunArgs inst_args;
  bool print_ir = false;
  auto* inst = app.add_subcommand("instrument", "instrument a .pir program and report its check sites");
  inst->add_option("file", inst_args.file, ".pir program")->required();
  inst_args.flags.add(inst);
  inst->add_option("--stats", inst_args.stats, "write stats JSON to this path");
  inst->add_flag("--print", print_ir, "print the instrumented program");

  CorpusArgs corpus_args;
  auto* corpus = app.add_subcommand("corpus", "run the bundled bug corpus against its expectations");
  corpus->add_option("names", corpus_args.names, "case names (default: all)");
  corpus->add_flag("--all", corpus_args.all, "run every case");
  corpus->add_flag("--matrix", corpus_args.matrix, "also sweep every mode over q in {0,4,8,16,24,32,48}");
  corpus->add_flag("--list", corpus_args.list, "list cases");
  corpus->add_option("--dir", corpus_args.dir, "corpus directory holding manifest.json");
  corpus->add_option("--report", corpus_args.report, "write a JSON report to this path");

  FuzzArgs fuzz_args;
  auto* fz = app.add_subcommand("fuzz", "differential fuzzing against the exact-bounds oracle");
  fz->add_option("--seed", fuzz_args.seed, "base seed")->capture_default_str();
  fz->add_option("--count", fuzz_args.count, "number of generated programs")->capture_default_str();
  fuzz_args.flags.add(fz);
  fz->add_option("--harness", fuzz_args.harness, "differential | opt-dual")->capture_default_str();
  fz->add_option("--repro-dir", fuzz_args.repro_dir, "write failing programs here");
  fz->add_option("--summary", fuzz_args.summary, "write the summary JSON to this path");
  fz->add_option("--threads", fuzz_args.threads, "worker threads (0: all cores)");
  fz->add_flag("--inject-off-by-one", fuzz_args.inject, "mutate the upper-bound predicate (harness self-test)");
  auto* ib = fz->add_flag("--in-bounds-only", fuzz_args.in_bounds_only, "generate no OOB operations");
  fz->add_flag("--one-oob", fuzz_args.one_oob, "place exactly one OOB operation per program")->excludes(ib);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << (e.get_name() == "CallForVersion" ? e.what() : app.help()) << '\n';
      return kExitOk;
    }
    err << e.what() << '\n';
    return kExitInternal;
  }

  try {
    if (*run) return cmd_run(run_args, out, err);
    if (*inst) return cmd_instrument(inst_args, print_ir, out, err);
    if (*corpus) return cmd_corpus(corpus_args, out, err);
    if (*fz) return cmd_fuzz(fuzz_args, out, err);
  } catch (const ir::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace boundtag::cli
