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

// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "boundtag/checks.hpp"
#include "boundtag/fuzz.hpp"
#include "boundtag/heap.hpp"
#include "boundtag/instrument.hpp"
#include "boundtag/ir.hpp"
#include "boundtag/stats.hpp"
#include "boundtag/tagging.hpp"
#include "boundtag/vm.hpp"
#include "cli.hpp"

using namespace boundtag;

namespace {

const std::vector<Mode> kModes = {Mode::Prism, Mode::Pow2, Mode::Prism32};

struct Verdict {
  bool pass = true;
  std::string detail;

  // Records the first failure only; later ones rarely add information.
  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 1 ---------------------------------------------------------------------------

std::vector<std::uint64_t> sample_sizes(std::size_t n) {
  std::mt19937_64 rng(0x5eed);
  std::vector<std::uint64_t> sizes;
  sizes.reserve(n);
  // Fixed edges first, then small, boundary and log-uniform large draws.
  for (std::uint64_t s : {1ULL, 2ULL, 7ULL, 8ULL, 65527ULL, 65528ULL, 65529ULL, 65536ULL, 1ULL << 28}) sizes.push_back(s);
  std::uniform_int_distribution<std::uint64_t> small(1, 65536 - 8);
  std::uniform_int_distribution<std::int64_t> edge(-64, 64);
  std::uniform_int_distribution<std::uint64_t> qpick(0, 3);
  std::uniform_real_distribution<double> lg(16.0, 28.0);
  while (sizes.size() < n) {
    switch (sizes.size() % 4) {
      case 0:
      case 1:
        sizes.push_back(small(rng));
        break;
      case 2:
        // Boundary for the q values used below: 65536 - q - 8.
        sizes.push_back(static_cast<std::uint64_t>(65536 - 8 - 8 * static_cast<std::int64_t>(qpick(rng)) + edge(rng)));
        break;
      default:
        sizes.push_back(std::min<std::uint64_t>(1ULL << 28, static_cast<std::uint64_t>(std::exp2(lg(rng)))));
        break;
    }
  }
  return sizes;
}

Verdict encoding_roundtrip(std::size_t n, std::string& summary) {
  Verdict v;
  const auto sizes = sample_sizes(n);
  std::mt19937_64 rng(42);
  std::size_t checked = 0;
  std::size_t large = 0;
  for (Mode mode : kModes) {
    std::unique_ptr<SimMemory> mem;
    std::unique_ptr<Heap> heap;
    std::size_t since_reset = 0;
    std::size_t qi = 0;
    auto reset = [&] {
      mem = std::make_unique<SimMemory>();
      const std::uint64_t q = std::uint64_t{8} * (qi++ % 4);
      heap = std::make_unique<Heap>(ModeConfig{mode, q}, *mem);
      since_reset = 0;
    };
    reset();
    for (std::uint64_t size : sizes) {
      if (since_reset++ >= 1000) reset();
      TaggedAddress p;
      try {
        p = heap->alloc(size);
      } catch (const AllocError&) {
        reset();
        p = heap->alloc(size);
      }
      const Addr sa = strip_tag(p, mode);
      const AllocationRecord* rec = heap->find_by_sa(sa);
      if (rec == nullptr) {
        v.fail(std::string(to_string(mode)) + ": no record for size " + std::to_string(size));
        continue;
      }
      // Independent truth: EA is one past the requested bytes.
      const Addr ea = sa + size;
      if (rec->ea != ea) v.fail(std::string(to_string(mode)) + ": record EA wrong for size " + std::to_string(size));
      std::uniform_int_distribution<Addr> inner(sa, ea);
      const Addr probes[] = {sa, ea, inner(rng), inner(rng)};
      for (Addr raw : probes) {
        const TaggedAddress t = raw == sa ? p : tag_pointer(raw, *rec);
        bool ok = true;
        switch (mode) {
          case Mode::Prism:
            ok = compute_ea(t) == ea;
            break;
          case Mode::Prism32:
            ok = decode_ea32(t) == ea;
            break;
          case Mode::Pow2: {
            const std::uint64_t a = pow2_aligned_size(t);
            const Addr r = strip_tag(t, Mode::Pow2);
            // The block end bounds EA from above by exactly A - size.
            ok = a == next_pow2(size + 1) && sa % a == 0 && (r & ~(a - 1)) == sa && sa + a - ea == a - size &&
                 (raw == sa + a ? true : r == raw);
            break;
          }
        }
        if (!ok) {
          std::ostringstream os;
          os << to_string(mode) << ": size " << size << " ptr SA+" << (raw - sa) << " decodes wrongly";
          v.fail(os.str());
        }
        ++checked;
      }
      if (mode == Mode::Prism && rec->frame_class == FrameClass::Large) ++large;
    }
  }
  summary = std::to_string(sizes.size()) + " sizes x 3 modes (" + std::to_string(large) + " prism-large), " +
            std::to_string(checked) + " decodes exact";
  return v;
}

// 2, 3 --------------------------------------------------------------------------

Verdict golden_counts(const char* file, const char* fn, std::vector<std::pair<std::uint64_t, std::size_t>> expect,
                      std::string& summary) {
  Verdict v;
  const ir::Program p = ir::parse(read_file(cli::default_corpus_dir() / file));
  for (auto [q, want] : expect) {
    const InstrumentResult r = instrument(p, {{Mode::Prism, q}, OptSet::all()});
    const std::size_t got = count_active(r, fn, SiteKind::Access);
    summary += (summary.empty() ? "" : " ") + ("q" + std::to_string(q) + "=" + std::to_string(got));
    if (got != want) v.fail("q=" + std::to_string(q) + ": " + std::to_string(got) + " active, want " + std::to_string(want));
  }
  return v;
}

Verdict linked_list(std::string& summary) {
  Verdict v = golden_counts("linked_list.pir", "search_and_update", {{0, 3}, {4, 2}, {8, 1}, {16, 0}}, summary);
  const ir::Program p = ir::parse(read_file(cli::default_corpus_dir() / "linked_list.pir"));
  const ModeConfig mode{Mode::Prism, 16};
  const InstrumentResult r = instrument(p, {mode, OptSet::all()});
  vm::RunOptions o;
  o.mode = mode;
  const vm::RunResult run = vm::run(r.program, {-1}, o);
  if (run.exit != vm::ExitKind::Ok) v.fail("1000-node traversal did not complete");
  if (run.checks.dynamic_checks != 0) v.fail(std::to_string(run.checks.dynamic_checks) + " dynamic checks at q=16");
  summary += ", dynamic checks at q16 = " + std::to_string(run.checks.dynamic_checks) + " over " +
             std::to_string(run.memory_accesses) + " accesses";
  return v;
}

// 4, 6, 8 ---------------------------------------------------------------------------

struct Corpus {
  std::filesystem::path dir = cli::default_corpus_dir();
  std::vector<cli::CorpusCase> cases = cli::load_manifest(dir / "manifest.json");

  const cli::CorpusCase& get(const std::string& name) const {
    for (const auto& c : cases) {
      if (c.name == name) return c;
    }
    throw std::runtime_error("corpus case " + name + " missing");
  }

  int exit_of(const std::string& name, ModeConfig mode, std::vector<std::int64_t> inputs = {}) const {
    cli::CorpusCase c = get(name);
    if (!inputs.empty()) c.inputs = inputs;
    return cli::run_case(c, dir, mode).exit;
  }
};

Verdict bug_corpus(const Corpus& corpus, std::string& summary) {
  Verdict v;
  auto want = [&](const std::string& name, ModeConfig mode, int code, std::vector<std::int64_t> inputs = {}) {
    const int got = corpus.exit_of(name, mode, inputs);
    if (got != code) {
      v.fail(name + " " + std::string(to_string(mode.mode)) + " q=" + std::to_string(mode.q) + ": exit " +
             std::to_string(got) + ", want " + std::to_string(code));
    }
  };
  for (std::uint64_t q : {0, 8, 16, 32}) want("partial_struct", {Mode::Prism, q}, cli::kExitBounds);
  want("partial_struct", {Mode::Prism, 48}, cli::kExitOk);
  for (std::uint64_t q : {0, 4, 8, 16, 24, 32, 48}) {
    for (std::int64_t i : {-1, -2, -100}) want("negative_index", {Mode::Prism, q}, cli::kExitBounds, {i});
  }
  want("memcached", {Mode::Prism, 0}, cli::kExitBounds);
  want("nginx", {Mode::Prism, 0}, cli::kExitEscape);
  want("string_match", {Mode::Prism, 0}, cli::kExitBounds);
  // Every manifest expectation, all modes.
  std::size_t met = 0;
  std::size_t total = 0;
  for (const auto& c : corpus.cases) {
    for (const auto& e : c.expect) {
      for (Mode m : e.modes) {
        for (std::uint64_t q : e.qs) {
          ++total;
          const std::string err = cli::check_expectation(e, cli::run_case(c, corpus.dir, {m, q}));
          if (err.empty()) {
            ++met;
          } else {
            v.fail(c.name + " " + std::string(to_string(m)) + " q=" + std::to_string(q) + ": " + err);
          }
        }
      }
    }
  }
  summary = "manifest " + std::to_string(met) + "/" + std::to_string(total) + " expectations met";
  return v;
}

Verdict sa_fetch_rarity(const Corpus& corpus, std::string& summary) {
  Verdict v;
  std::size_t forward = 0;
  std::uint64_t backward_fetches = 0;
  for (const auto& c : corpus.cases) {
    if (!c.forward_traversal) continue;
    ++forward;
    for (Mode m : {Mode::Prism, Mode::Prism32}) {
      for (std::uint64_t q : {0, 8}) {
        const cli::CaseRun r = cli::run_case(c, corpus.dir, {m, q});
        if (r.run.checks.sa_fetches != 0) v.fail(c.name + ": " + std::to_string(r.run.checks.sa_fetches) + " SA fetches");
      }
    }
  }
  for (Mode m : {Mode::Prism, Mode::Prism32}) {
    const cli::CaseRun r = cli::run_case(corpus.get("backward_traversal"), corpus.dir, {m, 0});
    if (r.run.checks.sa_fetches == 0) v.fail("backward traversal made no SA fetch");
    if (r.run.fetches_below_ksa != r.run.checks.sa_fetches) v.fail("an SA fetch happened at or above the KSA");
    backward_fetches += r.run.checks.sa_fetches;
  }
  if (forward == 0) v.fail("no forward-traversal cases in the manifest");
  summary = std::to_string(forward) + " forward cases with 0 fetches, backward fetches " + std::to_string(backward_fetches) +
            " all below KSA";
  return v;
}

Verdict monotonicity(const Corpus& corpus, std::string& summary) {
  Verdict v;
  std::size_t series = 0;
  for (const auto& c : corpus.cases) {
    const ir::Program p = ir::parse(read_file(corpus.dir / c.file));
    for (Mode m : kModes) {
      std::size_t prev = SIZE_MAX;
      for (std::uint64_t q : {0, 4, 8, 16, 24, 32, 48}) {
        const std::size_t active = make_stats(instrument(p, {{m, q}, OptSet::all()})).active;
        if (active > prev) v.fail(c.name + " " + std::string(to_string(m)) + ": rises at q=" + std::to_string(q));
        prev = active;
      }
      ++series;
    }
  }
  summary = std::to_string(series) + " program x mode series non-increasing";
  return v;
}

// 5, 9 ----------------------------------------------------------------------------

Verdict fuzz_campaign(fuzz::Harness harness, std::uint64_t count, std::string& summary) {
  Verdict v;
  std::uint64_t programs = 0;
  std::uint64_t unelidable = 0;
  std::uint64_t detected = 0;
  std::uint64_t allowed = 0;
  std::uint64_t disallowed = 0;
  for (Mode m : kModes) {
    for (std::uint64_t q : {0, 8, 32}) {
      fuzz::FuzzConfig cfg;
      cfg.seed = 1;
      cfg.count = count;
      cfg.mode = {m, q};
      cfg.harness = harness;
      const fuzz::Summary s = fuzz::run(cfg);
      programs += s.count;
      allowed += s.allowed_divergences;
      disallowed += s.disallowed;
      const std::string where = std::string(to_string(m)) + " q=" + std::to_string(q);
      if (s.disallowed != 0) {
        v.fail(where + ": " + std::to_string(s.disallowed) + " disallowed divergences, first " +
               (s.failures.empty() ? std::string("?") : s.failures.front().divergence));
      }
      if (harness == fuzz::Harness::Differential && m != Mode::Pow2) {
        unelidable += s.unelidable_oob;
        detected += s.unelidable_oob_detected;
        if (s.unelidable_oob_detected != s.unelidable_oob) {
          v.fail(where + ": variable-index OOB detected " + std::to_string(s.unelidable_oob_detected) + "/" +
                 std::to_string(s.unelidable_oob));
        }
      }
    }
  }
  summary = std::to_string(programs) + " runs, " + std::to_string(disallowed) + " disallowed, " + std::to_string(allowed) + " allowed";
  if (harness == fuzz::Harness::Differential) {
    summary += ", unelidable OOB detected " + std::to_string(detected) + "/" + std::to_string(unelidable);
  }
  return v;
}

// 7 ---------------------------------------------------------------------------------

Verdict pow2_relaxation(std::string& summary) {
  Verdict v;
  constexpr std::uint64_t kA = 32;
  std::size_t probes = 0;
  // Every KSA inside the block, every pointer around it, sizes 1..4.
  for (std::uint64_t size = kA / 2; size < kA; ++size) {
    SimMemory mem;
    Heap heap({Mode::Pow2, 0}, mem);
    heap.alloc(1);  // keep SA away from the region base
    const TaggedAddress base = heap.alloc(size);
    const AllocationRecord& rec = *heap.find_by_sa(strip_tag(base, Mode::Pow2));
    if (pow2_aligned_size(base) != kA) v.fail("size " + std::to_string(size) + " did not round to 32");
    const Addr sa = rec.sa;
    for (Addr k = sa; k < sa + kA; ++k) {
      const TaggedAddress ksa = tag_pointer(k, rec);
      for (Addr ptr = sa - 2 * kA; ptr < sa + 3 * kA; ++ptr) {
        for (std::uint64_t n = 1; n <= 4; ++n) {
          const bool pass = bounds_check_2k(ksa, ptr, n).pass;
          const bool want = ptr >= sa && ptr + n <= sa + kA - 1;
          if (pass != want) {
            std::ostringstream os;
            os << "ksa SA+" << (k - sa) << " ptr SA" << std::showpos << static_cast<std::int64_t>(ptr - sa) << " n "
               << std::noshowpos << n << ": pass=" << pass;
            v.fail(os.str());
          }
          ++probes;
        }
      }
    }
  }
  // Constant-offset accesses elided at q = 8, from every KSA an escape check
  // lets through, stay inside the A + q - 1 reservation.
  constexpr std::uint64_t kQ = 8;
  const ModeConfig cfg{Mode::Pow2, kQ};
  std::size_t elided = 0;
  std::uint64_t worst = 0;
  for (std::uint64_t size = kA / 2; size < kA; ++size) {
    SimMemory mem;
    Heap mirror(cfg, mem);
    const AllocationRecord rec = *mirror.find_by_sa(strip_tag(mirror.alloc(size), Mode::Pow2));
    for (std::uint64_t k = 0; k <= kA + 2; ++k) {
      for (std::uint64_t off = 0; off <= kQ + 1; ++off) {
        for (std::uint64_t n : {1, 2, 4, 8}) {
          const std::string text = "fn @f(%p: ptr) -> int {\n^entry:\n  %x = gep %p, " + std::to_string(off) +
                                   "\n  %v = load." + std::to_string(n) +
                                   " %x\n  ret %v\n}\n\nfn @main() -> int {\n^entry:\n  %a = alloc " +
                                   std::to_string(size) + "\n  %e = gep %a, " + std::to_string(k) +
                                   "\n  %r = call @f(%e)\n  ret %r\n}\n";
          const InstrumentResult r = instrument(ir::parse(text), {cfg, OptSet::all()});
          const CheckSite* site = nullptr;
          for (const CheckSite& cs : r.sites) {
            if (cs.kind == SiteKind::Access) site = &cs;
          }
          if (site == nullptr || site->status != SiteStatus::ElidedByQ) continue;
          vm::RunOptions o;
          o.mode = cfg;
          const vm::RunResult run = vm::run(r.program, {}, o);
          if (run.exit == vm::ExitKind::Fault) v.fail("elided access faulted: " + run.fault);
          if (run.exit != vm::ExitKind::Ok) continue;  // the escape check stopped the KSA
          ++elided;
          const Addr last = rec.sa + k + off + n - 1;
          worst = std::max(worst, last - rec.sa);
          if (last > rec.sa + kA + kQ - 2) v.fail("elided access reaches SA+" + std::to_string(last - rec.sa));
          if (last >= rec.reserved_end) v.fail("elided access leaves the reservation");
        }
      }
    }
  }
  summary = std::to_string(probes) + " probes; " + std::to_string(elided) + " elided accesses, last byte <= SA+" +
            std::to_string(worst);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"boundtag acceptance gate"};
  std::size_t sizes = 100000;
  std::uint64_t fuzz_count = 10000;
  app.add_option("--sizes", sizes, "sampled allocation sizes per mode");
  app.add_option("--fuzz-count", fuzz_count, "programs per mode and q");
  CLI11_PARSE(app, argc, argv);

  int failed = 0;
  auto report = [&](int id, const char* name, const std::function<Verdict(std::string&)>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string summary;
    Verdict v;
    try {
      v = body(summary);
    } catch (const std::exception& e) {
      v.fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!v.pass) ++failed;
    std::printf("%s %d %s: %s%s%s (%.1fs)\n", v.pass ? "PASS" : "FAIL", id, name, summary.c_str(),
                v.pass ? "" : "; ", v.detail.c_str(), secs);
    std::fflush(stdout);
  };

  const Corpus corpus;
  report(1, "encoding roundtrip", [&](std::string& s) { return encoding_roundtrip(sizes, s); });
  report(2, "linked-list golden counts", [&](std::string& s) { return linked_list(s); });
  report(3, "cost_compare golden counts", [&](std::string& s) {
    return golden_counts("cost_compare.pir", "cost_compare", {{0, 6}, {8, 2}, {24, 0}}, s);
  });
  report(4, "bug corpus", [&](std::string& s) { return bug_corpus(corpus, s); });
  report(5, "differential fuzz",
         [&](std::string& s) { return fuzz_campaign(fuzz::Harness::Differential, fuzz_count, s); });
  report(6, "SA-fetch rarity", [&](std::string& s) { return sa_fetch_rarity(corpus, s); });
  report(7, "pow2 relaxation bound", [&](std::string& s) { return pow2_relaxation(s); });
  report(8, "q monotonicity", [&](std::string& s) { return monotonicity(corpus, s); });
  report(9, "optimization soundness", [&](std::string& s) { return fuzz_campaign(fuzz::Harness::OptDual, fuzz_count, s); });
  std::printf("acceptance: %d/9 passed\n", 9 - failed);
  return failed == 0 ? 0 : 1;
}
