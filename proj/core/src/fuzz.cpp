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

#include "boundtag/fuzz.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "boundtag/ir.hpp"

namespace boundtag::fuzz {

std::uint64_t program_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t x = seed * 0x9E3779B97F4A7C15ULL + index + 1;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

namespace {

enum class Stmt : std::uint8_t { ConstAccess, VarIndex, Loop, GuardedLoop, EscapeRoundtrip, HelperCall, Select, Diamond, PtrArith, RetHelper };

constexpr Stmt kAllStmts[] = {Stmt::ConstAccess, Stmt::VarIndex,   Stmt::Loop,   Stmt::GuardedLoop,
                              Stmt::EscapeRoundtrip, Stmt::HelperCall, Stmt::Select, Stmt::Diamond,
                              Stmt::PtrArith,    Stmt::RetHelper};

std::string_view stmt_name(Stmt s) {
  switch (s) {
    case Stmt::ConstAccess: return "const_access";
    case Stmt::VarIndex: return "var_index";
    case Stmt::Loop: return "loop";
    case Stmt::GuardedLoop: return "guarded_loop";
    case Stmt::EscapeRoundtrip: return "escape_roundtrip";
    case Stmt::HelperCall: return "helper_call";
    case Stmt::Select: return "select";
    case Stmt::Diamond: return "diamond";
    case Stmt::PtrArith: return "ptr_arith";
    case Stmt::RetHelper: return "ret_helper";
  }
  return "?";
}

bool can_be_oob(Stmt s) { return s != Stmt::GuardedLoop && s != Stmt::PtrArith; }

class Generator {
 public:
  Generator(std::uint64_t seed, const GeneratorConfig& cfg) : rng_(seed), cfg_(cfg) {}

  GeneratedProgram build() {
    GeneratedProgram out;
    in0_ = uni(0, 15);
    in1_ = uni(0, 15);
    out.inputs = {in0_, in1_};

    label("entry");
    emit("%acc0 = const 0");
    acc_ = "acc0";
    const int nobj = static_cast<int>(uni(2, 4));
    for (int k = 0; k < nobj; ++k) make_object(k);
    emit("%slot = alloc 64");

    const bool oob = !cfg_.force_in_bounds && (cfg_.force_one_oob || coin(cfg_.oob_rate));
    const int nstmt = static_cast<int>(uni(cfg_.min_statements, cfg_.max_statements));
    const int oob_at = oob ? static_cast<int>(uni(0, nstmt - 1)) : -1;
    for (int k = 0; k < nstmt; ++k) {
      Stmt s = kAllStmts[uni(0, std::size(kAllStmts) - 1)];
      const bool bad = k == oob_at;
      while (bad && !can_be_oob(s)) s = kAllStmts[uni(0, std::size(kAllStmts) - 1)];
      if (bad) {
        out.planned_oob = true;
        out.oob_kind = std::string(stmt_name(s));
      }
      statement(s, bad);
    }
    out.oob_unelidable = must_detect_;
    for (const auto& o : objs_) {
      if (o.heap) emit("free %" + o.name);
    }
    emit("free %slot");
    emit("ret %" + acc_);

    std::ostringstream text;
    for (const auto& g : globals_) text << g << "\n";
    if (!globals_.empty()) text << "\n";
    for (const auto& h : helpers_) text << h << "\n";
    text << "fn @main(%in0: int, %in1: int) -> int {\n";
    for (const auto& l : body_) text << l << "\n";
    text << "}\n";
    out.text = text.str();
    return out;
  }

 private:
  struct Obj {
    std::string name;
    std::int64_t size = 0;
    bool heap = false;
    bool escapable = true;
  };

  std::int64_t uni(std::int64_t lo, std::int64_t hi) { return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng_); }
  bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }

  std::string fresh(std::string_view stem) { return std::string(stem) + std::to_string(++counter_); }
  void emit(const std::string& line) { body_.push_back("  " + line); }
  void label(const std::string& l) { body_.push_back("^" + l + ":"); cur_ = l; }

  void add_acc(const std::string& v) {
    const std::string a = fresh("acc");
    emit("%" + a + " = add %" + acc_ + ", %" + v);
    acc_ = a;
  }

  void make_object(int k) {
    Obj o;
    o.name = "o" + std::to_string(k);
    const std::int64_t r = uni(0, 9);
    const std::int64_t sr = uni(0, 9);
    if (r <= 5) {
      o.heap = true;
      if (sr <= 6) {
        o.size = uni(1, 128);
      } else if (sr == 7) {
        o.size = uni(129, 4096);
      } else if (sr == 8) {
        o.size = uni(65500, 65560);  // around the small/large frame boundary
      } else {
        o.size = uni(65537, 300000);
      }
      emit("%" + o.name + " = alloc " + std::to_string(o.size));
    } else if (r <= 7) {
      o.size = sr <= 7 ? uni(1, 256) : uni(257, 4096);
      emit("%" + o.name + " = alloca " + std::to_string(o.size));
    } else {
      o.size = uni(1, 256);
      o.escapable = coin(0.75);
      const std::string g = "g" + std::to_string(k);
      globals_.push_back("global @" + g + " size=" + std::to_string(o.size) +
                         " escapes=" + (o.escapable ? "true" : "false"));
      emit("%" + o.name + " = global @" + g);
    }
    objs_.push_back(o);
  }

  const Obj& pick(bool escapable = false) {
    std::vector<const Obj*> c;
    for (const auto& o : objs_) {
      if (!escapable || o.escapable) c.push_back(&o);
    }
    if (c.empty()) return objs_.front();
    return *c[static_cast<std::size_t>(uni(0, static_cast<std::int64_t>(c.size()) - 1))];
  }

  int width_for(std::int64_t size) {
    static constexpr int kWidths[] = {1, 2, 4, 8};
    int w = kWidths[uni(0, 3)];
    while (w > size) w /= 2;
    return w;
  }

  // Pointer text for `base + off`; emits a gep when off != 0.
  std::string at(const std::string& base, std::int64_t off) {
    if (off == 0) return base;
    const std::string t = fresh("t");
    emit("%" + t + " = gep %" + base + ", " + std::to_string(off));
    return t;
  }

  // Loads (or stores to) `p`; loads feed the accumulator.
  void touch(const std::string& p, int w) {
    if (coin(0.3)) {
      emit("store." + std::to_string(w) + " %" + p + ", %" + acc_);
    } else {
      const std::string v = fresh("v");
      emit("%" + v + " = load." + std::to_string(w) + " %" + p);
      add_acc(v);
    }
  }

  // Int value equal to `target` at run time, derived from an input.
  std::string runtime_int(std::int64_t target) {
    const bool first = coin(0.5);
    const std::string x = fresh("x");
    emit("%" + x + " = add %" + (first ? "in0" : "in1") + ", " + std::to_string(target - (first ? in0_ : in1_)));
    return x;
  }

  std::int64_t oob_offset(std::int64_t size, int w) {
    switch (uni(0, 2)) {
      case 0: return size - w + uni(1, 24);
      case 1: return -uni(1, 16);
      default: return size;
    }
  }

  void statement(Stmt s, bool bad) {
    switch (s) {
      case Stmt::ConstAccess: const_access(bad); break;
      case Stmt::VarIndex: var_index(bad); break;
      case Stmt::Loop: loop(bad); break;
      case Stmt::GuardedLoop: guarded_loop(); break;
      case Stmt::EscapeRoundtrip: escape_roundtrip(bad); break;
      case Stmt::HelperCall: helper_call(bad); break;
      case Stmt::Select: select(bad); break;
      case Stmt::Diamond: diamond(bad); break;
      case Stmt::PtrArith: ptr_arith(); break;
      case Stmt::RetHelper: ret_helper(bad); break;
    }
  }

  void const_access(bool bad) {
    const Obj& o = pick();
    const int w = width_for(o.size);
    std::int64_t off = coin(0.5) ? o.size - w : uni(0, o.size - w);
    if (bad) off = oob_offset(o.size, w);
    touch(at(o.name, off), w);
  }

  void var_index(bool bad) {
    const Obj& o = pick();
    const int w = width_for(o.size);
    const std::int64_t n = o.size / w;
    std::int64_t target = uni(0, n - 1);
    must_detect_ = must_detect_ || bad;
    if (bad) {
      switch (uni(0, 3)) {
        case 0: target = n; break;
        case 1: target = -1; break;
        case 2: target = n + uni(1, 8); break;
        default: target = -uni(2, 8); break;
      }
    }
    const std::string t = fresh("t");
    if (coin(0.3)) {
      const std::string x = runtime_int(target - 1);
      emit("%" + t + " = gep %" + o.name + ", %" + x + "*" + std::to_string(w) + " + " + std::to_string(w));
    } else {
      const std::string x = runtime_int(target);
      emit("%" + t + " = gep %" + o.name + ", %" + x + "*" + std::to_string(w));
    }
    touch(t, w);
  }

  // Rotated counted loop over o; single block, so hoisting applies.
  void loop(bool bad) {
    const Obj& o = pick();
    const int w = width_for(o.size);
    const std::int64_t n = o.size / w;
    const std::int64_t trip = std::min<std::int64_t>(n, uni(1, 48));
    const bool forward = coin(0.6);
    std::int64_t first = uni(0, n - trip);
    std::int64_t last = first + trip - 1;
    must_detect_ = must_detect_ || bad;
    if (bad) {
      if (forward) {
        first = n - trip;
        last = n;
      } else {
        first = -1;
        last = trip - 1;
      }
    }
    const std::string pre = cur_;
    const std::string h = fresh("loop");
    const std::string x = fresh("exit");
    const std::string i = fresh("i");
    const std::string inext = fresh("inext");
    const std::string a = fresh("a");
    const std::string anext = fresh("anext");
    const std::string p = fresh("p");
    const std::string v = fresh("v");
    const std::string c = fresh("c");
    emit("br ^" + h);
    label(h);
    emit("%" + i + " = phi int [" + std::to_string(forward ? first : last) + ", ^" + pre + "], [%" + inext + ", ^" + h + "]");
    emit("%" + a + " = phi int [%" + acc_ + ", ^" + pre + "], [%" + anext + ", ^" + h + "]");
    const std::int64_t k = coin(0.25) ? w : 0;
    if (k != 0) {
      emit("%" + p + " = gep %" + o.name + ", %" + i + "*" + std::to_string(w) + " - " + std::to_string(k));
    } else {
      emit("%" + p + " = gep %" + o.name + ", %" + i + "*" + std::to_string(w));
    }
    std::string p2 = p;
    if (k != 0) p2 = at(p, k);
    if (coin(0.3)) {
      emit("store." + std::to_string(w) + " %" + p2 + ", %" + i);
      emit("%" + anext + " = add %" + a + ", 1");
    } else {
      emit("%" + v + " = load." + std::to_string(w) + " %" + p2);
      emit("%" + anext + " = add %" + a + ", %" + v);
    }
    if (forward) {
      emit("%" + inext + " = add %" + i + ", 1");
      emit("%" + c + " = cmp.lt %" + inext + ", " + std::to_string(last + 1));
    } else {
      emit("%" + inext + " = add %" + i + ", -1");
      emit("%" + c + " = cmp.ge %" + inext + ", " + std::to_string(first));
    }
    emit("condbr %" + c + ", ^" + h + ", ^" + x);
    label(x);
    acc_ = anext;
  }

  // Loop whose access runs on even iterations only: never hoisted.
  void guarded_loop() {
    const Obj& o = pick();
    const int w = width_for(o.size);
    const std::int64_t n = o.size / w;
    const std::int64_t trip = std::min<std::int64_t>(n, uni(1, 32));
    const std::string pre = cur_;
    const std::string h = fresh("gloop");
    const std::string body = fresh("gbody");
    const std::string latch = fresh("glatch");
    const std::string x = fresh("gexit");
    const std::string i = fresh("i");
    const std::string inext = fresh("inext");
    const std::string a = fresh("a");
    const std::string anext = fresh("anext");
    const std::string odd = fresh("odd");
    const std::string z = fresh("z");
    const std::string p = fresh("p");
    const std::string v = fresh("v");
    const std::string vv = fresh("vv");
    const std::string c = fresh("c");
    emit("br ^" + h);
    label(h);
    emit("%" + i + " = phi int [0, ^" + pre + "], [%" + inext + ", ^" + latch + "]");
    emit("%" + a + " = phi int [%" + acc_ + ", ^" + pre + "], [%" + anext + ", ^" + latch + "]");
    emit("%" + odd + " = and %" + i + ", 1");
    emit("%" + z + " = cmp.eq %" + odd + ", 0");
    emit("condbr %" + z + ", ^" + body + ", ^" + latch);
    label(body);
    emit("%" + p + " = gep %" + o.name + ", %" + i + "*" + std::to_string(w));
    emit("%" + v + " = load." + std::to_string(w) + " %" + p);
    emit("br ^" + latch);
    label(latch);
    emit("%" + vv + " = phi int [%" + v + ", ^" + body + "], [0, ^" + h + "]");
    emit("%" + anext + " = add %" + a + ", %" + vv);
    emit("%" + inext + " = add %" + i + ", 1");
    emit("%" + c + " = cmp.lt %" + inext + ", " + std::to_string(trip));
    emit("condbr %" + c + ", ^" + h + ", ^" + x);
    label(x);
    acc_ = anext;
  }

  // Stores a derived pointer, reloads it and accesses around it; negative
  // distances take the SA-fetch path.
  void escape_roundtrip(bool bad) {
    const Obj& o = pick(true);
    if (!o.escapable) return const_access(bad);
    const int w = width_for(o.size);
    std::int64_t off = coin(0.3) ? o.size : uni(0, o.size);
    must_detect_ = must_detect_ || bad;
    if (bad) off = coin(0.5) ? o.size + uni(1, 16) : -uni(1, 8);
    const std::string e = at(o.name, off);
    const std::string s = at("slot", 8 * uni(0, 7));
    emit("storep %" + s + ", %" + e);
    const std::string r = fresh("r");
    emit("%" + r + " = loadp %" + s);
    const std::int64_t d = uni(-off, o.size - w - off);
    touch(at(r, d), w);
  }

  std::string helper_get(int w) {
    const std::string name = "get" + std::to_string(w);
    if (defined_.insert(name).second) {
      helpers_.push_back("fn @" + name + "(%p: ptr, %i: int) -> int {\n^entry:\n  %q = gep %p, %i*" + std::to_string(w) +
                         "\n  %v = load." + std::to_string(w) + " %q\n  ret %v\n}\n");
    }
    return name;
  }

  void helper_call(bool bad) {
    const Obj& o = pick(true);
    if (!o.escapable) return var_index(bad);
    const int w = width_for(o.size);
    const std::int64_t n = o.size / w;
    const std::int64_t b = uni(0, n - 1);
    std::int64_t k = uni(-b, n - 1 - b);
    must_detect_ = must_detect_ || bad;
    if (bad) k = coin(0.5) ? n - b : -b - 1;
    const std::string p = at(o.name, b * w);
    const std::string x = runtime_int(k);
    const std::string v = fresh("v");
    emit("%" + v + " = call @" + helper_get(w) + "(%" + p + ", %" + x + ")");
    add_acc(v);
  }

  void select(bool bad) {
    const Obj& o1 = pick();
    const Obj& o2 = pick();
    const std::int64_t kcut = uni(0, 16);
    const Obj& chosen = in1_ < kcut ? o1 : o2;
    const int w = width_for(std::min(o1.size, o2.size));
    std::int64_t off = uni(0, chosen.size - w);
    if (bad) off = chosen.size - w + uni(1, 16);
    const std::string c = fresh("c");
    const std::string m = fresh("m");
    emit("%" + c + " = cmp.lt %in1, " + std::to_string(kcut));
    emit("%" + m + " = select %" + c + ", %" + o1.name + ", %" + o2.name);
    touch(at(m, off), w);
  }

  // If/else over two objects joined by a pointer phi.
  void diamond(bool bad) {
    const Obj& o1 = pick();
    const Obj& o2 = pick();
    const int w = width_for(std::min(o1.size, o2.size));
    const std::int64_t kcut = uni(0, 16);
    const bool then_taken = in0_ < kcut;
    const std::int64_t offa = uni(0, o1.size - w);
    const std::int64_t offb = uni(0, o2.size - w);
    const std::string t = fresh("then");
    const std::string e = fresh("else");
    const std::string j = fresh("join");
    const std::string c = fresh("c");
    emit("%" + c + " = cmp.lt %in0, " + std::to_string(kcut));
    emit("condbr %" + c + ", ^" + t + ", ^" + e);
    label(t);
    const std::string ga = at(o1.name, offa);
    const std::string va = fresh("v");
    emit("%" + va + " = load." + std::to_string(w) + " %" + ga);
    const std::string tend = cur_;
    emit("br ^" + j);
    label(e);
    const std::string gb = at(o2.name, offb);
    const std::string vb = fresh("v");
    emit("%" + vb + " = load." + std::to_string(w) + " %" + gb);
    const std::string eend = cur_;
    emit("br ^" + j);
    label(j);
    const std::string pp = fresh("pp");
    const std::string vj = fresh("vj");
    emit("%" + pp + " = phi ptr [%" + ga + ", ^" + tend + "], [%" + gb + ", ^" + eend + "]");
    emit("%" + vj + " = phi int [%" + va + ", ^" + tend + "], [%" + vb + ", ^" + eend + "]");
    add_acc(vj);
    const std::int64_t base = then_taken ? offa : offb;
    const std::int64_t size = then_taken ? o1.size : o2.size;
    std::int64_t d = 0;
    if (bad) {
      d = size - w - base + uni(1, 16);
    } else {
      const std::int64_t lo = std::max(-offa, -offb);
      const std::int64_t hi = std::min(o1.size - w - offa, o2.size - w - offb);
      d = uni(lo, hi);
    }
    touch(at(pp, d), w);
  }

  void ptr_arith() {
    const Obj& o1 = pick();
    const Obj& o2 = pick();
    const std::string g = at(o1.name, uni(0, o1.size));
    const std::string d = fresh("d");
    emit("%" + d + " = psub %" + g + ", %" + o1.name);
    add_acc(d);
    const std::string c = fresh("c");
    emit("%" + c + " = pcmp.eq %" + g + ", %" + o2.name);
    add_acc(c);
  }

  void ret_helper(bool bad) {
    const Obj& o = pick(true);
    if (!o.escapable) return const_access(bad);
    if (defined_.insert("adv").second) {
      helpers_.push_back("fn @adv(%p: ptr, %k: int) -> ptr {\n^entry:\n  %q = gep %p, %k\n  ret %q\n}\n");
    }
    const int w = width_for(o.size);
    std::int64_t k = uni(0, o.size);
    must_detect_ = must_detect_ || bad;
    if (bad) k = o.size + uni(1, 16);
    const std::string x = runtime_int(k);
    const std::string r = fresh("r");
    emit("%" + r + " = call @adv(%" + o.name + ", %" + x + ")");
    const std::int64_t d = uni(-k, o.size - w - k);
    touch(at(r, d), w);
  }

  std::mt19937_64 rng_;
  GeneratorConfig cfg_;
  std::int64_t in0_ = 0;
  std::int64_t in1_ = 0;
  std::vector<Obj> objs_;
  std::vector<std::string> globals_;
  std::vector<std::string> helpers_;
  std::set<std::string> defined_;
  std::vector<std::string> body_;
  std::string cur_;
  std::string acc_;
  int counter_ = 0;
  bool must_detect_ = false;  // the OOB operation has a variable offset or escapes
};

struct Outcome {
  oracle::Verdict verdict;
  bool planned_oob = false;
  bool unelidable = false;
  std::string failure;  // parse/instrument error text
};

}  // namespace

GeneratedProgram generate(std::uint64_t seed, const GeneratorConfig& cfg) {
  Generator g(seed, cfg);
  return g.build();
}

Summary run(const FuzzConfig& cfg) {
  Summary s;
  s.seed = cfg.seed;
  s.count = cfg.count;
  s.mode = std::string(to_string(cfg.mode.mode));
  s.q = cfg.mode.q;
  s.opts = cfg.opts.to_string();
  s.harness = cfg.harness == Harness::Differential ? "differential" : "opt_dual";

  std::vector<Outcome> outcomes(cfg.count);
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (std::uint64_t i = next++; i < cfg.count; i = next++) {
      Outcome& out = outcomes[i];
      const GeneratedProgram gp = generate(program_seed(cfg.seed, i), cfg.gen);
      out.planned_oob = gp.planned_oob;
      out.unelidable = gp.oob_unelidable;
      try {
        const ir::Program prog = ir::parse(gp.text);
        oracle::DifferentialOptions d;
        d.mode = cfg.mode;
        d.opts = cfg.opts;
        d.inject_upper_off_by_one = cfg.inject_upper_off_by_one;
        d.step_limit = cfg.step_limit;
        out.verdict = cfg.harness == Harness::Differential ? oracle::differential_run(prog, gp.inputs, d)
                                                           : oracle::optimization_dual_run(prog, gp.inputs, d);
      } catch (const std::exception& e) {
        out.failure = e.what();
        out.verdict.agreement = false;
      }
    }
  };
  unsigned n = cfg.threads != 0 ? cfg.threads : std::max(1U, std::thread::hardware_concurrency());
  n = static_cast<unsigned>(std::min<std::uint64_t>(n, std::max<std::uint64_t>(1, cfg.count)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (std::uint64_t i = 0; i < cfg.count; ++i) {
    const Outcome& o = outcomes[i];
    const oracle::Verdict& v = o.verdict;
    s.allowed_divergences += v.allowed_divergences;
    if (v.checked == vm::ExitKind::Violation) ++s.checked_violations;
    if (v.reference == vm::ExitKind::Violation) ++s.reference_violations;
    if (v.checked == vm::ExitKind::Fault || v.reference == vm::ExitKind::Fault) ++s.faults;
    if (v.early_abort) ++s.early_aborts;
    if (o.planned_oob) {
      ++s.planned_oob;
      if (v.checked == vm::ExitKind::Violation) ++s.planned_oob_detected;
    }
    if (o.unelidable) {
      ++s.unelidable_oob;
      if (v.checked == vm::ExitKind::Violation) ++s.unelidable_oob_detected;
    }
    if (v.agreement) {
      ++s.agreements;
      continue;
    }
    ++s.disallowed;
    Failure f;
    f.index = i;
    f.seed = program_seed(cfg.seed, i);
    f.divergence = o.failure.empty() ? std::string(oracle::to_string(v.divergence)) : "error";
    f.detail = o.failure.empty() ? v.detail : o.failure;
    if (cfg.repro_dir) {
      std::filesystem::create_directories(*cfg.repro_dir);
      const GeneratedProgram gp = generate(f.seed, cfg.gen);
      const auto path = std::filesystem::path(*cfg.repro_dir) /
                        ("fuzz_" + std::to_string(cfg.seed) + "_" + std::to_string(i) + ".pir");
      std::ofstream os(path);
      os << "; fuzz repro: seed=" << cfg.seed << " index=" << i << " mode=" << s.mode << " q=" << s.q
         << " opts=" << s.opts << " harness=" << s.harness << "\n";
      os << "; inputs:";
      for (auto x : gp.inputs) os << " " << x;
      os << "\n; " << f.divergence << ": " << f.detail << "\n" << gp.text;
      f.repro = path.string();
    }
    s.failures.push_back(std::move(f));
  }
  return s;
}

std::string to_json(const Summary& s, int indent) {
  nlohmann::ordered_json j;
  j["schema"] = kFuzzSchema;
  j["seed"] = s.seed;
  j["count"] = s.count;
  j["mode"] = s.mode;
  j["q"] = s.q;
  j["opts"] = s.opts;
  j["harness"] = s.harness;
  j["agreements"] = s.agreements;
  j["disallowed"] = s.disallowed;
  j["allowed_divergences"] = s.allowed_divergences;
  j["checked_violations"] = s.checked_violations;
  j["reference_violations"] = s.reference_violations;
  j["early_aborts"] = s.early_aborts;
  j["faults"] = s.faults;
  j["planned_oob"] = s.planned_oob;
  j["planned_oob_detected"] = s.planned_oob_detected;
  j["unelidable_oob"] = s.unelidable_oob;
  j["unelidable_oob_detected"] = s.unelidable_oob_detected;
  auto& fs = j["failures"] = nlohmann::ordered_json::array();
  for (const auto& f : s.failures) {
    fs.push_back({{"index", f.index}, {"seed", f.seed}, {"divergence", f.divergence}, {"detail", f.detail}, {"repro", f.repro}});
  }
  return j.dump(indent);
}

}  // namespace boundtag::fuzz
