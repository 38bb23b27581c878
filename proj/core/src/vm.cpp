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

#include "boundtag/vm.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "boundtag/heap.hpp"
#include "boundtag/memory.hpp"
#include "boundtag/oracle.hpp"

namespace boundtag::vm {

using ir::BlockId;
using ir::Function;
using ir::Instr;
using ir::Opcode;
using ir::Type;
using ir::ValueId;
using oracle::AccessClass;

std::string_view to_string(ExitKind k) {
  switch (k) {
    case ExitKind::Ok: return "ok";
    case ExitKind::Violation: return "violation";
    case ExitKind::Fault: return "fault";
  }
  return "?";
}

std::string_view to_string(Backend b) { return b == Backend::Prism ? "prism" : "oracle"; }

RunOptions reference_options(const InstrumentResult& result, ModeConfig mode) {
  RunOptions o;
  o.backend = Backend::Oracle;
  o.mode = mode;
  for (const auto& s : result.sites) {
    if (s.status == SiteStatus::ElidedByQ) o.padding_permits.push_back(s.id);
  }
  return o;
}

namespace {

struct Value {
  std::uint64_t bits = 0;
  std::uint32_t obj = 0;  // provenance, 0 = none
};

struct Object {
  oracle::ObjectBounds bounds;
  ObjectKind kind = ObjectKind::Heap;
  bool live = true;
};

struct Frame {
  int fn = 0;
  BlockId block = 0;
  std::size_t ip = 0;
  std::vector<Value> values;
  Heap::StackMark mark;
  ValueId ret_to = ir::kNoValue;  // caller value receiving the result
  std::vector<std::uint32_t> stack_objects;
};

// Thrown once the result is final.
struct Stop {};

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

class Machine {
 public:
  Machine(const ir::Program& prog, const RunOptions& opts)
      : prog_(prog),
        opts_(opts),
        heap_(opts.mode, mem_),
        checker_(opts.mode, mem_),
        mask_(strip_mask(opts.mode.mode)),
        permits_(opts.padding_permits.begin(), opts.padding_permits.end()) {
    checker_.inject_upper_off_by_one(opts.inject_upper_off_by_one);
    for (std::size_t f = 0; f < prog.functions.size(); ++f) fn_index_.emplace(prog.functions[f].name, static_cast<int>(f));
    objects_.push_back({});  // id 0: no object
  }

  RunResult run(const std::vector<std::int64_t>& inputs) {
    const Function* main = prog_.find_function("main");
    if (main == nullptr) throw std::invalid_argument("program has no @main");
    if (inputs.size() > main->params.size()) {
      throw std::invalid_argument("@main takes " + std::to_string(main->params.size()) + " inputs, got " +
                                  std::to_string(inputs.size()));
    }
    try {
      for (const auto& g : prog_.globals) {
        const TaggedAddress t = heap_.alloc_global(g.size);
        globals_.emplace(g.name, Value{strip_tag(t, opts_.mode.mode), new_object(t)});
      }
      std::vector<Value> args;
      for (std::size_t i = 0; i < main->params.size(); ++i) {
        args.push_back(Value{i < inputs.size() ? static_cast<std::uint64_t>(inputs[i]) : 0, 0});
      }
      push_frame(fn_index_.at("main"), args, ir::kNoValue);
      loop();
    } catch (const Stop&) {
    } catch (const SimFault& e) {
      record_fault(e.what());
    } catch (const AllocError& e) {
      record_fault(e.what());
    } catch (const FreeError& e) {
      record_fault(e.what());
    } catch (const EncodingError& e) {
      record_fault(e.what());
    }
    result_.checks = checker_.stats();
    return std::move(result_);
  }

 private:
  // Objects ------------------------------------------------------------------

  std::uint32_t new_object(TaggedAddress t) {
    const AllocationRecord* rec = heap_.find_by_sa(strip_tag(t, opts_.mode.mode));
    if (rec == nullptr) throw SimFault("allocation record missing for " + hex(t.value()));
    objects_.push_back({oracle::bounds_of(*rec), rec->kind, true});
    return static_cast<std::uint32_t>(objects_.size() - 1);
  }

  Addr raw(Value v) const { return v.bits & mask_; }

  // Shadow of pointer provenance in memory --------------------------------

  void shadow_clear(Addr a, std::uint64_t n) {
    if (shadow_.empty() || n == 0) return;
    auto it = shadow_.lower_bound(a >= 7 ? a - 7 : 0);
    while (it != shadow_.end() && it->first < a + n) {
      if (it->first + 8 > a) {
        it = shadow_.erase(it);
      } else {
        ++it;
      }
    }
  }

  void shadow_copy(Addr dst, Addr src, std::uint64_t n) {
    std::vector<std::pair<Addr, std::uint32_t>> moved;
    for (auto it = shadow_.lower_bound(src); it != shadow_.end() && it->first + 8 <= src + n; ++it) {
      moved.emplace_back(it->first - src + dst, it->second);
    }
    shadow_clear(dst, n);
    for (const auto& [a, o] : moved) shadow_[a] = o;
  }

  // Frames -------------------------------------------------------------------

  void push_frame(int f, const std::vector<Value>& args, ValueId ret_to) {
    if (frames_.size() >= opts_.max_call_depth) fault("call depth limit exceeded");
    const Function& fn = prog_.functions[static_cast<std::size_t>(f)];
    Frame fr;
    fr.fn = f;
    fr.values.resize(fn.values.size());
    for (std::size_t i = 0; i < fn.params.size(); ++i) fr.values[static_cast<std::size_t>(fn.params[i])] = args[i];
    fr.mark = heap_.stack_mark();
    fr.ret_to = ret_to;
    frames_.push_back(std::move(fr));
    enter_block(frames_.back(), 0, ir::kNoBlock);
  }

  void enter_block(Frame& fr, BlockId target, BlockId pred) {
    const auto& instrs = fn_of(fr).blocks[static_cast<std::size_t>(target)].instrs;
    std::size_t k = 0;
    std::vector<std::pair<ValueId, Value>> staged;
    for (; k < instrs.size() && instrs[k].op == Opcode::Phi; ++k) {
      const Instr& phi = instrs[k];
      std::size_t j = 0;
      while (j < phi.blocks.size() && phi.blocks[j] != pred) ++j;
      if (j == phi.blocks.size()) fault("phi has no incoming value for the taken edge");
      staged.emplace_back(phi.result, eval(fr, phi.args[j]));
      tick();
    }
    for (const auto& [v, val] : staged) fr.values[static_cast<std::size_t>(v)] = val;
    fr.block = target;
    fr.ip = k;
  }

  const Function& fn_of(const Frame& fr) const { return prog_.functions[static_cast<std::size_t>(fr.fn)]; }

  Value eval(const Frame& fr, const ir::Operand& o) const {
    if (!o.is_value()) return Value{static_cast<std::uint64_t>(o.imm), 0};
    return fr.values[static_cast<std::size_t>(o.value)];
  }

  void tick() {
    if (++result_.clock > opts_.step_limit) fault("step limit exceeded");
  }

  // Outcomes -----------------------------------------------------------------

  void record_fault(const std::string& msg) {
    result_.exit = ExitKind::Fault;
    result_.fault = msg;
  }

  [[noreturn]] void fault(const std::string& msg) {
    record_fault(msg);
    throw Stop{};
  }

  ViolationReport report_at(const Instr& in) const {
    ViolationReport r;
    const Frame& fr = frames_.back();
    r.function = fn_of(fr).name;
    r.block = fn_of(fr).blocks[static_cast<std::size_t>(fr.block)].label;
    r.index = static_cast<int>(fr.ip);
    r.line = in.line;
    r.clock = event_clock_;
    return r;
  }

  [[noreturn]] void violate(ViolationReport r) {
    result_.exit = ExitKind::Violation;
    result_.violation = std::move(r);
    throw Stop{};
  }

  // Oracle events ------------------------------------------------------------

  AccessClass classify_access(Addr start, std::uint64_t size, std::uint32_t obj) const {
    if (obj == 0) return AccessClass::OutOfBounds;
    return oracle::classify(start, size, objects_[obj].bounds);
  }

  void count(AccessClass c) {
    switch (c) {
      case AccessClass::InBounds: ++result_.classes.in_bounds; break;
      case AccessClass::InPadding: ++result_.classes.in_padding; break;
      case AccessClass::OutOfBounds: ++result_.classes.out_of_bounds; break;
      case AccessClass::InvalidEscape: ++result_.classes.invalid_escapes; break;
    }
  }

  // Every executed load/store passes through here before memory is touched.
  void observe_access(const Instr& in, Value addr, std::uint64_t size) {
    const Addr start = raw(addr);
    const AccessClass c = classify_access(start, size, addr.obj);
    count(c);
    ++result_.memory_accesses;
    if (opts_.backend != Backend::Oracle || c == AccessClass::InBounds) return;
    const bool padding_ok = c == AccessClass::InPadding && permits_.contains(in.site);
    const bool pow2_ok = opts_.mode.mode == Mode::Pow2 && opts_.pow2_permits && addr.obj != 0 &&
                         oracle::within_pow2_block(start, size, objects_[addr.obj].bounds);
    if (padding_ok || pow2_ok) {
      result_.permitted.push_back(event_clock_);
      trace_line("oracle #" + std::to_string(in.site) + " " + hex(start) + "+" + std::to_string(size) + " " +
                 std::string(oracle::to_string(c)) + " permitted");
      return;
    }
    ViolationReport r = report_at(in);
    r.site = in.site;
    r.ptr = start;
    r.access_size = size;
    if (addr.obj != 0) {
      r.ksa = objects_[addr.obj].bounds.sa;
      r.ea = objects_[addr.obj].bounds.ea;
    }
    r.reason = addr.obj != 0 && start < objects_[addr.obj].bounds.sa ? AbortReason::LowerBound : AbortReason::UpperBound;
    r.detail = std::string(oracle::to_string(c));
    trace_line("oracle #" + std::to_string(in.site) + " " + hex(start) + "+" + std::to_string(size) + " " + r.detail);
    violate(std::move(r));
  }

  void trace_line(std::string s) {
    if (opts_.trace) result_.trace.push_back(std::move(s));
  }

  // Checks -------------------------------------------------------------------

  void exec_check(const Frame& fr, const Instr& in) {
    const Value ksa = eval(fr, in.args[0]);
    const Value p = eval(fr, in.args[1]);
    const ir::CheckInfo& ci = in.check;

    if (ci.escape) {
      const bool equal = ci.guard && raw(p) == raw(ksa);
      const AccessClass c = equal ? AccessClass::InBounds
                            : p.obj == 0 ? AccessClass::InvalidEscape
                                         : oracle::classify_escape(raw(p), objects_[p.obj].bounds);
      count(c);
      if (opts_.backend == Backend::Oracle) {
        if (c == AccessClass::InvalidEscape && opts_.mode.mode == Mode::Pow2 && opts_.pow2_permits && p.obj != 0 &&
            oracle::within_pow2_block(raw(p), 0, objects_[p.obj].bounds)) {
          result_.permitted.push_back(event_clock_);
          trace_line("oracle escape #" + std::to_string(ci.site) + " " + hex(raw(p)) + " permitted");
          return;
        }
        if (c == AccessClass::InvalidEscape) {
          ViolationReport r = report_at(in);
          r.site = ci.site;
          r.escape = true;
          r.reason = AbortReason::EscapeInvariant;
          r.ptr = p.bits;
          r.ksa = ksa.bits;
          if (p.obj != 0) r.ea = objects_[p.obj].bounds.ea;
          r.detail = "invalid escape";
          trace_line("oracle escape #" + std::to_string(ci.site) + " " + hex(raw(p)) + " invalid");
          violate(std::move(r));
        }
        return;
      }
    } else if (opts_.backend == Backend::Oracle) {
      return;
    }

    CheckOutcome out;
    Addr ea = 0;
    if (ci.static_extent) {
      const Addr sa = raw(ksa);
      // Pow2 statics are A-aligned; their bound is the block, as for tagged ones.
      const std::uint64_t extent =
          opts_.mode.mode == Mode::Pow2 ? next_pow2(*ci.static_extent + 1) - 1 : *ci.static_extent;
      ea = sa + extent;
      out = ci.escape ? checker_.escape_static(raw(p), sa, extent)
                      : checker_.access_static(sa, extent, Checker::Range{raw(p), ci.lo, ci.hi});
    } else {
      const TaggedAddress k(ksa.bits);
      switch (opts_.mode.mode) {
        case Mode::Prism: ea = compute_ea(k); break;
        case Mode::Prism32: ea = decode_ea32(k); break;
        case Mode::Pow2: {
          const std::uint64_t a = pow2_aligned_size(k);
          ea = (raw(ksa) & ~(a - 1)) + a;
          break;
        }
      }
      out = ci.escape ? checker_.escape(TaggedAddress(p.bits), k, false, ci.guard)
                      : checker_.access(k, Checker::Range{raw(p), ci.lo, ci.hi}, ci.upper_only);
    }
    const Addr start = ci.escape ? raw(p) : raw(p) + static_cast<std::uint64_t>(ci.lo);
    const bool below = ci.escape ? raw(p) < raw(ksa) : (ci.lo < 0 && static_cast<std::uint64_t>(-ci.lo) > raw(p)) || start < raw(ksa);
    if (out.sa_fetched && below) ++result_.fetches_below_ksa;
    if (opts_.trace) {
      std::string line = "check #" + std::to_string(ci.site) + (ci.escape ? " escape" : "") +
                         (ci.hoisted ? " hoisted" : "") + " ksa=" + hex(ksa.bits) + " ptr=" + hex(p.bits) + " [" +
                         std::to_string(ci.lo) + "," + std::to_string(ci.hi) + ")";
      line += out.pass ? " pass" : " abort:" + std::string(to_string(out.reason));
      if (out.sa_fetched) line += " sa-fetch";
      trace_line(std::move(line));
    }
    if (out.pass) return;
    ViolationReport r = report_at(in);
    r.site = ci.site;
    r.reason = out.reason;
    r.escape = ci.escape;
    r.ksa = ksa.bits;
    r.ptr = p.bits;
    r.ea = ea;
    r.access_size = ci.hi >= ci.lo ? static_cast<std::uint64_t>(ci.hi - ci.lo) : 0;
    violate(std::move(r));
  }

  // Externs ------------------------------------------------------------------

  // Declared-length buffer use, checked against exact bounds before the
  // pointer is stripped.
  void contract(const Instr& in, Value p, std::int64_t n, const char* what) {
    if (n == 0) return;
    const Addr start = raw(p);
    AccessClass c = AccessClass::OutOfBounds;
    if (n > 0) c = classify_access(start, static_cast<std::uint64_t>(n), p.obj);
    if (c == AccessClass::InBounds) return;
    ViolationReport r = report_at(in);
    r.reason = n < 0 ? AbortReason::LowerBound : AbortReason::UpperBound;
    r.ptr = p.bits;
    r.access_size = static_cast<std::uint64_t>(n);
    if (p.obj != 0) {
      r.ksa = objects_[p.obj].bounds.sa;
      r.ea = objects_[p.obj].bounds.ea;
    }
    r.detail = "extern @" + in.callee + ": " + what + " length " + std::to_string(n) + " exceeds the buffer";
    trace_line("extern @" + in.callee + " " + what + " " + hex(start) + "+" + std::to_string(n) + " violation");
    violate(std::move(r));
  }

  Value exec_extern(Frame& fr, const Instr& in) {
    const ir::ExternSignature* sig = ir::find_extern(in.callee);
    if (sig == nullptr) fault("unknown extern @" + in.callee);
    std::vector<Value> a;
    for (const auto& o : in.args) a.push_back(eval(fr, o));
    auto i64 = [](Value v) { return static_cast<std::int64_t>(v.bits); };
    switch (sig->contract) {
      case ir::ExternContract::Pure: {
        if (in.callee == "abs") return Value{static_cast<std::uint64_t>(i64(a[0]) < 0 ? -i64(a[0]) : i64(a[0])), 0};
        if (in.callee == "min") return Value{static_cast<std::uint64_t>(std::min(i64(a[0]), i64(a[1]))), 0};
        if (in.callee == "max") return Value{static_cast<std::uint64_t>(std::max(i64(a[0]), i64(a[1]))), 0};
        if (in.callee == "hash") return Value{mix64(a[0].bits) & 0x7FFF'FFFF'FFFF'FFFFULL, 0};
        fault("no implementation for pure extern @" + in.callee);
      }
      case ir::ExternContract::FreshBuffer: {
        const std::int64_t n = i64(a[0]);
        if (n < 0) fault("extern @" + in.callee + ": negative size");
        const TaggedAddress t = heap_.alloc(static_cast<std::uint64_t>(n));
        return Value{t.value(), new_object(t)};
      }
      case ir::ExternContract::Copy: {
        const std::int64_t n = i64(a[2]);
        contract(in, a[0], n, "destination");
        contract(in, a[1], n, "source");
        if (n > 0) {
          const auto bytes = mem_.read(raw(a[1]), static_cast<std::uint64_t>(n));
          mem_.write(raw(a[0]), bytes);
          shadow_copy(raw(a[0]), raw(a[1]), static_cast<std::uint64_t>(n));
        }
        return Value{};
      }
      case ir::ExternContract::Fill: {
        const bool is_recv = sig->params.size() == 2;
        const std::int64_t n = is_recv ? i64(a[1]) : i64(a[2]);
        contract(in, a[0], n, "buffer");
        if (n > 0) {
          std::vector<std::uint8_t> bytes(static_cast<std::size_t>(n));
          for (std::size_t i = 0; i < bytes.size(); ++i) {
            bytes[i] = is_recv ? static_cast<std::uint8_t>(i * 31 + 7) : static_cast<std::uint8_t>(a[1].bits);
          }
          mem_.write(raw(a[0]), bytes);
          shadow_clear(raw(a[0]), static_cast<std::uint64_t>(n));
        }
        return is_recv ? Value{static_cast<std::uint64_t>(n), 0} : Value{};
      }
    }
    return Value{};
  }

  // Main loop ----------------------------------------------------------------

  void retire_frame(Frame& fr) {
    for (std::uint32_t o : fr.stack_objects) objects_[o].live = false;
    heap_.release_stack(fr.mark);
  }

  void loop() {
    while (true) {
      Frame& fr = frames_.back();
      const Function& fn = fn_of(fr);
      const Instr& in = fn.blocks[static_cast<std::size_t>(fr.block)].instrs[fr.ip];
      event_clock_ = result_.clock;
      if (in.op != Opcode::Check) tick();
      auto set = [&](Value v) { fr.values[static_cast<std::size_t>(in.result)] = v; };
      auto arg = [&](std::size_t k) { return eval(fr, in.args[k]); };
      auto iarg = [&](std::size_t k) { return static_cast<std::int64_t>(arg(k).bits); };
      ++fr.ip;

      switch (in.op) {
        case Opcode::Const: set(Value{static_cast<std::uint64_t>(in.imm), 0}); break;
        case Opcode::Null: set(Value{0, 0}); break;
        case Opcode::GlobalAddr: set(globals_.at(in.callee)); break;
        case Opcode::Alloc:
        case Opcode::AllocaDyn: {
          const std::int64_t n = iarg(0);
          if (n < 0) fault("negative allocation size " + std::to_string(n));
          const TaggedAddress t = in.op == Opcode::Alloc ? heap_.alloc(static_cast<std::uint64_t>(n))
                                                         : heap_.alloc_stack_dynamic(static_cast<std::uint64_t>(n));
          const std::uint32_t obj = new_object(t);
          if (in.op == Opcode::AllocaDyn) fr.stack_objects.push_back(obj);
          set(Value{t.value(), obj});
          break;
        }
        case Opcode::Alloca: {
          const TaggedAddress t = heap_.alloc_stack_escaped(static_cast<std::uint64_t>(in.imm));
          const std::uint32_t obj = new_object(t);
          fr.stack_objects.push_back(obj);
          set(Value{strip_tag(t, opts_.mode.mode), obj});
          break;
        }
        case Opcode::Free: {
          const Value p = arg(0);
          if (p.bits == 0) break;
          heap_.free(TaggedAddress(p.bits));
          if (p.obj != 0) objects_[p.obj].live = false;
          break;
        }
        case Opcode::Gep: {
          Value v = arg(0);
          std::uint64_t bits = v.bits + static_cast<std::uint64_t>(in.imm);
          for (const auto& t : in.terms) {
            bits += fr.values[static_cast<std::size_t>(t.index)].bits * static_cast<std::uint64_t>(t.scale);
          }
          set(Value{bits, v.obj});
          break;
        }
        case Opcode::Load: {
          const Value addr = arg(0);
          const auto size = static_cast<std::uint64_t>(in.imm);
          observe_access(in, addr, size);
          const Addr a = raw(addr);
          if (in.type == Type::Ptr) {
            const auto it = shadow_.find(a);
            set(Value{mem_.read_u64(a), it == shadow_.end() ? 0U : it->second});
          } else {
            set(Value{mem_.read_uint(a, static_cast<unsigned>(size)), 0});
          }
          break;
        }
        case Opcode::Store: {
          const Value addr = arg(0);
          const Value v = arg(1);
          const auto size = static_cast<std::uint64_t>(in.imm);
          observe_access(in, addr, size);
          const Addr a = raw(addr);
          mem_.write_uint(a, static_cast<unsigned>(size), v.bits);
          shadow_clear(a, size);
          if (in.type == Type::Ptr && v.obj != 0) shadow_[a] = v.obj;
          break;
        }
        case Opcode::Phi: fault("phi after the head of a block");
        case Opcode::Select: set(iarg(0) != 0 ? arg(1) : arg(2)); break;
        case Opcode::Call: {
          std::vector<Value> args;
          for (std::size_t k = 0; k < in.args.size(); ++k) args.push_back(arg(k));
          const auto it = fn_index_.find(in.callee);
          if (it == fn_index_.end()) fault("call to unknown function @" + in.callee);
          push_frame(it->second, args, in.result);
          break;  // `fr` may dangle from here on
        }
        case Opcode::Extern: {
          const Value v = exec_extern(fr, in);
          if (in.result != ir::kNoValue) set(v);
          break;
        }
        case Opcode::Bin: set(Value{binary(in.bin, arg(0).bits, arg(1).bits), 0}); break;
        case Opcode::Cmp:
        case Opcode::PtrCmp:
          set(Value{ir::evaluate(in.cmp, iarg(0), iarg(1)) ? 1U : 0U, 0});
          break;
        case Opcode::PtrSub: set(Value{arg(0).bits - arg(1).bits, 0}); break;
        case Opcode::PtrToInt: set(Value{arg(0).bits, 0}); break;
        case Opcode::Mask: {
          const Value v = arg(0);
          set(Value{v.bits & mask_, v.obj});
          break;
        }
        case Opcode::Retag: {
          const Value p = arg(0);
          const Value root = arg(1);
          const AllocationRecord* rec = heap_.find_by_sa(raw(root));
          if (rec == nullptr) fault("retag against an unknown object at " + hex(raw(root)));
          set(Value{tag_pointer(raw(p), *rec).value(), p.obj});
          break;
        }
        case Opcode::Check: exec_check(fr, in); break;
        case Opcode::Ret: {
          const Value v = in.args.empty() ? Value{} : arg(0);
          const ValueId to = fr.ret_to;
          retire_frame(fr);
          frames_.pop_back();
          if (frames_.empty()) {
            result_.exit = ExitKind::Ok;
            result_.ret = static_cast<std::int64_t>(v.bits);
            return;
          }
          if (to != ir::kNoValue) frames_.back().values[static_cast<std::size_t>(to)] = v;
          break;
        }
        case Opcode::Br: enter_block(fr, in.blocks[0], fr.block); break;
        case Opcode::CondBr: enter_block(fr, iarg(0) != 0 ? in.blocks[0] : in.blocks[1], fr.block); break;
      }
    }
  }

  std::uint64_t binary(ir::BinKind k, std::uint64_t a, std::uint64_t b) {
    const auto sa = static_cast<std::int64_t>(a);
    const auto sb = static_cast<std::int64_t>(b);
    switch (k) {
      case ir::BinKind::Add: return a + b;
      case ir::BinKind::Sub: return a - b;
      case ir::BinKind::Mul: return a * b;
      case ir::BinKind::Div:
      case ir::BinKind::Rem:
        if (sb == 0) fault("division by zero");
        if (sa == INT64_MIN && sb == -1) return k == ir::BinKind::Div ? a : 0;
        return static_cast<std::uint64_t>(k == ir::BinKind::Div ? sa / sb : sa % sb);
      case ir::BinKind::And: return a & b;
      case ir::BinKind::Or: return a | b;
      case ir::BinKind::Xor: return a ^ b;
      case ir::BinKind::Shl: return a << (b & 63);
      case ir::BinKind::Shr: return static_cast<std::uint64_t>(sa >> (b & 63));
    }
    return 0;
  }

  const ir::Program& prog_;
  RunOptions opts_;
  SimMemory mem_;
  Heap heap_;
  Checker checker_;
  std::uint64_t mask_;
  std::unordered_set<int> permits_;
  std::unordered_map<std::string, int> fn_index_;
  std::unordered_map<std::string, Value> globals_;
  std::vector<Object> objects_;
  std::map<Addr, std::uint32_t> shadow_;
  std::vector<Frame> frames_;
  RunResult result_;
  std::uint64_t event_clock_ = 0;  // clock before the current instruction
};

}  // namespace

RunResult run(const ir::Program& program, const std::vector<std::int64_t>& inputs, const RunOptions& options) {
  Machine m(program, options);
  return m.run(inputs);
}

}  // namespace boundtag::vm
