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

#include "boundtag/oracle.hpp"

#include <algorithm>

namespace boundtag::oracle {

std::string_view to_string(AccessClass c) {
  switch (c) {
    case AccessClass::InBounds: return "IN_BOUNDS";
    case AccessClass::InPadding: return "IN_PADDING";
    case AccessClass::OutOfBounds: return "OOB";
    case AccessClass::InvalidEscape: return "INVALID_ESCAPE";
  }
  return "?";
}

std::string_view to_string(Divergence d) {
  switch (d) {
    case Divergence::None: return "none";
    case Divergence::FalseAbort: return "false_abort";
    case Divergence::MissedViolation: return "missed_violation";
    case Divergence::ResultMismatch: return "result_mismatch";
    case Divergence::ExitMismatch: return "exit_mismatch";
  }
  return "?";
}

ObjectBounds bounds_of(const AllocationRecord& rec) {
  ObjectBounds b;
  b.sa = rec.sa;
  b.ea = rec.ea;
  b.q = rec.q;
  b.align = rec.mode == Mode::Pow2 ? (1ULL << rec.log2_align) : 0;
  return b;
}

AccessClass classify(Addr start, std::uint64_t size, const ObjectBounds& obj) {
  Addr end = 0;
  if (__builtin_add_overflow(start, size, &end) || start < obj.sa) return AccessClass::OutOfBounds;
  if (end <= obj.ea) return AccessClass::InBounds;
  if (end <= obj.ea + obj.q) return AccessClass::InPadding;
  return AccessClass::OutOfBounds;
}

AccessClass classify(Addr start, std::uint64_t size, const std::vector<AllocationRecord>& records) {
  for (const auto& rec : records) {
    const ObjectBounds b = bounds_of(rec);
    if (start >= b.sa && start < std::max(b.ea + b.q, b.sa + 1)) return classify(start, size, b);
  }
  return AccessClass::OutOfBounds;
}

AccessClass classify_escape(Addr p, const ObjectBounds& obj) {
  return p >= obj.sa && p <= obj.ea ? AccessClass::InBounds : AccessClass::InvalidEscape;
}

bool within_pow2_block(Addr start, std::uint64_t size, const ObjectBounds& obj) {
  Addr end = 0;
  if (obj.align == 0 || __builtin_add_overflow(start, size, &end)) return false;
  return start >= obj.sa && end <= obj.sa + obj.align - 1;
}

Verdict compare(const vm::RunResult& checked, const vm::RunResult& reference, const std::vector<int>& early_sites) {
  using vm::ExitKind;
  Verdict v;
  v.checked = checked.exit;
  v.reference = reference.exit;

  const std::uint64_t stop = checked.violation ? checked.violation->clock : checked.clock;
  v.allowed_divergences = static_cast<std::uint64_t>(
      std::count_if(reference.permitted.begin(), reference.permitted.end(), [&](std::uint64_t c) { return c < stop; }));

  auto fail = [&](Divergence d, std::string why) {
    v.agreement = false;
    v.divergence = d;
    v.detail = std::move(why);
    return v;
  };
  auto at_permitted = [&](std::uint64_t c) {
    return std::find(reference.permitted.begin(), reference.permitted.end(), c) != reference.permitted.end();
  };
  // A checked abort strictly before the reference's stop point is fine when
  // it hits a tolerated-but-real bad access, or comes from a merged check.
  auto early_ok = [&](const vm::ViolationReport& r) {
    return at_permitted(r.clock) || std::find(early_sites.begin(), early_sites.end(), r.site) != early_sites.end();
  };

  if (reference.exit == ExitKind::Violation) {
    const std::uint64_t rc = reference.violation->clock;
    if (checked.exit != ExitKind::Violation) {
      return fail(Divergence::MissedViolation, "reference aborted at clock " + std::to_string(rc) + " (" +
                                                   reference.violation->detail + "), checked run did not");
    }
    const std::uint64_t cc = checked.violation->clock;
    if (cc > rc) {
      return fail(Divergence::MissedViolation,
                  "checked run aborted at clock " + std::to_string(cc) + ", reference at " + std::to_string(rc));
    }
    if (cc < rc) {
      if (!early_ok(*checked.violation)) {
        return fail(Divergence::FalseAbort, "checked run aborted at clock " + std::to_string(cc) + " (site #" +
                                                std::to_string(checked.violation->site) + "), reference at " +
                                                std::to_string(rc));
      }
      v.early_abort = true;
    }
    return v;
  }

  if (reference.exit == ExitKind::Ok) {
    if (checked.exit == ExitKind::Ok) {
      if (checked.ret != reference.ret) {
        return fail(Divergence::ResultMismatch, "return values differ: " + std::to_string(checked.ret) + " vs " +
                                                    std::to_string(reference.ret));
      }
      return v;
    }
    if (checked.exit == ExitKind::Violation) {
      if (at_permitted(checked.violation->clock)) return v;
      return fail(Divergence::FalseAbort, "checked run aborted at site #" + std::to_string(checked.violation->site) +
                                              " (clock " + std::to_string(checked.violation->clock) +
                                              "), reference finished");
    }
    return fail(Divergence::ExitMismatch, "checked run faulted: " + checked.fault);
  }

  // Reference faulted.
  if (checked.exit == ExitKind::Fault) return v;
  if (checked.exit == ExitKind::Violation && checked.violation->clock <= reference.clock &&
      early_ok(*checked.violation)) {
    return v;
  }
  return fail(Divergence::ExitMismatch, "reference faulted (" + reference.fault + "), checked run exited " +
                                            std::string(vm::to_string(checked.exit)));
}

namespace {

std::vector<int> early_sites_of(const InstrumentResult& r) {
  std::vector<int> out;
  for (const auto& s : r.sites) {
    if (is_materialized(s.status) && (s.widened || s.kind == SiteKind::LoopHoisted)) out.push_back(s.id);
  }
  return out;
}

vm::RunOptions checked_options(const DifferentialOptions& o) {
  vm::RunOptions ro;
  ro.backend = vm::Backend::Prism;
  ro.mode = o.mode;
  ro.step_limit = o.step_limit;
  ro.inject_upper_off_by_one = o.inject_upper_off_by_one;
  return ro;
}

}  // namespace

Verdict differential_run(const ir::Program& program, const std::vector<std::int64_t>& inputs,
                         const DifferentialOptions& options) {
  const InstrumentResult checked_ir = instrument(program, {options.mode, options.opts});
  const InstrumentResult reference_ir = instrument(program, {options.mode, OptSet::none()});
  const vm::RunResult checked = vm::run(checked_ir.program, inputs, checked_options(options));
  vm::RunOptions ro = vm::reference_options(checked_ir, options.mode);
  ro.step_limit = options.step_limit;
  const vm::RunResult reference = vm::run(reference_ir.program, inputs, ro);
  return compare(checked, reference, early_sites_of(checked_ir));
}

Verdict optimization_dual_run(const ir::Program& program, const std::vector<std::int64_t>& inputs,
                              const DifferentialOptions& options) {
  OptSet base = OptSet::none();
  base.qpad = options.opts.qpad;
  const InstrumentResult checked_ir = instrument(program, {options.mode, options.opts});
  const InstrumentResult baseline_ir = instrument(program, {options.mode, base});
  const vm::RunResult checked = vm::run(checked_ir.program, inputs, checked_options(options));
  const vm::RunResult baseline = vm::run(baseline_ir.program, inputs, checked_options(options));
  return compare(checked, baseline, early_sites_of(checked_ir));
}

}  // namespace boundtag::oracle
