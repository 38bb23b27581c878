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

#include "boundtag/stats.hpp"

#include <json.hpp>

namespace boundtag {

namespace {

std::string value_name(const InstrumentResult& r, const CheckSite& s, ir::ValueId v) {
  if (v == ir::kNoValue) return "";
  return "%" + r.program.functions[static_cast<std::size_t>(s.function)].name_of(v);
}

nlohmann::ordered_json violation_json(const vm::ViolationReport& v) {
  nlohmann::ordered_json j;
  j["site"] = v.site;
  j["reason"] = std::string(to_string(v.reason));
  j["escape"] = v.escape;
  j["ksa"] = v.ksa;
  j["ptr"] = v.ptr;
  j["ea"] = v.ea;
  j["access_size"] = v.access_size;
  j["function"] = v.function;
  j["block"] = v.block;
  j["index"] = v.index;
  j["line"] = v.line;
  j["clock"] = v.clock;
  j["detail"] = v.detail;
  return j;
}

}  // namespace

StatsReport make_stats(const InstrumentResult& result, const vm::RunResult* run) {
  StatsReport s;
  s.mode = std::string(to_string(result.options.mode.mode));
  s.q = result.options.mode.q;
  s.opts = result.options.opts.to_string();
  for (const auto& site : result.sites) {
    ++s.static_checks_inserted;
    switch (site.status) {
      case SiteStatus::Active: break;
      case SiteStatus::LowerBoundDropped: ++s.lower_bound; break;
      case SiteStatus::ElidedByQ: ++s.elided_by.qpad; break;
      case SiteStatus::ElidedByCombine: ++s.elided_by.combine; break;
      case SiteStatus::ElidedByDominance: ++s.elided_by.dominance; break;
      case SiteStatus::ElidedByHoist: ++s.elided_by.hoist; break;
    }
    if (is_materialized(site.status)) {
      ++s.active;
      if (site.kind != SiteKind::Escape) ++s.active_access;
    }
    SiteRow row;
    row.id = site.id;
    row.kind = std::string(to_string(site.kind));
    row.status = std::string(to_string(site.status));
    row.function = result.function_names[static_cast<std::size_t>(site.function)];
    row.ksa = value_name(result, site, site.ksa);
    row.ptr = value_name(result, site, site.ptr);
    row.lo = site.lo;
    row.hi = site.hi;
    for (const auto& [v, scale] : site.terms) {
      if (!row.terms.empty()) row.terms += " + ";
      row.terms += value_name(result, site, v) + "*" + std::to_string(scale);
    }
    row.covered_by = site.covered_by;
    row.widened = site.widened;
    row.guarded = site.guarded;
    row.is_static = site.static_extent.has_value();
    s.sites.push_back(std::move(row));
  }
  if (run != nullptr) {
    RunSummary r;
    r.exit = std::string(vm::to_string(run->exit));
    r.ret = run->ret;
    r.dynamic_checks = run->checks.dynamic_checks;
    r.sa_fetches = run->checks.sa_fetches;
    r.sa_fetch_fraction = static_cast<double>(r.sa_fetches) / static_cast<double>(std::max<std::uint64_t>(1, r.dynamic_checks));
    r.violations = run->exit == vm::ExitKind::Violation ? 1 : 0;
    r.violation = run->violation;
    r.fault = run->fault;
    s.run = std::move(r);
  }
  return s;
}

std::string to_json(const StatsReport& s, int indent) {
  nlohmann::ordered_json j;
  j["schema"] = s.schema;
  j["mode"] = s.mode;
  j["q"] = s.q;
  j["opts"] = s.opts;
  j["static_checks_inserted"] = s.static_checks_inserted;
  j["active"] = s.active;
  j["active_access"] = s.active_access;
  j["elided_by"] = {{"qpad", s.elided_by.qpad},
                    {"combine", s.elided_by.combine},
                    {"dominance", s.elided_by.dominance},
                    {"hoist", s.elided_by.hoist}};
  j["lower_bound"] = s.lower_bound;
  if (s.run) {
    j["exit"] = s.run->exit;
    j["ret"] = s.run->ret;
    j["dynamic_checks"] = s.run->dynamic_checks;
    j["sa_fetches"] = s.run->sa_fetches;
    j["sa_fetch_fraction"] = s.run->sa_fetch_fraction;
    j["violations"] = s.run->violations;
    j["violation"] = s.run->violation ? violation_json(*s.run->violation) : nlohmann::ordered_json(nullptr);
    if (!s.run->fault.empty()) j["fault"] = s.run->fault;
  }
  auto& rows = j["sites"] = nlohmann::ordered_json::array();
  for (const auto& r : s.sites) {
    nlohmann::ordered_json row;
    row["id"] = r.id;
    row["kind"] = r.kind;
    row["status"] = r.status;
    row["function"] = r.function;
    row["ksa"] = r.ksa;
    row["ptr"] = r.ptr;
    row["lo"] = r.lo;
    row["hi"] = r.hi;
    row["terms"] = r.terms;
    row["covered_by"] = r.covered_by;
    row["widened"] = r.widened;
    row["guarded"] = r.guarded;
    row["static"] = r.is_static;
    rows.push_back(std::move(row));
  }
  return j.dump(indent);
}

std::string to_json(const vm::ViolationReport& v, int indent) { return violation_json(v).dump(indent); }

std::size_t count_active(const InstrumentResult& result, std::string_view fn, SiteKind kind) {
  std::size_t n = 0;
  for (const auto& s : result.sites) {
    if (s.kind != kind || !is_materialized(s.status)) continue;
    if (!fn.empty() && result.function_names[static_cast<std::size_t>(s.function)] != fn) continue;
    ++n;
  }
  return n;
}

}  // namespace boundtag
