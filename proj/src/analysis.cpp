// SPDX-License-Identifier: Apache-2.0
#include "tracesim/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "json_strict.hpp"
#include "tracesim/error.hpp"

namespace tracesim {
namespace {

constexpr std::array<std::string_view, 5> kCategoryNames = {"compute", "runtime_overhead", "sync_lock",
                                                             "load_imbalance", "sequential"};

constexpr double kVerdictFloor = 0.01;

Cycles& slot(CycleStack& stack, StackCategory category) {
  switch (category) {
    case StackCategory::Compute: return stack.compute;
    case StackCategory::RuntimeOverhead: return stack.runtime_overhead;
    case StackCategory::SyncLock: return stack.sync_lock;
    case StackCategory::LoadImbalance: return stack.load_imbalance;
    case StackCategory::Sequential: return stack.sequential;
  }
  return stack.compute;
}

std::string format_double(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

double percent(Cycles part, Cycles total) {
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(total);
}

std::optional<DirectiveType> directive_type_from_string(std::string_view s) {
  for (auto t : {DirectiveType::ParallelFor, DirectiveType::Critical, DirectiveType::Single}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

std::string text_report(const Report& report) {
  std::string out = "Parallelization report\n";
  if (!report.entries.empty()) {
    out += "  sequential baseline: " + std::to_string(report.entries.front().seq_baseline) + " cycles\n";
  }
  out += "\n";
  char line[256];
  std::snprintf(line, sizeof line, "%6s %14s %9s %9s %9s %9s %9s %9s\n", "cores", "makespan", "speedup",
                "compute%", "runtime%", "lock%", "imbal%", "serial%");
  out += line;
  for (const auto& e : report.entries) {
    std::snprintf(line, sizeof line, "%6u %14llu %9.4f %9.2f %9.2f %9.2f %9.2f %9.2f\n", e.cores,
                  static_cast<unsigned long long>(e.makespan), e.speedup, 100.0 * e.stack.share(StackCategory::Compute),
                  100.0 * e.stack.share(StackCategory::RuntimeOverhead), 100.0 * e.stack.share(StackCategory::SyncLock),
                  100.0 * e.stack.share(StackCategory::LoadImbalance), 100.0 * e.stack.share(StackCategory::Sequential));
    out += line;
  }

  bool any_directive = false;
  for (const auto& e : report.entries) any_directive |= !e.directives.empty();
  if (any_directive) {
    out += "\ndirectives (cycles under each bound region):\n";
    for (const auto& e : report.entries) {
      for (const auto& d : e.directives) {
        std::snprintf(line, sizeof line, "  p=%-3u %-12s %-24s instances=%llu cycles=%llu\n", e.cores,
                      std::string(to_string(d.type)).c_str(), d.target.c_str(),
                      static_cast<unsigned long long>(d.instances), static_cast<unsigned long long>(d.cycles));
        out += line;
      }
    }
  }
  if (!report.diagnostics.empty()) {
    out += "\ndiagnostics:\n";
    for (const auto& d : report.diagnostics) out += "  " + d + "\n";
  }
  out += "\nbottleneck: " + report.bottleneck + "\n";
  return out;
}

std::string csv_report(const Report& report) {
  std::string out = "cores,category,cycles,percent\n";
  for (const auto& e : report.entries) {
    for (StackCategory c : kStackCategories) {
      out += std::to_string(e.cores) + "," + std::string(to_string(c)) + "," + std::to_string(e.stack[c]) + "," +
             format_double("%.4f", percent(e.stack[c], e.stack.total)) + "\n";
    }
  }
  return out;
}

nlohmann::ordered_json stack_json(const CycleStack& s) {
  nlohmann::ordered_json j;
  j["cores"] = s.cores;
  j["total"] = s.total;
  for (StackCategory c : kStackCategories) j[std::string(to_string(c))] = s[c];
  return j;
}

std::string structured_report(const Report& report) {
  nlohmann::ordered_json doc;
  doc["version"] = 1;
  doc["bottleneck"] = report.bottleneck;
  doc["diagnostics"] = report.diagnostics;
  auto entries = nlohmann::ordered_json::array();
  for (const auto& e : report.entries) {
    nlohmann::ordered_json j;
    j["cores"] = e.cores;
    j["makespan"] = e.makespan;
    j["seq_baseline"] = e.seq_baseline;
    j["speedup"] = e.speedup;
    j["stack"] = stack_json(e.stack);
    auto dirs = nlohmann::ordered_json::array();
    for (const auto& d : e.directives) {
      dirs.push_back({{"directive", d.directive},
                      {"target", d.target},
                      {"type", std::string(to_string(d.type))},
                      {"instances", d.instances},
                      {"cycles", d.cycles}});
    }
    j["directives"] = std::move(dirs);
    entries.push_back(std::move(j));
  }
  doc["entries"] = std::move(entries);
  return doc.dump(2) + "\n";
}

}  // namespace

std::string_view to_string(StackCategory category) noexcept {
  return kCategoryNames[static_cast<std::size_t>(category)];
}

StackCategory category_of(SegmentTag tag) noexcept {
  switch (tag) {
    case SegmentTag::Compute: return StackCategory::Compute;
    case SegmentTag::OverheadFork:
    case SegmentTag::OverheadDispatch:
    case SegmentTag::OverheadJoin: return StackCategory::RuntimeOverhead;
    case SegmentTag::WaitLock: return StackCategory::SyncLock;
    case SegmentTag::WaitBarrier: return StackCategory::LoadImbalance;
    case SegmentTag::IdleSequential: return StackCategory::Sequential;
  }
  return StackCategory::Compute;
}

Cycles CycleStack::operator[](StackCategory category) const noexcept {
  switch (category) {
    case StackCategory::Compute: return compute;
    case StackCategory::RuntimeOverhead: return runtime_overhead;
    case StackCategory::SyncLock: return sync_lock;
    case StackCategory::LoadImbalance: return load_imbalance;
    case StackCategory::Sequential: return sequential;
  }
  return 0;
}

double CycleStack::share(StackCategory category) const noexcept {
  return total == 0 ? 0.0 : static_cast<double>((*this)[category]) / static_cast<double>(total);
}

void check_tiling(const ScheduleResult& result) {
  if (result.events.size() != result.cores) {
    fail(ErrorKind::NonTiledResult, "result has " + std::to_string(result.events.size()) + " timelines for " +
                                        std::to_string(result.cores) + " cores");
  }
  for (unsigned c = 0; c < result.cores; ++c) {
    Cycles cursor = 0;
    for (const auto& ev : result.events[c]) {
      if (ev.core != c || ev.start != cursor || ev.end < ev.start) {
        fail(ErrorKind::NonTiledResult, "core " + std::to_string(c) + " timeline breaks at cycle " +
                                            std::to_string(cursor));
      }
      cursor = ev.end;
    }
    if (cursor != result.makespan) {
      fail(ErrorKind::NonTiledResult, "core " + std::to_string(c) + " timeline ends at " + std::to_string(cursor) +
                                          ", makespan is " + std::to_string(result.makespan));
    }
  }
}

CycleStack cycle_stack(const ScheduleResult& result) {
  check_tiling(result);
  CycleStack stack;
  stack.cores = result.cores;
  stack.total = static_cast<Cycles>(result.cores) * result.makespan;
  for (const auto& timeline : result.events) {
    for (const auto& ev : timeline) slot(stack, category_of(ev.tag)) += ev.length();
  }
  return stack;
}

double speedup(const ScheduleResult& result) {
  if (result.makespan == 0) fail(ErrorKind::ZeroMakespan, "speedup of a zero-length schedule is undefined");
  return static_cast<double>(result.seq_baseline) / static_cast<double>(result.makespan);
}

SpeedupCurve speedup_curve(std::span<const ScheduleResult> results) {
  SpeedupCurve curve;
  for (const auto& r : results) {
    if (!curve.points.empty() && r.cores <= curve.points.back().cores) {
      fail(ErrorKind::InvalidParams, "speedup curve needs strictly increasing core counts");
    }
    curve.points.push_back({r.cores, r.makespan, speedup(r)});
  }
  return curve;
}

ErrorMetrics error_metrics(std::span<const double> estimates, std::span<const double> references) {
  if (estimates.size() != references.size() || estimates.empty()) {
    fail(ErrorKind::LengthMismatch, "error_metrics needs equal, non-zero lengths (got " +
                                        std::to_string(estimates.size()) + " and " +
                                        std::to_string(references.size()) + ")");
  }
  ErrorMetrics m;
  double sum = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    if (references[i] == 0.0) fail(ErrorKind::ZeroReference, "reference " + std::to_string(i) + " is zero");
    const double e = 100.0 * (estimates[i] - references[i]) / references[i];
    sum += e;
    m.max_abs_pct = std::max(m.max_abs_pct, std::abs(e));
  }
  m.mpe = sum / static_cast<double>(estimates.size());
  return m;
}

std::string bottleneck_verdict(std::span<const ReportEntry> entries) {
  if (entries.empty()) return std::string(kComputeBoundVerdict);
  const ReportEntry* widest = &entries.front();
  for (const auto& e : entries) {
    if (e.cores >= widest->cores) widest = &e;
  }
  StackCategory best = StackCategory::Compute;
  Cycles best_cycles = 0;
  for (StackCategory c : kStackCategories) {
    if (c == StackCategory::Compute) continue;
    if (widest->stack[c] > best_cycles) {
      best = c;
      best_cycles = widest->stack[c];
    }
  }
  if (best == StackCategory::Compute || widest->stack.share(best) < kVerdictFloor) {
    return std::string(kComputeBoundVerdict);
  }
  return std::string(to_string(best));
}

Report build_report(std::span<const ScheduleResult> results) {
  Report report;
  for (const auto& r : results) {
    ReportEntry e;
    e.cores = r.cores;
    e.makespan = r.makespan;
    e.seq_baseline = r.seq_baseline;
    e.speedup = speedup(r);
    e.stack = cycle_stack(r);
    e.directives = r.directive_stats;
    report.entries.push_back(std::move(e));
    for (const auto& d : r.diagnostics) {
      if (std::find(report.diagnostics.begin(), report.diagnostics.end(), d) == report.diagnostics.end()) {
        report.diagnostics.push_back(d);
      }
    }
  }
  report.bottleneck = bottleneck_verdict(report.entries);
  return report;
}

ReportFormat report_format_from_string(std::string_view name) {
  if (name == "text") return ReportFormat::Text;
  if (name == "json" || name == "structured") return ReportFormat::Structured;
  if (name == "csv") return ReportFormat::Csv;
  fail(ErrorKind::UnsupportedFormat, "unsupported report format \"" + std::string(name) + "\"");
}

std::string emit_report(const Report& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::Text: return text_report(report);
    case ReportFormat::Structured: return structured_report(report);
    case ReportFormat::Csv: return csv_report(report);
  }
  fail(ErrorKind::UnsupportedFormat, "unsupported report format");
}

std::string emit_report(std::span<const ScheduleResult> results, ReportFormat format) {
  if (results.empty()) fail(ErrorKind::InvalidParams, "a report needs at least one result");
  return emit_report(build_report(results), format);
}

Report parse_structured_report(std::string_view text) {
  using detail::Json;
  Json doc = detail::parse_strict(text, "report");
  detail::expect_object(doc, "report");
  Report report;
  report.bottleneck = detail::as_string(detail::require(doc, "bottleneck", "report"), "report.bottleneck");
  for (const auto& d : detail::require(doc, "diagnostics", "report")) {
    report.diagnostics.push_back(detail::as_string(d, "report.diagnostics"));
  }
  const Json& entries = detail::require(doc, "entries", "report");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string at = "report.entries[" + std::to_string(i) + "]";
    const Json& j = entries[i];
    ReportEntry e;
    e.cores = static_cast<unsigned>(detail::as_u64(detail::require(j, "cores", at), at + ".cores"));
    e.makespan = detail::as_u64(detail::require(j, "makespan", at), at + ".makespan");
    e.seq_baseline = detail::as_u64(detail::require(j, "seq_baseline", at), at + ".seq_baseline");
    e.speedup = detail::as_double(detail::require(j, "speedup", at), at + ".speedup");
    const Json& s = detail::require(j, "stack", at);
    e.stack.cores = static_cast<unsigned>(detail::as_u64(detail::require(s, "cores", at), at + ".stack.cores"));
    e.stack.total = detail::as_u64(detail::require(s, "total", at), at + ".stack.total");
    for (StackCategory c : kStackCategories) {
      const std::string name(to_string(c));
      slot(e.stack, c) = detail::as_u64(detail::require(s, name, at + ".stack"), at + ".stack." + name);
    }
    for (const auto& dj : detail::require(j, "directives", at)) {
      DirectiveStats d;
      d.directive = detail::as_u64(detail::require(dj, "directive", at), at + ".directive");
      d.target = detail::as_string(detail::require(dj, "target", at), at + ".target");
      const std::string type = detail::as_string(detail::require(dj, "type", at), at + ".type");
      auto parsed = directive_type_from_string(type);
      if (!parsed) fail(ErrorKind::SyntaxError, at + ": unknown directive type \"" + type + "\"");
      d.type = *parsed;
      d.instances = detail::as_u64(detail::require(dj, "instances", at), at + ".instances");
      d.cycles = detail::as_u64(detail::require(dj, "cycles", at), at + ".cycles");
      e.directives.push_back(std::move(d));
    }
    report.entries.push_back(std::move(e));
  }
  return report;
}

std::string emit_gantt(const ScheduleResult& result) {
  std::vector<const ScheduleEvent*> rows;
  for (const auto& timeline : result.events) {
    for (const auto& ev : timeline) rows.push_back(&ev);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const ScheduleEvent* a, const ScheduleEvent* b) {
    return a->start != b->start ? a->start < b->start : a->core < b->core;
  });
  std::string out = "core,tag,source,start,end\n";
  out.reserve(out.size() + rows.size() * 40);
  for (const ScheduleEvent* ev : rows) {
    out += std::to_string(ev->core);
    out += ',';
    out += to_string(ev->tag);
    out += ',';
    out += ev->source;
    out += ',';
    out += std::to_string(ev->start);
    out += ',';
    out += std::to_string(ev->end);
    out += '\n';
  }
  return out;
}

std::vector<ScheduleEvent> parse_gantt(std::string_view csv) {
  std::vector<ScheduleEvent> events;
  std::size_t line_no = 0;
  auto parse_u64 = [&](std::string_view field) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      fail(ErrorKind::SyntaxError, "gantt line " + std::to_string(line_no) + ": bad number \"" +
                                       std::string(field) + "\"");
    }
    return v;
  };
  while (!csv.empty()) {
    const auto nl = csv.find('\n');
    std::string_view line = csv.substr(0, nl);
    csv = nl == std::string_view::npos ? std::string_view{} : csv.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != "core,tag,source,start,end") fail(ErrorKind::SyntaxError, "gantt: unexpected header");
      continue;
    }
    std::array<std::string_view, 5> fields;
    for (std::size_t f = 0; f < 5; ++f) {
      const auto comma = line.find(',');
      if ((comma == std::string_view::npos) != (f == 4)) {
        fail(ErrorKind::SyntaxError, "gantt line " + std::to_string(line_no) + ": expected 5 fields");
      }
      fields[f] = line.substr(0, comma);
      line = comma == std::string_view::npos ? std::string_view{} : line.substr(comma + 1);
    }
    auto tag = segment_tag_from_string(fields[1]);
    if (!tag) fail(ErrorKind::SyntaxError, "gantt line " + std::to_string(line_no) + ": unknown tag");
    events.push_back(ScheduleEvent{static_cast<unsigned>(parse_u64(fields[0])), *tag, parse_u64(fields[3]),
                                   parse_u64(fields[4]), std::string(fields[2])});
  }
  return events;
}

}  // namespace tracesim
