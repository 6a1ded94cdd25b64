// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tracesim/scheduler.hpp"

namespace tracesim {

enum class StackCategory { Compute, RuntimeOverhead, SyncLock, LoadImbalance, Sequential };

inline constexpr std::array<StackCategory, 5> kStackCategories = {
    StackCategory::Compute, StackCategory::RuntimeOverhead, StackCategory::SyncLock,
    StackCategory::LoadImbalance, StackCategory::Sequential,
};

std::string_view to_string(StackCategory category) noexcept;
StackCategory category_of(SegmentTag tag) noexcept;

/// Decomposition of cores x makespan. The five categories always sum to
/// `total` exactly.
struct CycleStack {
  unsigned cores = 0;
  Cycles total = 0;
  Cycles compute = 0;
  Cycles runtime_overhead = 0;  // fork, dispatch, join, critical enter/exit
  Cycles sync_lock = 0;
  Cycles load_imbalance = 0;    // barrier waits
  Cycles sequential = 0;        // idle while serial code runs elsewhere

  Cycles operator[](StackCategory category) const noexcept;
  double share(StackCategory category) const noexcept;  // fraction of total, 0 when total is 0

  bool operator==(const CycleStack&) const = default;
};

/// Throws NonTiledResult unless every core's events tile [0, makespan].
void check_tiling(const ScheduleResult& result);

CycleStack cycle_stack(const ScheduleResult& result);

/// Sequential trace duration over simulated makespan.
double speedup(const ScheduleResult& result);

struct SpeedupPoint {
  unsigned cores = 0;
  Cycles makespan = 0;
  double speedup = 0.0;
};

struct SpeedupCurve {
  std::vector<SpeedupPoint> points;
};

/// Requires strictly increasing core counts.
SpeedupCurve speedup_curve(std::span<const ScheduleResult> results);

struct ErrorMetrics {
  double mpe = 0.0;          // mean signed percentage error
  double max_abs_pct = 0.0;  // largest absolute percentage error
};

/// Percentage error of each estimate against its reference,
/// 100 * (estimate - reference) / reference.
ErrorMetrics error_metrics(std::span<const double> estimates, std::span<const double> references);

struct ReportEntry {
  unsigned cores = 0;
  Cycles makespan = 0;
  Cycles seq_baseline = 0;
  double speedup = 0.0;
  CycleStack stack;
  std::vector<DirectiveStats> directives;

  bool operator==(const ReportEntry&) const = default;
};

inline constexpr std::string_view kComputeBoundVerdict = "none (compute-bound)";

struct Report {
  std::vector<ReportEntry> entries;  // in simulation order
  std::vector<std::string> diagnostics;
  std::string bottleneck;

  bool operator==(const Report&) const = default;
};

/// Largest non-compute category at the highest simulated core count, or
/// kComputeBoundVerdict when every such category is under 1% of cycles.
std::string bottleneck_verdict(std::span<const ReportEntry> entries);

Report build_report(std::span<const ScheduleResult> results);

enum class ReportFormat { Text, Structured, Csv };

ReportFormat report_format_from_string(std::string_view name);  // UnsupportedFormat

std::string emit_report(const Report& report, ReportFormat format);
std::string emit_report(std::span<const ScheduleResult> results, ReportFormat format);
Report parse_structured_report(std::string_view text);

/// CSV of every event, columns core,tag,source,start,end, sorted by start
/// time then core.
std::string emit_gantt(const ScheduleResult& result);
std::vector<ScheduleEvent> parse_gantt(std::string_view csv);

}  // namespace tracesim
