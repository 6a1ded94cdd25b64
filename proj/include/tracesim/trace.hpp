// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tracesim {

using Cycles = std::uint64_t;
using TaskId = std::uint64_t;

enum class TaskKind { Function, Loop, Iteration, Explicit, Region };

std::string_view to_string(TaskKind kind) noexcept;
std::optional<TaskKind> task_kind_from_string(std::string_view name) noexcept;

/// Summary memory access counts for one task, inclusive of its children.
struct MemoryStats {
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::map<std::string, std::uint64_t> per_level;

  bool operator==(const MemoryStats&) const = default;
};

struct TaskRecord {
  TaskId id = 0;
  std::optional<TaskId> parent;
  std::string name;
  TaskKind kind = TaskKind::Function;
  Cycles start = 0;
  Cycles end = 0;
  std::optional<std::uint64_t> index;  // iteration ordinal, iterations only
  std::optional<MemoryStats> mem;

  Cycles duration() const noexcept { return end >= start ? end - start : 0; }

  bool operator==(const TaskRecord&) const = default;
};

/// Self-description a trace generator attaches so consumers can cross-check
/// the total it produced.
struct TraceTrailer {
  std::string generator;
  Cycles declared_total = 0;   // cycles of generated loop work
  Cycles serial_prologue = 0;  // cycles of serial work before the loop

  bool operator==(const TraceTrailer&) const = default;
};

inline constexpr int kTraceFormatVersion = 1;

struct TaskTrace {
  int version = kTraceFormatVersion;
  std::string clock = "cycles";
  std::vector<TaskRecord> tasks;
  std::optional<TraceTrailer> trailer;

  bool operator==(const TaskTrace&) const = default;
};

struct SelfSegment {
  TaskId owner = 0;
  Cycles start = 0;
  Cycles end = 0;

  Cycles length() const noexcept { return end - start; }
  bool operator==(const SelfSegment&) const = default;
};

struct Violation {
  enum class Rule {
    DuplicateId,
    RootCount,
    UnknownParent,
    Cycle,
    InvalidInterval,
    Containment,
    Overlap,
    SiblingOrder,
    IterationIndex,
    IterationOutsideLoop,
    MemoryStats,
  };

  Rule rule;
  std::vector<TaskId> ids;
  std::string message;
};

std::string_view to_string(Violation::Rule rule) noexcept;

/// Parses trace-format text. Only syntax, field types and the format version
/// are checked; structural rules are left to validate_trace().
TaskTrace parse_trace(std::string_view text);
std::string write_trace(const TaskTrace& trace);

std::vector<Violation> validate_trace(const TaskTrace& trace);

/// Root duration. Requires a trace with exactly one root.
Cycles total_cycles(const TaskTrace& trace);

/// Parent/child lookup over a trace. Children keep file order, which for a
/// valid trace is start order. Holds a reference to the trace.
class TraceIndex {
 public:
  explicit TraceIndex(const TaskTrace& trace);

  const TaskTrace& trace() const noexcept { return *trace_; }
  std::optional<std::size_t> find(TaskId id) const;
  std::size_t position(TaskId id) const;  // throws UnknownTask
  const TaskRecord& record(std::size_t pos) const { return trace_->tasks[pos]; }
  std::span<const std::size_t> children(std::size_t pos) const;
  std::optional<std::size_t> root() const noexcept { return root_; }
  std::optional<std::size_t> parent(std::size_t pos) const;

 private:
  const TaskTrace* trace_;
  std::vector<std::pair<TaskId, std::size_t>> by_id_;  // sorted by id
  std::vector<std::size_t> child_begin_;
  std::vector<std::size_t> child_list_;
  std::vector<std::optional<std::size_t>> parent_;
  std::optional<std::size_t> root_;
};

std::vector<SelfSegment> self_segments(const TaskTrace& trace, TaskId id);
std::vector<SelfSegment> self_segments(const TraceIndex& index, TaskId id);

}  // namespace tracesim
