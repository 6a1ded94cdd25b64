// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tracesim/trace.hpp"

namespace tracesim {

enum class DirectiveType { ParallelFor, Critical, Single };
enum class ScheduleKind { StaticBlock, StaticChunk, Dynamic };

std::string_view to_string(DirectiveType type) noexcept;
std::string_view to_string(ScheduleKind kind) noexcept;

struct SchedulePolicy {
  ScheduleKind kind = ScheduleKind::StaticBlock;
  std::uint64_t chunk = 0;  // 0 for static_block, >= 1 otherwise

  static SchedulePolicy static_block() { return {ScheduleKind::StaticBlock, 0}; }
  static SchedulePolicy static_chunk(std::uint64_t c) { return {ScheduleKind::StaticChunk, c}; }
  static SchedulePolicy dynamic(std::uint64_t c) { return {ScheduleKind::Dynamic, c}; }

  bool operator==(const SchedulePolicy&) const = default;
};

/// Names a task by its label, optionally picking the k-th occurrence
/// (0-based, file order). Written as "name" or "name#k".
struct TargetSelector {
  std::string name;
  std::optional<std::uint64_t> ordinal;

  static TargetSelector parse(std::string_view text);
  std::string str() const;

  bool operator==(const TargetSelector&) const = default;
};

inline constexpr std::string_view kDefaultLock = "global";

struct Directive {
  DirectiveType type = DirectiveType::ParallelFor;
  TargetSelector target;
  std::optional<SchedulePolicy> schedule;  // parallel_for only
  unsigned num_threads = 0;                // 0 = every simulated core
  std::optional<std::string> lock;         // critical only

  std::string lock_name() const { return lock.value_or(std::string(kDefaultLock)); }

  bool operator==(const Directive&) const = default;
};

inline constexpr int kSpecFormatVersion = 1;

struct DirectiveSpec {
  unsigned max_cores_requested = 16;
  std::vector<Directive> directives;

  bool operator==(const DirectiveSpec&) const = default;
};

DirectiveSpec parse_spec(std::string_view text);
std::string write_spec(const DirectiveSpec& spec);

/// Directives resolved onto the tasks of one trace.
///
/// parallel_for resolves to a single loop task. critical and single bind by
/// name class: every task carrying the target name inherits the directive,
/// unless an ordinal selects one occurrence.
class BoundProgram {
 public:
  const TaskTrace& trace() const noexcept { return *trace_; }
  const TraceIndex& index() const noexcept { return *index_; }
  const std::vector<Directive>& directives() const noexcept { return directives_; }

  /// Directive index bound to the task at trace position `pos`, if any.
  std::optional<std::size_t> directive_at(std::size_t pos) const {
    const auto d = directive_of_[pos];
    return d < 0 ? std::nullopt : std::optional<std::size_t>(static_cast<std::size_t>(d));
  }
  const Directive* binding(TaskId id) const;

  /// (task id, directive index) pairs ordered by task id.
  std::vector<std::pair<TaskId, std::size_t>> bindings() const;

  const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

 private:
  friend BoundProgram bind(const DirectiveSpec&, std::shared_ptr<const TaskTrace>);

  std::shared_ptr<const TaskTrace> trace_;
  std::shared_ptr<const TraceIndex> index_;
  std::vector<Directive> directives_;
  std::vector<std::int32_t> directive_of_;  // per trace position, -1 if unbound
  std::vector<std::string> diagnostics_;
};

/// Validates `trace` (ValidationError on any violation) and resolves every
/// directive against it.
BoundProgram bind(const DirectiveSpec& spec, std::shared_ptr<const TaskTrace> trace);
BoundProgram bind(const DirectiveSpec& spec, const TaskTrace& trace);

}  // namespace tracesim
