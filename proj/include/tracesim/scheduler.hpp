// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tracesim/chardb.hpp"
#include "tracesim/directives.hpp"
#include "tracesim/trace.hpp"

namespace tracesim {

enum class SegmentTag {
  Compute,
  OverheadFork,
  OverheadDispatch,
  OverheadJoin,
  WaitBarrier,
  WaitLock,
  IdleSequential,
};

inline constexpr std::size_t kSegmentTagCount = 7;

std::string_view to_string(SegmentTag tag) noexcept;
std::optional<SegmentTag> segment_tag_from_string(std::string_view name) noexcept;

/// Contiguous iteration range [lo, hi) of one loop.
struct Chunk {
  TaskId loop = 0;
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
  Cycles cost = 0;  // summed iteration costs, nested work included

  bool operator==(const Chunk&) const = default;
};

struct ChunkPlan {
  ScheduleKind kind = ScheduleKind::StaticBlock;
  std::vector<std::vector<Chunk>> per_core;  // static policies: pre-assigned chunks
  std::vector<Chunk> queue;                  // dynamic: unassigned, dispatch order
};

/// Splits iterations with the given per-iteration costs among `cores`.
///   static_block: one contiguous chunk per core; the first k mod p cores get
///                 ceil(k/p) iterations, the rest floor(k/p). Cores left
///                 without iterations get no chunk.
///   static_chunk: chunks of `chunk` iterations dealt round-robin.
///   dynamic:      the same chunks, queued in index order.
ChunkPlan plan_chunks(TaskId loop, std::span<const Cycles> iteration_costs, const SchedulePolicy& policy,
                      unsigned cores);

/// Same, reading the loop's iterations from a trace. The cost of iteration i
/// includes any loop time between iteration i-1 and iteration i.
ChunkPlan plan_chunks(const TraceIndex& index, TaskId loop, const SchedulePolicy& policy, unsigned cores);

struct ScheduleEvent {
  unsigned core = 0;
  SegmentTag tag = SegmentTag::Compute;
  Cycles start = 0;
  Cycles end = 0;
  std::string source;  // task id, construct name, or lock name

  Cycles length() const noexcept { return end - start; }
  bool operator==(const ScheduleEvent&) const = default;
};

/// Cycles attributed to one directive in one simulation. parallel_for counts
/// the wall-clock span of its regions; critical and single count the core
/// cycles spent waiting for, entering, executing and leaving the construct.
struct DirectiveStats {
  std::size_t directive = 0;
  std::string target;
  DirectiveType type = DirectiveType::ParallelFor;
  std::uint64_t instances = 0;
  Cycles cycles = 0;

  bool operator==(const DirectiveStats&) const = default;
};

struct ScheduleResult {
  unsigned cores = 0;
  Cycles makespan = 0;
  Cycles seq_baseline = 0;
  std::vector<std::vector<ScheduleEvent>> events;  // per core, tiling [0, makespan]
  std::vector<DirectiveStats> directive_stats;
  std::vector<std::string> diagnostics;
};

struct SimulationOptions {
  /// Extra cycles charged after each iteration of a parallel loop, as a
  /// function of the iteration task and the team size. Unset means no
  /// memory timing penalty.
  std::function<Cycles(const TaskRecord&, unsigned, const CharacterizationDB&)> memory_penalty;
};

/// Deterministic simulation of `bound` on `cores` cores.
///
/// Serial code runs on core 0 while other cores idle. A bound parallel_for
/// forks a team, hands out its chunks per the schedule policy, and joins at
/// an implicit barrier. critical occurrences inside a region serialize on
/// their lock (FIFO by request time, lowest core first on ties); single
/// occurrences run on the core that reaches them while the rest of the team
/// waits until they finish. Outside a region both are plain code.
ScheduleResult simulate(const BoundProgram& bound, const CharacterizationDB& db, unsigned cores,
                        const SimulationOptions& options = {});

/// One independent simulation per requested core count, in request order.
/// `jobs` > 1 evaluates counts concurrently.
std::vector<ScheduleResult> sweep(const BoundProgram& bound, const CharacterizationDB& db,
                                  std::span<const unsigned> core_counts, const SimulationOptions& options = {},
                                  unsigned jobs = 1);

}  // namespace tracesim
