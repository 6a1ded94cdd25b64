// SPDX-License-Identifier: Apache-2.0
#include "tracesim/scheduler.hpp"

#include <algorithm>
#include <array>
#include <future>
#include <map>
#include <set>

#include "tracesim/error.hpp"

namespace tracesim {
namespace {

constexpr std::array<std::string_view, kSegmentTagCount> kTagNames = {
    "COMPUTE", "OVERHEAD_FORK", "OVERHEAD_DISPATCH", "OVERHEAD_JOIN", "WAIT_BARRIER", "WAIT_LOCK", "IDLE_SEQUENTIAL",
};

constexpr std::string_view kIdleSource = "idle";

// Iterations of one loop, with the loop time preceding each iteration
// (gaps and non-iteration children) and the loop time after the last one.
struct LoopLayout {
  std::vector<std::size_t> iterations;
  std::vector<Cycles> lead;
  Cycles tail = 0;
};

LoopLayout layout_loop(const TraceIndex& index, std::size_t loop_pos) {
  const TaskRecord& loop = index.record(loop_pos);
  LoopLayout layout;
  Cycles cursor = loop.start;
  for (std::size_t c : index.children(loop_pos)) {
    const TaskRecord& child = index.record(c);
    if (child.kind != TaskKind::Iteration) continue;
    layout.iterations.push_back(c);
    layout.lead.push_back(child.start - cursor);
    cursor = child.end;
  }
  layout.tail = loop.end - cursor;
  return layout;
}

std::vector<Chunk> split(TaskId loop, std::span<const Cycles> costs, std::uint64_t chunk) {
  std::vector<Chunk> out;
  const std::uint64_t k = costs.size();
  for (std::uint64_t lo = 0; lo < k; lo += chunk) {
    const std::uint64_t hi = std::min(k, lo + chunk);
    Cycles cost = 0;
    for (std::uint64_t i = lo; i < hi; ++i) cost += costs[i];
    out.push_back({loop, lo, hi, cost});
  }
  return out;
}

struct Piece {
  enum class Kind { Compute, Critical, Single };
  Kind kind = Kind::Compute;
  Cycles length = 0;
  std::size_t pos = 0;  // bound task position for Critical/Single
};

class Simulation {
 public:
  Simulation(const BoundProgram& bound, const CharacterizationDB& db, unsigned cores,
             const SimulationOptions& options)
      : bound_(bound), index_(bound.index()), db_(db), cores_(cores), options_(options) {
    const auto& directives = bound.directives();
    stats_.resize(directives.size());
    for (std::size_t i = 0; i < directives.size(); ++i) {
      stats_[i].directive = i;
      stats_[i].target = directives[i].target.str();
      stats_[i].type = directives[i].type;
    }
    classify();
  }

  ScheduleResult run() {
    ScheduleResult result;
    result.cores = cores_;
    result.seq_baseline = total_cycles(bound_.trace());
    events_.assign(cores_, {});
    if (auto root = index_.root()) run_serial(*root);
    result.makespan = now_;
    result.events = std::move(events_);
    result.directive_stats = std::move(stats_);
    result.diagnostics = bound_.diagnostics();
    result.diagnostics.insert(result.diagnostics.end(), diagnostics_.begin(), diagnostics_.end());
    return result;
  }

 private:
  std::optional<DirectiveType> bound_type(std::size_t pos) const {
    auto d = bound_.directive_at(pos);
    if (!d) return std::nullopt;
    return bound_.directives()[*d].type;
  }

  // Marks subtrees that contain a parallel_for target and subtrees that
  // contain a critical/single target.
  void classify() {
    const std::size_t n = bound_.trace().tasks.size();
    has_region_.assign(n, 0);
    has_sync_.assign(n, 0);
    auto root = index_.root();
    if (!root) return;
    std::vector<std::size_t> order;
    order.reserve(n);
    std::vector<std::size_t> stack{*root};
    while (!stack.empty()) {
      std::size_t pos = stack.back();
      stack.pop_back();
      order.push_back(pos);
      for (std::size_t c : index_.children(pos)) stack.push_back(c);
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const std::size_t pos = *it;
      auto type = bound_type(pos);
      char region = type == DirectiveType::ParallelFor;
      char sync = type == DirectiveType::Critical || type == DirectiveType::Single;
      for (std::size_t c : index_.children(pos)) {
        region |= has_region_[c];
        sync |= has_sync_[c];
      }
      has_region_[pos] = region;
      has_sync_[pos] = sync;
    }
  }

  Cycles cost_of(Construct construct, unsigned threads) {
    auto key = std::make_pair(static_cast<int>(construct), threads);
    if (auto it = overheads_.find(key); it != overheads_.end()) return it->second;
    Cycles v = overhead(db_, construct, threads);
    overheads_.emplace(key, v);
    return v;
  }

  void emit(unsigned core, SegmentTag tag, Cycles start, Cycles end, std::string_view source) {
    if (end == start) return;
    auto& list = events_[core];
    if (tag != SegmentTag::Compute && !list.empty() && list.back().tag == tag && list.back().end == start &&
        list.back().source == source) {
      list.back().end = end;
      return;
    }
    list.push_back(ScheduleEvent{core, tag, start, end, std::string(source)});
  }

  void serial(Cycles length, const std::string& source) {
    if (length == 0) return;
    emit(0, SegmentTag::Compute, now_, now_ + length, source);
    for (unsigned c = 1; c < cores_; ++c) emit(c, SegmentTag::IdleSequential, now_, now_ + length, kIdleSource);
    now_ += length;
  }

  void run_serial(std::size_t pos) {
    const TaskRecord& task = index_.record(pos);
    if (!has_region_[pos]) {
      serial(task.duration(), std::to_string(task.id));
      return;
    }
    if (bound_type(pos) == DirectiveType::ParallelFor) {
      run_region(pos);
      return;
    }
    const std::string self = std::to_string(task.id);
    Cycles cursor = task.start;
    for (std::size_t c : index_.children(pos)) {
      const TaskRecord& child = index_.record(c);
      if (child.start > cursor) serial(child.start - cursor, self);
      run_serial(c);
      cursor = std::max(cursor, child.end);
    }
    if (task.end > cursor) serial(task.end - cursor, self);
  }

  // --- parallel regions -----------------------------------------------------

  struct CoreState {
    Cycles clock = 0;
    bool done = false;
    std::size_t next_chunk = 0;
    std::vector<Piece> pieces;
    std::size_t next_piece = 0;
  };

  static void add_compute(std::vector<Piece>& pieces, Cycles length) {
    if (length == 0) return;
    if (!pieces.empty() && pieces.back().kind == Piece::Kind::Compute) {
      pieces.back().length += length;
    } else {
      pieces.push_back({Piece::Kind::Compute, length, 0});
    }
  }

  // Nested critical/single targets inside a bound task run as part of it.
  void expand(std::vector<Piece>& pieces, std::size_t pos) const {
    const TaskRecord& task = index_.record(pos);
    if (auto type = bound_type(pos); type == DirectiveType::Critical || type == DirectiveType::Single) {
      pieces.push_back({type == DirectiveType::Critical ? Piece::Kind::Critical : Piece::Kind::Single,
                        task.duration(), pos});
      return;
    }
    if (!has_sync_[pos]) {
      add_compute(pieces, task.duration());
      return;
    }
    Cycles cursor = task.start;
    for (std::size_t c : index_.children(pos)) {
      const TaskRecord& child = index_.record(c);
      if (child.start > cursor) add_compute(pieces, child.start - cursor);
      expand(pieces, c);
      cursor = std::max(cursor, child.end);
    }
    if (task.end > cursor) add_compute(pieces, task.end - cursor);
  }

  std::size_t lock_id(const std::string& name) {
    auto [it, inserted] = lock_ids_.emplace(name, lock_free_at_.size());
    if (inserted) lock_free_at_.push_back(0);
    return it->second;
  }

  void run_region(std::size_t loop_pos) {
    const std::size_t di = *bound_.directive_at(loop_pos);
    const Directive& directive = bound_.directives()[di];
    const SchedulePolicy policy = directive.schedule.value_or(SchedulePolicy::static_block());
    const TaskRecord& loop = index_.record(loop_pos);
    const std::string loop_source = std::to_string(loop.id);

    unsigned team = cores_;
    if (directive.num_threads != 0) {
      team = std::min(directive.num_threads, cores_);
      if (directive.num_threads > cores_) {
        diagnostics_.push_back("warning: num_threads " + std::to_string(directive.num_threads) + " of \"" +
                               directive.target.str() + "\" capped at " + std::to_string(cores_) + " cores");
      }
    }

    const LoopLayout layout = layout_loop(index_, loop_pos);
    std::vector<Cycles> penalty(layout.iterations.size(), 0);
    std::vector<Cycles> costs(layout.iterations.size());
    for (std::size_t i = 0; i < layout.iterations.size(); ++i) {
      const TaskRecord& it = index_.record(layout.iterations[i]);
      if (options_.memory_penalty) penalty[i] = options_.memory_penalty(it, team, db_);
      costs[i] = layout.lead[i] + it.duration() + penalty[i];
    }
    const ChunkPlan plan = plan_chunks(loop.id, costs, policy, team);
    const bool is_dynamic = policy.kind == ScheduleKind::Dynamic;

    const Cycles region_start = now_;
    const Cycles fork = cost_of(Construct::ParallelFork, team);
    const Cycles init = is_dynamic ? 0 : cost_of(Construct::ForStaticInit, team);
    const Cycles dispatch = is_dynamic ? cost_of(Construct::ForDynamicDispatch, team) : 0;

    std::vector<CoreState> state(team);
    std::set<std::pair<Cycles, unsigned>> ready;
    for (unsigned c = 0; c < team; ++c) {
      emit(c, SegmentTag::OverheadFork, region_start, region_start + fork, to_string(Construct::ParallelFork));
      emit(c, SegmentTag::OverheadDispatch, region_start + fork, region_start + fork + init,
           to_string(Construct::ForStaticInit));
      state[c].clock = region_start + fork + init;
      ready.emplace(state[c].clock, c);
    }

    std::size_t queue_next = 0;
    while (!ready.empty()) {
      const auto [t, c] = *ready.begin();
      ready.erase(ready.begin());
      CoreState& s = state[c];

      if (s.next_piece < s.pieces.size()) {
        const Piece piece = s.pieces[s.next_piece++];
        switch (piece.kind) {
          case Piece::Kind::Compute:
            emit(c, SegmentTag::Compute, t, t + piece.length, loop_source);
            s.clock = t + piece.length;
            break;
          case Piece::Kind::Critical:
            run_critical(c, s, piece, team);
            break;
          case Piece::Kind::Single:
            run_single(c, piece, team, state, ready);
            break;
        }
        ready.emplace(s.clock, c);
        continue;
      }

      const Chunk* chunk = nullptr;
      if (is_dynamic) {
        if (queue_next < plan.queue.size()) chunk = &plan.queue[queue_next++];
      } else if (s.next_chunk < plan.per_core[c].size()) {
        chunk = &plan.per_core[c][s.next_chunk++];
      }
      if (!chunk) {
        s.done = true;
        continue;
      }
      if (is_dynamic) {
        emit(c, SegmentTag::OverheadDispatch, t, t + dispatch, to_string(Construct::ForDynamicDispatch));
        s.clock = t + dispatch;
      }
      s.pieces.clear();
      s.next_piece = 0;
      for (std::uint64_t i = chunk->lo; i < chunk->hi; ++i) {
        add_compute(s.pieces, layout.lead[i]);
        expand(s.pieces, layout.iterations[i]);
        add_compute(s.pieces, penalty[i]);
      }
      ready.emplace(s.clock, c);
    }

    Cycles last = region_start;
    for (const auto& s : state) last = std::max(last, s.clock);
    const Cycles barrier = cost_of(Construct::Barrier, team);
    const Cycles join = cost_of(Construct::ParallelJoin, team);
    const Cycles region_end = last + barrier + join;
    for (unsigned c = 0; c < team; ++c) {
      emit(c, SegmentTag::WaitBarrier, state[c].clock, last, to_string(Construct::Barrier));
      emit(c, SegmentTag::OverheadJoin, last, last + barrier, to_string(Construct::Barrier));
      emit(c, SegmentTag::OverheadJoin, last + barrier, region_end, to_string(Construct::ParallelJoin));
    }
    for (unsigned c = team; c < cores_; ++c) {
      emit(c, SegmentTag::IdleSequential, region_start, region_end, kIdleSource);
    }
    now_ = region_end;
    stats_[di].instances += 1;
    stats_[di].cycles += region_end - region_start;

    serial(layout.tail, loop_source);
  }

  void run_critical(unsigned c, CoreState& s, const Piece& piece, unsigned team) {
    const std::size_t di = *bound_.directive_at(piece.pos);
    const Directive& directive = bound_.directives()[di];
    const std::string lock = directive.lock_name();
    Cycles& free_at = lock_free_at_[lock_id(lock)];
    const Cycles enter = cost_of(Construct::CriticalEnter, team);
    const Cycles exit = cost_of(Construct::CriticalExit, team);

    const Cycles requested = s.clock;
    const Cycles granted = std::max(requested, free_at);
    const Cycles body = granted + enter;
    const Cycles done = body + piece.length;
    const Cycles released = done + exit;
    emit(c, SegmentTag::WaitLock, requested, granted, "lock:" + lock);
    emit(c, SegmentTag::OverheadDispatch, granted, body, to_string(Construct::CriticalEnter));
    emit(c, SegmentTag::Compute, body, done, std::to_string(index_.record(piece.pos).id));
    emit(c, SegmentTag::OverheadDispatch, done, released, to_string(Construct::CriticalExit));
    free_at = released;
    s.clock = released;
    stats_[di].instances += 1;
    stats_[di].cycles += released - requested;
  }

  void run_single(unsigned c, const Piece& piece, unsigned team, std::vector<CoreState>& state,
                  std::set<std::pair<Cycles, unsigned>>& ready) {
    const std::size_t di = *bound_.directive_at(piece.pos);
    const std::string source = std::to_string(index_.record(piece.pos).id);
    const Cycles start = state[c].clock;
    const Cycles done = start + piece.length;
    const Cycles release = done + cost_of(Construct::SingleEnter, team);
    emit(c, SegmentTag::Compute, start, done, source);
    emit(c, SegmentTag::OverheadDispatch, done, release, to_string(Construct::SingleEnter));
    state[c].clock = release;
    Cycles cycles = release - start;
    for (unsigned k = 0; k < team; ++k) {
      CoreState& other = state[k];
      if (k == c || other.clock >= release) continue;
      if (!other.done) ready.erase({other.clock, k});
      emit(k, SegmentTag::WaitBarrier, other.clock, release, "single:" + source);
      cycles += release - other.clock;
      other.clock = release;
      if (!other.done) ready.emplace(other.clock, k);
    }
    stats_[di].instances += 1;
    stats_[di].cycles += cycles;
  }

  const BoundProgram& bound_;
  const TraceIndex& index_;
  const CharacterizationDB& db_;
  const unsigned cores_;
  const SimulationOptions& options_;

  std::vector<char> has_region_;
  std::vector<char> has_sync_;
  std::map<std::pair<int, unsigned>, Cycles> overheads_;
  std::map<std::string, std::size_t> lock_ids_;
  std::vector<Cycles> lock_free_at_;

  Cycles now_ = 0;
  std::vector<std::vector<ScheduleEvent>> events_;
  std::vector<DirectiveStats> stats_;
  std::vector<std::string> diagnostics_;
};

void check_cores(const CharacterizationDB& db, unsigned cores) {
  if (cores < 1 || cores > db.max_cores) {
    fail(ErrorKind::CoreCountOutOfRange,
         "core count " + std::to_string(cores) + " outside [1, " + std::to_string(db.max_cores) + "]");
  }
}

}  // namespace

std::string_view to_string(SegmentTag tag) noexcept { return kTagNames[static_cast<std::size_t>(tag)]; }

std::optional<SegmentTag> segment_tag_from_string(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kTagNames.size(); ++i) {
    if (kTagNames[i] == name) return static_cast<SegmentTag>(i);
  }
  return std::nullopt;
}

ChunkPlan plan_chunks(TaskId loop, std::span<const Cycles> iteration_costs, const SchedulePolicy& policy,
                      unsigned cores) {
  const std::uint64_t k = iteration_costs.size();
  if (k == 0) fail(ErrorKind::EmptyLoop, "loop " + std::to_string(loop) + " has no iterations");
  if (cores < 1) fail(ErrorKind::CoreCountOutOfRange, "plan_chunks needs at least one core");
  if (policy.kind != ScheduleKind::StaticBlock && policy.chunk < 1) {
    fail(ErrorKind::InvalidPolicy, "chunk size must be >= 1");
  }

  ChunkPlan plan;
  plan.kind = policy.kind;
  switch (policy.kind) {
    case ScheduleKind::StaticBlock: {
      plan.per_core.resize(cores);
      const std::uint64_t base = k / cores;
      const std::uint64_t extra = k % cores;
      std::uint64_t lo = 0;
      for (unsigned c = 0; c < cores; ++c) {
        const std::uint64_t size = base + (c < extra ? 1 : 0);
        if (size == 0) break;
        Cycles cost = 0;
        for (std::uint64_t i = lo; i < lo + size; ++i) cost += iteration_costs[i];
        plan.per_core[c].push_back({loop, lo, lo + size, cost});
        lo += size;
      }
      break;
    }
    case ScheduleKind::StaticChunk: {
      plan.per_core.resize(cores);
      auto chunks = split(loop, iteration_costs, policy.chunk);
      for (std::size_t j = 0; j < chunks.size(); ++j) plan.per_core[j % cores].push_back(chunks[j]);
      break;
    }
    case ScheduleKind::Dynamic:
      plan.queue = split(loop, iteration_costs, policy.chunk);
      break;
  }
  return plan;
}

ChunkPlan plan_chunks(const TraceIndex& index, TaskId loop, const SchedulePolicy& policy, unsigned cores) {
  const std::size_t pos = index.position(loop);
  const LoopLayout layout = layout_loop(index, pos);
  std::vector<Cycles> costs(layout.iterations.size());
  for (std::size_t i = 0; i < costs.size(); ++i) {
    costs[i] = layout.lead[i] + index.record(layout.iterations[i]).duration();
  }
  return plan_chunks(loop, costs, policy, cores);
}

ScheduleResult simulate(const BoundProgram& bound, const CharacterizationDB& db, unsigned cores,
                        const SimulationOptions& options) {
  check_cores(db, cores);
  return Simulation(bound, db, cores, options).run();
}

std::vector<ScheduleResult> sweep(const BoundProgram& bound, const CharacterizationDB& db,
                                  std::span<const unsigned> core_counts, const SimulationOptions& options,
                                  unsigned jobs) {
  for (unsigned p : core_counts) check_cores(db, p);
  std::vector<ScheduleResult> results(core_counts.size());
  if (jobs <= 1 || core_counts.size() <= 1) {
    for (std::size_t i = 0; i < core_counts.size(); ++i) results[i] = simulate(bound, db, core_counts[i], options);
    return results;
  }
  std::vector<std::future<ScheduleResult>> pending;
  std::size_t next = 0;
  while (next < core_counts.size() || !pending.empty()) {
    while (next < core_counts.size() && pending.size() < jobs) {
      pending.push_back(std::async(std::launch::async, [&, p = core_counts[next]] {
        return simulate(bound, db, p, options);
      }));
      ++next;
    }
    // Futures complete in any order; collect the oldest to keep slots aligned.
    const std::size_t slot = next - pending.size();
    results[slot] = pending.front().get();
    pending.erase(pending.begin());
  }
  return results;
}

}  // namespace tracesim
