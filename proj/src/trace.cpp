// SPDX-License-Identifier: Apache-2.0
#include "tracesim/trace.hpp"

#include <algorithm>
#include <array>
#include <numeric>

#include "json_strict.hpp"
#include "tracesim/error.hpp"

namespace tracesim {
namespace {

constexpr std::array<std::string_view, 5> kKindNames = {"function", "loop", "iteration", "explicit",
                                                        "region"};

using detail::Json;

MemoryStats parse_mem(const Json& j, const std::string& path) {
  detail::expect_object(j, path);
  detail::reject_unknown(j, {"reads", "writes", "per_level"}, path);
  MemoryStats mem;
  mem.reads = detail::as_u64(detail::require(j, "reads", path), path + ".reads");
  mem.writes = detail::as_u64(detail::require(j, "writes", path), path + ".writes");
  if (const Json* levels = detail::optional(j, "per_level")) {
    detail::expect_object(*levels, path + ".per_level");
    for (const auto& [name, count] : levels->items()) {
      mem.per_level.emplace(name, detail::as_u64(count, path + ".per_level." + name));
    }
  }
  return mem;
}

std::string record_path(std::size_t i) { return "tasks[" + std::to_string(i) + "]"; }

// Builds task records from the members streamed out of the "tasks" array.
// Paths for error messages are only formatted on failure.
class RecordReader {
 public:
  explicit RecordReader(std::vector<TaskRecord>& out) : out_(out) {}

  void member(std::size_t i, const std::string& key, Json&& value) {
    if (key == "id") {
      seen_ |= kId;
      rec_.id = u64(value, i, key);
    } else if (key == "parent") {
      seen_ |= kParent;
      if (!value.is_null()) rec_.parent = u64(value, i, key);
    } else if (key == "name") {
      seen_ |= kName;
      rec_.name = str(std::move(value), i, key);
    } else if (key == "kind") {
      seen_ |= kKind;
      const std::string kind = str(std::move(value), i, key);
      auto parsed = task_kind_from_string(kind);
      if (!parsed) fail(ErrorKind::SyntaxError, record_path(i) + ".kind: unknown task kind \"" + kind + "\"");
      rec_.kind = *parsed;
    } else if (key == "start") {
      seen_ |= kStart;
      rec_.start = u64(value, i, key);
    } else if (key == "end") {
      seen_ |= kEnd;
      rec_.end = u64(value, i, key);
    } else if (key == "index") {
      seen_ |= kIndex;
      rec_.index = u64(value, i, key);
    } else if (key == "mem") {
      seen_ |= kMem;
      rec_.mem = parse_mem(value, record_path(i) + ".mem");
    } else {
      fail(ErrorKind::SyntaxError, record_path(i) + ": unknown field \"" + key + "\"");
    }
  }

  void end(std::size_t i, const Json* non_object) {
    if (non_object) fail(ErrorKind::SyntaxError, record_path(i) + ": expected an object");
    static constexpr std::pair<unsigned, const char*> kRequired[] = {
        {kId, "id"}, {kParent, "parent"}, {kName, "name"}, {kKind, "kind"}, {kStart, "start"}, {kEnd, "end"}};
    for (auto [bit, name] : kRequired) {
      if (!(seen_ & bit)) fail(ErrorKind::SyntaxError, record_path(i) + ": missing field \"" + name + "\"");
    }
    out_.push_back(std::move(rec_));
    rec_ = TaskRecord{};
    seen_ = 0;
  }

 private:
  enum : unsigned { kId = 1, kParent = 2, kName = 4, kKind = 8, kStart = 16, kEnd = 32, kIndex = 64, kMem = 128 };

  static std::uint64_t u64(const Json& v, std::size_t i, const std::string& key) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    return detail::as_u64(v, record_path(i) + "." + key);
  }

  static std::string str(Json&& v, std::size_t i, const std::string& key) {
    if (v.is_string()) return std::move(v.get_ref<std::string&>());
    return detail::as_string(v, record_path(i) + "." + key);
  }

  std::vector<TaskRecord>& out_;
  TaskRecord rec_;
  unsigned seen_ = 0;
};

void append_u64(std::string& out, std::uint64_t v) { out += std::to_string(v); }

void append_record(std::string& out, const TaskRecord& rec) {
  out += "{\"id\":";
  append_u64(out, rec.id);
  out += ",\"parent\":";
  if (rec.parent) {
    append_u64(out, *rec.parent);
  } else {
    out += "null";
  }
  out += ",\"name\":";
  detail::append_quoted(out, rec.name);
  out += ",\"kind\":\"";
  out += to_string(rec.kind);
  out += "\",\"start\":";
  append_u64(out, rec.start);
  out += ",\"end\":";
  append_u64(out, rec.end);
  if (rec.index) {
    out += ",\"index\":";
    append_u64(out, *rec.index);
  }
  if (rec.mem) {
    out += ",\"mem\":{\"reads\":";
    append_u64(out, rec.mem->reads);
    out += ",\"writes\":";
    append_u64(out, rec.mem->writes);
    out += ",\"per_level\":{";
    bool first = true;
    for (const auto& [level, count] : rec.mem->per_level) {
      if (!first) out += ',';
      first = false;
      detail::append_quoted(out, level);
      out += ':';
      append_u64(out, count);
    }
    out += "}}";
  }
  out += '}';
}

}  // namespace

std::string_view to_string(TaskKind kind) noexcept {
  return kKindNames[static_cast<std::size_t>(kind)];
}

std::optional<TaskKind> task_kind_from_string(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<TaskKind>(i);
  }
  return std::nullopt;
}

std::string_view to_string(Violation::Rule rule) noexcept {
  switch (rule) {
    case Violation::Rule::DuplicateId: return "DuplicateIdViolation";
    case Violation::Rule::RootCount: return "RootCountViolation";
    case Violation::Rule::UnknownParent: return "UnknownParentViolation";
    case Violation::Rule::Cycle: return "CycleViolation";
    case Violation::Rule::InvalidInterval: return "IntervalViolation";
    case Violation::Rule::Containment: return "ContainmentViolation";
    case Violation::Rule::Overlap: return "OverlapViolation";
    case Violation::Rule::SiblingOrder: return "SiblingOrderViolation";
    case Violation::Rule::IterationIndex: return "IterationIndexViolation";
    case Violation::Rule::IterationOutsideLoop: return "IterationOutsideLoopViolation";
    case Violation::Rule::MemoryStats: return "MemoryStatsViolation";
  }
  return "Violation";
}

TaskTrace parse_trace(std::string_view text) {
  TaskTrace trace;
  trace.tasks.clear();
  RecordReader reader(trace.tasks);
  detail::ElementSink sink;
  sink.member = [&reader](std::size_t i, const std::string& key, Json&& value) {
    reader.member(i, key, std::move(value));
  };
  sink.end = [&reader](std::size_t i, const Json* non_object) { reader.end(i, non_object); };
  Json doc = detail::parse_strict(text, "trace", "tasks", sink);
  detail::expect_object(doc, "trace");
  detail::reject_unknown(doc, {"version", "clock", "tasks", "trailer"}, "trace");

  const std::int64_t version = detail::as_i64(detail::require(doc, "version", "trace"), "trace.version");
  if (version != kTraceFormatVersion) {
    fail(ErrorKind::VersionError, "trace: unsupported format version " + std::to_string(version) +
                                      " (expected " + std::to_string(kTraceFormatVersion) + ")");
  }
  trace.version = static_cast<int>(version);
  trace.clock = detail::as_string(detail::require(doc, "clock", "trace"), "trace.clock");
  if (trace.clock != "cycles") {
    fail(ErrorKind::SyntaxError, "trace.clock: unsupported clock unit \"" + trace.clock + "\"");
  }
  if (!detail::require(doc, "tasks", "trace").is_array()) {
    fail(ErrorKind::SyntaxError, "trace.tasks: expected an array");
  }
  if (const Json* trailer = detail::optional(doc, "trailer")) {
    detail::expect_object(*trailer, "trace.trailer");
    detail::reject_unknown(*trailer, {"generator", "declared_total", "serial_prologue"}, "trace.trailer");
    TraceTrailer t;
    t.generator = detail::as_string(detail::require(*trailer, "generator", "trace.trailer"),
                                    "trace.trailer.generator");
    t.declared_total = detail::as_u64(detail::require(*trailer, "declared_total", "trace.trailer"),
                                      "trace.trailer.declared_total");
    t.serial_prologue = detail::as_u64(detail::require(*trailer, "serial_prologue", "trace.trailer"),
                                       "trace.trailer.serial_prologue");
    trace.trailer = std::move(t);
  }
  return trace;
}

std::string write_trace(const TaskTrace& trace) {
  std::string out;
  out.reserve(64 + trace.tasks.size() * 96);
  out += "{\n  \"version\": ";
  out += std::to_string(trace.version);
  out += ",\n  \"clock\": ";
  detail::append_quoted(out, trace.clock);
  out += ",\n  \"tasks\": [";
  for (std::size_t i = 0; i < trace.tasks.size(); ++i) {
    out += i == 0 ? "\n    " : ",\n    ";
    append_record(out, trace.tasks[i]);
  }
  out += trace.tasks.empty() ? "]" : "\n  ]";
  if (trace.trailer) {
    out += ",\n  \"trailer\": {\"generator\": ";
    detail::append_quoted(out, trace.trailer->generator);
    out += ", \"declared_total\": ";
    append_u64(out, trace.trailer->declared_total);
    out += ", \"serial_prologue\": ";
    append_u64(out, trace.trailer->serial_prologue);
    out += '}';
  }
  out += "\n}\n";
  return out;
}

TraceIndex::TraceIndex(const TaskTrace& trace) : trace_(&trace) {
  const auto& tasks = trace.tasks;
  const std::size_t n = tasks.size();
  by_id_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) by_id_.emplace_back(tasks[i].id, i);
  std::stable_sort(by_id_.begin(), by_id_.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  parent_.assign(n, std::nullopt);
  std::vector<std::size_t> counts(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!tasks[i].parent) {
      if (!root_) root_ = i;
      continue;
    }
    if (auto p = find(*tasks[i].parent); p && *p != i) {
      parent_[i] = *p;
      ++counts[*p + 1];
    }
  }
  std::partial_sum(counts.begin(), counts.end(), counts.begin());
  child_begin_ = counts;
  child_list_.resize(counts[n]);
  std::vector<std::size_t> fill(counts.begin(), counts.end() - 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (parent_[i]) child_list_[fill[*parent_[i]]++] = i;
  }
}

std::optional<std::size_t> TraceIndex::find(TaskId id) const {
  auto it = std::lower_bound(by_id_.begin(), by_id_.end(), id,
                             [](const auto& entry, TaskId key) { return entry.first < key; });
  if (it == by_id_.end() || it->first != id) return std::nullopt;
  return it->second;
}

std::size_t TraceIndex::position(TaskId id) const {
  auto pos = find(id);
  if (!pos) fail(ErrorKind::UnknownTask, "unknown task id " + std::to_string(id));
  return *pos;
}

std::span<const std::size_t> TraceIndex::children(std::size_t pos) const {
  return {child_list_.data() + child_begin_[pos], child_begin_[pos + 1] - child_begin_[pos]};
}

std::optional<std::size_t> TraceIndex::parent(std::size_t pos) const { return parent_[pos]; }

std::vector<Violation> validate_trace(const TaskTrace& trace) {
  std::vector<Violation> out;
  const auto& tasks = trace.tasks;
  TraceIndex index(trace);

  auto add = [&out](Violation::Rule rule, std::vector<TaskId> ids, std::string message) {
    out.push_back(Violation{rule, std::move(ids), std::move(message)});
  };

  {
    std::vector<TaskId> ids;
    ids.reserve(tasks.size());
    for (const auto& t : tasks) ids.push_back(t.id);
    std::sort(ids.begin(), ids.end());
    for (std::size_t i = 1; i < ids.size(); ++i) {
      if (ids[i] == ids[i - 1] && (i == 1 || ids[i - 2] != ids[i])) {
        add(Violation::Rule::DuplicateId, {ids[i]}, "task id " + std::to_string(ids[i]) + " is not unique");
      }
    }
  }

  std::vector<TaskId> roots;
  for (const auto& t : tasks) {
    if (!t.parent) roots.push_back(t.id);
  }
  if (roots.size() != 1) {
    add(Violation::Rule::RootCount, roots,
        "expected exactly one root task, found " + std::to_string(roots.size()));
  }

  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const TaskRecord& t = tasks[i];
    if (t.parent && (!index.find(*t.parent) || *t.parent == t.id)) {
      add(Violation::Rule::UnknownParent, {t.id, *t.parent},
          "task " + std::to_string(t.id) + " names unknown parent " + std::to_string(*t.parent));
    }
    if (t.end < t.start) {
      add(Violation::Rule::InvalidInterval, {t.id}, "task " + std::to_string(t.id) + " ends before it starts");
    }
    if (t.kind == TaskKind::Iteration) {
      if (!t.index) {
        add(Violation::Rule::IterationIndex, {t.id}, "iteration " + std::to_string(t.id) + " has no index");
      }
      auto p = index.parent(i);
      if (!p || index.record(*p).kind != TaskKind::Loop) {
        add(Violation::Rule::IterationOutsideLoop, {t.id},
            "iteration " + std::to_string(t.id) + " is not a child of a loop");
      }
    } else if (t.index) {
      add(Violation::Rule::IterationIndex, {t.id},
          "non-iteration task " + std::to_string(t.id) + " carries an index");
    }
    if (t.mem) {
      std::uint64_t levels = 0;
      for (const auto& [name, count] : t.mem->per_level) levels += count;
      if (levels > t.mem->reads + t.mem->writes) {
        add(Violation::Rule::MemoryStats, {t.id},
            "task " + std::to_string(t.id) + " per-level accesses exceed reads+writes");
      }
    }
  }

  // Reachability from the root exposes parent cycles detached from the tree.
  std::vector<char> reached(tasks.size(), 0);
  if (auto root = index.root()) {
    std::vector<std::size_t> stack{*root};
    reached[*root] = 1;
    while (!stack.empty()) {
      std::size_t pos = stack.back();
      stack.pop_back();
      for (std::size_t c : index.children(pos)) {
        if (!reached[c]) {
          reached[c] = 1;
          stack.push_back(c);
        }
      }
    }
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      if (!reached[i] && tasks[i].parent && index.find(*tasks[i].parent) &&
          *tasks[i].parent != tasks[i].id) {
        add(Violation::Rule::Cycle, {tasks[i].id},
            "task " + std::to_string(tasks[i].id) + " is not reachable from the root");
      }
    }
  }

  for (std::size_t pos = 0; pos < tasks.size(); ++pos) {
    const TaskRecord& parent = tasks[pos];
    auto kids = index.children(pos);
    std::uint64_t next_index = 0;
    for (std::size_t k = 0; k < kids.size(); ++k) {
      const TaskRecord& child = tasks[kids[k]];
      if (child.start < parent.start || child.end > parent.end) {
        add(Violation::Rule::Containment, {child.id, parent.id},
            "task " + std::to_string(child.id) + " is not contained in parent " + std::to_string(parent.id));
      }
      if (k > 0) {
        const TaskRecord& prev = tasks[kids[k - 1]];
        if (child.start < prev.start) {
          add(Violation::Rule::SiblingOrder, {prev.id, child.id},
              "siblings " + std::to_string(prev.id) + " and " + std::to_string(child.id) +
                  " are not listed in start order");
        } else if (child.start < prev.end) {
          add(Violation::Rule::Overlap, {prev.id, child.id},
              "siblings " + std::to_string(prev.id) + " and " + std::to_string(child.id) + " overlap");
        }
      }
      if (child.kind == TaskKind::Iteration && child.index) {
        if (*child.index != next_index) {
          add(Violation::Rule::IterationIndex, {child.id, parent.id},
              "iteration " + std::to_string(child.id) + " has index " + std::to_string(*child.index) +
                  ", expected " + std::to_string(next_index));
        }
        next_index = *child.index + 1;
      }
    }
  }
  return out;
}

Cycles total_cycles(const TaskTrace& trace) {
  for (const auto& t : trace.tasks) {
    if (!t.parent) return t.duration();
  }
  fail(ErrorKind::ValidationError, "trace has no root task");
}

std::vector<SelfSegment> self_segments(const TraceIndex& index, TaskId id) {
  const std::size_t pos = index.position(id);
  const TaskRecord& task = index.record(pos);
  std::vector<SelfSegment> out;
  Cycles cursor = task.start;
  for (std::size_t c : index.children(pos)) {
    const TaskRecord& child = index.record(c);
    if (child.start > cursor) out.push_back({id, cursor, child.start});
    cursor = std::max(cursor, child.end);
  }
  if (task.end > cursor) out.push_back({id, cursor, task.end});
  return out;
}

std::vector<SelfSegment> self_segments(const TaskTrace& trace, TaskId id) {
  return self_segments(TraceIndex(trace), id);
}

}  // namespace tracesim
