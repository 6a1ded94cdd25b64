// SPDX-License-Identifier: Apache-2.0
#include "tracesim/directives.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "json_strict.hpp"
#include "tracesim/error.hpp"

namespace tracesim {
namespace {

using detail::Json;

std::optional<DirectiveType> directive_type_from_string(std::string_view s) {
  if (s == "parallel_for") return DirectiveType::ParallelFor;
  if (s == "critical") return DirectiveType::Critical;
  if (s == "single") return DirectiveType::Single;
  return std::nullopt;
}

std::optional<ScheduleKind> schedule_kind_from_string(std::string_view s) {
  if (s == "static_block") return ScheduleKind::StaticBlock;
  if (s == "static_chunk") return ScheduleKind::StaticChunk;
  if (s == "dynamic") return ScheduleKind::Dynamic;
  return std::nullopt;
}

SchedulePolicy parse_policy(const Json& j, const std::string& path) {
  detail::expect_object(j, path);
  detail::reject_unknown(j, {"kind", "chunk"}, path);
  const std::string kind = detail::as_string(detail::require(j, "kind", path), path + ".kind");
  auto parsed = schedule_kind_from_string(kind);
  if (!parsed) fail(ErrorKind::InvalidPolicy, path + ".kind: unknown schedule \"" + kind + "\"");
  SchedulePolicy policy{*parsed, 0};
  const Json* chunk = detail::optional(j, "chunk");
  if (policy.kind == ScheduleKind::StaticBlock) {
    if (chunk) fail(ErrorKind::InvalidPolicy, path + ": static_block takes no chunk");
    return policy;
  }
  if (!chunk) fail(ErrorKind::InvalidPolicy, path + ": " + kind + " requires a chunk size");
  if (!chunk->is_number_integer()) fail(ErrorKind::InvalidPolicy, path + ".chunk: expected an integer");
  if (chunk->is_number_unsigned() ? chunk->get<std::uint64_t>() == 0 : chunk->get<std::int64_t>() < 1) {
    fail(ErrorKind::InvalidPolicy, path + ".chunk: must be >= 1");
  }
  policy.chunk = chunk->get<std::uint64_t>();
  return policy;
}

Directive parse_directive(const Json& j, const std::string& path) {
  detail::expect_object(j, path);
  detail::reject_unknown(j, {"type", "target", "schedule", "num_threads", "lock"}, path);
  Directive d;
  const std::string type = detail::as_string(detail::require(j, "type", path), path + ".type");
  auto parsed = directive_type_from_string(type);
  if (!parsed) fail(ErrorKind::SyntaxError, path + ".type: unknown directive \"" + type + "\"");
  d.type = *parsed;
  d.target = TargetSelector::parse(detail::as_string(detail::require(j, "target", path), path + ".target"));

  const Json* schedule = detail::optional(j, "schedule");
  if (d.type == DirectiveType::ParallelFor) {
    if (!schedule) fail(ErrorKind::InvalidPolicy, path + ": parallel_for requires a schedule");
    d.schedule = parse_policy(*schedule, path + ".schedule");
  } else if (schedule) {
    fail(ErrorKind::InvalidPolicy, path + ": only parallel_for takes a schedule");
  }

  if (const Json* nt = detail::optional(j, "num_threads")) {
    const auto v = detail::as_u64(*nt, path + ".num_threads");
    if (v > 1u << 20) fail(ErrorKind::SyntaxError, path + ".num_threads: too large");
    if (v != 0 && d.type != DirectiveType::ParallelFor) {
      fail(ErrorKind::SyntaxError, path + ": only parallel_for takes num_threads");
    }
    d.num_threads = static_cast<unsigned>(v);
  }
  if (const Json* lock = detail::optional(j, "lock")) {
    if (d.type != DirectiveType::Critical) fail(ErrorKind::SyntaxError, path + ": only critical takes a lock");
    d.lock = detail::as_string(*lock, path + ".lock");
    if (d.lock->empty()) fail(ErrorKind::SyntaxError, path + ".lock: must not be empty");
  }
  return d;
}

}  // namespace

std::string_view to_string(DirectiveType type) noexcept {
  switch (type) {
    case DirectiveType::ParallelFor: return "parallel_for";
    case DirectiveType::Critical: return "critical";
    case DirectiveType::Single: return "single";
  }
  return "";
}

std::string_view to_string(ScheduleKind kind) noexcept {
  switch (kind) {
    case ScheduleKind::StaticBlock: return "static_block";
    case ScheduleKind::StaticChunk: return "static_chunk";
    case ScheduleKind::Dynamic: return "dynamic";
  }
  return "";
}

TargetSelector TargetSelector::parse(std::string_view text) {
  TargetSelector sel;
  const auto hash = text.rfind('#');
  if (hash != std::string_view::npos && hash + 1 < text.size()) {
    std::string_view digits = text.substr(hash + 1);
    std::uint64_t k = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec == std::errc() && ptr == digits.data() + digits.size()) {
      sel.name = std::string(text.substr(0, hash));
      sel.ordinal = k;
    }
  }
  if (!sel.ordinal) sel.name = std::string(text);
  if (sel.name.empty()) fail(ErrorKind::SyntaxError, "directive target must name a task");
  return sel;
}

std::string TargetSelector::str() const {
  return ordinal ? name + "#" + std::to_string(*ordinal) : name;
}

DirectiveSpec parse_spec(std::string_view text) {
  Json doc = detail::parse_strict(text, "spec");
  detail::expect_object(doc, "spec");
  detail::reject_unknown(doc, {"version", "max_cores_requested", "directives"}, "spec");
  if (const Json* version = detail::optional(doc, "version")) {
    const auto v = detail::as_i64(*version, "spec.version");
    if (v != kSpecFormatVersion) fail(ErrorKind::VersionError, "spec: unsupported format version " + std::to_string(v));
  }
  DirectiveSpec spec;
  if (const Json* mc = detail::optional(doc, "max_cores_requested")) {
    const auto v = detail::as_u64(*mc, "spec.max_cores_requested");
    if (v < 1 || v > 1u << 20) fail(ErrorKind::SyntaxError, "spec.max_cores_requested: must be >= 1");
    spec.max_cores_requested = static_cast<unsigned>(v);
  }
  const Json& list = detail::require(doc, "directives", "spec");
  if (!list.is_array()) fail(ErrorKind::SyntaxError, "spec.directives: expected an array");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < list.size(); ++i) {
    Directive d = parse_directive(list[i], "spec.directives[" + std::to_string(i) + "]");
    if (!seen.insert(d.target.str()).second) {
      fail(ErrorKind::DuplicateTarget, "spec.directives[" + std::to_string(i) + "]: target \"" +
                                           d.target.str() + "\" already has a directive");
    }
    spec.directives.push_back(std::move(d));
  }
  return spec;
}

std::string write_spec(const DirectiveSpec& spec) {
  nlohmann::ordered_json doc;
  doc["version"] = kSpecFormatVersion;
  doc["max_cores_requested"] = spec.max_cores_requested;
  auto list = nlohmann::ordered_json::array();
  for (const auto& d : spec.directives) {
    nlohmann::ordered_json j;
    j["type"] = std::string(to_string(d.type));
    j["target"] = d.target.str();
    if (d.schedule) {
      nlohmann::ordered_json s;
      s["kind"] = std::string(to_string(d.schedule->kind));
      if (d.schedule->kind != ScheduleKind::StaticBlock) s["chunk"] = d.schedule->chunk;
      j["schedule"] = std::move(s);
    }
    if (d.type == DirectiveType::ParallelFor) j["num_threads"] = d.num_threads;
    if (d.lock) j["lock"] = *d.lock;
    list.push_back(std::move(j));
  }
  doc["directives"] = std::move(list);
  return doc.dump(2) + "\n";
}

const Directive* BoundProgram::binding(TaskId id) const {
  auto pos = index_->find(id);
  if (!pos) return nullptr;
  auto d = directive_at(*pos);
  return d ? &directives_[*d] : nullptr;
}

std::vector<std::pair<TaskId, std::size_t>> BoundProgram::bindings() const {
  std::vector<std::pair<TaskId, std::size_t>> out;
  for (std::size_t pos = 0; pos < directive_of_.size(); ++pos) {
    if (directive_of_[pos] >= 0) {
      out.emplace_back(trace_->tasks[pos].id, static_cast<std::size_t>(directive_of_[pos]));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

BoundProgram bind(const DirectiveSpec& spec, std::shared_ptr<const TaskTrace> trace) {
  if (!trace) fail(ErrorKind::InvalidParams, "bind: no trace");
  if (auto violations = validate_trace(*trace); !violations.empty()) {
    const auto& v = violations.front();
    fail(ErrorKind::ValidationError, "trace is invalid (" + std::to_string(violations.size()) +
                                         " violation(s)); first: " + std::string(to_string(v.rule)) + ": " +
                                         v.message);
  }

  BoundProgram bound;
  bound.trace_ = trace;
  bound.index_ = std::make_shared<const TraceIndex>(*trace);
  bound.directives_ = spec.directives;
  const auto& tasks = trace->tasks;
  const TraceIndex& index = *bound.index_;
  bound.directive_of_.assign(tasks.size(), -1);

  std::unordered_map<std::string_view, std::vector<std::size_t>> by_name;
  for (std::size_t pos = 0; pos < tasks.size(); ++pos) by_name[tasks[pos].name].push_back(pos);

  for (std::size_t di = 0; di < spec.directives.size(); ++di) {
    const Directive& d = spec.directives[di];
    const std::string target = d.target.str();
    auto it = by_name.find(d.target.name);
    if (it == by_name.end()) fail(ErrorKind::TargetNotFound, "no task named \"" + d.target.name + "\"");
    std::vector<std::size_t> chosen;
    if (d.target.ordinal) {
      if (*d.target.ordinal >= it->second.size()) {
        fail(ErrorKind::TargetNotFound, "\"" + target + "\": task \"" + d.target.name + "\" occurs only " +
                                            std::to_string(it->second.size()) + " time(s)");
      }
      chosen.push_back(it->second[*d.target.ordinal]);
    } else if (d.type == DirectiveType::ParallelFor && it->second.size() > 1) {
      fail(ErrorKind::AmbiguousTarget, "\"" + target + "\" matches " + std::to_string(it->second.size()) +
                                           " tasks; select one with \"" + d.target.name + "#k\"");
    } else {
      chosen = it->second;
    }

    for (std::size_t pos : chosen) {
      if (d.type == DirectiveType::ParallelFor) {
        if (tasks[pos].kind != TaskKind::Loop) {
          fail(ErrorKind::NotALoop, "parallel_for target \"" + target + "\" is a " +
                                        std::string(to_string(tasks[pos].kind)) + ", not a loop");
        }
        auto kids = index.children(pos);
        bool has_iteration = std::any_of(kids.begin(), kids.end(), [&](std::size_t c) {
          return tasks[c].kind == TaskKind::Iteration;
        });
        if (!has_iteration) fail(ErrorKind::EmptyLoop, "parallel_for target \"" + target + "\" has no iterations");
      }
      if (bound.directive_of_[pos] >= 0) {
        fail(ErrorKind::DuplicateTarget,
             "task " + std::to_string(tasks[pos].id) + " is targeted by both \"" +
                 spec.directives[static_cast<std::size_t>(bound.directive_of_[pos])].target.str() +
                 "\" and \"" + target + "\"");
      }
      bound.directive_of_[pos] = static_cast<std::int32_t>(di);
    }
  }

  // Walk the tree tracking the innermost enclosing parallel_for.
  std::vector<char> used_in_region(spec.directives.size(), 0);
  std::vector<char> used_outside(spec.directives.size(), 0);
  if (auto root = index.root()) {
    std::vector<std::pair<std::size_t, bool>> stack{{*root, false}};
    while (!stack.empty()) {
      auto [pos, in_region] = stack.back();
      stack.pop_back();
      bool child_in_region = in_region;
      if (auto di = bound.directive_at(pos)) {
        const Directive& d = spec.directives[*di];
        if (d.type == DirectiveType::ParallelFor) {
          if (in_region) {
            fail(ErrorKind::NestedParallelism, "parallel_for target \"" + d.target.str() +
                                                   "\" (task " + std::to_string(tasks[pos].id) +
                                                   ") is nested inside another parallel_for");
          }
          child_in_region = true;
        } else {
          (in_region ? used_in_region : used_outside)[*di] = 1;
        }
      }
      auto kids = index.children(pos);
      for (auto c = kids.rbegin(); c != kids.rend(); ++c) stack.emplace_back(*c, child_in_region);
    }
  }
  for (std::size_t di = 0; di < spec.directives.size(); ++di) {
    if (used_outside[di]) {
      bound.diagnostics_.push_back("warning: " + std::string(to_string(spec.directives[di].type)) + " \"" +
                                   spec.directives[di].target.str() +
                                   "\" has occurrences outside any parallel region; those run as plain code");
    }
  }
  return bound;
}

BoundProgram bind(const DirectiveSpec& spec, const TaskTrace& trace) {
  return bind(spec, std::make_shared<const TaskTrace>(trace));
}

}  // namespace tracesim
