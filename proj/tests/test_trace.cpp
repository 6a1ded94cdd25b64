// SPDX-License-Identifier: Apache-2.0
#include <random>

#include "test_support.hpp"
#include "tracesim/error.hpp"
#include "tracesim/synthgen.hpp"

using namespace tracesim;
using testing::task;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::IoError;
}

// Random well-formed trace: each task splits its interval among up to three
// ordered children, occasionally a loop with iteration children.
TaskTrace random_trace(std::mt19937_64& rng) {
  TaskTrace t;
  TaskId next = 0;
  auto uni = [&](std::uint64_t lo, std::uint64_t hi) { return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng); };

  std::function<void(std::optional<TaskId>, TaskKind, Cycles, Cycles, std::optional<std::uint64_t>, int)> build =
      [&](std::optional<TaskId> parent, TaskKind kind, Cycles s, Cycles e, std::optional<std::uint64_t> index,
          int depth) {
        const TaskId id = next++;
        TaskRecord rec = task(id, parent, "t" + std::to_string(uni(0, 4)), kind, s, e, index);
        if (uni(0, 3) == 0) {
          MemoryStats m{uni(0, 50), uni(0, 50), {}};
          m.per_level["L1"] = (m.reads + m.writes) / 2;
          rec.mem = m;
        }
        t.tasks.push_back(rec);
        if (depth >= 3 || e - s < 2) return;
        const bool loop = kind == TaskKind::Loop;
        const std::uint64_t n = loop ? uni(1, 4) : uni(0, 3);
        std::vector<Cycles> cuts;
        for (std::uint64_t i = 0; i < 2 * n; ++i) cuts.push_back(uni(s, e));
        std::sort(cuts.begin(), cuts.end());
        for (std::uint64_t i = 0; i < n; ++i) {
          const TaskKind ck = loop ? TaskKind::Iteration : (uni(0, 3) == 0 ? TaskKind::Loop : TaskKind::Function);
          build(id, ck, cuts[2 * i], cuts[2 * i + 1], loop ? std::optional<std::uint64_t>(i) : std::nullopt,
                depth + 1);
        }
      };
  build(std::nullopt, TaskKind::Function, 0, uni(0, 1000), std::nullopt, 0);
  return t;
}

}  // namespace

TEST_CASE("parse_trace: minimal trace") {
  auto t = parse_trace(R"({"version":1,"clock":"cycles","tasks":[
      {"id":0,"parent":null,"name":"main","kind":"function","start":0,"end":100}]})");
  REQUIRE(t.tasks.size() == 1);
  CHECK(t.tasks[0].id == 0);
  CHECK_FALSE(t.tasks[0].parent.has_value());
  CHECK(t.tasks[0].duration() == 100);
  CHECK(validate_trace(t).empty());
}

TEST_CASE("parse_trace: syntax errors") {
  SUBCASE("duplicate field in a record") {
    auto text = R"({"version":1,"clock":"cycles","tasks":[
      {"id":0,"parent":null,"name":"a","kind":"function","start":0,"start":5,"end":100}]})";
    try {
      parse_trace(text);
      FAIL("expected SyntaxError");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::SyntaxError);
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
      CHECK(std::string(e.what()).find("duplicate") != std::string::npos);
    }
  }
  SUBCASE("truncated document") {
    CHECK(kind_of([] { parse_trace(R"({"version":1,"clock":"cycles","tasks":[)"); }) == ErrorKind::SyntaxError);
  }
  SUBCASE("record position is reported") {
    try {
      parse_trace(R"({"version":1,"clock":"cycles","tasks":[
        {"id":0,"parent":null,"name":"a","kind":"function","start":0,"end":10},
        {"id":1,"parent":0,"name":"b","kind":"gizmo","start":0,"end":10}]})");
      FAIL("expected SyntaxError");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::SyntaxError);
      CHECK(std::string(e.what()).find("tasks[1]") != std::string::npos);
    }
  }
  SUBCASE("negative timestamp") {
    CHECK(kind_of([] {
            parse_trace(R"({"version":1,"clock":"cycles","tasks":[
              {"id":0,"parent":null,"name":"a","kind":"function","start":-1,"end":10}]})");
          }) == ErrorKind::SyntaxError);
  }
  SUBCASE("unknown field") {
    CHECK(kind_of([] {
            parse_trace(R"({"version":1,"clock":"cycles","tasks":[
              {"id":0,"parent":null,"name":"a","kind":"function","start":0,"end":10,"colour":"red"}]})");
          }) == ErrorKind::SyntaxError);
  }
  SUBCASE("missing tasks") {
    CHECK(kind_of([] { parse_trace(R"({"version":1,"clock":"cycles"})"); }) == ErrorKind::SyntaxError);
  }
  SUBCASE("wrong clock unit") {
    CHECK(kind_of([] { parse_trace(R"({"version":1,"clock":"ns","tasks":[]})"); }) == ErrorKind::SyntaxError);
  }
}

TEST_CASE("parse_trace: unsupported version") {
  CHECK(kind_of([] { parse_trace(R"({"version":2,"clock":"cycles","tasks":[]})"); }) == ErrorKind::VersionError);
}

TEST_CASE("parse_trace: generated FAST-like trace keeps every record") {
  const TaskTrace generated = gen_fast_like(240, 320, 0.1, 7);
  const TaskTrace parsed = parse_trace(write_trace(generated));
  CHECK(parsed.tasks.size() == 242);
  CHECK(parsed == generated);
}

TEST_CASE("validate_trace") {
  TaskTrace t;
  t.tasks = {task(0, std::nullopt, "main", TaskKind::Function, 0, 100),
             task(1, TaskId{0}, "a", TaskKind::Function, 10, 40),
             task(2, TaskId{0}, "b", TaskKind::Function, 50, 90)};
  CHECK(validate_trace(t).empty());

  SUBCASE("child ends after parent") {
    t.tasks[2].end = 120;
    auto v = validate_trace(t);
    REQUIRE(v.size() == 1);
    CHECK(v[0].rule == Violation::Rule::Containment);
    CHECK(v[0].ids == std::vector<TaskId>{2, 0});
    CHECK(to_string(v[0].rule) == "ContainmentViolation");
  }
  SUBCASE("overlapping siblings") {
    t.tasks[2].start = 30;
    auto v = validate_trace(t);
    REQUIRE(v.size() == 1);
    CHECK(v[0].rule == Violation::Rule::Overlap);
    CHECK(to_string(v[0].rule) == "OverlapViolation");
  }
  SUBCASE("siblings out of start order are rejected, not re-sorted") {
    std::swap(t.tasks[1], t.tasks[2]);
    auto v = validate_trace(t);
    REQUIRE(v.size() == 1);
    CHECK(v[0].rule == Violation::Rule::SiblingOrder);
  }
  SUBCASE("two roots") {
    t.tasks[2].parent.reset();
    auto v = validate_trace(t);
    REQUIRE_FALSE(v.empty());
    CHECK(v[0].rule == Violation::Rule::RootCount);
  }
  SUBCASE("duplicate ids") {
    t.tasks[2].id = 1;
    bool found = false;
    for (const auto& x : validate_trace(t)) found |= x.rule == Violation::Rule::DuplicateId;
    CHECK(found);
  }
  SUBCASE("unknown parent") {
    t.tasks[2].parent = 99;
    bool found = false;
    for (const auto& x : validate_trace(t)) found |= x.rule == Violation::Rule::UnknownParent;
    CHECK(found);
  }
  SUBCASE("end before start") {
    t.tasks[1].end = 5;
    bool found = false;
    for (const auto& x : validate_trace(t)) found |= x.rule == Violation::Rule::InvalidInterval;
    CHECK(found);
  }
  SUBCASE("per-level counts exceed accesses") {
    t.tasks[1].mem = MemoryStats{2, 1, {{"L1", 3}, {"L2", 1}}};
    auto v = validate_trace(t);
    REQUIRE(v.size() == 1);
    CHECK(v[0].rule == Violation::Rule::MemoryStats);
  }
  SUBCASE("detached parent cycle") {
    t.tasks.push_back(task(3, TaskId{4}, "x", TaskKind::Function, 0, 1));
    t.tasks.push_back(task(4, TaskId{3}, "y", TaskKind::Function, 0, 1));
    bool found = false;
    for (const auto& x : validate_trace(t)) found |= x.rule == Violation::Rule::Cycle;
    CHECK(found);
  }
}

TEST_CASE("validate_trace: iteration structure") {
  TaskTrace t = testing::loop_trace({5, 5, 5});
  CHECK(validate_trace(t).empty());

  SUBCASE("gap in iteration indices") {
    t.tasks[3].index = 2;
    t.tasks[4].index = 3;
    auto v = validate_trace(t);
    REQUIRE_FALSE(v.empty());
    CHECK(v[0].rule == Violation::Rule::IterationIndex);
  }
  SUBCASE("iteration under a function") {
    t.tasks[1].kind = TaskKind::Function;
    bool found = false;
    for (const auto& x : validate_trace(t)) found |= x.rule == Violation::Rule::IterationOutsideLoop;
    CHECK(found);
  }
  SUBCASE("index on a non-iteration") {
    t.tasks[1].index = 0;
    bool found = false;
    for (const auto& x : validate_trace(t)) found |= x.rule == Violation::Rule::IterationIndex;
    CHECK(found);
  }
}

TEST_CASE("self_segments") {
  SUBCASE("leaf") {
    TaskTrace t;
    t.tasks = {task(0, std::nullopt, "leaf", TaskKind::Function, 10, 50)};
    CHECK(self_segments(t, 0) == std::vector<SelfSegment>{{0, 10, 50}});
  }
  SUBCASE("two children") {
    TaskTrace t;
    t.tasks = {task(0, std::nullopt, "main", TaskKind::Function, 0, 100),
               task(1, TaskId{0}, "a", TaskKind::Function, 20, 40),
               task(2, TaskId{0}, "b", TaskKind::Function, 60, 80)};
    CHECK(self_segments(t, 0) == std::vector<SelfSegment>{{0, 0, 20}, {0, 40, 60}, {0, 80, 100}});
  }
  SUBCASE("fully covered") {
    TaskTrace t;
    t.tasks = {task(0, std::nullopt, "main", TaskKind::Function, 0, 10),
               task(1, TaskId{0}, "a", TaskKind::Function, 0, 10)};
    CHECK(self_segments(t, 0).empty());
  }
  SUBCASE("unknown task") {
    TaskTrace t;
    t.tasks = {task(0, std::nullopt, "main", TaskKind::Function, 0, 10)};
    CHECK(kind_of([&] { self_segments(t, 7); }) == ErrorKind::UnknownTask);
  }
}

TEST_CASE("total_cycles") {
  TaskTrace t;
  t.tasks = {task(0, std::nullopt, "main", TaskKind::Function, 0, 100)};
  CHECK(total_cycles(t) == 100);
  t.tasks[0].start = t.tasks[0].end = 5;
  CHECK(total_cycles(t) == 0);
}

TEST_CASE("property: random traces are valid, round-trip, and conserve self time") {
  std::mt19937_64 rng(2024);
  for (int n = 0; n < 300; ++n) {
    const TaskTrace t = random_trace(rng);
    REQUIRE(validate_trace(t).empty());
    CHECK(parse_trace(write_trace(t)) == t);

    TraceIndex index(t);
    for (std::size_t pos = 0; pos < t.tasks.size(); ++pos) {
      Cycles self = 0;
      for (const auto& s : self_segments(index, t.tasks[pos].id)) self += s.length();
      Cycles children = 0;
      for (std::size_t c : index.children(pos)) children += t.tasks[c].duration();
      CHECK(self + children == t.tasks[pos].duration());
    }
  }
}

TEST_CASE("round-trip keeps names that need escaping") {
  TaskTrace t;
  t.tasks = {task(0, std::nullopt, "quote\" back\\slash\ttab \x01", TaskKind::Region, 0, 1)};
  CHECK(parse_trace(write_trace(t)) == t);
}
