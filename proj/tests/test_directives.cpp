// SPDX-License-Identifier: Apache-2.0
#include "test_support.hpp"
#include "tracesim/error.hpp"
#include "tracesim/synthgen.hpp"

using namespace tracesim;
using testing::task;

namespace {

ErrorKind error_kind(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::IoError;
}

// main -> [setup fn] -> loop detect_rows -> 4 iterations, each ending with
// an "append_kp" region; a second function "helper" runs twice.
TaskTrace keypoint_trace() {
  WorkloadParams w;
  w.n_iterations = 4;
  w.cost_model = UniformCost{10};
  w.critical_region = CriticalRegionParams{"append_kp", 3};
  w.serial_prologue = 20;
  TaskTrace t = gen_loop_trace(w);
  t.tasks.push_back(task(100, TaskId{0}, "helper", TaskKind::Function, 2, 5));
  t.tasks.push_back(task(101, TaskId{0}, "helper", TaskKind::Function, 8, 12));
  // Keep siblings of main in start order: helpers run before the loop.
  std::vector<TaskRecord> reordered{t.tasks[0], t.tasks[t.tasks.size() - 2], t.tasks.back()};
  reordered.insert(reordered.end(), t.tasks.begin() + 1, t.tasks.end() - 2);
  t.tasks = reordered;
  return t;
}

}  // namespace

TEST_CASE("parse_spec") {
  const DirectiveSpec spec = parse_spec(R"({"max_cores_requested":8,"directives":[
      {"type":"parallel_for","target":"detect_rows","schedule":{"kind":"dynamic","chunk":1}}]})");
  CHECK(spec.max_cores_requested == 8);
  REQUIRE(spec.directives.size() == 1);
  CHECK(spec.directives[0].type == DirectiveType::ParallelFor);
  CHECK(spec.directives[0].target.name == "detect_rows");
  CHECK(spec.directives[0].schedule == SchedulePolicy::dynamic(1));
  CHECK(spec.directives[0].num_threads == 0);

  SUBCASE("duplicate target") {
    CHECK(error_kind([] {
            parse_spec(R"({"directives":[
              {"type":"parallel_for","target":"detect_rows","schedule":{"kind":"static_block"}},
              {"type":"parallel_for","target":"detect_rows","schedule":{"kind":"dynamic","chunk":2}}]})");
          }) == ErrorKind::DuplicateTarget);
  }
  SUBCASE("dynamic with chunk 0") {
    CHECK(error_kind([] {
            parse_spec(R"({"directives":[{"type":"parallel_for","target":"x","schedule":{"kind":"dynamic","chunk":0}}]})");
          }) == ErrorKind::InvalidPolicy);
  }
  SUBCASE("dynamic without chunk") {
    CHECK(error_kind([] {
            parse_spec(R"({"directives":[{"type":"parallel_for","target":"x","schedule":{"kind":"dynamic"}}]})");
          }) == ErrorKind::InvalidPolicy);
  }
  SUBCASE("parallel_for without schedule") {
    CHECK(error_kind([] { parse_spec(R"({"directives":[{"type":"parallel_for","target":"x"}]})"); }) ==
          ErrorKind::InvalidPolicy);
  }
  SUBCASE("schedule on critical") {
    CHECK(error_kind([] {
            parse_spec(R"({"directives":[{"type":"critical","target":"x","schedule":{"kind":"static_block"}}]})");
          }) == ErrorKind::InvalidPolicy);
  }
  SUBCASE("guided is not supported") {
    CHECK(error_kind([] {
            parse_spec(R"({"directives":[{"type":"parallel_for","target":"x","schedule":{"kind":"guided","chunk":1}}]})");
          }) == ErrorKind::InvalidPolicy);
  }
  SUBCASE("lock on single") {
    CHECK(error_kind([] { parse_spec(R"({"directives":[{"type":"single","target":"x","lock":"l"}]})"); }) ==
          ErrorKind::SyntaxError);
  }
  SUBCASE("unknown directive type") {
    CHECK(error_kind([] { parse_spec(R"({"directives":[{"type":"sections","target":"x"}]})"); }) ==
          ErrorKind::SyntaxError);
  }
}

TEST_CASE("parse_spec / write_spec round-trip") {
  DirectiveSpec spec = testing::parallel_for("detect_rows", SchedulePolicy::static_chunk(4), 6);
  spec.max_cores_requested = 12;
  spec.directives.push_back(testing::critical("append_kp", "kp_lock"));
  spec.directives.push_back(testing::critical("log"));
  spec.directives.push_back(testing::single("helper#1"));
  Directive block;
  block.target = TargetSelector::parse("other");
  block.schedule = SchedulePolicy::static_block();
  spec.directives.push_back(block);
  const DirectiveSpec back = parse_spec(write_spec(spec));
  CHECK(back == spec);
  CHECK(back.directives[2].lock_name() == "global");
}

TEST_CASE("TargetSelector") {
  CHECK(TargetSelector::parse("foo") == TargetSelector{"foo", std::nullopt});
  CHECK(TargetSelector::parse("foo#3") == TargetSelector{"foo", 3});
  CHECK(TargetSelector::parse("a#b") == TargetSelector{"a#b", std::nullopt});
  CHECK(TargetSelector{"foo", 2}.str() == "foo#2");
}

TEST_CASE("bind") {
  const TaskTrace trace = keypoint_trace();
  REQUIRE(validate_trace(trace).empty());

  SUBCASE("parallel_for on a loop present once") {
    const BoundProgram bound = bind(testing::parallel_for("detect_rows", SchedulePolicy::dynamic(1)), trace);
    auto b = bound.bindings();
    REQUIRE(b.size() == 1);
    CHECK(b[0].first == 1);  // loop id from the generator
    CHECK(bound.binding(1)->type == DirectiveType::ParallelFor);
    CHECK(bound.binding(2) == nullptr);
  }
  SUBCASE("parallel_for on a function") {
    CHECK(error_kind([&] { bind(testing::parallel_for("main", SchedulePolicy::static_block()), trace); }) ==
          ErrorKind::NotALoop);
  }
  SUBCASE("missing target") {
    CHECK(error_kind([&] { bind(testing::parallel_for("nope", SchedulePolicy::static_block()), trace); }) ==
          ErrorKind::TargetNotFound);
    CHECK(error_kind([&] { bind(testing::parallel_for("detect_rows#1", SchedulePolicy::static_block()), trace); }) ==
          ErrorKind::TargetNotFound);
  }
  SUBCASE("critical binds every task of that name") {
    DirectiveSpec spec = testing::parallel_for("detect_rows", SchedulePolicy::dynamic(1));
    spec.directives.push_back(testing::critical("append_kp"));
    const BoundProgram bound = bind(spec, trace);
    std::size_t criticals = 0;
    for (auto [id, di] : bound.bindings()) {
      if (bound.directives()[di].type == DirectiveType::Critical) {
        ++criticals;
        CHECK(bound.trace().tasks[*bound.index().find(id)].name == "append_kp");
      }
    }
    CHECK(criticals == 4);
    CHECK(bound.diagnostics().empty());
  }
  SUBCASE("ordinal selects one occurrence") {
    DirectiveSpec spec;
    spec.directives.push_back(testing::critical("helper#1"));
    const BoundProgram bound = bind(spec, trace);
    REQUIRE(bound.bindings().size() == 1);
    CHECK(bound.bindings()[0].first == 101);
    // outside any parallel region: accepted with a diagnostic
    CHECK(bound.diagnostics().size() == 1);
  }
  SUBCASE("overlapping selectors on one task") {
    DirectiveSpec spec;
    spec.directives.push_back(testing::critical("helper"));
    spec.directives.push_back(testing::single("helper#0"));
    CHECK(error_kind([&] { bind(spec, trace); }) == ErrorKind::DuplicateTarget);
  }
  SUBCASE("invalid trace") {
    TaskTrace broken = trace;
    broken.tasks.back().end += 1000;
    CHECK(error_kind([&] { bind(testing::parallel_for("detect_rows", SchedulePolicy::static_block()), broken); }) ==
          ErrorKind::ValidationError);
  }
  SUBCASE("deterministic") {
    DirectiveSpec spec = testing::parallel_for("detect_rows", SchedulePolicy::dynamic(2));
    spec.directives.push_back(testing::critical("append_kp"));
    CHECK(bind(spec, trace).bindings() == bind(spec, trace).bindings());
  }
}

TEST_CASE("bind: ambiguous and nested loops") {
  TaskTrace t;
  t.tasks = {task(0, std::nullopt, "main", TaskKind::Function, 0, 100),
             task(1, TaskId{0}, "outer", TaskKind::Loop, 0, 40),
             task(2, TaskId{1}, "it", TaskKind::Iteration, 0, 20, 0),
             task(3, TaskId{2}, "inner", TaskKind::Loop, 0, 20),
             task(4, TaskId{3}, "it", TaskKind::Iteration, 0, 20, 0),
             task(5, TaskId{1}, "it", TaskKind::Iteration, 20, 40, 1),
             task(6, TaskId{0}, "inner", TaskKind::Loop, 50, 60),
             task(7, TaskId{6}, "it", TaskKind::Iteration, 50, 60, 0),
             task(8, TaskId{0}, "empty", TaskKind::Loop, 60, 70)};
  REQUIRE(validate_trace(t).empty());

  CHECK(error_kind([&] { bind(testing::parallel_for("inner", SchedulePolicy::static_block()), t); }) ==
        ErrorKind::AmbiguousTarget);
  CHECK_NOTHROW(bind(testing::parallel_for("inner#1", SchedulePolicy::static_block()), t));
  CHECK(error_kind([&] { bind(testing::parallel_for("empty", SchedulePolicy::static_block()), t); }) ==
        ErrorKind::EmptyLoop);

  DirectiveSpec nested = testing::parallel_for("outer", SchedulePolicy::static_block());
  nested.directives.push_back(testing::parallel_for("inner#0", SchedulePolicy::dynamic(1)).directives[0]);
  CHECK(error_kind([&] { bind(nested, t); }) == ErrorKind::NestedParallelism);
}
