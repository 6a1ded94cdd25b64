// SPDX-License-Identifier: Apache-2.0
#include <random>

#include "test_support.hpp"
#include "tracesim/error.hpp"

using namespace tracesim;

namespace {

CharacterizationDB two_point_db() {
  CharacterizationDB db;
  db.platform = "test";
  db.max_cores = 16;
  db.constructs[Construct::Barrier] = {{2, 100.0, 3.0}, {4, 200.0, 5.0}};
  return db;
}

ErrorKind error_kind(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::IoError;
}

}  // namespace

TEST_CASE("parse_db") {
  const char* text = R"({"platform":"asmp","max_cores":16,
    "constructs":{"barrier":[{"threads":2,"mean":10,"std":1},{"threads":4,"mean":20,"std":2},
                             {"threads":8,"mean":40,"std":4}]},
    "memory_levels":[{"name":"L1","latency":1,"bandwidth":8},{"name":"shared","latency":12,"bandwidth":4}]})";
  const CharacterizationDB db = parse_db(text);
  CHECK(db.platform == "asmp");
  CHECK(db.max_cores == 16);
  REQUIRE(db.constructs.count(Construct::Barrier) == 1);
  CHECK(db.constructs.at(Construct::Barrier).size() == 3);
  CHECK(db.memory_levels.size() == 2);
  CHECK(db.memory_levels[1].latency == 12.0);

  SUBCASE("max_cores defaults to 16") {
    CHECK(parse_db(R"({"platform":"x","constructs":{}})").max_cores == 16);
  }
  SUBCASE("construct outside the closed set") {
    CHECK(error_kind([] { parse_db(R"({"platform":"x","constructs":{"taskwait":[]}})"); }) ==
          ErrorKind::UnknownConstruct);
  }
  SUBCASE("unsorted samples") {
    CHECK(error_kind([] {
            parse_db(R"({"platform":"x","constructs":{"barrier":[{"threads":4,"mean":1},{"threads":2,"mean":1}]}})");
          }) == ErrorKind::UnsortedSamples);
    CHECK(error_kind([] {
            parse_db(R"({"platform":"x","constructs":{"barrier":[{"threads":2,"mean":1},{"threads":2,"mean":1}]}})");
          }) == ErrorKind::UnsortedSamples);
  }
  SUBCASE("negative mean") {
    CHECK(error_kind([] {
            parse_db(R"({"platform":"x","constructs":{"barrier":[{"threads":2,"mean":-1}]}})");
          }) == ErrorKind::SyntaxError);
  }
  SUBCASE("zero bandwidth") {
    CHECK(error_kind([] {
            parse_db(R"({"platform":"x","constructs":{},"memory_levels":[{"name":"L1","latency":1,"bandwidth":0}]})");
          }) == ErrorKind::SyntaxError);
  }
  SUBCASE("malformed") {
    CHECK(error_kind([] { parse_db("{\"platform\":"); }) == ErrorKind::SyntaxError);
  }
  SUBCASE("future version") {
    CHECK(error_kind([] { parse_db(R"({"version":3,"platform":"x","constructs":{}})"); }) ==
          ErrorKind::VersionError);
  }
}

TEST_CASE("overhead: interpolation and clamping") {
  const CharacterizationDB db = two_point_db();
  CHECK(overhead(db, Construct::Barrier, 3) == 150);
  CHECK(overhead(db, Construct::Barrier, 8) == 200);
  CHECK(overhead(db, Construct::Barrier, 2) == 100);
  CHECK(overhead(db, Construct::Barrier, 1) == 100);
  CHECK(overhead(db, "barrier", 4) == 200);
}

TEST_CASE("overhead: rounding to whole cycles") {
  CharacterizationDB db;
  db.constructs[Construct::ParallelFork] = {{1, 10.0, 0.0}, {4, 11.0, 0.0}};
  CHECK(overhead(db, Construct::ParallelFork, 2) == 10);  // 10.333
  CHECK(overhead(db, Construct::ParallelFork, 3) == 11);  // 10.667
}

TEST_CASE("overhead: errors and empty sample lists") {
  CharacterizationDB db = two_point_db();
  CHECK(error_kind([&] { overhead(db, Construct::ParallelFork, 2); }) == ErrorKind::UnknownConstruct);
  CHECK(error_kind([&] { overhead(db, "taskwait", 2); }) == ErrorKind::UnknownConstruct);
  CHECK(error_kind([&] { overhead(db, Construct::Barrier, 0); }) == ErrorKind::ThreadsOutOfRange);
  CHECK(error_kind([&] { overhead(db, Construct::Barrier, 17); }) == ErrorKind::ThreadsOutOfRange);
  db.constructs[Construct::ParallelFork] = {};
  CHECK(overhead(db, Construct::ParallelFork, 5) == 0);
}

TEST_CASE("synthesize_db") {
  SynthesisParams params;
  params.costs[Construct::Barrier] = {50.0, 10.0};
  const CharacterizationDB db = synthesize_db(params);
  CHECK(overhead(db, Construct::Barrier, 4) == 90);
  std::vector<unsigned> threads;
  for (const auto& s : db.constructs.at(Construct::Barrier)) threads.push_back(s.threads);
  CHECK(threads == std::vector<unsigned>{1, 2, 4, 8, 16});
  CHECK(db.constructs.size() == kAllConstructs.size());

  SUBCASE("ideal machine") {
    const CharacterizationDB zero = zero_db();
    for (Construct c : kAllConstructs) {
      for (unsigned t = 1; t <= zero.max_cores; ++t) CHECK(overhead(zero, c, t) == 0);
    }
  }
  SUBCASE("non power-of-two max_cores ends the ladder at max_cores") {
    CHECK(thread_ladder(12) == std::vector<unsigned>{1, 2, 4, 8, 12});
    CHECK(thread_ladder(1) == std::vector<unsigned>{1});
  }
  SUBCASE("invalid params") {
    SynthesisParams bad;
    bad.costs[Construct::Barrier] = {-1.0, 0.0};
    CHECK(error_kind([&] { synthesize_db(bad); }) == ErrorKind::InvalidParams);
    SynthesisParams no_cores;
    no_cores.max_cores = 0;
    CHECK(error_kind([&] { synthesize_db(no_cores); }) == ErrorKind::InvalidParams);
  }
}

TEST_CASE("write_db round-trips") {
  SynthesisParams params;
  params.platform = "rt";
  params.max_cores = 8;
  params.costs[Construct::ParallelFork] = {123.456, 7.25};
  params.costs[Construct::ForDynamicDispatch] = {0.1, 0.3};
  params.memory_levels = {{"L1", 1.0, 8.0}, {"TCDM", 2.5, 4.0}, {"L3", 120.0, 0.5}};
  const CharacterizationDB db = synthesize_db(params);
  const CharacterizationDB back = parse_db(write_db(db));
  CHECK(back == db);
  CHECK(back.memory_levels == db.memory_levels);
  CHECK(write_db(back) == write_db(db));

  CharacterizationDB with_std = two_point_db();
  CHECK(parse_db(write_db(with_std)) == with_std);
}

TEST_CASE("property: interpolation is monotone when samples are") {
  std::mt19937_64 rng(7);
  for (int n = 0; n < 200; ++n) {
    CharacterizationDB db;
    db.max_cores = 32;
    std::vector<OverheadSample> samples;
    double mean = std::uniform_real_distribution<double>(0, 50)(rng);
    unsigned threads = 1;
    const int k = std::uniform_int_distribution<int>(1, 6)(rng);
    for (int i = 0; i < k; ++i) {
      threads += std::uniform_int_distribution<unsigned>(1, 5)(rng);
      mean += std::uniform_real_distribution<double>(0, 300)(rng);
      samples.push_back({threads, mean, 0.0});
    }
    db.constructs[Construct::ParallelJoin] = samples;
    Cycles prev = 0;
    for (unsigned t = 1; t <= db.max_cores; ++t) {
      const Cycles v = overhead(db, Construct::ParallelJoin, t);
      CHECK(v >= prev);
      prev = v;
    }
  }
}
