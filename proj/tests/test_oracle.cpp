// SPDX-License-Identifier: Apache-2.0
#include <numeric>

#include "oracle.hpp"
#include "test_support.hpp"
#include "tracesim/error.hpp"
#include "tracesim/synthgen.hpp"

using namespace tracesim;
using oracle::OracleInstance;

namespace {

const std::vector<Cycles> kExampleLoop{5, 3, 3, 2, 2, 1};

}  // namespace

TEST_CASE("oracle: example loop") {
  CHECK(oracle::reference_makespan({kExampleLoop, 2, SchedulePolicy::dynamic(1), 0}) == 8);
  CHECK(oracle::reference_makespan({kExampleLoop, 2, SchedulePolicy::static_block(), 0}) == 11);
  CHECK(oracle::reference_makespan({kExampleLoop, 2, SchedulePolicy::static_chunk(1), 0}) == 10);
  CHECK(oracle::reference_makespan({kExampleLoop, 2, SchedulePolicy::dynamic(1), 1}) == 11);
  CHECK(oracle::reference_makespan({{4, 4, 4, 4}, 4, SchedulePolicy::dynamic(1), 0}) == 4);
}

TEST_CASE("oracle: exhaustive minimum") {
  CHECK(oracle::exhaustive_min_makespan(kExampleLoop, 2) == 8);
  CHECK(oracle::exhaustive_min_makespan({7, 5, 4, 3, 1}, 3) == 7);
  CHECK(oracle::exhaustive_min_makespan({1, 1, 1, 1}, 2) == 2);
  CHECK(oracle::exhaustive_min_makespan({9}, 4) == 9);
  CHECK_THROWS_AS(oracle::exhaustive_min_makespan(std::vector<Cycles>(13, 1), 2), Error);
  CHECK_THROWS_AS(oracle::exhaustive_min_makespan({1, 2}, 5), Error);
}

TEST_CASE("property: exhaustive <= dynamic <= serial sum") {
  SplitMix64 rng(4242);
  for (int n = 0; n < 300; ++n) {
    std::vector<Cycles> d(1 + rng.next() % 12);
    for (auto& c : d) c = rng.next() % 100;
    const unsigned p = 1 + static_cast<unsigned>(rng.next() % 4);
    const Cycles best = oracle::exhaustive_min_makespan(d, p);
    const Cycles dyn = oracle::reference_makespan({d, p, SchedulePolicy::dynamic(1), 0});
    const Cycles sum = std::accumulate(d.begin(), d.end(), Cycles{0});
    CHECK(best <= dyn);
    CHECK(dyn <= sum);
    CHECK(best >= (sum + p - 1) / p);
    CHECK(best >= *std::max_element(d.begin(), d.end()));
  }
}
