// SPDX-License-Identifier: Apache-2.0
//
// Reference schedulers for tests. Deliberately naive and independent of the
// simulator: no code is shared with src/scheduler.cpp.
#pragma once

#include <cstdint>
#include <vector>

#include "tracesim/directives.hpp"
#include "tracesim/trace.hpp"

namespace tracesim::oracle {

struct OracleInstance {
  std::vector<Cycles> durations;
  unsigned cores = 1;
  SchedulePolicy policy;
  Cycles per_dispatch_overhead = 0;  // charged before each dynamic chunk
};

/// Makespan of one loop under the instance's policy.
Cycles reference_makespan(const OracleInstance& instance);

/// Minimum over every assignment of iterations to cores of the largest
/// per-core sum. Limited to 12 iterations and 4 cores (InstanceTooLarge).
Cycles exhaustive_min_makespan(const std::vector<Cycles>& durations, unsigned cores);

}  // namespace tracesim::oracle
