// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tracesim/trace.hpp"

namespace tracesim {

/// Parallel-runtime constructs whose cost the database characterizes.
enum class Construct {
  ParallelFork,
  ParallelJoin,
  ForStaticInit,
  ForDynamicDispatch,
  Barrier,
  CriticalEnter,
  CriticalExit,
  SingleEnter,
};

inline constexpr std::array<Construct, 8> kAllConstructs = {
    Construct::ParallelFork,  Construct::ParallelJoin,  Construct::ForStaticInit,
    Construct::ForDynamicDispatch, Construct::Barrier, Construct::CriticalEnter,
    Construct::CriticalExit,  Construct::SingleEnter,
};

std::string_view to_string(Construct c) noexcept;
std::optional<Construct> construct_from_string(std::string_view name) noexcept;

struct OverheadSample {
  unsigned threads = 1;
  double mean = 0.0;  // cycles
  double std = 0.0;   // cycles; carried for reporting only

  bool operator==(const OverheadSample&) const = default;
};

struct MemoryLevel {
  std::string name;
  double latency = 0.0;    // cycles per access
  double bandwidth = 1.0;  // bytes per cycle

  bool operator==(const MemoryLevel&) const = default;
};

inline constexpr int kDbFormatVersion = 1;

struct CharacterizationDB {
  std::string platform;
  unsigned max_cores = 16;
  std::map<Construct, std::vector<OverheadSample>> constructs;
  std::vector<MemoryLevel> memory_levels;

  bool operator==(const CharacterizationDB&) const = default;
};

CharacterizationDB parse_db(std::string_view text);
std::string write_db(const CharacterizationDB& db);

/// Mean overhead of `construct` at `threads`, interpolated linearly between
/// sampled thread counts and clamped outside them, rounded to whole cycles.
/// A construct mapped to an empty sample list costs nothing.
Cycles overhead(const CharacterizationDB& db, Construct construct, unsigned threads);
Cycles overhead(const CharacterizationDB& db, std::string_view construct, unsigned threads);

struct AffineCost {
  double base = 0.0;
  double slope = 0.0;  // cycles per thread
};

struct SynthesisParams {
  std::string platform = "synthetic";
  unsigned max_cores = 16;
  std::map<Construct, AffineCost> costs;  // absent constructs cost zero
  std::vector<MemoryLevel> memory_levels;
};

/// Thread counts 1, 2, 4, ... up to and including max_cores.
std::vector<unsigned> thread_ladder(unsigned max_cores);

/// Builds a database with mean(threads) = base + slope * threads sampled on
/// thread_ladder(max_cores), for every construct.
CharacterizationDB synthesize_db(const SynthesisParams& params);

/// The ideal machine: every construct costs zero at every thread count.
CharacterizationDB zero_db(unsigned max_cores = 16);

}  // namespace tracesim
