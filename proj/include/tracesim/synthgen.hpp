// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "tracesim/trace.hpp"

namespace tracesim {

/// SplitMix64 (Steele, Lea and Flood, "Fast splittable pseudorandom number
/// generators", OOPSLA 2014).
class SplitMix64 {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    state_ += kGamma;
    return mix(state_);
  }

  /// Uniform double in [0, 1) from the top 53 bits.
  double next_unit() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Independent stream for `row`: seeded with the (row+1)-th output of the
  /// base sequence started from `seed`.
  static SplitMix64 stream(std::uint64_t seed, std::uint64_t row) noexcept {
    return SplitMix64(mix(seed + (row + 1) * kGamma));
  }

  static std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

struct UniformCost {
  Cycles cycles = 0;
};

/// Costs drawn uniformly from [lo, hi] as lo + draw mod (hi - lo + 1).
struct RangeCost {
  Cycles lo = 0;
  Cycles hi = 0;
};

/// Row of a FAST-style corner detector: every pixel pays a fixed test cost
/// and each pixel that turns out to be a corner (probability `density`)
/// pays extra for scoring.
struct FastLikeCost {
  std::uint64_t width = 320;
  double density = 0.1;
  Cycles base_per_pixel = 16;
  Cycles extra_per_corner = 240;
};

using CostModel = std::variant<UniformCost, RangeCost, FastLikeCost>;

struct CriticalRegionParams {
  std::string name = "append_kp";
  Cycles cycles = 0;  // per iteration, appended after the iteration's own work
};

struct WorkloadParams {
  std::uint64_t seed = 0;
  Cycles serial_prologue = 0;
  std::uint64_t n_iterations = 1;
  CostModel cost_model = UniformCost{};
  std::optional<CriticalRegionParams> critical_region;
  std::string loop_name = "detect_rows";
  std::string iteration_name = "row";
  std::string generator = "loop";
};

/// root "main" -> serial prologue -> loop -> n iterations (each optionally
/// ending in a critical-region child). Row i draws its cost from stream i,
/// so costs do not depend on how many rows are generated.
TaskTrace gen_loop_trace(const WorkloadParams& params);

struct FastLikeParams {
  std::uint64_t height = 240;
  std::uint64_t width = 320;
  double density = 0.1;
  std::uint64_t seed = 0;
  Cycles base_per_pixel = 16;
  Cycles extra_per_corner = 240;
  Cycles serial_prologue = 10000;
  std::optional<CriticalRegionParams> critical_region;
};

TaskTrace gen_fast_like(const FastLikeParams& params);
TaskTrace gen_fast_like(std::uint64_t height, std::uint64_t width, double density, std::uint64_t seed);

}  // namespace tracesim
