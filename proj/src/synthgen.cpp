// SPDX-License-Identifier: Apache-2.0
#include "tracesim/synthgen.hpp"

#include <cmath>

#include "tracesim/error.hpp"

namespace tracesim {
namespace {

struct CostDrawer {
  std::uint64_t seed;

  Cycles operator()(const UniformCost& m, std::uint64_t) const { return m.cycles; }

  Cycles operator()(const RangeCost& m, std::uint64_t row) const {
    auto rng = SplitMix64::stream(seed, row);
    const std::uint64_t span = m.hi - m.lo + 1;
    return span == 0 ? m.lo + rng.next() : m.lo + rng.next() % span;
  }

  Cycles operator()(const FastLikeCost& m, std::uint64_t row) const {
    auto rng = SplitMix64::stream(seed, row);
    std::uint64_t corners = 0;
    for (std::uint64_t x = 0; x < m.width; ++x) corners += rng.next_unit() < m.density ? 1 : 0;
    return m.width * m.base_per_pixel + corners * m.extra_per_corner;
  }
};

struct ParamCheck {
  void operator()(const UniformCost&) const {}
  void operator()(const RangeCost& m) const {
    if (m.lo > m.hi) fail(ErrorKind::InvalidParams, "range cost needs lo <= hi");
  }
  void operator()(const FastLikeCost& m) const {
    if (m.width < 1) fail(ErrorKind::InvalidParams, "fast_like width must be >= 1");
    if (!(m.density >= 0.0 && m.density <= 1.0)) fail(ErrorKind::InvalidParams, "density must be in [0, 1]");
  }
};

}  // namespace

TaskTrace gen_loop_trace(const WorkloadParams& params) {
  if (params.n_iterations < 1) fail(ErrorKind::InvalidParams, "n_iterations must be >= 1");
  std::visit(ParamCheck{}, params.cost_model);
  const Cycles critical = params.critical_region ? params.critical_region->cycles : 0;

  TaskTrace trace;
  trace.tasks.reserve(2 + params.n_iterations * (params.critical_region ? 2 : 1));
  trace.tasks.push_back(TaskRecord{0, std::nullopt, "main", TaskKind::Function, 0, 0, std::nullopt, std::nullopt});
  trace.tasks.push_back(TaskRecord{1, TaskId{0}, params.loop_name, TaskKind::Loop, params.serial_prologue, 0,
                                   std::nullopt, std::nullopt});

  const CostDrawer draw{params.seed};
  TaskId next_id = 2;
  Cycles clock = params.serial_prologue;
  for (std::uint64_t i = 0; i < params.n_iterations; ++i) {
    const Cycles work = std::visit([&](const auto& m) { return draw(m, i); }, params.cost_model);
    const Cycles start = clock;
    const TaskId iteration_id = next_id++;
    trace.tasks.push_back(TaskRecord{iteration_id, TaskId{1}, params.iteration_name, TaskKind::Iteration, start,
                                     start + work + critical, i, std::nullopt});
    if (params.critical_region) {
      trace.tasks.push_back(TaskRecord{next_id++, iteration_id, params.critical_region->name, TaskKind::Region,
                                       start + work, start + work + critical, std::nullopt, std::nullopt});
    }
    clock = start + work + critical;
  }
  trace.tasks[0].end = clock;
  trace.tasks[1].end = clock;
  trace.trailer = TraceTrailer{params.generator, clock - params.serial_prologue, params.serial_prologue};
  return trace;
}

TaskTrace gen_fast_like(const FastLikeParams& params) {
  if (params.height < 1 || params.width < 1) fail(ErrorKind::InvalidParams, "height and width must be >= 1");
  if (!(params.density >= 0.0 && params.density <= 1.0)) fail(ErrorKind::InvalidParams, "density must be in [0, 1]");
  WorkloadParams w;
  w.seed = params.seed;
  w.serial_prologue = params.serial_prologue;
  w.n_iterations = params.height;
  w.cost_model = FastLikeCost{params.width, params.density, params.base_per_pixel, params.extra_per_corner};
  w.critical_region = params.critical_region;
  w.loop_name = "detect_rows";
  w.iteration_name = "row";
  w.generator = "fast_like";
  return gen_loop_trace(w);
}

TaskTrace gen_fast_like(std::uint64_t height, std::uint64_t width, double density, std::uint64_t seed) {
  FastLikeParams params;
  params.height = height;
  params.width = width;
  params.density = density;
  params.seed = seed;
  return gen_fast_like(params);
}

}  // namespace tracesim
