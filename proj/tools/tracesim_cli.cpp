// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Exit codes: 0 success, 1 input or validation
// error (one "error: <Kind>: <message>" line on stderr), 2 usage error.
#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tracesim/analysis.hpp"
#include "tracesim/chardb.hpp"
#include "tracesim/directives.hpp"
#include "tracesim/error.hpp"
#include "tracesim/scheduler.hpp"
#include "tracesim/synthgen.hpp"
#include "tracesim/trace.hpp"

using namespace tracesim;

namespace {

constexpr int kExitInput = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) fail(ErrorKind::IoError, "error reading " + path);
  return std::move(buf).str();
}

bool to_stdout(const std::string& path) { return path.empty() || path == "-"; }

void write_output(const std::string& path, const std::string& content) {
  if (to_stdout(path)) {
    std::fwrite(content.data(), 1, content.size(), stdout);
    std::fflush(stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path);
  out << content;
  out.close();
  if (!out) fail(ErrorKind::IoError, "error writing " + path);
}

std::uint64_t parse_count(const std::string& s, const std::string& what) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw UsageError(what + ": \"" + s + "\" is not a non-negative integer");
  }
  try {
    return std::stoull(s);
  } catch (const std::out_of_range&) {
    throw UsageError(what + ": \"" + s + "\" is too large");
  }
}

double parse_number(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw UsageError(what + ": \"" + s + "\" is not a number");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t begin = 0;
  while (true) {
    const std::size_t at = s.find(sep, begin);
    out.push_back(s.substr(begin, at - begin));
    if (at == std::string::npos) return out;
    begin = at + 1;
  }
}

/// "1,2,4,8", "1..8" or a mix such as "1..4,8,16".
std::vector<unsigned> parse_cores(const std::string& spec) {
  std::vector<unsigned> out;
  for (const std::string& part : split(spec, ',')) {
    const std::size_t dots = part.find("..");
    if (dots == std::string::npos) {
      out.push_back(static_cast<unsigned>(parse_count(part, "--cores")));
      continue;
    }
    const auto lo = parse_count(part.substr(0, dots), "--cores");
    const auto hi = parse_count(part.substr(dots + 2), "--cores");
    if (lo > hi) throw UsageError("--cores: empty range \"" + part + "\"");
    if (hi - lo > 4096) throw UsageError("--cores: range \"" + part + "\" is too long");
    for (auto p = lo; p <= hi; ++p) out.push_back(static_cast<unsigned>(p));
  }
  return out;
}

ReportFormat choose_format(const std::string& requested, const std::string& output) {
  if (!requested.empty()) return report_format_from_string(requested);
  if (to_stdout(output) && isatty(STDOUT_FILENO)) return ReportFormat::Text;
  return ReportFormat::Csv;
}

struct Inputs {
  std::string trace;
  std::string db;
  std::string spec;
};

struct Loaded {
  CharacterizationDB db;
  BoundProgram bound;
};

Loaded load(const Inputs& in) {
  CharacterizationDB db = parse_db(read_file(in.db));
  DirectiveSpec spec = parse_spec(read_file(in.spec));
  TaskTrace trace = parse_trace(read_file(in.trace));
  BoundProgram bound = bind(spec, std::move(trace));
  return Loaded{std::move(db), std::move(bound)};
}

void print_diagnostics(const std::vector<std::string>& diagnostics, bool quiet) {
  if (quiet) return;
  for (const auto& d : diagnostics) std::fprintf(stderr, "warning: %s\n", one_line(d).c_str());
}

void add_inputs(CLI::App& cmd, Inputs& in) {
  cmd.add_option("--trace", in.trace, "Task trace file")->required();
  cmd.add_option("--db", in.db, "Characterization database file")->required();
  cmd.add_option("--spec", in.spec, "Directive specification file")->required();
}

// characterize

struct CharacterizeArgs {
  double base = 0.0;
  double slope = 0.0;
  unsigned max_cores = 16;
  std::string platform = "synthetic";
  bool zero = false;
  std::vector<std::string> costs;
  std::vector<std::string> memory_levels;
  std::string output = "-";
};

void run_characterize(const CharacterizeArgs& a) {
  SynthesisParams params;
  params.platform = a.platform;
  params.max_cores = a.max_cores;
  if (!a.zero) {
    for (Construct c : kAllConstructs) params.costs[c] = AffineCost{a.base, a.slope};
  }
  for (const std::string& item : a.costs) {
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("--cost: expected construct=base[:slope], got \"" + item + "\"");
    const auto construct = construct_from_string(item.substr(0, eq));
    if (!construct) throw UsageError("--cost: unknown construct \"" + item.substr(0, eq) + "\"");
    const auto values = split(item.substr(eq + 1), ':');
    if (values.size() > 2) throw UsageError("--cost: expected construct=base[:slope], got \"" + item + "\"");
    AffineCost cost{parse_number(values[0], "--cost"), 0.0};
    if (values.size() == 2) cost.slope = parse_number(values[1], "--cost");
    params.costs[*construct] = cost;
  }
  for (const std::string& item : a.memory_levels) {
    const auto parts = split(item, ':');
    if (parts.size() != 3) throw UsageError("--memory-level: expected name:latency:bandwidth, got \"" + item + "\"");
    params.memory_levels.push_back(
        MemoryLevel{parts[0], parse_number(parts[1], "--memory-level"), parse_number(parts[2], "--memory-level")});
  }
  write_output(a.output, write_db(synthesize_db(params)));
}

// gen

struct GenCommon {
  std::uint64_t seed = 0;
  std::uint64_t critical_cycles = 0;
  std::string critical_name = "append_kp";
  std::string output = "-";

  std::optional<CriticalRegionParams> critical() const {
    if (critical_cycles == 0) return std::nullopt;
    return CriticalRegionParams{critical_name, critical_cycles};
  }
};

struct GenFastArgs {
  GenCommon common;
  std::uint64_t height = 240;
  std::uint64_t width = 320;
  double density = 0.1;
  std::uint64_t base_per_pixel = 16;
  std::uint64_t extra_per_corner = 240;
  std::uint64_t prologue = 10000;
};

struct GenLoopArgs {
  GenCommon common;
  std::uint64_t iterations = 100;
  std::string cost = "uniform:1000";
  std::uint64_t prologue = 0;
  std::string loop_name = "detect_rows";
};

void add_gen_common(CLI::App& cmd, GenCommon& c) {
  cmd.add_option("--seed", c.seed, "Random seed");
  cmd.add_option("--critical-cycles", c.critical_cycles,
                 "Append a critical-region child of this many cycles to every iteration (0 for none)");
  cmd.add_option("--critical-name", c.critical_name, "Name of the critical-region task");
  cmd.add_option("-o,--output", c.output, "Output file, - for standard output");
}

void run_gen_fast(const GenFastArgs& a) {
  FastLikeParams p;
  p.height = a.height;
  p.width = a.width;
  p.density = a.density;
  p.seed = a.common.seed;
  p.base_per_pixel = a.base_per_pixel;
  p.extra_per_corner = a.extra_per_corner;
  p.serial_prologue = a.prologue;
  p.critical_region = a.common.critical();
  write_output(a.common.output, write_trace(gen_fast_like(p)));
}

CostModel parse_cost_model(const std::string& s) {
  const auto parts = split(s, ':');
  if (parts[0] == "uniform" && parts.size() == 2) return UniformCost{parse_count(parts[1], "--cost")};
  if (parts[0] == "range" && parts.size() == 3) {
    RangeCost r{parse_count(parts[1], "--cost"), parse_count(parts[2], "--cost")};
    if (r.lo > r.hi) throw UsageError("--cost: range needs lo <= hi");
    return r;
  }
  throw UsageError("--cost: expected uniform:N or range:LO:HI, got \"" + s + "\"");
}

void run_gen_loop(const GenLoopArgs& a) {
  WorkloadParams w;
  w.seed = a.common.seed;
  w.serial_prologue = a.prologue;
  w.n_iterations = a.iterations;
  w.cost_model = parse_cost_model(a.cost);
  w.critical_region = a.common.critical();
  w.loop_name = a.loop_name;
  write_output(a.common.output, write_trace(gen_loop_trace(w)));
}

// validate

struct ValidateArgs {
  std::string trace;
  std::string db;
  std::string spec;
};

int run_validate(const ValidateArgs& a) {
  if (a.trace.empty() && a.db.empty() && a.spec.empty()) {
    throw UsageError("validate: give at least one of --trace, --db, --spec");
  }
  std::optional<TaskTrace> trace;
  std::optional<DirectiveSpec> spec;
  if (!a.db.empty()) {
    const CharacterizationDB db = parse_db(read_file(a.db));
    std::printf("db: ok (%zu constructs, max_cores %u)\n", db.constructs.size(), db.max_cores);
  }
  if (!a.spec.empty()) {
    spec = parse_spec(read_file(a.spec));
    std::printf("spec: ok (%zu directives)\n", spec->directives.size());
  }
  if (!a.trace.empty()) {
    trace = parse_trace(read_file(a.trace));
    const auto violations = validate_trace(*trace);
    for (const auto& v : violations) {
      std::printf("%s: %s\n", std::string(to_string(v.rule)).c_str(), one_line(v.message).c_str());
    }
    if (!violations.empty()) {
      std::fflush(stdout);
      fail(ErrorKind::ValidationError, "trace: " + std::to_string(violations.size()) + " violation(s)");
    }
    std::printf("trace: ok (%zu tasks, %llu cycles)\n", trace->tasks.size(),
                static_cast<unsigned long long>(total_cycles(*trace)));
  }
  if (trace && spec) {
    const BoundProgram bound = bind(*spec, std::move(*trace));
    std::printf("binding: ok (%zu bound tasks)\n", bound.bindings().size());
    for (const auto& d : bound.diagnostics()) std::printf("warning: %s\n", one_line(d).c_str());
  }
  return 0;
}

// analyze / gantt

struct AnalyzeArgs {
  Inputs inputs;
  std::string cores;
  std::string format;
  std::string output = "-";
  unsigned jobs = 1;
  bool quiet = false;
};

void run_analyze(const AnalyzeArgs& a) {
  const Loaded in = load(a.inputs);
  const std::vector<unsigned> cores = a.cores.empty() ? thread_ladder(in.db.max_cores) : parse_cores(a.cores);
  const ReportFormat format = choose_format(a.format, a.output);
  print_diagnostics(in.bound.diagnostics(), a.quiet);
  const auto results = sweep(in.bound, in.db, cores, {}, a.jobs);
  const Report report = build_report(results);
  print_diagnostics(report.diagnostics, a.quiet);
  write_output(a.output, emit_report(report, format));
}

struct GanttArgs {
  Inputs inputs;
  unsigned cores = 1;
  std::string output = "-";
  bool quiet = false;
};

void run_gantt(const GanttArgs& a) {
  const Loaded in = load(a.inputs);
  print_diagnostics(in.bound.diagnostics(), a.quiet);
  const ScheduleResult r = simulate(in.bound, in.db, a.cores);
  print_diagnostics(r.diagnostics, a.quiet);
  write_output(a.output, emit_gantt(r));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Estimate parallel speedup and cycle stacks from sequential task traces"};
  app.require_subcommand(1);

  CharacterizeArgs characterize;
  auto* cmd_char = app.add_subcommand("characterize", "Synthesize a characterization database");
  cmd_char->add_option("--base", characterize.base, "Fixed cycles per construct");
  cmd_char->add_option("--slope", characterize.slope, "Extra cycles per thread");
  cmd_char->add_option("--max-cores", characterize.max_cores, "Largest core count covered")
      ->check(CLI::Range(1u, 4096u));
  cmd_char->add_option("--platform", characterize.platform, "Platform label");
  auto* zero_flag = cmd_char->add_flag("--zero", characterize.zero, "Every overhead is zero");
  cmd_char->add_option("--cost", characterize.costs, "Per-construct cost, construct=base[:slope]")
      ->excludes(zero_flag);
  cmd_char->add_option("--memory-level", characterize.memory_levels, "Memory level, name:latency:bandwidth");
  cmd_char->add_option("-o,--output", characterize.output, "Output file, - for standard output");

  auto* cmd_gen = app.add_subcommand("gen", "Generate a synthetic task trace");
  cmd_gen->require_subcommand(1);
  GenFastArgs gen_fast;
  auto* cmd_fast = cmd_gen->add_subcommand("fast", "Row-parallel corner detector workload");
  cmd_fast->add_option("--height", gen_fast.height, "Image rows (loop iterations)")->check(CLI::PositiveNumber);
  cmd_fast->add_option("--width", gen_fast.width, "Image columns")->check(CLI::PositiveNumber);
  cmd_fast->add_option("--density", gen_fast.density, "Fraction of pixels that are corners")
      ->check(CLI::Range(0.0, 1.0));
  cmd_fast->add_option("--base-per-pixel", gen_fast.base_per_pixel, "Cycles per pixel");
  cmd_fast->add_option("--extra-per-corner", gen_fast.extra_per_corner, "Extra cycles per corner");
  cmd_fast->add_option("--prologue", gen_fast.prologue, "Serial cycles before the loop");
  add_gen_common(*cmd_fast, gen_fast.common);
  GenLoopArgs gen_loop;
  auto* cmd_loop = cmd_gen->add_subcommand("loop", "Single loop with a simple cost model");
  cmd_loop->add_option("--iterations", gen_loop.iterations, "Loop iterations")->check(CLI::PositiveNumber);
  cmd_loop->add_option("--cost", gen_loop.cost, "uniform:N or range:LO:HI");
  cmd_loop->add_option("--prologue", gen_loop.prologue, "Serial cycles before the loop");
  cmd_loop->add_option("--loop-name", gen_loop.loop_name, "Name of the loop task");
  add_gen_common(*cmd_loop, gen_loop.common);

  ValidateArgs validate;
  auto* cmd_validate = app.add_subcommand("validate", "Check input files");
  cmd_validate->add_option("--trace", validate.trace, "Task trace file");
  cmd_validate->add_option("--db", validate.db, "Characterization database file");
  cmd_validate->add_option("--spec", validate.spec, "Directive specification file");

  AnalyzeArgs analyze;
  auto* cmd_analyze = app.add_subcommand("analyze", "Simulate a core-count sweep and report");
  cmd_analyze->alias("sweep");
  add_inputs(*cmd_analyze, analyze.inputs);
  cmd_analyze->add_option("--cores", analyze.cores, "Core counts, e.g. 1,2,4,8 or 1..8 (default: powers of two)");
  cmd_analyze->add_option("--format", analyze.format, "text, csv or json (default: text on a terminal, else csv)");
  cmd_analyze->add_option("-o,--output", analyze.output, "Output file, - for standard output");
  cmd_analyze->add_option("-j,--jobs", analyze.jobs, "Core counts simulated concurrently")->check(CLI::Range(1u, 256u));
  cmd_analyze->add_flag("-q,--quiet", analyze.quiet, "Suppress warnings");

  GanttArgs gantt;
  auto* cmd_gantt = app.add_subcommand("gantt", "Per-core event timeline of one simulation as CSV");
  add_inputs(*cmd_gantt, gantt.inputs);
  cmd_gantt->add_option("--cores", gantt.cores, "Core count")->required()->check(CLI::PositiveNumber);
  cmd_gantt->add_option("-o,--output", gantt.output, "Output file, - for standard output");
  cmd_gantt->add_flag("-q,--quiet", gantt.quiet, "Suppress warnings");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (cmd_char->parsed()) run_characterize(characterize);
    if (cmd_fast->parsed()) run_gen_fast(gen_fast);
    if (cmd_loop->parsed()) run_gen_loop(gen_loop);
    if (cmd_validate->parsed()) return run_validate(validate);
    if (cmd_analyze->parsed()) run_analyze(analyze);
    if (cmd_gantt->parsed()) run_gantt(gantt);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", one_line(e.what()).c_str());
    return kExitUsage;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", std::string(to_string(e.kind())).c_str(), one_line(e.what()).c_str());
    return kExitInput;
  }
  return 0;
}
