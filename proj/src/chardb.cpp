// SPDX-License-Identifier: Apache-2.0
#include "tracesim/chardb.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "json_strict.hpp"
#include "tracesim/error.hpp"

namespace tracesim {
namespace {

constexpr std::array<std::string_view, 8> kConstructNames = {
    "parallel_fork", "parallel_join", "for_static_init", "for_dynamic_dispatch",
    "barrier",       "critical_enter", "critical_exit",  "single_enter",
};

using detail::Json;

std::vector<OverheadSample> parse_samples(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(ErrorKind::SyntaxError, path + ": expected an array");
  std::vector<OverheadSample> samples;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string at = path + "[" + std::to_string(i) + "]";
    detail::expect_object(j[i], at);
    detail::reject_unknown(j[i], {"threads", "mean", "std"}, at);
    OverheadSample s;
    const std::uint64_t threads = detail::as_u64(detail::require(j[i], "threads", at), at + ".threads");
    if (threads < 1 || threads > 1u << 20) fail(ErrorKind::SyntaxError, at + ".threads: must be >= 1");
    s.threads = static_cast<unsigned>(threads);
    s.mean = detail::as_double(detail::require(j[i], "mean", at), at + ".mean");
    if (const Json* std_dev = detail::optional(j[i], "std")) s.std = detail::as_double(*std_dev, at + ".std");
    if (!(s.mean >= 0.0) || !std::isfinite(s.mean) || !(s.std >= 0.0) || !std::isfinite(s.std)) {
      fail(ErrorKind::SyntaxError, at + ": mean and std must be finite and non-negative");
    }
    if (!samples.empty() && s.threads <= samples.back().threads) {
      fail(ErrorKind::UnsortedSamples, path + ": thread counts must be strictly increasing");
    }
    samples.push_back(s);
  }
  return samples;
}

}  // namespace

std::string_view to_string(Construct c) noexcept { return kConstructNames[static_cast<std::size_t>(c)]; }

std::optional<Construct> construct_from_string(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kConstructNames.size(); ++i) {
    if (kConstructNames[i] == name) return static_cast<Construct>(i);
  }
  return std::nullopt;
}

CharacterizationDB parse_db(std::string_view text) {
  Json doc = detail::parse_strict(text, "db");
  detail::expect_object(doc, "db");
  detail::reject_unknown(doc, {"version", "platform", "max_cores", "constructs", "memory_levels"}, "db");
  if (const Json* version = detail::optional(doc, "version")) {
    const auto v = detail::as_i64(*version, "db.version");
    if (v != kDbFormatVersion) {
      fail(ErrorKind::VersionError, "db: unsupported format version " + std::to_string(v));
    }
  }

  CharacterizationDB db;
  db.platform = detail::as_string(detail::require(doc, "platform", "db"), "db.platform");
  if (const Json* max_cores = detail::optional(doc, "max_cores")) {
    const auto v = detail::as_u64(*max_cores, "db.max_cores");
    if (v < 1 || v > 1u << 20) fail(ErrorKind::SyntaxError, "db.max_cores: must be >= 1");
    db.max_cores = static_cast<unsigned>(v);
  }

  const Json& constructs = detail::require(doc, "constructs", "db");
  detail::expect_object(constructs, "db.constructs");
  for (const auto& [name, samples] : constructs.items()) {
    auto construct = construct_from_string(name);
    if (!construct) fail(ErrorKind::UnknownConstruct, "db.constructs: unknown construct \"" + name + "\"");
    db.constructs.emplace(*construct, parse_samples(samples, "db.constructs." + name));
  }

  if (const Json* levels = detail::optional(doc, "memory_levels")) {
    if (!levels->is_array()) fail(ErrorKind::SyntaxError, "db.memory_levels: expected an array");
    for (std::size_t i = 0; i < levels->size(); ++i) {
      const std::string at = "db.memory_levels[" + std::to_string(i) + "]";
      const Json& lj = (*levels)[i];
      detail::expect_object(lj, at);
      detail::reject_unknown(lj, {"name", "latency", "bandwidth"}, at);
      MemoryLevel level;
      level.name = detail::as_string(detail::require(lj, "name", at), at + ".name");
      level.latency = detail::as_double(detail::require(lj, "latency", at), at + ".latency");
      level.bandwidth = detail::as_double(detail::require(lj, "bandwidth", at), at + ".bandwidth");
      if (!(level.latency >= 0.0) || !(level.bandwidth > 0.0) || !std::isfinite(level.latency) ||
          !std::isfinite(level.bandwidth)) {
        fail(ErrorKind::SyntaxError, at + ": latency must be >= 0 and bandwidth > 0");
      }
      db.memory_levels.push_back(std::move(level));
    }
  }
  return db;
}

std::string write_db(const CharacterizationDB& db) {
  nlohmann::ordered_json doc;
  doc["version"] = kDbFormatVersion;
  doc["platform"] = db.platform;
  doc["max_cores"] = db.max_cores;
  nlohmann::ordered_json constructs = nlohmann::ordered_json::object();
  for (const auto& [construct, samples] : db.constructs) {
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (const auto& s : samples) {
      list.push_back({{"threads", s.threads}, {"mean", s.mean}, {"std", s.std}});
    }
    constructs[std::string(to_string(construct))] = std::move(list);
  }
  doc["constructs"] = std::move(constructs);
  nlohmann::ordered_json levels = nlohmann::ordered_json::array();
  for (const auto& level : db.memory_levels) {
    levels.push_back({{"name", level.name}, {"latency", level.latency}, {"bandwidth", level.bandwidth}});
  }
  doc["memory_levels"] = std::move(levels);
  return doc.dump(2) + "\n";
}

Cycles overhead(const CharacterizationDB& db, Construct construct, unsigned threads) {
  if (threads < 1 || threads > db.max_cores) {
    fail(ErrorKind::ThreadsOutOfRange, "thread count " + std::to_string(threads) + " outside [1, " +
                                           std::to_string(db.max_cores) + "]");
  }
  auto it = db.constructs.find(construct);
  if (it == db.constructs.end()) {
    fail(ErrorKind::UnknownConstruct,
         "construct \"" + std::string(to_string(construct)) + "\" is not characterized in the database");
  }
  const auto& samples = it->second;
  if (samples.empty()) return 0;

  double mean = 0.0;
  if (threads <= samples.front().threads) {
    mean = samples.front().mean;
  } else if (threads >= samples.back().threads) {
    mean = samples.back().mean;
  } else {
    auto hi = std::lower_bound(samples.begin(), samples.end(), threads,
                               [](const OverheadSample& s, unsigned t) { return s.threads < t; });
    if (hi->threads == threads) {
      mean = hi->mean;
    } else {
      auto lo = hi - 1;
      const double frac = static_cast<double>(threads - lo->threads) / static_cast<double>(hi->threads - lo->threads);
      mean = lo->mean + frac * (hi->mean - lo->mean);
    }
  }
  return mean <= 0.0 ? 0 : static_cast<Cycles>(std::llround(mean));
}

Cycles overhead(const CharacterizationDB& db, std::string_view construct, unsigned threads) {
  auto c = construct_from_string(construct);
  if (!c) fail(ErrorKind::UnknownConstruct, "unknown construct \"" + std::string(construct) + "\"");
  return overhead(db, *c, threads);
}

std::vector<unsigned> thread_ladder(unsigned max_cores) {
  std::vector<unsigned> ladder;
  for (unsigned t = 1; t < max_cores; t *= 2) ladder.push_back(t);
  if (max_cores >= 1) ladder.push_back(max_cores);
  return ladder;
}

CharacterizationDB synthesize_db(const SynthesisParams& params) {
  if (params.max_cores < 1) fail(ErrorKind::InvalidParams, "max_cores must be >= 1");
  for (const auto& [construct, cost] : params.costs) {
    if (!(cost.base >= 0.0) || !(cost.slope >= 0.0) || !std::isfinite(cost.base) || !std::isfinite(cost.slope)) {
      fail(ErrorKind::InvalidParams,
           "coefficients for \"" + std::string(to_string(construct)) + "\" must be finite and non-negative");
    }
  }
  for (const auto& level : params.memory_levels) {
    if (!(level.latency >= 0.0) || !(level.bandwidth > 0.0)) {
      fail(ErrorKind::InvalidParams, "memory level \"" + level.name + "\" has invalid parameters");
    }
  }

  CharacterizationDB db;
  db.platform = params.platform;
  db.max_cores = params.max_cores;
  db.memory_levels = params.memory_levels;
  const auto ladder = thread_ladder(params.max_cores);
  for (Construct c : kAllConstructs) {
    AffineCost cost;
    if (auto it = params.costs.find(c); it != params.costs.end()) cost = it->second;
    auto& samples = db.constructs[c];
    for (unsigned t : ladder) samples.push_back({t, cost.base + cost.slope * static_cast<double>(t), 0.0});
  }
  return db;
}

CharacterizationDB zero_db(unsigned max_cores) {
  SynthesisParams params;
  params.platform = "ideal";
  params.max_cores = max_cores;
  return synthesize_db(params);
}

}  // namespace tracesim
