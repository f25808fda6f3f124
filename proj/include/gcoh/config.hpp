#pragma once

// Sweep / threshold configuration files (YAML). Needs yaml-cpp at link time.
//
//   scenario: squeezed_noise          # see scenario_name()
//   source:
//     squeezed_db: -2.95              # dB relative to the SNL
//     antisqueezed_db: 4.15
//   fixed_loss: 0.4                   # L in [0, 1]; used by excess-noise sweeps
//   grid: {start: 0, stop: 5, points: 41}
//   sampling: {n: 500000, seed: 7, blocks: 100}   # optional homodyne round trip
//   threshold_metric: squeezing_crosses_snl       # used by `threshold`

#include <gcoh/errors.hpp>
#include <gcoh/sweep.hpp>

#include <yaml-cpp/yaml.h>

#include <filesystem>
#include <optional>
#include <set>
#include <string>

namespace gcoh {

struct RunConfig {
  SweepConfig sweep;
  std::optional<ThresholdMetric> threshold_metric;
};

namespace detail {

inline void reject_unknown_keys(const YAML::Node& node, const std::set<std::string>& allowed,
                                const std::string& where) {
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ParameterError("unknown config key '" + where + key + "'");
  }
}

}  // namespace detail

inline RunConfig parse_run_config(const YAML::Node& root) {
  if (!root.IsMap()) throw FormatError("config must be a key-value mapping");
  try {
    detail::reject_unknown_keys(root, {"scenario", "source", "fixed_loss", "grid", "sampling", "threshold_metric"}, "");
    if (!root["scenario"]) throw ParameterError("config needs 'scenario'");
    RunConfig rc;
    rc.sweep = SweepConfig::for_scenario(parse_scenario(root["scenario"].as<std::string>()));
    auto& c = rc.sweep;
    if (const auto src = root["source"]) {
      detail::reject_unknown_keys(src, {"squeezed_db", "antisqueezed_db"}, "source.");
      if (src["squeezed_db"]) c.squeezed_db = src["squeezed_db"].as<double>();
      if (src["antisqueezed_db"]) c.antisqueezed_db = src["antisqueezed_db"].as<double>();
    }
    if (root["fixed_loss"]) c.fixed_loss = root["fixed_loss"].as<double>();
    if (const auto g = root["grid"]) {
      detail::reject_unknown_keys(g, {"start", "stop", "points"}, "grid.");
      if (g["start"]) c.grid.start = g["start"].as<double>();
      if (g["stop"]) c.grid.stop = g["stop"].as<double>();
      if (g["points"]) c.grid.points = g["points"].as<std::size_t>();
    }
    if (const auto s = root["sampling"]) {
      detail::reject_unknown_keys(s, {"n", "seed", "blocks"}, "sampling.");
      Sampling sampling;
      if (s["n"]) sampling.n = s["n"].as<std::size_t>();
      if (s["seed"]) sampling.seed = s["seed"].as<std::uint64_t>();
      if (s["blocks"]) sampling.blocks = s["blocks"].as<std::size_t>();
      c.sampling = sampling;
    }
    if (root["threshold_metric"]) {
      rc.threshold_metric = parse_threshold_metric(root["threshold_metric"].as<std::string>());
    }
    c.validate();
    return rc;
  } catch (const YAML::Exception& e) {
    throw FormatError(std::string("bad config value: ") + e.what());
  }
}

inline RunConfig parse_run_config(const std::string& text) {
  try {
    return parse_run_config(YAML::Load(text));
  } catch (const YAML::ParserException& e) {
    throw FormatError(std::string("config is not valid YAML: ") + e.what());
  }
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("cannot open " + path.string());
  try {
    return parse_run_config(YAML::LoadFile(path.string()));
  } catch (const YAML::ParserException& e) {
    throw FormatError(path.string() + ": config is not valid YAML: " + e.what());
  }
}

}  // namespace gcoh
