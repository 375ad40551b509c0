#pragma once

// Run configuration: one JSON file with optional sections
//   simulate, train, threshold, stage2, encode, bench, paths.
// Unknown keys anywhere are rejected with ConfigError.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rosecdl/datagen.hpp"
#include "rosecdl/learner.hpp"
#include "rosecdl/robust_loss.hpp"

namespace rosecdl::app {

struct EncodeSection {
  std::size_t n_fista = 500;
  std::optional<double> lambda;  // absolute; otherwise lambda_frac * lambda_max per signal
  double lambda_frac = 0.1;
  std::size_t chunk_threshold = 10'000'000;
  std::size_t chunk_size = 1 << 20;
  std::size_t sweeps = 4;
};

struct BenchSection {
  std::vector<std::size_t> lengths{10000, 30000, 100000, 300000, 1000000};
  std::size_t n_iter = 20;
  // Window sweep: widths are multiples of L, the number of windows keeps
  // width * windows = budget_multiple * L.
  std::vector<std::size_t> window_multiples{10, 20, 50, 100};
  std::size_t budget_multiple = 1000;
  std::size_t sweep_length = 50000;
  std::size_t sweep_n_iter = 100;
};

struct PathsSection {
  std::filesystem::path corpus;
  std::filesystem::path output;
  std::filesystem::path dictionary;
};

struct RunConfig {
  SimSpec simulate;
  TrainConfig train;
  std::vector<double> lambda_sweep;
  TrainConfig stage2;
  EncodeSection encode;
  BenchSection bench;
  PathsSection paths;
};

/// Defaults for every section, with the reference simulation parameters and
/// MAD trimming (alpha 3.5) on the training section.
RunConfig default_config();

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

ThresholdRule parse_threshold(const nlohmann::json& j);
nlohmann::json to_json(const SimSpec& spec);
nlohmann::json to_json(const TrainConfig& cfg);
nlohmann::json to_json(const std::optional<ThresholdRule>& rule);

std::string optimizer_name(OptimizerKind k);
std::string threshold_name(ThresholdKind k);

}  // namespace rosecdl::app
