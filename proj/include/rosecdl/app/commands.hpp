#pragma once

// Command implementations behind the rosecdl executable.
// Exit codes: 0 success, 2 configuration or input error, 3 numeric failure.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "rosecdl/app/config.hpp"

namespace rosecdl::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

struct CommandOptions {
  std::filesystem::path config;
  bool force = false;
  bool no_trim = false;
  std::size_t threads = 0;  // 0: machine cores
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> corpus;
  std::optional<std::filesystem::path> output;
  std::optional<std::filesystem::path> dictionary;
  std::optional<double> lambda_frac;
  std::optional<std::size_t> n_iter;
};

/// Applies command-line overrides to the loaded configuration.
void apply_overrides(RunConfig& cfg, const CommandOptions& opts);

int cmd_simulate(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out);
int cmd_train(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out);
int cmd_encode(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out);
int cmd_detect(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out);
int cmd_score(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out);
int cmd_bench(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out);

/// Loads the config, applies overrides, runs `command` and maps exceptions
/// to exit codes, printing the message to err.
int run_command(const std::string& command, const CommandOptions& opts, std::ostream& out,
                std::ostream& err);

}  // namespace rosecdl::app
