#pragma once

// Corpus directories: RST1 tensors plus manifest.json.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rosecdl/datagen.hpp"
#include "rosecdl/tensor.hpp"

namespace rosecdl::app {

struct CorpusTruth {
  Dictionary dictionary;
  std::optional<Dictionary> rare_dictionary;
  std::vector<std::vector<bool>> rare_masks;      // per signal, per sample
  std::vector<std::vector<bool>> artifact_masks;  // per signal, per sample
};

struct LoadedCorpus {
  std::vector<SignalTensor> signals;
  std::vector<std::string> names;
  std::optional<CorpusTruth> truth;
};

/// Files a simulated corpus writes, relative to its directory.
std::vector<std::filesystem::path> corpus_file_names(const SimSpec& spec);

void write_corpus(const std::filesystem::path& dir, const SimSpec& spec, const SimCorpus& corpus);

/// A directory is read through its manifest.json; a file is loaded as one
/// signal (RST1, or CSV when the extension is .csv).
LoadedCorpus load_corpus(const std::filesystem::path& path);

std::vector<bool> read_sample_mask(const std::filesystem::path& path);
void write_sample_mask(const std::filesystem::path& path, const std::vector<bool>& mask);

/// Writes the JSON with 2-space indent and a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace rosecdl::app
