#include "rosecdl/app/corpus_files.hpp"

#include <cstdio>
#include <fstream>

#include "rosecdl/app/config.hpp"
#include "rosecdl/errors.hpp"
#include "rosecdl/io.hpp"

namespace rosecdl::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string indexed(const char* stem, std::size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03zu.rst", stem, i);
  return buf;
}

}  // namespace

std::vector<fs::path> corpus_file_names(const SimSpec& spec) {
  std::vector<fs::path> out{"manifest.json", "truth_dictionary.rst"};
  if (spec.rare) out.emplace_back("truth_rare_dictionary.rst");
  for (std::size_t i = 0; i < spec.n_signals; ++i) {
    out.emplace_back(indexed("signal", i));
    out.emplace_back(indexed("truth_activations", i));
    if (spec.rare) {
      out.emplace_back(indexed("truth_rare_activations", i));
      out.emplace_back(indexed("truth_rare_mask", i));
      out.emplace_back(indexed("truth_artifact_mask", i));
    }
  }
  return out;
}

std::vector<bool> read_sample_mask(const fs::path& path) {
  const io::RawMask m = io::read_rst1_u8(path);
  if (m.dims.size() != 1) throw IoError(path.string() + ": expected a 1-D mask");
  std::vector<bool> out(m.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = m.values[i] != 0;
  return out;
}

void write_sample_mask(const fs::path& path, const std::vector<bool>& mask) {
  std::vector<std::uint8_t> bytes(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) bytes[i] = mask[i] ? 1 : 0;
  io::write_rst1_u8(path, {mask.size()}, bytes);
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

void write_corpus(const fs::path& dir, const SimSpec& spec, const SimCorpus& corpus) {
  fs::create_directories(dir);
  json signals = json::array(), activations = json::array();
  json rare_acts = json::array(), rare_masks = json::array(), artifact_masks = json::array();
  for (std::size_t i = 0; i < corpus.signals.size(); ++i) {
    const std::string name = indexed("signal", i);
    io::write_signal(dir / name, corpus.signals[i]);
    signals.push_back(name);
    io::write_activations(dir / indexed("truth_activations", i), corpus.truth.activations[i]);
    activations.push_back(indexed("truth_activations", i));
    if (spec.rare) {
      io::write_activations(dir / indexed("truth_rare_activations", i), corpus.truth.rare_activations[i]);
      rare_acts.push_back(indexed("truth_rare_activations", i));
      write_sample_mask(dir / indexed("truth_rare_mask", i), corpus.truth.rare_mask[i]);
      rare_masks.push_back(indexed("truth_rare_mask", i));
      write_sample_mask(dir / indexed("truth_artifact_mask", i), corpus.truth.artifact_mask[i]);
      artifact_masks.push_back(indexed("truth_artifact_mask", i));
    }
  }
  io::write_dictionary(dir / "truth_dictionary.rst", corpus.truth.dictionary);
  json truth = {{"dictionary", "truth_dictionary.rst"}, {"activations", activations}};
  if (spec.rare) {
    io::write_dictionary(dir / "truth_rare_dictionary.rst", corpus.truth.rare_dictionary);
    truth["rare_dictionary"] = "truth_rare_dictionary.rst";
    truth["rare_activations"] = rare_acts;
    truth["rare_masks"] = rare_masks;
    truth["artifact_masks"] = artifact_masks;
  }
  const json manifest = {
      {"format", "rosecdl-corpus-1"},
      {"spec", to_json(spec)},
      {"seeds",
       {{"seed", spec.seed},
        {"derivation", "mix64(mix64(seed ^ mix64(stream)) + index), splitmix64 finalizer"},
        {"streams",
         {{"dictionary", 1}, {"activations", 2}, {"noise", 3}, {"artifacts", 4}, {"rare_atoms", 5}}}}},
      {"signals", signals},
      {"truth", truth}};
  write_json(dir / "manifest.json", manifest);
}

LoadedCorpus load_corpus(const fs::path& path) {
  LoadedCorpus out;
  if (path.empty()) throw ConfigError("no corpus path given");
  if (!fs::exists(path)) throw ConfigError("corpus path does not exist: " + path.string());
  if (!fs::is_directory(path)) {
    out.signals.push_back(io::load_signal(path));
    out.names.push_back(path.filename().string());
    return out;
  }
  const fs::path mpath = path / "manifest.json";
  std::ifstream in(mpath);
  if (!in) throw ConfigError("corpus directory has no manifest.json: " + path.string());
  json m;
  try {
    m = json::parse(in);
    for (const auto& name : m.at("signals")) {
      const std::string n = name.get<std::string>();
      out.signals.push_back(io::load_signal(path / n));
      out.names.push_back(n);
    }
    if (m.contains("truth")) {
      const json& t = m.at("truth");
      CorpusTruth truth;
      truth.dictionary = io::read_dictionary(path / t.at("dictionary").get<std::string>());
      if (t.contains("rare_dictionary")) {
        truth.rare_dictionary = io::read_dictionary(path / t.at("rare_dictionary").get<std::string>());
        for (const auto& n : t.at("rare_masks")) truth.rare_masks.push_back(read_sample_mask(path / n.get<std::string>()));
        for (const auto& n : t.at("artifact_masks")) truth.artifact_masks.push_back(read_sample_mask(path / n.get<std::string>()));
      }
      out.truth = std::move(truth);
    }
  } catch (const json::exception& e) {
    throw ConfigError("malformed manifest " + mpath.string() + ": " + e.what());
  }
  if (out.signals.empty()) throw ConfigError("corpus is empty: " + path.string());
  return out;
}

}  // namespace rosecdl::app
