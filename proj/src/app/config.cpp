#include "rosecdl/app/config.hpp"

#include <fstream>
#include <set>

#include "rosecdl/errors.hpp"

namespace rosecdl::app {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : j.items()) {
    if (!ok.count(item.key())) throw ConfigError(where + ": unknown key '" + item.key() + "'");
  }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

void read_size(const json& j, const char* key, std::size_t& out, const std::string& where) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(where + "." + key + ": expected a non-negative integer");
  }
  out = v.get<std::size_t>();
}

void parse_simulate(const json& j, SimSpec& s) {
  const std::string w = "simulate";
  check_keys(j, w, {"channels", "length", "n_atoms", "atom_length", "sparsity", "noise_sigma",
                    "n_signals", "seed", "min_separation", "constant_amplitude", "rare"});
  read_size(j, "channels", s.channels, w);
  read_size(j, "length", s.length, w);
  read_size(j, "n_atoms", s.n_atoms, w);
  read_size(j, "atom_length", s.atom_length, w);
  read(j, "sparsity", s.sparsity, w);
  read(j, "noise_sigma", s.noise_sigma, w);
  read_size(j, "n_signals", s.n_signals, w);
  read(j, "seed", s.seed, w);
  read(j, "min_separation", s.min_separation, w);
  read(j, "constant_amplitude", s.constant_amplitude, w);
  if (j.contains("rare") && !j.at("rare").is_null()) {
    const json& r = j.at("rare");
    const std::string wr = "simulate.rare";
    check_keys(r, wr, {"rare_atom_count", "rare_density", "rare_correlation", "artifact_density",
                       "artifact_amplitude"});
    RareSpec rs;
    read_size(r, "rare_atom_count", rs.rare_atom_count, wr);
    read(r, "rare_density", rs.rare_density, wr);
    read(r, "rare_correlation", rs.rare_correlation, wr);
    read(r, "artifact_density", rs.artifact_density, wr);
    read(r, "artifact_amplitude", rs.artifact_amplitude, wr);
    s.rare = rs;
  }
}

void parse_train(const json& j, TrainConfig& c, const std::string& w,
                 std::vector<double>* sweep) {
  if (sweep) {
    check_keys(j, w, {"n_atoms", "atom_length", "n_iter", "n_windows", "window_width", "n_fista",
                      "lambda_frac", "optimizer", "seed", "init", "init_candidates", "patch_width", "trim_warmup",
                      "lambda_sweep"});
  } else {
    check_keys(j, w, {"n_atoms", "atom_length", "n_iter", "n_windows", "window_width", "n_fista",
                      "lambda_frac", "optimizer", "seed", "init", "init_candidates", "patch_width", "trim_warmup",
                      "threshold"});
  }
  read_size(j, "n_atoms", c.n_atoms, w);
  read_size(j, "atom_length", c.atom_length, w);
  read_size(j, "n_iter", c.n_iter, w);
  read_size(j, "n_windows", c.n_windows, w);
  read_size(j, "window_width", c.window_width, w);
  read_size(j, "n_fista", c.n_fista, w);
  read(j, "lambda_frac", c.lambda_frac, w);
  read(j, "seed", c.seed, w);
  read_size(j, "patch_width", c.patch_width, w);
  read_size(j, "trim_warmup", c.trim_warmup, w);
  read_size(j, "init_candidates", c.init_candidates, w);
  if (j.contains("optimizer")) {
    const std::string o = j.at("optimizer").is_string() ? j.at("optimizer").get<std::string>() : "";
    if (o == "sls") {
      c.optimizer = OptimizerKind::Sls;
    } else if (o == "adam") {
      c.optimizer = OptimizerKind::AdaptiveMoments;
    } else {
      throw ConfigError(w + ".optimizer: expected \"sls\" or \"adam\"");
    }
  }
  if (j.contains("init")) {
    const std::string o = j.at("init").is_string() ? j.at("init").get<std::string>() : "";
    if (o == "data") {
      c.init = InitKind::DataWindows;
    } else if (o == "gaussian") {
      c.init = InitKind::Gaussian;
    } else {
      throw ConfigError(w + ".init: expected \"data\" or \"gaussian\"");
    }
  }
  if (j.contains("threshold")) {
    const json& t = j.at("threshold");
    if (t.is_null()) {
      c.threshold_rule.reset();
    } else {
      const ThresholdRule r = parse_threshold(t);
      c.threshold_rule = r;
    }
  }
  if (sweep && j.contains("lambda_sweep")) {
    read(j, "lambda_sweep", *sweep, w);
    for (double v : *sweep) {
      if (!(v > 0.0 && v <= 1.0)) throw ConfigError(w + ".lambda_sweep: values must lie in (0, 1]");
    }
  }
}

void parse_encode(const json& j, EncodeSection& e) {
  const std::string w = "encode";
  check_keys(j, w, {"n_fista", "lambda", "lambda_frac", "chunk_threshold", "chunk_size", "sweeps"});
  read_size(j, "n_fista", e.n_fista, w);
  if (j.contains("lambda") && !j.at("lambda").is_null()) {
    double l = 0.0;
    read(j, "lambda", l, w);
    e.lambda = l;
  }
  read(j, "lambda_frac", e.lambda_frac, w);
  read_size(j, "chunk_threshold", e.chunk_threshold, w);
  read_size(j, "chunk_size", e.chunk_size, w);
  read_size(j, "sweeps", e.sweeps, w);
  if (e.n_fista < 1) throw ConfigError("encode.n_fista must be >= 1");
  if (!(e.lambda_frac > 0.0 && e.lambda_frac <= 1.0)) throw ConfigError("encode.lambda_frac must lie in (0, 1]");
  if (e.lambda && !(*e.lambda >= 0.0)) throw ConfigError("encode.lambda must be >= 0");
  if (e.chunk_size < 1) throw ConfigError("encode.chunk_size must be >= 1");
}

void parse_bench(const json& j, BenchSection& b) {
  const std::string w = "bench";
  check_keys(j, w, {"lengths", "n_iter", "window_multiples", "budget_multiple", "sweep_length",
                    "sweep_n_iter"});
  read(j, "lengths", b.lengths, w);
  read_size(j, "n_iter", b.n_iter, w);
  read(j, "window_multiples", b.window_multiples, w);
  read_size(j, "budget_multiple", b.budget_multiple, w);
  read_size(j, "sweep_length", b.sweep_length, w);
  read_size(j, "sweep_n_iter", b.sweep_n_iter, w);
  for (std::size_t m : b.window_multiples) {
    if (m == 0 || b.budget_multiple < m) {
      throw ConfigError("bench.window_multiples must lie in [1, budget_multiple]");
    }
  }
}

void parse_paths(const json& j, PathsSection& p) {
  check_keys(j, "paths", {"corpus", "output", "dictionary"});
  std::string s;
  if (j.contains("corpus")) { read(j, "corpus", s, "paths"); p.corpus = s; }
  if (j.contains("output")) { read(j, "output", s, "paths"); p.output = s; }
  if (j.contains("dictionary")) { read(j, "dictionary", s, "paths"); p.dictionary = s; }
}

}  // namespace

ThresholdRule parse_threshold(const json& j) {
  check_keys(j, "threshold", {"kind", "alpha"});
  if (!j.contains("kind") || !j.at("kind").is_string()) throw ConfigError("threshold.kind is required");
  const std::string kind = j.at("kind").get<std::string>();
  ThresholdRule r;
  if (kind == "mad") {
    r = ThresholdRule::mad();
  } else if (kind == "zscore") {
    r = ThresholdRule::zscore();
  } else if (kind == "quantile") {
    r = ThresholdRule::quantile(0.05);
  } else {
    throw ConfigError("threshold.kind: expected \"mad\", \"zscore\" or \"quantile\"");
  }
  read(j, "alpha", r.alpha, "threshold");
  r.validate();
  return r;
}

RunConfig default_config() {
  RunConfig c;
  c.train.threshold_rule = ThresholdRule::mad();
  return c;
}

RunConfig parse_config(const json& j) {
  check_keys(j, "config", {"simulate", "train", "threshold", "stage2", "encode", "bench", "paths"});
  RunConfig c = default_config();
  if (j.contains("simulate")) parse_simulate(j.at("simulate"), c.simulate);
  if (j.contains("train")) parse_train(j.at("train"), c.train, "train", &c.lambda_sweep);
  if (j.contains("threshold")) {
    const json& t = j.at("threshold");
    if (t.is_null() || (t.is_object() && t.value("kind", "") == "none")) {
      c.train.threshold_rule.reset();
    } else {
      c.train.threshold_rule = parse_threshold(t);
    }
  }
  if (j.contains("stage2")) parse_train(j.at("stage2"), c.stage2, "stage2", nullptr);
  if (j.contains("encode")) parse_encode(j.at("encode"), c.encode);
  if (j.contains("bench")) parse_bench(j.at("bench"), c.bench);
  if (j.contains("paths")) parse_paths(j.at("paths"), c.paths);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return parse_config(j);
}

std::string optimizer_name(OptimizerKind k) { return k == OptimizerKind::Sls ? "sls" : "adam"; }

std::string threshold_name(ThresholdKind k) {
  switch (k) {
    case ThresholdKind::Quantile: return "quantile";
    case ThresholdKind::ZScore: return "zscore";
    case ThresholdKind::Mad: return "mad";
  }
  return "mad";
}

json to_json(const std::optional<ThresholdRule>& rule) {
  if (!rule) return nullptr;
  return {{"kind", threshold_name(rule->kind)}, {"alpha", rule->alpha}};
}

json to_json(const SimSpec& s) {
  json j = {{"channels", s.channels},         {"length", s.length},
            {"n_atoms", s.n_atoms},           {"atom_length", s.atom_length},
            {"sparsity", s.sparsity},         {"noise_sigma", s.noise_sigma},
            {"n_signals", s.n_signals},       {"seed", s.seed},
            {"min_separation", s.min_separation}, {"constant_amplitude", s.constant_amplitude}};
  if (s.rare) {
    j["rare"] = {{"rare_atom_count", s.rare->rare_atom_count},
                 {"rare_density", s.rare->rare_density},
                 {"rare_correlation", s.rare->rare_correlation},
                 {"artifact_density", s.rare->artifact_density},
                 {"artifact_amplitude", s.rare->artifact_amplitude}};
  } else {
    j["rare"] = nullptr;
  }
  return j;
}

json to_json(const TrainConfig& c) {
  return {{"n_atoms", c.n_atoms},
          {"atom_length", c.atom_length},
          {"n_iter", c.n_iter},
          {"n_windows", c.n_windows},
          {"window_width", c.window_width},
          {"n_fista", c.n_fista},
          {"lambda_frac", c.lambda_frac},
          {"optimizer", optimizer_name(c.optimizer)},
          {"seed", c.seed},
          {"init", c.init == InitKind::DataWindows ? "data" : "gaussian"},
          {"init_candidates", c.init_candidates},
          {"patch_width", c.patch_width},
          {"trim_warmup", c.trim_warmup},
          {"threshold", to_json(c.threshold_rule)}};
}

}  // namespace rosecdl::app
