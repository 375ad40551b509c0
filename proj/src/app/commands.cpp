#include "rosecdl/app/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <vector>

#include <json.hpp>

#include "rosecdl/app/corpus_files.hpp"
#include "rosecdl/convolution.hpp"
#include "rosecdl/datagen.hpp"
#include "rosecdl/errors.hpp"
#include "rosecdl/io.hpp"
#include "rosecdl/learner.hpp"
#include "rosecdl/metrics.hpp"
#include "rosecdl/parallel.hpp"
#include "rosecdl/pipeline.hpp"

namespace rosecdl::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::size_t thread_count(const CommandOptions& opts) {
  return opts.threads == 0 ? default_thread_count() : opts.threads;
}

std::string hex64(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return hex64(h);
}

std::string indexed(const char* stem, std::size_t i, const char* ext) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s_%03zu.%s", stem, i, ext);
  return buf;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

fs::path require_output(const RunConfig& cfg) {
  if (cfg.paths.output.empty()) throw ConfigError("paths.output is required");
  return cfg.paths.output;
}

// Refuses to overwrite existing outputs unless --force; creates the directory.
void claim_outputs(const fs::path& dir, const std::vector<fs::path>& names, bool force) {
  if (fs::exists(dir) && !fs::is_directory(dir)) {
    throw ConfigError("output path exists and is not a directory: " + dir.string());
  }
  if (!force) {
    for (const auto& n : names) {
      if (fs::exists(dir / n)) {
        throw ConfigError("refusing to overwrite " + (dir / n).string() + " (use --force)");
      }
    }
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
}

json dictionary_sidecar(const Dictionary& d, const TrainConfig& tc, double lambda, double lambda_max) {
  const json cfg = to_json(tc);
  return {{"n_atoms", d.n_atoms()},
          {"channels", d.channels()},
          {"atom_length", d.atom_length()},
          {"lambda", lambda},
          {"lambda_max", lambda_max},
          {"seed", tc.seed},
          {"config_hash", fnv1a(cfg.dump())},
          {"config", cfg}};
}

json recovery_json(const RecoveryScore& r) {
  json assign = json::array();
  for (const auto& [i, j] : r.assignment) assign.push_back({i, j});
  return {{"score", r.score}, {"assignment", assign}, {"correlation", r.correlation},
          {"n_true", r.n_true}, {"n_learned", r.n_learned}};
}

LoadedCorpus corpus_for(const RunConfig& cfg) {
  if (cfg.paths.corpus.empty()) throw ConfigError("paths.corpus is required");
  return load_corpus(cfg.paths.corpus);
}

void check_window_fits(const LoadedCorpus& c, const TrainConfig& tc) {
  for (std::size_t i = 0; i < c.signals.size(); ++i) {
    if (c.signals[i].length() < tc.window_width) {
      throw ConfigError("window_width " + std::to_string(tc.window_width) + " exceeds the length of " +
                        c.names[i]);
    }
  }
}

}  // namespace

void apply_overrides(RunConfig& cfg, const CommandOptions& opts) {
  if (opts.seed) {
    cfg.simulate.seed = *opts.seed;
    cfg.train.seed = *opts.seed;
    cfg.stage2.seed = *opts.seed;
  }
  if (opts.corpus) cfg.paths.corpus = *opts.corpus;
  if (opts.output) cfg.paths.output = *opts.output;
  if (opts.dictionary) cfg.paths.dictionary = *opts.dictionary;
  if (opts.lambda_frac) cfg.train.lambda_frac = *opts.lambda_frac;
  if (opts.n_iter) cfg.train.n_iter = *opts.n_iter;
  if (opts.no_trim) cfg.train.threshold_rule.reset();
  const std::size_t threads = thread_count(opts);
  cfg.train.threads = threads;
  cfg.stage2.threads = threads;
}

// ---------------------------------------------------------------------------

int cmd_simulate(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out) {
  cfg.simulate.validate();
  const fs::path dir = require_output(cfg);
  claim_outputs(dir, corpus_file_names(cfg.simulate), opts.force);
  const SimCorpus corpus = synthesize(cfg.simulate, thread_count(opts));
  write_corpus(dir, cfg.simulate, corpus);
  out << "wrote " << corpus.signals.size() << " signals (" << cfg.simulate.channels << " x "
      << cfg.simulate.length << ") to " << dir.string() << '\n';
  return kExitOk;
}

int cmd_train(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out) {
  cfg.train.validate();
  const fs::path dir = require_output(cfg);
  const LoadedCorpus corpus = corpus_for(cfg);
  check_window_fits(corpus, cfg.train);

  std::vector<std::pair<fs::path, TrainConfig>> runs;
  if (cfg.lambda_sweep.empty()) {
    runs.emplace_back(dir, cfg.train);
  } else {
    for (double f : cfg.lambda_sweep) {
      TrainConfig tc = cfg.train;
      tc.lambda_frac = f;
      runs.emplace_back(dir / ("lambda_" + fmt(f)), tc);
    }
  }
  const std::vector<fs::path> names{"dictionary.rst", "dictionary.json", "report.csv", "summary.json"};
  for (const auto& [d, tc] : runs) claim_outputs(d, names, opts.force);

  int status = kExitOk;
  json sweep = json::array();
  for (const auto& [d, tc] : runs) {
    TrainReport report;
    try {
      report = train(corpus.signals, tc);
    } catch (const TrainingAborted& e) {
      write_report_csv(d / "report.csv", e.partial_report());
      throw;
    }
    io::write_dictionary(d / "dictionary.rst", report.dictionary);
    write_json(d / "dictionary.json",
               dictionary_sidecar(report.dictionary, tc, report.lambda, report.lambda_max));
    write_report_csv(d / "report.csv", report);

    json summary = {{"lambda_frac", tc.lambda_frac},
                    {"lambda", report.lambda},
                    {"lambda_max", report.lambda_max},
                    {"n_iter", report.records.size()},
                    {"trimming", to_json(tc.threshold_rule)}};
    std::size_t failures = 0;
    for (const auto& r : report.records) failures += r.line_search_failed;
    summary["line_search_failures"] = failures;
    out << "lambda_frac " << fmt(tc.lambda_frac);
    if (!report.records.empty()) {
      const auto& last = report.records.back();
      summary["final_trimmed_objective"] = last.trimmed_objective;
      summary["final_untrimmed_objective"] = last.untrimmed_objective;
      summary["final_trimmed_fraction"] = last.trimmed_fraction;
      out << ": trimmed " << fmt(last.trimmed_objective) << ", untrimmed "
          << fmt(last.untrimmed_objective);
    }
    if (corpus.truth && corpus.truth->dictionary.channels() == report.dictionary.channels() &&
        corpus.truth->dictionary.n_atoms() <= report.dictionary.n_atoms()) {
      const RecoveryScore rs = recovery_score(corpus.truth->dictionary, report.dictionary);
      summary["recovery"] = recovery_json(rs);
      out << ", recovery " << fmt(rs.score);
    }
    out << '\n';
    write_json(d / "summary.json", summary);
    sweep.push_back(summary);
  }
  if (!cfg.lambda_sweep.empty()) {
    claim_outputs(dir, {}, true);
    write_json(dir / "sweep.json", sweep);
  }
  return status;
}

int cmd_encode(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out) {
  const fs::path dir = require_output(cfg);
  if (cfg.paths.dictionary.empty()) throw ConfigError("paths.dictionary is required");
  if (!fs::exists(cfg.paths.dictionary)) {
    throw ConfigError("dictionary does not exist: " + cfg.paths.dictionary.string());
  }
  const LoadedCorpus corpus = corpus_for(cfg);
  const Dictionary d = io::read_dictionary(cfg.paths.dictionary);
  std::vector<fs::path> names{"encode.json"};
  for (std::size_t i = 0; i < corpus.signals.size(); ++i) {
    names.emplace_back(indexed("activations", i, "rst"));
    names.emplace_back(indexed("patch_errors", i, "csv"));
  }
  claim_outputs(dir, names, opts.force);

  const std::size_t threads = thread_count(opts);
  EncodeOptions eo;
  eo.patch_width = cfg.train.patch_width;
  eo.chunk_threshold = cfg.encode.chunk_threshold;
  eo.chunk_size = cfg.encode.chunk_size;
  eo.sweeps = cfg.encode.sweeps;

  json per_signal = json::array();
  std::vector<EncodedSignal> encoded(corpus.signals.size());
  std::vector<double> lambdas(corpus.signals.size());
  parallel_for(corpus.signals.size(), threads, [&](std::size_t i) {
    SparseCodeConfig sc;
    sc.n_iters = cfg.encode.n_fista;
    sc.lambda = cfg.encode.lambda ? *cfg.encode.lambda
                                  : cfg.encode.lambda_frac * lambda_max(corpus.signals[i], d);
    lambdas[i] = sc.lambda;
    encoded[i] = std::move(encode_corpus(std::span(&corpus.signals[i], 1), d, sc, eo).front());
  });

  std::optional<double> beta;
  if (cfg.train.threshold_rule) {
    std::vector<double> pooled;
    for (const auto& e : encoded) pooled.insert(pooled.end(), e.errors.errors.begin(), e.errors.errors.end());
    if (pooled.size() >= 2) beta = compute_threshold(pooled, *cfg.train.threshold_rule);
  }
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    io::write_activations(dir / indexed("activations", i, "rst"), encoded[i].code);
    OutlierMask mask = beta ? build_mask(encoded[i].errors, *beta)
                            : empty_mask(corpus.signals[i], encoded[i].errors.patch_width);
    write_mask_csv(dir / indexed("patch_errors", i, "csv"), encoded[i].errors, mask);
    const ObjectiveValue obj = objective(corpus.signals[i], d, encoded[i].code, lambdas[i]);
    per_signal.push_back({{"signal", corpus.names[i]},
                          {"lambda", lambdas[i]},
                          {"objective", obj.total},
                          {"data_term", obj.data_term},
                          {"nonzeros", encoded[i].code.count_nonzero()},
                          {"outlier_patches", mask.count()}});
  }
  json summary = {{"signals", per_signal}, {"n_fista", cfg.encode.n_fista}};
  summary["threshold"] = beta ? json(*beta) : json(nullptr);
  write_json(dir / "encode.json", summary);
  out << "encoded " << encoded.size() << " signals into " << dir.string() << '\n';
  return kExitOk;
}

int cmd_detect(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out) {
  if (!cfg.train.threshold_rule) throw ConfigError("detect needs a threshold rule for stage 1");
  cfg.train.validate();
  cfg.stage2.validate();
  const fs::path dir = require_output(cfg);
  const LoadedCorpus corpus = corpus_for(cfg);
  check_window_fits(corpus, cfg.train);
  check_window_fits(corpus, cfg.stage2);
  std::vector<fs::path> names{"common_dictionary.rst", "common_dictionary.json",
                              "rare_dictionary.rst",   "rare_dictionary.json",
                              "stage1_report.csv",     "stage2_report.csv",
                              "summary.json"};
  for (std::size_t i = 0; i < corpus.signals.size(); ++i) {
    names.emplace_back(indexed("mask", i, "csv"));
    names.emplace_back(indexed("scores", i, "csv"));
    names.emplace_back(indexed("rare_activations", i, "rst"));
  }
  claim_outputs(dir, names, opts.force);

  PipelineResult res;
  try {
    res = detect_rare_events(corpus.signals, cfg.train, cfg.stage2);
  } catch (const TrainingAborted& e) {
    write_report_csv(dir / "stage1_report.csv", e.partial_report());
    throw;
  }

  io::write_dictionary(dir / "common_dictionary.rst", res.common_dict);
  write_json(dir / "common_dictionary.json",
             dictionary_sidecar(res.common_dict, cfg.train, res.stage1_report.lambda,
                                res.stage1_report.lambda_max));
  write_report_csv(dir / "stage1_report.csv", res.stage1_report);
  if (!res.nothing_rare) {
    io::write_dictionary(dir / "rare_dictionary.rst", res.rare_dict);
    write_json(dir / "rare_dictionary.json",
               dictionary_sidecar(res.rare_dict, cfg.stage2, res.stage2_report.lambda,
                                  res.stage2_report.lambda_max));
    write_report_csv(dir / "stage2_report.csv", res.stage2_report);
  }

  std::size_t flagged = 0, patches = 0;
  for (std::size_t i = 0; i < corpus.signals.size(); ++i) {
    write_mask_csv(dir / indexed("mask", i, "csv"), res.stage1_errors[i], res.stage1_mask[i]);
    std::ofstream sc(dir / indexed("scores", i, "csv"));
    if (!sc) throw IoError("cannot write scores for signal " + std::to_string(i));
    sc << "sample,score\n";
    char buf[48];
    for (std::size_t t = 0; t < res.per_sample_scores[i].size(); ++t) {
      std::snprintf(buf, sizeof buf, "%.17g", res.per_sample_scores[i][t]);
      sc << t << ',' << buf << '\n';
    }
    if (!res.nothing_rare) io::write_activations(dir / indexed("rare_activations", i, "rst"), res.rare_activations[i]);
    flagged += res.stage1_mask[i].count();
    patches += res.stage1_mask[i].size();
  }

  json summary = {{"stage1_threshold", res.stage1_threshold},
                  {"stage1_outlier_fraction", patches ? static_cast<double>(flagged) / static_cast<double>(patches) : 0.0},
                  {"stage1_lambda", res.stage1_report.lambda},
                  {"nothing_rare", res.nothing_rare}};
  if (res.nothing_rare) summary["warning"] = "stage-1 mask is empty; no rare dictionary learned";
  else summary["stage2_lambda"] = res.stage2_report.lambda;

  if (corpus.truth) {
    const CorpusTruth& t = *corpus.truth;
    if (t.dictionary.n_atoms() <= res.common_dict.n_atoms()) {
      summary["stage1_recovery"] = recovery_score(t.dictionary, res.common_dict).score;
    }
    if (!t.rare_masks.empty()) {
      std::vector<double> f1s, scores;
      std::vector<bool> labels;
      for (std::size_t i = 0; i < corpus.signals.size(); ++i) {
        std::vector<bool> truth_mask = t.rare_masks[i];
        for (std::size_t s = 0; s < truth_mask.size(); ++s) truth_mask[s] = truth_mask[s] || t.artifact_masks[i][s];
        f1s.push_back(mask_f1(res.stage1_mask[i],
                              patch_mask_from_samples(truth_mask, res.stage1_mask[i].patch_width)));
        scores.insert(scores.end(), res.per_sample_scores[i].begin(), res.per_sample_scores[i].end());
        labels.insert(labels.end(), truth_mask.begin(), truth_mask.end());
      }
      double mean_f1 = 0.0;
      for (double f : f1s) mean_f1 += f;
      summary["stage1_f1"] = mean_f1 / static_cast<double>(f1s.size());
      summary["stage1_f1_per_signal"] = f1s;
      const bool both = std::find(labels.begin(), labels.end(), true) != labels.end() &&
                        std::find(labels.begin(), labels.end(), false) != labels.end();
      summary["auc"] = both ? json(roc_auc(scores, labels)) : json(nullptr);
    }
    if (t.rare_dictionary && !res.nothing_rare &&
        t.rare_dictionary->n_atoms() <= res.rare_dict.n_atoms()) {
      summary["stage2_recovery"] = recovery_score(*t.rare_dictionary, res.rare_dict).score;
      summary["stage1_recovery_of_rare"] = recovery_score(*t.rare_dictionary, res.common_dict).score;
    }
  }
  write_json(dir / "summary.json", summary);
  out << summary.dump() << '\n';
  return kExitOk;
}

int cmd_score(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out) {
  const fs::path dir = require_output(cfg);
  if (cfg.paths.dictionary.empty()) throw ConfigError("paths.dictionary is required");
  if (!fs::exists(cfg.paths.dictionary)) {
    throw ConfigError("dictionary does not exist: " + cfg.paths.dictionary.string());
  }
  const LoadedCorpus corpus = corpus_for(cfg);
  if (!corpus.truth) throw ConfigError("corpus has no ground truth to score against");
  claim_outputs(dir, {"score.json", "correlation.rst"}, opts.force);
  const Dictionary learned = io::read_dictionary(cfg.paths.dictionary);
  const RecoveryScore rs = recovery_score(corpus.truth->dictionary, learned, thread_count(opts));
  io::write_rst1(dir / "correlation.rst", {rs.n_true, rs.n_learned}, rs.correlation);
  write_json(dir / "score.json", recovery_json(rs));
  out << "recovery " << fmt(rs.score) << '\n';
  return kExitOk;
}

int cmd_bench(const RunConfig& cfg, const CommandOptions& opts, std::ostream& out) {
  const fs::path dir = require_output(cfg);
  cfg.train.validate();
  claim_outputs(dir, {"runtime.csv"}, opts.force);
  const BenchSection& b = cfg.bench;
  std::string csv =
      "kind,length,window_width,n_windows,n_iter,seconds,final_untrimmed_objective,full_objective\n";
  char buf[256];

  auto single_signal = [&](std::size_t T) {
    SimSpec spec = cfg.simulate;
    spec.length = T;
    spec.n_signals = 1;
    spec.validate();
    return std::move(synthesize(spec).signals.front());
  };

  double first = 0.0, last = 0.0;
  for (std::size_t li = 0; li < b.lengths.size(); ++li) {
    const SignalTensor x = single_signal(b.lengths[li]);
    TrainConfig tc = cfg.train;
    tc.n_iter = b.n_iter;
    const auto t0 = std::chrono::steady_clock::now();
    const TrainReport rep = train(std::span(&x, 1), tc);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (li == 0) first = secs;
    last = secs;
    std::snprintf(buf, sizeof buf, "length,%zu,%zu,%zu,%zu,%.6f,%.17g,\n", b.lengths[li],
                  tc.window_width, tc.n_windows, tc.n_iter, secs,
                  rep.records.empty() ? 0.0 : rep.records.back().untrimmed_objective);
    csv += buf;
    out << "T=" << b.lengths[li] << ": " << fmt(secs) << " s\n";
  }
  if (b.lengths.size() > 1 && first > 0.0) {
    out << "runtime ratio " << b.lengths.back() << "/" << b.lengths.front() << ": "
        << fmt(last / first) << '\n';
  }

  if (!b.window_multiples.empty()) {
    const SignalTensor x = single_signal(b.sweep_length);
    // All runs share the initial dictionary, so its lambda_max gives a common scale.
    const Dictionary d0 = initialize_dictionary(std::span(&x, 1), cfg.train);
    const double lambda_eval = cfg.train.lambda_frac * lambda_max(x, d0);
    SparseCodeConfig sc;
    sc.lambda = lambda_eval;
    sc.n_iters = kEncodingFistaIters;
    for (std::size_t m : b.window_multiples) {
      TrainConfig tc = cfg.train;
      tc.window_width = m * cfg.train.atom_length;
      tc.n_windows = b.budget_multiple / m;
      tc.n_iter = b.sweep_n_iter;
      if (tc.window_width > x.length()) throw ConfigError("window sweep width exceeds sweep_length");
      const auto t0 = std::chrono::steady_clock::now();
      const TrainReport rep = train(std::span(&x, 1), tc, d0);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      const ActivationMap z = fista(x, rep.dictionary, sc);
      const double full = objective(x, rep.dictionary, z, lambda_eval).total;
      std::snprintf(buf, sizeof buf, "window,%zu,%zu,%zu,%zu,%.6f,%.17g,%.17g\n", x.length(),
                    tc.window_width, tc.n_windows, tc.n_iter, secs,
                    rep.records.empty() ? 0.0 : rep.records.back().untrimmed_objective, full);
      csv += buf;
      out << "W_win=" << m << "L: full objective " << fmt(full) << " (" << fmt(secs) << " s)\n";
    }
  }
  write_text(dir / "runtime.csv", csv);
  return kExitOk;
}

// ---------------------------------------------------------------------------

int run_command(const std::string& command, const CommandOptions& opts, std::ostream& out,
                std::ostream& err) {
  try {
    RunConfig cfg = opts.config.empty() ? default_config() : load_config(opts.config);
    apply_overrides(cfg, opts);
    if (command == "simulate") return cmd_simulate(cfg, opts, out);
    if (command == "train") return cmd_train(cfg, opts, out);
    if (command == "encode") return cmd_encode(cfg, opts, out);
    if (command == "detect") return cmd_detect(cfg, opts, out);
    if (command == "score") return cmd_score(cfg, opts, out);
    if (command == "bench") return cmd_bench(cfg, opts, out);
    err << "unknown command '" << command << "'\n";
    return kExitConfig;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace rosecdl::app
