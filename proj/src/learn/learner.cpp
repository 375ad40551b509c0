#include "rosecdl/learner.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>

#include "rosecdl/convolution.hpp"
#include "rosecdl/parallel.hpp"
#include "rosecdl/simd/kernels.hpp"

namespace rosecdl {

void TrainConfig::validate() const {
  if (n_atoms < 1) throw ConfigError("n_atoms must be >= 1");
  if (atom_length < 1) throw ConfigError("atom_length must be >= 1");
  if (window_width < atom_length) throw ConfigError("window_width must be >= atom_length");
  if (n_windows < 1) throw ConfigError("n_windows must be >= 1");
  if (n_fista < 1) throw ConfigError("n_fista must be >= 1");
  if (init_candidates < 1) throw ConfigError("init_candidates must be >= 1");
  if (!(lambda_frac > 0.0 && lambda_frac <= 1.0)) throw ConfigError("lambda_frac must lie in (0, 1]");
  if (effective_patch_width() > window_width) throw ConfigError("patch_width exceeds window_width");
  if (threshold_rule) threshold_rule->validate();
}

std::vector<WindowSpec> sample_windows(std::size_t signal_length, const TrainConfig& cfg,
                                       Rng& rng) {
  if (cfg.window_width > signal_length) {
    throw ConfigError("window width " + std::to_string(cfg.window_width) +
                      " exceeds signal length " + std::to_string(signal_length));
  }
  std::uniform_int_distribution<std::size_t> start(0, signal_length - cfg.window_width);
  std::vector<WindowSpec> out(cfg.n_windows);
  for (auto& w : out) w = {start(rng), cfg.window_width};
  return out;
}

std::vector<SampledWindow> sample_corpus_windows(std::span<const std::size_t> lengths,
                                                 const TrainConfig& cfg, Rng& rng) {
  if (lengths.empty()) throw ConfigError("empty corpus");
  for (std::size_t len : lengths) {
    if (cfg.window_width > len) {
      throw ConfigError("window width " + std::to_string(cfg.window_width) +
                        " exceeds signal length " + std::to_string(len));
    }
  }
  std::uniform_int_distribution<std::size_t> pick(0, lengths.size() - 1);
  std::vector<SampledWindow> out(cfg.n_windows);
  for (auto& s : out) {
    s.signal = lengths.size() == 1 ? 0 : pick(rng);
    std::uniform_int_distribution<std::size_t> start(0, lengths[s.signal] - cfg.window_width);
    s.window = {start(rng), cfg.window_width};
  }
  return out;
}

OutlierMask empty_mask(const SignalTensor& x, std::size_t patch_width) {
  OutlierMask m;
  m.patch_width = patch_width;
  m.flags.assign(patch_count(x.length(), patch_width), false);
  m.threshold_used = std::numeric_limits<double>::infinity();
  return m;
}

namespace {

void add_into(AtomTensor& acc, const AtomTensor& g) {
  auto a = acc.values();
  const auto b = g.values();
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

SignalTensor recon_of(const Dictionary& d, const ActivationMap& z) { return convolve(d, z); }

}  // namespace

DictionaryGradient dictionary_gradient(std::span<const CodedWindow> windows, const Dictionary& d,
                                       std::size_t threads) {
  DictionaryGradient total(d.n_atoms(), d.channels(), d.atom_length());
  std::vector<DictionaryGradient> parts(windows.size());
  parallel_for(windows.size(), threads, [&](std::size_t w) {
    const CodedWindow& cw = windows[w];
    if (cw.code.n_atoms() != d.n_atoms() || cw.signal.channels() != d.channels()) {
      throw DimensionError("dictionary_gradient: window does not match the dictionary");
    }
    const SignalTensor recon = recon_of(d, cw.code);
    const SignalTensor r = masked_residual(cw.signal, recon, cw.mask);
    DictionaryGradient g = correlate(r, cw.code);
    const double scale = 1.0 / static_cast<double>(cw.mask.patch_width);
    for (double& v : g.values()) v *= scale;
    parts[w] = std::move(g);
  });
  for (const auto& g : parts) add_into(total, g);
  return total;
}

double batch_trimmed_loss(std::span<const CodedWindow> windows, const Dictionary& d,
                          double lambda, std::size_t threads) {
  std::vector<double> parts(windows.size());
  parallel_for(windows.size(), threads, [&](std::size_t w) {
    const CodedWindow& cw = windows[w];
    const SignalTensor recon = recon_of(d, cw.code);
    parts[w] = trimmed_objective(cw.signal, recon, cw.mask, cw.code.l1_norm(), lambda);
  });
  double s = 0.0;
  for (double v : parts) s += v;
  return s;
}

Dictionary project_unit_ball(Dictionary d) {
  for (std::size_t k = 0; k < d.n_atoms(); ++k) {
    const double n = d.atom_norm(k);
    if (n > 1.0) {
      for (double& v : d.atom(k)) v /= n;
    }
  }
  return d;
}

SlsResult sls_step(const Dictionary& d, const DictionaryGradient& grad,
                   std::span<const CodedWindow> windows, double current_loss, double lambda,
                   SlsState& state, std::size_t threads) {
  if (!d.same_shape(grad)) throw DimensionError("sls_step: gradient shape mismatch");
  if (!all_finite(grad.values())) throw NumericError("sls_step: non-finite gradient");
  const double grad_sq = squared_norm(grad.values());
  if (grad_sq == 0.0) return {d, state.alpha_max, false};

  double alpha = state.alpha_max;
  for (int halving = 0; halving <= SlsState::kMaxHalvings; ++halving, alpha *= SlsState::kBackoff) {
    Dictionary trial = d;
    auto tv = trial.values();
    const auto gv = grad.values();
    for (std::size_t i = 0; i < tv.size(); ++i) tv[i] -= alpha * gv[i];
    trial = project_unit_ball(std::move(trial));
    // Armijo along the projection arc; equals -alpha ||grad||^2 when no atom is projected.
    double descent = 0.0;
    const auto dv = d.values();
    for (std::size_t i = 0; i < tv.size(); ++i) descent += gv[i] * (tv[i] - dv[i]);
    const double loss = batch_trimmed_loss(windows, trial, lambda, threads);
    if (descent < 0.0 && loss <= current_loss + SlsState::kArmijo * descent) {
      state.alpha_max = std::min(SlsState::kMaxStep, SlsState::kGrowth * alpha);
      return {std::move(trial), alpha, false};
    }
  }
  return {d, 0.0, true};
}

Dictionary AdaptiveMoments::step(const Dictionary& d, const DictionaryGradient& grad) {
  if (!d.same_shape(grad)) throw DimensionError("adaptive moments: gradient shape mismatch");
  if (m_.size() != d.size()) {
    m_.assign(d.size(), 0.0);
    v_.assign(d.size(), 0.0);
    t_ = 0;
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
  Dictionary out = d;
  auto ov = out.values();
  const auto gv = grad.values();
  for (std::size_t i = 0; i < ov.size(); ++i) {
    m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * gv[i];
    v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * gv[i] * gv[i];
    const double m_hat = m_[i] / bc1;
    const double v_hat = v_[i] / bc2;
    ov[i] -= kStep * m_hat / (std::sqrt(v_hat) + kEps);
  }
  return project_unit_ball(std::move(out));
}

Dictionary initialize_dictionary(std::span<const SignalTensor> corpus, const TrainConfig& cfg) {
  if (corpus.empty()) throw ConfigError("empty corpus");
  const std::size_t P = corpus.front().channels(), L = cfg.atom_length;
  Dictionary d(cfg.n_atoms, P, L);
  Rng rng = make_rng(cfg.seed, Stream::Init);
  std::normal_distribution<double> gauss(0.0, 1.0);

  auto fill_gaussian = [&](std::size_t k) {
    for (double& v : d.atom(k)) v = gauss(rng);
  };

  struct Candidate {
    const SignalTensor* x;
    std::size_t start;
    double energy;
  };
  std::vector<Candidate> candidates;
  if (cfg.init == InitKind::DataWindows) {
    std::uniform_int_distribution<std::size_t> pick(0, corpus.size() - 1);
    for (std::size_t i = 0; i < cfg.n_atoms * cfg.init_candidates; ++i) {
      const SignalTensor& x = corpus[corpus.size() == 1 ? 0 : pick(rng)];
      if (x.length() < L) throw ConfigError("signal shorter than atom_length");
      std::uniform_int_distribution<std::size_t> start(0, x.length() - L);
      const std::size_t s0 = start(rng);
      auto energy_at = [&](std::size_t s) {
        double e = 0.0;
        for (std::size_t p = 0; p < P; ++p) e += squared_norm(x.channel(p).subspan(s, L));
        return e;
      };
      // slide to the most energetic chunk within one atom length
      Candidate c{&x, s0, energy_at(s0)};
      for (std::size_t t = s0 + 1; t <= std::min(s0 + L, x.length() - L); ++t) {
        const double e = energy_at(t);
        if (e > c.energy) c = {&x, t, e};
      }
      candidates.push_back(c);
    }
  }
  // Under trimming, chunks the rule would flag are not used as atoms.
  double ceiling = std::numeric_limits<double>::infinity();
  if (cfg.threshold_rule && candidates.size() >= 2) {
    std::vector<double> energies;
    for (const auto& c : candidates) energies.push_back(c.energy);
    ceiling = compute_threshold(energies, *cfg.threshold_rule);
  }

  for (std::size_t k = 0; k < cfg.n_atoms; ++k) {
    const Candidate* best = nullptr;
    for (std::size_t i = k * cfg.init_candidates;
         i < (k + 1) * cfg.init_candidates && i < candidates.size(); ++i) {
      const Candidate& c = candidates[i];
      if (c.energy > ceiling || c.energy <= 1e-24) continue;
      if (!best || c.energy > best->energy) best = &c;
    }
    if (best) {
      for (std::size_t p = 0; p < P; ++p) {
        const auto src = best->x->channel(p).subspan(best->start, L);
        std::copy(src.begin(), src.end(), d.row(k, p).begin());
      }
    } else {
      fill_gaussian(k);
    }
    const double n = d.atom_norm(k);
    for (double& v : d.atom(k)) v /= n;
  }
  return d;
}

// ---------------------------------------------------------------------------
// Learner

Learner::Learner(std::span<const SignalTensor> corpus, TrainConfig cfg,
                 std::optional<Dictionary> init)
    : corpus_(corpus), cfg_(std::move(cfg)) {
  cfg_.validate();
  if (corpus_.empty()) throw ConfigError("empty corpus");
  for (const auto& x : corpus_) {
    if (x.channels() != corpus_.front().channels()) {
      throw DimensionError("corpus signals differ in channel count");
    }
    if (x.length() < cfg_.window_width) {
      throw ConfigError("window width " + std::to_string(cfg_.window_width) +
                        " exceeds signal length " + std::to_string(x.length()));
    }
  }
  if (init) {
    if (init->n_atoms() != cfg_.n_atoms || init->atom_length() != cfg_.atom_length ||
        init->channels() != corpus_.front().channels()) {
      throw DimensionError("initial dictionary does not match the configuration");
    }
    dict_ = std::move(*init);
  } else {
    dict_ = initialize_dictionary(corpus_, cfg_);
  }
}

std::vector<CodedWindow> Learner::code_batch(const std::vector<SampledWindow>& picks) {
  std::vector<CodedWindow> batch(picks.size());
  const double norm = operator_norm_sq(dict_, cfg_.window_width);
  SparseCodeConfig sc;
  sc.lambda = lambda_;
  sc.n_iters = cfg_.n_fista;
  sc.step = norm > 0.0 ? 1.0 / norm : 1.0;
  parallel_for(picks.size(), cfg_.threads, [&](std::size_t w) {
    CodedWindow& cw = batch[w];
    cw.signal = extract_window(corpus_[picks[w].signal], picks[w].window);
    ConvolutionOperator op(dict_, cw.signal.length());
    cw.code = fista(op, cw.signal, sc);
  });
  return batch;
}

IterationRecord Learner::step() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t W_patch = cfg_.effective_patch_width();

  std::vector<std::size_t> lengths;
  lengths.reserve(corpus_.size());
  for (const auto& x : corpus_) lengths.push_back(x.length());
  Rng rng = make_rng(cfg_.seed, Stream::Windows, iteration_);
  const auto picks = sample_corpus_windows(lengths, cfg_, rng);

  if (!lambda_ready_) {
    double lmax = 0.0;
    for (const auto& pick : picks) {
      lmax = std::max(lmax, rosecdl::lambda_max(extract_window(corpus_[pick.signal], pick.window), dict_));
    }
    if (lmax == 0.0) {
      // Every sampled window was silent; fall back to the whole corpus.
      for (const auto& x : corpus_) lmax = std::max(lmax, rosecdl::lambda_max(x, dict_));
    }
    lambda_max_ = lmax;
    lambda_ = cfg_.lambda_frac * lmax;
    lambda_ready_ = true;
  }

  std::vector<CodedWindow> batch = code_batch(picks);
  code_sums_.assign(dict_.n_atoms(), 0.0);
  for (const auto& cw : batch) {
    for (std::size_t k = 0; k < dict_.n_atoms(); ++k) {
      for (double v : cw.code.atom(k)) code_sums_[k] += v;
    }
  }

  // Pooled patch errors across the batch.
  std::vector<PatchErrorSeries> errors(batch.size());
  std::vector<double> untrimmed(batch.size());
  parallel_for(batch.size(), cfg_.threads, [&](std::size_t w) {
    const SignalTensor recon = convolve(dict_, batch[w].code);
    errors[w] = patch_errors(batch[w].signal, recon, W_patch);
    double data = 0.0;
    for (double e : errors[w].errors) data += e;
    untrimmed[w] = data + lambda_ * batch[w].code.l1_norm();
  });

  const bool trimming = cfg_.threshold_rule.has_value() && iteration_ >= cfg_.trim_warmup;
  double beta = std::numeric_limits<double>::infinity();
  if (trimming) {
    std::vector<double> pooled;
    for (const auto& e : errors) pooled.insert(pooled.end(), e.errors.begin(), e.errors.end());
    beta = compute_threshold(pooled, *cfg_.threshold_rule);
  }
  std::size_t flagged = 0, total_patches = 0;
  for (std::size_t w = 0; w < batch.size(); ++w) {
    batch[w].mask = trimming ? build_mask(errors[w], beta) : empty_mask(batch[w].signal, W_patch);
    flagged += batch[w].mask.count();
    total_patches += batch[w].mask.size();
  }

  IterationRecord rec;
  rec.lambda = lambda_;
  rec.trimmed_fraction =
      total_patches ? static_cast<double>(flagged) / static_cast<double>(total_patches) : 0.0;
  for (double v : untrimmed) rec.untrimmed_objective += v;
  rec.trimmed_objective = batch_trimmed_loss(batch, dict_, lambda_, cfg_.threads);
  if (!std::isfinite(rec.trimmed_objective) || !std::isfinite(rec.untrimmed_objective)) {
    throw NumericError("non-finite loss at iteration " + std::to_string(iteration_));
  }

  const DictionaryGradient grad = dictionary_gradient(batch, dict_, cfg_.threads);

  if (trimming && !trim_lambda_ready_) {
    // The trimmed loss ignores flagged patches, so lambda_max is taken over
    // the batch with those patches zeroed. Applies from the next iteration.
    double lmax = 0.0;
    for (const auto& cw : batch) {
      lmax = std::max(lmax, rosecdl::lambda_max(apply_mask(cw.signal, cw.mask), dict_));
    }
    if (lmax > 0.0) {
      lambda_max_ = lmax;
      lambda_ = cfg_.lambda_frac * lmax;
    }
    trim_lambda_ready_ = true;
  }

  if (cfg_.optimizer == OptimizerKind::Sls) {
    SlsResult res = sls_step(dict_, grad, batch, rec.trimmed_objective, rec.lambda, sls_,
                             cfg_.threads);
    rec.step_size = res.alpha;
    rec.line_search_failed = res.failed;
    dict_ = std::move(res.dictionary);
  } else {
    dict_ = adam_.step(dict_, grad);
    rec.step_size = AdaptiveMoments::kStep;
  }
  if (!all_finite(dict_.values())) {
    throw NumericError("non-finite dictionary after iteration " + std::to_string(iteration_));
  }

  ++iteration_;
  rec.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

Dictionary canonical_signs(Dictionary d, std::span<const double> code_sums) {
  for (std::size_t k = 0; k < d.n_atoms() && k < code_sums.size(); ++k) {
    if (code_sums[k] < 0.0) {
      for (double& v : d.atom(k)) v = -v;
    }
  }
  return d;
}

TrainReport train(std::span<const SignalTensor> corpus, const TrainConfig& cfg,
                  std::optional<Dictionary> init) {
  Learner learner(corpus, cfg, std::move(init));
  TrainReport report;
  report.records.reserve(cfg.n_iter);
  for (std::size_t i = 0; i < cfg.n_iter; ++i) {
    try {
      report.records.push_back(learner.step());
    } catch (const NumericError& e) {
      report.dictionary = learner.dictionary();
      report.lambda = learner.lambda();
      report.lambda_max = learner.lambda_max();
      throw TrainingAborted(e.what(), std::move(report));
    }
  }
  report.dictionary = canonical_signs(learner.dictionary(), learner.last_code_sums());
  report.lambda = learner.lambda();
  report.lambda_max = learner.lambda_max();
  return report;
}

void write_report_csv(const std::filesystem::path& path, const TrainReport& report,
                      bool include_timing) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "iteration,trimmed_objective,untrimmed_objective,step_size,trimmed_fraction,lambda,"
         "line_search_failed";
  if (include_timing) out << ",wall_ms";
  out << '\n';
  char buf[256];
  for (std::size_t i = 0; i < report.records.size(); ++i) {
    const auto& r = report.records[i];
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%d", i, r.trimmed_objective,
                  r.untrimmed_objective, r.step_size, r.trimmed_fraction, r.lambda,
                  r.line_search_failed ? 1 : 0);
    out << buf;
    if (include_timing) {
      std::snprintf(buf, sizeof buf, ",%.3f", r.wall_ms);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace rosecdl
