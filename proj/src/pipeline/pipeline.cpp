#include "rosecdl/pipeline.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "rosecdl/convolution.hpp"
#include "rosecdl/errors.hpp"
#include "rosecdl/parallel.hpp"

namespace rosecdl {

ActivationMap encode_chunked(const SignalTensor& x, const Dictionary& d, const SparseCodeConfig& cfg,
                             std::size_t chunk_size, std::size_t sweeps) {
  cfg.validate();
  if (x.channels() != d.channels()) throw DimensionError("encode: channel mismatch");
  if (chunk_size == 0) throw ConfigError("chunk_size must be >= 1");
  const std::size_t L = d.atom_length(), K = d.n_atoms(), P = d.channels();
  if (x.length() < L) throw DimensionError("encode: signal shorter than the atoms");
  const std::size_t V = x.length() - L + 1;
  ActivationMap z(K, V);
  SignalTensor recon(P, x.length());

  for (std::size_t sweep = 0; sweep < std::max<std::size_t>(1, sweeps); ++sweep) {
    for (std::size_t s = 0; s < V; s += chunk_size) {
      const std::size_t e = std::min(V, s + chunk_size), w = e - s, seg = w + L - 1;
      ActivationMap block(K, w);
      for (std::size_t k = 0; k < K; ++k) {
        const auto src = z.atom(k).subspan(s, w);
        std::copy(src.begin(), src.end(), block.atom(k).begin());
      }
      const SignalTensor old = convolve(d, block);
      SignalTensor target(P, seg);
      for (std::size_t p = 0; p < P; ++p) {
        for (std::size_t t = 0; t < seg; ++t) {
          target(p, t) = x(p, s + t) - recon(p, s + t) + old(p, t);
        }
      }
      const ActivationMap fresh = fista(target, d, cfg, &block);
      const SignalTensor now = convolve(d, fresh);
      for (std::size_t p = 0; p < P; ++p) {
        for (std::size_t t = 0; t < seg; ++t) recon(p, s + t) += now(p, t) - old(p, t);
      }
      for (std::size_t k = 0; k < K; ++k) {
        std::copy(fresh.atom(k).begin(), fresh.atom(k).end(), z.atom(k).begin() + static_cast<std::ptrdiff_t>(s));
      }
    }
  }
  return z;
}

std::vector<EncodedSignal> encode_corpus(std::span<const SignalTensor> corpus, const Dictionary& d,
                                         const SparseCodeConfig& cfg, const EncodeOptions& opts) {
  cfg.validate();
  const std::size_t W = opts.patch_width == 0 ? d.atom_length() : opts.patch_width;
  for (const auto& x : corpus) {
    if (x.channels() != d.channels()) throw DimensionError("encode: channel mismatch");
    if (x.length() < d.atom_length()) throw DimensionError("encode: signal shorter than the atoms");
  }
  std::vector<EncodedSignal> out(corpus.size());
  parallel_for(corpus.size(), opts.threads, [&](std::size_t i) {
    const SignalTensor& x = corpus[i];
    EncodedSignal& enc = out[i];
    enc.code = x.length() > opts.chunk_threshold
                   ? encode_chunked(x, d, cfg, opts.chunk_size, opts.sweeps)
                   : fista(x, d, cfg);
    enc.errors = patch_errors(x, convolve(d, enc.code), std::min(W, x.length()));
  });
  return out;
}

std::vector<double> broadcast_patch_errors(const PatchErrorSeries& errors) {
  std::vector<double> out(errors.signal_length, 0.0);
  for (std::size_t i = 0; i < errors.size(); ++i) {
    const std::size_t b = errors.starts[i];
    const std::size_t e = std::min(errors.signal_length, b + errors.patch_width);
    std::fill(out.begin() + static_cast<std::ptrdiff_t>(b), out.begin() + static_cast<std::ptrdiff_t>(e),
              errors.errors[i]);
  }
  return out;
}

SignalTensor flagged_residual(const SignalTensor& x, const SignalTensor& recon,
                              const OutlierMask& mask) {
  SignalTensor r = masked_residual(x, recon, mask);  // recon - x on inliers
  SignalTensor out(x.channels(), x.length());
  auto ov = out.values();
  const std::span<const double> xv = x.values(), rv = recon.values(), mv = std::as_const(r).values();
  for (std::size_t i = 0; i < ov.size(); ++i) {
    // Inlier samples carry recon - x in r; flagged ones are zero there.
    ov[i] = (xv[i] - rv[i]) + mv[i];
  }
  return out;
}

PipelineResult detect_rare_events(std::span<const SignalTensor> corpus, const TrainConfig& stage1,
                                  const TrainConfig& stage2) {
  if (!stage1.threshold_rule) throw ConfigError("stage 1 needs a threshold rule");
  stage1.validate();
  stage2.validate();
  if (corpus.empty()) throw ConfigError("empty corpus");

  PipelineResult res;
  res.stage1_report = train(corpus, stage1);
  res.common_dict = res.stage1_report.dictionary;

  SparseCodeConfig enc_cfg;
  enc_cfg.lambda = res.stage1_report.lambda;
  enc_cfg.n_iters = std::max(kEncodingFistaIters, stage1.n_fista);
  EncodeOptions opts;
  opts.patch_width = stage1.effective_patch_width();
  opts.threads = stage1.threads;
  const auto encoded = encode_corpus(corpus, res.common_dict, enc_cfg, opts);

  std::vector<double> pooled;
  for (const auto& e : encoded) pooled.insert(pooled.end(), e.errors.errors.begin(), e.errors.errors.end());
  res.stage1_threshold = compute_threshold(pooled, *stage1.threshold_rule);

  std::vector<SignalTensor> residuals(corpus.size());
  std::size_t flagged = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    res.stage1_errors.push_back(encoded[i].errors);
    res.stage1_mask.push_back(build_mask(encoded[i].errors, res.stage1_threshold));
    res.per_sample_scores.push_back(broadcast_patch_errors(encoded[i].errors));
    flagged += res.stage1_mask.back().count();
  }
  if (flagged == 0) {
    res.nothing_rare = true;
    return res;
  }
  parallel_for(corpus.size(), stage1.threads, [&](std::size_t i) {
    residuals[i] = flagged_residual(corpus[i], convolve(res.common_dict, encoded[i].code),
                                    res.stage1_mask[i]);
  });

  res.stage2_report = train(residuals, stage2);
  res.rare_dict = res.stage2_report.dictionary;

  SparseCodeConfig rare_cfg;
  rare_cfg.lambda = res.stage2_report.lambda;
  rare_cfg.n_iters = std::max(kEncodingFistaIters, stage2.n_fista);
  EncodeOptions rare_opts;
  rare_opts.patch_width = stage2.effective_patch_width();
  rare_opts.threads = stage2.threads;
  for (auto& e : encode_corpus(residuals, res.rare_dict, rare_cfg, rare_opts)) {
    res.rare_activations.push_back(std::move(e.code));
  }
  return res;
}

}  // namespace rosecdl
