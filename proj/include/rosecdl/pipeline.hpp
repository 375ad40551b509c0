#pragma once

// Two-stage rare-event detection: learn the common atoms with trimming,
// mask, then learn rare atoms on the masked residual.

#include <cstddef>
#include <span>
#include <vector>

#include "rosecdl/learner.hpp"
#include "rosecdl/robust_loss.hpp"
#include "rosecdl/sparse_coder.hpp"
#include "rosecdl/tensor.hpp"

namespace rosecdl {

struct EncodeOptions {
  std::size_t patch_width = 0;             // 0: atom length
  std::size_t chunk_threshold = 10'000'000;  // signals longer than this are encoded in chunks
  std::size_t chunk_size = 1 << 20;        // activations per chunk
  std::size_t sweeps = 4;                  // block-coordinate passes over the chunks
  std::size_t threads = 1;
};

struct EncodedSignal {
  ActivationMap code;
  PatchErrorSeries errors;
};

/// Whole-signal FISTA encode of every corpus member.
std::vector<EncodedSignal> encode_corpus(std::span<const SignalTensor> corpus, const Dictionary& d,
                                         const SparseCodeConfig& cfg,
                                         const EncodeOptions& opts = {});

/// Block-coordinate encode: the activation axis is cut into chunks; each
/// chunk is re-solved with FISTA against the residual of all the others on
/// its own signal segment (which overlaps its neighbours by L - 1 samples).
ActivationMap encode_chunked(const SignalTensor& x, const Dictionary& d, const SparseCodeConfig& cfg,
                             std::size_t chunk_size, std::size_t sweeps);

struct PipelineResult {
  Dictionary common_dict;
  Dictionary rare_dict;  // empty when nothing was flagged
  TrainReport stage1_report;
  TrainReport stage2_report;
  std::vector<PatchErrorSeries> stage1_errors;
  std::vector<OutlierMask> stage1_mask;
  std::vector<ActivationMap> rare_activations;
  std::vector<std::vector<double>> per_sample_scores;
  double stage1_threshold = 0.0;
  bool nothing_rare = false;
};

/// Per-sample scores: each patch error copied to the samples of its patch.
std::vector<double> broadcast_patch_errors(const PatchErrorSeries& errors);

/// (x - D*Z) on flagged patches, zero elsewhere.
SignalTensor flagged_residual(const SignalTensor& x, const SignalTensor& recon,
                              const OutlierMask& mask);

/// stage1 must set a threshold rule. Final stage-1 masks come from a
/// max(500, n_fista)-iteration encode of every signal.
PipelineResult detect_rare_events(std::span<const SignalTensor> corpus, const TrainConfig& stage1,
                                  const TrainConfig& stage2);

}  // namespace rosecdl
