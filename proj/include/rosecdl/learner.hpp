#pragma once

// Stochastic-window dictionary learning with inline outlier trimming.
//
// One iteration:
//   1. sample N_W windows (signal uniformly, then start uniformly),
//   2. code each window with N_fista FISTA iterations,
//   3. pool the patch errors of all windows and pick one threshold beta,
//   4. take one gradient step on the trimmed loss (SLS or adaptive moments),
//   5. project every atom back onto the unit ball.
// The sparse codes are treated as constants when differentiating with
// respect to D; there is no backpropagation through FISTA.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rosecdl/errors.hpp"
#include "rosecdl/random.hpp"
#include "rosecdl/robust_loss.hpp"
#include "rosecdl/sparse_coder.hpp"
#include "rosecdl/tensor.hpp"

namespace rosecdl {

enum class OptimizerKind { Sls, AdaptiveMoments };
enum class InitKind { DataWindows, Gaussian };

struct TrainConfig {
  std::size_t n_atoms = 2;
  std::size_t atom_length = 64;
  std::size_t n_iter = 100;
  std::size_t n_windows = 10;
  std::size_t window_width = 640;
  std::size_t n_fista = kTrainingFistaIters;
  double lambda_frac = 0.1;
  std::optional<ThresholdRule> threshold_rule;  // unset: no trimming
  OptimizerKind optimizer = OptimizerKind::Sls;
  std::uint64_t seed = 0;
  InitKind init = InitKind::DataWindows;
  std::size_t init_candidates = 10;  // data chunks drawn per atom; the most energetic wins
  std::size_t patch_width = 0;  // 0: atom_length
  std::size_t trim_warmup = 0;  // first iteration at which trimming applies
  std::size_t threads = 1;

  void validate() const;
  std::size_t effective_patch_width() const noexcept {
    return patch_width == 0 ? atom_length : patch_width;
  }
};

struct IterationRecord {
  double trimmed_objective = 0.0;    // sum over windows of the trimmed loss
  double untrimmed_objective = 0.0;  // sum over windows of 1/2||x - D*Z||^2 + lambda||Z||_1
  double step_size = 0.0;
  double trimmed_fraction = 0.0;     // flagged patches / patches in the batch
  double lambda = 0.0;
  double wall_ms = 0.0;
  bool line_search_failed = false;
};

struct TrainReport {
  std::vector<IterationRecord> records;
  Dictionary dictionary;
  double lambda = 0.0;
  double lambda_max = 0.0;
};

/// Thrown when the loss turns non-finite; carries the iterations done so far.
class TrainingAborted : public NumericError {
 public:
  TrainingAborted(const std::string& what, TrainReport partial)
      : NumericError(what), partial_(std::move(partial)) {}
  const TrainReport& partial_report() const noexcept { return partial_; }

 private:
  TrainReport partial_;
};

struct SampledWindow {
  std::size_t signal = 0;
  WindowSpec window;

  bool operator==(const SampledWindow&) const = default;
};

/// N_W window starts drawn i.i.d. uniformly from [0, T - W_win].
std::vector<WindowSpec> sample_windows(std::size_t signal_length, const TrainConfig& cfg, Rng& rng);

/// Corpus version: each draw picks a signal uniformly, then a start.
std::vector<SampledWindow> sample_corpus_windows(std::span<const std::size_t> lengths,
                                                 const TrainConfig& cfg, Rng& rng);

/// A coded window with its outlier mask.
struct CodedWindow {
  SignalTensor signal;
  ActivationMap code;
  OutlierMask mask;
};

/// No outliers, on the patch grid of x.
OutlierMask empty_mask(const SignalTensor& x, std::size_t patch_width);

/// sum_w correlate(masked_residual(x_w, D*Z_w, mask_w), Z_w) / W_patch.
DictionaryGradient dictionary_gradient(std::span<const CodedWindow> windows, const Dictionary& d,
                                       std::size_t threads = 1);

/// sum_w trimmed_objective(x_w, D*Z_w, mask_w, ||Z_w||_1, lambda).
double batch_trimmed_loss(std::span<const CodedWindow> windows, const Dictionary& d,
                          double lambda, std::size_t threads = 1);

/// Atoms with norm above 1 are rescaled to norm 1; others are untouched.
Dictionary project_unit_ball(Dictionary d);

struct SlsState {
  static constexpr double kArmijo = 0.1;
  static constexpr double kBackoff = 0.5;
  static constexpr double kGrowth = 2.0;
  static constexpr double kMaxStep = 10.0;
  static constexpr int kMaxHalvings = 30;

  double alpha_max = kMaxStep;
};

struct SlsResult {
  Dictionary dictionary;
  double alpha = 0.0;
  bool failed = false;  // no step met the Armijo condition; dictionary unchanged
};

/// Backtracking Armijo search on the batch that produced `grad`:
/// accepts the largest alpha in {alpha_max, alpha_max/2, ...} with
/// F(d+) <= current_loss + 0.1 <grad, d+ - d>, d+ = proj(d - alpha grad).
/// Without projection the right side is current_loss - 0.1 alpha ||grad||^2.
SlsResult sls_step(const Dictionary& d, const DictionaryGradient& grad,
                   std::span<const CodedWindow> windows, double current_loss, double lambda,
                   SlsState& state, std::size_t threads = 1);

/// Adaptive-moment update with fixed hyperparameters (0.9, 0.999, 1e-2, 1e-8).
class AdaptiveMoments {
 public:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kStep = 1e-2;
  static constexpr double kEps = 1e-8;

  Dictionary step(const Dictionary& d, const DictionaryGradient& grad);

 private:
  std::vector<double> m_, v_;
  std::size_t t_ = 0;
};

Dictionary initialize_dictionary(std::span<const SignalTensor> corpus, const TrainConfig& cfg);

/// Drives the iterations; train() is the usual entry point.
class Learner {
 public:
  Learner(std::span<const SignalTensor> corpus, TrainConfig cfg,
          std::optional<Dictionary> init = std::nullopt);

  IterationRecord step();

  const Dictionary& dictionary() const noexcept { return dict_; }
  double lambda() const noexcept { return lambda_; }
  double lambda_max() const noexcept { return lambda_max_; }
  std::size_t iteration() const noexcept { return iteration_; }
  const TrainConfig& config() const noexcept { return cfg_; }
  /// Per-atom sum of the codes of the most recent batch.
  const std::vector<double>& last_code_sums() const noexcept { return code_sums_; }

 private:
  std::vector<CodedWindow> code_batch(const std::vector<SampledWindow>& picks);

  std::span<const SignalTensor> corpus_;
  TrainConfig cfg_;
  Dictionary dict_;
  double lambda_ = 0.0;
  double lambda_max_ = 0.0;
  bool lambda_ready_ = false;
  bool trim_lambda_ready_ = false;
  std::size_t iteration_ = 0;
  std::vector<double> code_sums_;
  SlsState sls_;
  AdaptiveMoments adam_;
};

/// (d_k, z_k) and (-d_k, -z_k) give the same objective; negate the atoms
/// whose codes sum to a negative value.
Dictionary canonical_signs(Dictionary d, std::span<const double> code_sums);

/// Runs n_iter steps; the returned dictionary has canonical signs.
TrainReport train(std::span<const SignalTensor> corpus, const TrainConfig& cfg,
                  std::optional<Dictionary> init = std::nullopt);

void write_report_csv(const std::filesystem::path& path, const TrainReport& report,
                      bool include_timing = false);

}  // namespace rosecdl
