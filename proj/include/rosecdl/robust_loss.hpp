#pragma once

// Patch-level reconstruction errors and the outlier trimming built on them.
//
// The time axis is cut into consecutive, non-overlapping patches of width
// W_patch (the last one may be shorter). A patch is an outlier when its
// error is strictly above the threshold beta; ties stay inliers.

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "rosecdl/tensor.hpp"

namespace rosecdl {

struct PatchErrorSeries {
  std::size_t patch_width = 0;
  std::size_t signal_length = 0;
  std::vector<std::size_t> starts;
  std::vector<double> errors;

  std::size_t size() const noexcept { return errors.size(); }
};

enum class ThresholdKind { Quantile, ZScore, Mad };

struct ThresholdRule {
  ThresholdKind kind = ThresholdKind::Mad;
  // Quantile: proportion of patches to trim. ZScore / Mad: score multiplier.
  double alpha = 3.5;

  static ThresholdRule quantile(double alpha) { return {ThresholdKind::Quantile, alpha}; }
  static ThresholdRule zscore(double alpha = 3.0) { return {ThresholdKind::ZScore, alpha}; }
  static ThresholdRule mad(double alpha = 3.5) { return {ThresholdKind::Mad, alpha}; }

  void validate() const;
};

struct OutlierMask {
  std::size_t patch_width = 0;
  std::vector<bool> flags;  // true = outlier
  double threshold_used = 0.0;

  std::size_t size() const noexcept { return flags.size(); }
  std::size_t count() const noexcept;
  double outlier_fraction() const noexcept;
};

std::size_t patch_count(std::size_t length, std::size_t patch_width) noexcept;

/// error_i = 1/2 sum over channels and samples of patch i of (x - recon)^2.
PatchErrorSeries patch_errors(const SignalTensor& x, const SignalTensor& recon,
                              std::size_t patch_width);

/// Threshold beta from the pooled errors.
///  Quantile: nearest-rank-up value at rank ceil((1 - alpha) n) of the sorted errors.
///  ZScore:   mean + alpha * population std.
///  Mad:      median + alpha * MAD / 0.6745 (lower median for even counts).
double compute_threshold(std::span<const double> errors, const ThresholdRule& rule);
double compute_threshold(const PatchErrorSeries& errors, const ThresholdRule& rule);

OutlierMask build_mask(const PatchErrorSeries& errors, double beta);

/// (1 / W_patch) * sum of inlier patch data terms + lambda * z_l1.
double trimmed_objective(const SignalTensor& x, const SignalTensor& recon,
                         const OutlierMask& mask, double z_l1, double lambda);

/// recon - x with every flagged patch zeroed.
SignalTensor masked_residual(const SignalTensor& x, const SignalTensor& recon,
                             const OutlierMask& mask);

/// x with every flagged patch zeroed.
SignalTensor apply_mask(const SignalTensor& x, const OutlierMask& mask);

/// Rows of (patch_start, patch_end, error, is_outlier).
void write_mask_csv(const std::filesystem::path& path, const PatchErrorSeries& errors,
                    const OutlierMask& mask);
/// Flags as an RST1 u8 tensor of shape (n_patches).
void write_mask_rst1(const std::filesystem::path& path, const OutlierMask& mask);

double median_lower(std::vector<double> values);

}  // namespace rosecdl
