#pragma once

// Evaluation metrics: dictionary recovery, mask F1 and ROC AUC.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "rosecdl/robust_loss.hpp"
#include "rosecdl/tensor.hpp"

namespace rosecdl {

/// out[t - 1] = sum_l d[l] dh[l - t + T] for t = 1 .. L + L' - 1 with
/// 1-based l, T = max(L, L'), and out-of-range indices of dh contributing 0.
std::vector<double> full_correlation_1d(std::span<const double> d, std::span<const double> dh);

/// Maximum-weight matching of rows to distinct columns (rows <= cols).
/// Returns the column matched to each row. weights is row-major.
std::vector<std::size_t> max_weight_assignment(std::span<const double> weights, std::size_t rows,
                                               std::size_t cols);

struct RecoveryScore {
  double score = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> assignment;  // (true atom, learned atom)
  std::vector<double> correlation;                              // K x K', row-major
  std::size_t n_true = 0;
  std::size_t n_learned = 0;

  double at(std::size_t i, std::size_t j) const { return correlation[i * n_learned + j]; }
};

/// C[i][j] = max over lags of sum_p full_correlation_1d(d_ip, dh_jp), after
/// scaling every atom of both dictionaries to unit norm; the score is the
/// mean of C over the best assignment. Correlations are signed.
RecoveryScore recovery_score(const Dictionary& truth, const Dictionary& learned,
                             std::size_t threads = 1);

/// 2 TP / (2 TP + FP + FN); 1 when neither mask flags anything.
double mask_f1(const OutlierMask& predicted, const OutlierMask& truth);

/// Mann-Whitney estimate of P(score_pos > score_neg), ties counted 1/2.
double roc_auc(std::span<const double> scores, std::span<const bool> labels);
double roc_auc(std::span<const double> scores, const std::vector<bool>& labels);

}  // namespace rosecdl
