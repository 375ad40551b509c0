#include "rosecdl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

#include "rosecdl/errors.hpp"
#include "rosecdl/parallel.hpp"

namespace rosecdl {

std::vector<double> full_correlation_1d(std::span<const double> d, std::span<const double> dh) {
  const std::ptrdiff_t L = static_cast<std::ptrdiff_t>(d.size());
  const std::ptrdiff_t Lh = static_cast<std::ptrdiff_t>(dh.size());
  if (L == 0 || Lh == 0) return {};
  const std::ptrdiff_t T = std::max(L, Lh);
  std::vector<double> out(static_cast<std::size_t>(L + Lh - 1), 0.0);
  for (std::ptrdiff_t t = 1; t <= L + Lh - 1; ++t) {
    double s = 0.0;
    for (std::ptrdiff_t l = 1; l <= L; ++l) {
      const std::ptrdiff_t j = l - t + T;
      if (j >= 1 && j <= Lh) s += d[l - 1] * dh[j - 1];
    }
    out[static_cast<std::size_t>(t - 1)] = s;
  }
  return out;
}

namespace {

Dictionary unit_atoms(Dictionary d) {
  for (std::size_t k = 0; k < d.n_atoms(); ++k) {
    const double n = d.atom_norm(k);
    if (n > 0.0) {
      for (double& v : d.atom(k)) v /= n;
    }
  }
  return d;
}

}  // namespace

RecoveryScore recovery_score(const Dictionary& truth, const Dictionary& learned,
                             std::size_t threads) {
  if (truth.channels() != learned.channels()) {
    throw DimensionError("recovery_score: channel counts differ");
  }
  if (truth.n_atoms() == 0) throw DimensionError("recovery_score: empty true dictionary");
  if (learned.n_atoms() < truth.n_atoms()) {
    throw DimensionError("recovery_score: learned dictionary has fewer atoms than the truth");
  }
  const Dictionary a = unit_atoms(truth);
  const Dictionary b = unit_atoms(learned);
  const std::size_t K = a.n_atoms(), Kh = b.n_atoms(), P = a.channels();

  RecoveryScore out;
  out.n_true = K;
  out.n_learned = Kh;
  out.correlation.assign(K * Kh, 0.0);
  parallel_for(K, threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < Kh; ++j) {
      std::vector<double> sum;
      for (std::size_t p = 0; p < P; ++p) {
        const auto c = full_correlation_1d(a.row(i, p), b.row(j, p));
        if (sum.empty()) sum.assign(c.size(), 0.0);
        for (std::size_t t = 0; t < c.size(); ++t) sum[t] += c[t];
      }
      out.correlation[i * Kh + j] = *std::max_element(sum.begin(), sum.end());
    }
  });

  const auto cols = max_weight_assignment(out.correlation, K, Kh);
  double total = 0.0;
  for (std::size_t i = 0; i < K; ++i) {
    out.assignment.emplace_back(i, cols[i]);
    total += out.correlation[i * Kh + cols[i]];
  }
  out.score = total / static_cast<double>(K);
  return out;
}

double mask_f1(const OutlierMask& predicted, const OutlierMask& truth) {
  if (predicted.patch_width != truth.patch_width || predicted.size() != truth.size()) {
    throw DimensionError("mask_f1: masks are on different patch grids");
  }
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool p = predicted.flags[i], t = truth.flags[i];
    tp += p && t;
    fp += p && !t;
    fn += !p && t;
  }
  if (tp + fp + fn == 0) return 1.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

double roc_auc(std::span<const double> scores, std::span<const bool> labels) {
  if (scores.size() != labels.size()) throw DimensionError("roc_auc: size mismatch");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Average ranks over tied groups, then the Mann-Whitney U of the positives.
  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]]) {
        pos_rank_sum += rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw UndefinedMetricError("roc_auc needs both classes");
  const double np = static_cast<double>(n_pos);
  const double u = pos_rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

double roc_auc(std::span<const double> scores, const std::vector<bool>& labels) {
  std::unique_ptr<bool[]> buf(new bool[labels.size()]);
  for (std::size_t i = 0; i < labels.size(); ++i) buf[i] = labels[i];
  return roc_auc(scores, std::span<const bool>(buf.get(), labels.size()));
}

}  // namespace rosecdl
