#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "rosecdl/convolution.hpp"
#include "rosecdl/tensor.hpp"

namespace rosecdl {

struct SparseCodeConfig {
  double lambda = 0.0;
  std::size_t n_iters = 50;
  /// FISTA step; 1 / operator_norm_sq(d, T) when unset.
  std::optional<double> step;

  void validate() const;
};

inline constexpr std::size_t kTrainingFistaIters = 50;
inline constexpr std::size_t kEncodingFistaIters = 500;

struct ObjectiveValue {
  double data_term = 0.0;  // 1/2 ||x - D*Z||^2
  double l1_term = 0.0;    // lambda ||Z||_1
  double total = 0.0;
};

std::vector<double> soft_threshold(std::span<const double> v, double theta);
double soft_threshold(double v, double theta) noexcept;

ObjectiveValue objective(const SignalTensor& x, const Dictionary& d, const ActivationMap& z,
                         double lambda);

/// max_k,t |<d_k, x[t : t + L]>|: the smallest lambda whose LASSO solution is Z = 0.
double lambda_max(const SignalTensor& x, const Dictionary& d);

/// Runs exactly cfg.n_iters FISTA iterations from warm_start (or zero).
/// Throws NumericError if the iterates stop being finite.
ActivationMap fista(const SignalTensor& x, const Dictionary& d, const SparseCodeConfig& cfg,
                    const ActivationMap* warm_start = nullptr);

/// Same, reusing a prebuilt operator for D and the length of x.
ActivationMap fista(ConvolutionOperator& op, const SignalTensor& x, const SparseCodeConfig& cfg,
                    const ActivationMap* warm_start = nullptr);

/// Largest violation of the LASSO optimality conditions at z:
/// |g + lambda sign(z)| on the support and (|g| - lambda)_+ off it, with
/// g = correlate_dictionary(D*Z - x, D).
double kkt_violation(const SignalTensor& x, const Dictionary& d, const ActivationMap& z,
                     double lambda);

}  // namespace rosecdl
