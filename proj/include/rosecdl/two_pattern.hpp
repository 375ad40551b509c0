#pragma once

// Closed forms for the two-pattern model: a single unit atom d coding
// segments X = d_i + eps of length L, where d_i is the common pattern d_a
// with probability 1 - rho and the rare pattern d_b otherwise, and
// eps ~ N(0, sigma^2 I). The per-segment loss is the LASSO objective
// 1/2 ||X - z d||^2 + lambda |z| at the optimal code z*.

#include <cstddef>
#include <vector>

#include "rosecdl/tensor.hpp"

namespace rosecdl {

struct TwoPatternModel {
  std::vector<double> d_a;
  std::vector<double> d_b;
  double rho = 0.0;
  double sigma = 0.0;
  double lambda = 0.0;

  /// Throws DomainError unless both atoms are unit norm (1e-12), share a
  /// length, 0 <= d_a . d_b <= 1, rho in [0, 1), sigma >= 0 and lambda >= 0.
  void validate() const;
  double c() const;  // d_a . d_b
};

enum class Pattern { Common, Rare };

/// z* = c + eps.d - lambda if that is positive, else 0.
double analytic_sparse_code(double c, double eps_dot_d, double lambda) noexcept;
/// Same with c = d . d_a (or d . d_b for Pattern::Rare); d must have K = 1.
double analytic_sparse_code(const TwoPatternModel& model, const Dictionary& d, double eps_dot_d,
                            Pattern pattern = Pattern::Common);

/// E[loss] = 1/2 (1 - (c - lambda)^2 + (L - 1) sigma^2), for lambda <= c <= 1.
double analytic_expected_loss(const TwoPatternModel& model, double c, std::size_t L);

/// E[grad_d] = ((1-rho)(c_a-lambda)^2 + rho(c_b-lambda)^2) d
///             - (1-rho)(c_a-lambda) d_a - rho(c_b-lambda) d_b,
/// with c_a = d.d_a, c_b = d.d_b, and a branch dropped when its c <= lambda.
DictionaryGradient analytic_expected_gradient(const TwoPatternModel& model, const Dictionary& d);

}  // namespace rosecdl
