#include "rosecdl/two_pattern.hpp"

#include <cmath>
#include <algorithm>
#include <numeric>
#include <span>

#include "rosecdl/errors.hpp"

namespace rosecdl {

namespace {

double dot_of(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

void check_single_atom(const TwoPatternModel& model, const Dictionary& d) {
  if (d.n_atoms() != 1 || d.atom_size() != model.d_a.size()) {
    throw DimensionError("two-pattern model needs a single atom of matching size");
  }
}

}  // namespace

void TwoPatternModel::validate() const {
  if (d_a.empty() || d_a.size() != d_b.size()) throw DomainError("d_a and d_b must share a length");
  if (std::fabs(dot_of(d_a, d_a) - 1.0) > 1e-12 || std::fabs(dot_of(d_b, d_b) - 1.0) > 1e-12) {
    throw DomainError("d_a and d_b must be unit norm");
  }
  const double cc = c();
  if (cc < -1e-12 || cc > 1.0 + 1e-12) throw DomainError("d_a . d_b must lie in [0, 1]");
  if (!(rho >= 0.0 && rho < 1.0)) throw DomainError("rho must lie in [0, 1)");
  if (!(sigma >= 0.0)) throw DomainError("sigma must be >= 0");
  if (!(lambda >= 0.0)) throw DomainError("lambda must be >= 0");
}

double TwoPatternModel::c() const { return dot_of(d_a, d_b); }

double analytic_sparse_code(double c, double eps_dot_d, double lambda) noexcept {
  const double v = c + eps_dot_d - lambda;
  return v > 0.0 ? v : 0.0;
}

double analytic_sparse_code(const TwoPatternModel& model, const Dictionary& d, double eps_dot_d,
                            Pattern pattern) {
  check_single_atom(model, d);
  const auto& target = pattern == Pattern::Common ? model.d_a : model.d_b;
  return analytic_sparse_code(dot_of(d.atom(0), target), eps_dot_d, model.lambda);
}

double analytic_expected_loss(const TwoPatternModel& model, double c, std::size_t L) {
  if (c < model.lambda) throw DomainError("expected loss needs c >= lambda");
  if (c > 1.0) throw DomainError("expected loss needs c <= 1");
  const double g = c - model.lambda;
  return 0.5 * (1.0 - g * g + static_cast<double>(L - 1) * model.sigma * model.sigma);
}

DictionaryGradient analytic_expected_gradient(const TwoPatternModel& model, const Dictionary& d) {
  check_single_atom(model, d);
  const auto dv = d.atom(0);
  const double ga = std::max(0.0, dot_of(dv, model.d_a) - model.lambda);
  const double gb = std::max(0.0, dot_of(dv, model.d_b) - model.lambda);
  const double wa = 1.0 - model.rho, wb = model.rho;
  const double coef_d = wa * ga * ga + wb * gb * gb;
  DictionaryGradient out(1, d.channels(), d.atom_length());
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) {
    ov[i] = coef_d * dv[i] - wa * ga * model.d_a[i] - wb * gb * model.d_b[i];
  }
  return out;
}

}  // namespace rosecdl
