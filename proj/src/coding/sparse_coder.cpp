#include "rosecdl/sparse_coder.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rosecdl/errors.hpp"
#include "rosecdl/simd/kernels.hpp"

namespace rosecdl {

void SparseCodeConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be >= 0");
  if (n_iters < 1) throw ConfigError("n_iters must be >= 1");
  if (step && !(*step > 0.0 && std::isfinite(*step))) throw ConfigError("step must be > 0");
}

double soft_threshold(double v, double theta) noexcept {
  const double mag = std::fabs(v) - theta;
  return mag > 0.0 ? std::copysign(mag, v) : 0.0;
}

std::vector<double> soft_threshold(std::span<const double> v, double theta) {
  std::vector<double> out(v.size());
  simd::soft_threshold(v, theta, out);
  return out;
}

ObjectiveValue objective(const SignalTensor& x, const Dictionary& d, const ActivationMap& z,
                         double lambda) {
  if (x.channels() != d.channels()) throw DimensionError("objective: channel mismatch");
  const SignalTensor recon = convolve(d, z);
  if (recon.length() != x.length()) {
    throw DimensionError("objective: activations do not match the signal length");
  }
  ObjectiveValue v;
  v.data_term = 0.5 * simd::squared_distance(x.values(), recon.values());
  v.l1_term = lambda * z.l1_norm();
  v.total = v.data_term + v.l1_term;
  return v;
}

double lambda_max(const SignalTensor& x, const Dictionary& d) {
  const ActivationMap corr = correlate_dictionary(x, d);
  double m = 0.0;
  for (double v : corr.values()) m = std::max(m, std::fabs(v));
  return m;
}

ActivationMap fista(const SignalTensor& x, const Dictionary& d, const SparseCodeConfig& cfg,
                    const ActivationMap* warm_start) {
  if (x.channels() != d.channels()) throw DimensionError("fista: channel mismatch");
  ConvolutionOperator op(d, x.length());
  return fista(op, x, cfg, warm_start);
}

ActivationMap fista(ConvolutionOperator& op, const SignalTensor& x, const SparseCodeConfig& cfg,
                    const ActivationMap* warm_start) {
  cfg.validate();
  if (x.channels() != op.channels() || x.length() != op.signal_length()) {
    throw DimensionError("fista: signal does not match the operator");
  }
  const std::size_t K = op.n_atoms(), V = op.valid_length();
  if (warm_start && (warm_start->n_atoms() != K || warm_start->valid_length() != V)) {
    throw DimensionError("fista: warm start has the wrong shape");
  }

  double step = 0.0;
  if (cfg.step) {
    step = *cfg.step;
  } else {
    const double norm = op.norm_sq();
    step = norm > 0.0 ? 1.0 / norm : 1.0;
  }

  ActivationMap z = warm_start ? *warm_start : ActivationMap(K, V);
  ActivationMap y = z;
  ActivationMap z_next(K, V);
  ActivationMap grad(K, V);
  SignalTensor residual;
  const double theta = step * cfg.lambda;
  double t = 1.0;

  auto zv = z.values();
  auto yv = y.values();
  auto nv = z_next.values();
  auto gv = grad.values();

  for (std::size_t it = 0; it < cfg.n_iters; ++it) {
    op.apply(y, residual);
    auto rv = residual.values();
    const auto xv = x.values();
    for (std::size_t i = 0; i < rv.size(); ++i) rv[i] -= xv[i];
    op.adjoint(residual, grad);

    // z_next = St(y - step * grad, step * lambda)
    for (std::size_t i = 0; i < nv.size(); ++i) nv[i] = yv[i] - step * gv[i];
    simd::soft_threshold(nv, theta, nv);

    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double momentum = (t - 1.0) / t_next;
    for (std::size_t i = 0; i < yv.size(); ++i) {
      yv[i] = nv[i] + momentum * (nv[i] - zv[i]);
    }
    std::swap(z, z_next);
    zv = z.values();
    nv = z_next.values();
    t = t_next;

    if ((it % 16 == 15 || it + 1 == cfg.n_iters) && !all_finite(zv)) {
      throw NumericError("fista: non-finite iterate at iteration " + std::to_string(it + 1) +
                         " (step " + std::to_string(step) + " too large?)");
    }
  }
  return z;
}

double kkt_violation(const SignalTensor& x, const Dictionary& d, const ActivationMap& z,
                     double lambda) {
  SignalTensor residual = convolve(d, z);
  if (residual.length() != x.length() || residual.channels() != x.channels()) {
    throw DimensionError("kkt_violation: shape mismatch");
  }
  auto rv = residual.values();
  for (std::size_t i = 0; i < rv.size(); ++i) rv[i] -= x.values()[i];
  const ActivationMap g = correlate_dictionary(residual, d);
  double worst = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double zi = z.values()[i];
    const double gi = g.values()[i];
    const double v = zi != 0.0 ? std::fabs(gi + std::copysign(lambda, zi))
                               : std::max(0.0, std::fabs(gi) - lambda);
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace rosecdl
