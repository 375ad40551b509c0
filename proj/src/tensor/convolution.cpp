#include "rosecdl/convolution.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fft.hpp"
#include "rosecdl/errors.hpp"
#include "rosecdl/random.hpp"
#include "rosecdl/simd/kernels.hpp"

namespace rosecdl {

using detail::FftBuffer;
using detail::RealFft;

namespace {

constexpr std::size_t kFftCrossover = std::size_t{1} << 14;

bool resolve_fft(ConvPath path, std::size_t atom_length, std::size_t valid_length) {
  switch (path) {
    case ConvPath::Direct:
      return false;
    case ConvPath::Fft:
      return true;
    case ConvPath::Auto:
      break;
  }
  return prefers_fft(atom_length, valid_length);
}

void load_padded(std::span<const double> src, FftBuffer& buf) {
  buf.zero();
  std::copy(src.begin(), src.end(), buf.data());
}

}  // namespace

bool prefers_fft(std::size_t atom_length, std::size_t valid_length) noexcept {
  return atom_length * valid_length >= kFftCrossover;
}

// ---------------------------------------------------------------------------
// ConvolutionOperator

struct ConvolutionOperator::FftImpl {
  RealFft fft;
  // dict_spec[k * P + p] holds the spectrum of atom row (k, p).
  std::vector<FftBuffer> dict_spec;
  std::vector<FftBuffer> work_spec;  // one per max(K, P)
  FftBuffer acc;
  FftBuffer real;

  FftImpl(const Dictionary& d, std::size_t signal_len)
      : fft(detail::good_fft_size(signal_len)), acc(fft.make_spectrum()), real(fft.make_real()) {
    dict_spec.reserve(d.n_atoms() * d.channels());
    for (std::size_t k = 0; k < d.n_atoms(); ++k) {
      for (std::size_t p = 0; p < d.channels(); ++p) {
        load_padded(d.row(k, p), real);
        FftBuffer spec = fft.make_spectrum();
        fft.forward(real, spec);
        dict_spec.push_back(std::move(spec));
      }
    }
    const std::size_t n_work = std::max(d.n_atoms(), d.channels());
    for (std::size_t i = 0; i < n_work; ++i) work_spec.push_back(fft.make_spectrum());
  }
};

ConvolutionOperator::ConvolutionOperator(const Dictionary& d, std::size_t signal_len,
                                         ConvPath path)
    : dict_(d), signal_len_(signal_len) {
  if (d.atom_length() == 0 || signal_len < d.atom_length()) {
    throw DimensionError("ConvolutionOperator: signal length " + std::to_string(signal_len) +
                         " shorter than atom length " + std::to_string(d.atom_length()));
  }
  valid_len_ = signal_len - d.atom_length() + 1;
  if (resolve_fft(path, d.atom_length(), valid_len_)) {
    impl_ = std::make_unique<FftImpl>(d, signal_len);
  }
}

ConvolutionOperator::~ConvolutionOperator() = default;
ConvolutionOperator::ConvolutionOperator(ConvolutionOperator&&) noexcept = default;
ConvolutionOperator& ConvolutionOperator::operator=(ConvolutionOperator&&) noexcept = default;

void ConvolutionOperator::apply(const ActivationMap& z, SignalTensor& out) {
  const std::size_t K = dict_.n_atoms(), P = dict_.channels(), L = dict_.atom_length();
  if (z.n_atoms() != K || z.valid_length() != valid_len_) {
    throw DimensionError("convolve: activation map is " + std::to_string(z.n_atoms()) + "x" +
                         std::to_string(z.valid_length()) + ", operator expects " +
                         std::to_string(K) + "x" + std::to_string(valid_len_));
  }
  if (out.channels() != P || out.length() != signal_len_) out = SignalTensor(P, signal_len_);

  if (!impl_) {
    std::fill(out.values().begin(), out.values().end(), 0.0);
    for (std::size_t k = 0; k < K; ++k) {
      const auto zk = z.atom(k);
      for (std::size_t p = 0; p < P; ++p) {
        auto out_p = out.channel(p);
        const auto dkp = dict_.row(k, p);
        for (std::size_t l = 0; l < L; ++l) {
          if (dkp[l] != 0.0) simd::axpy(dkp[l], zk, out_p.subspan(l, valid_len_));
        }
      }
    }
    return;
  }

  FftImpl& f = *impl_;
  const auto& kern = simd::active();
  const std::size_t bins = f.fft.bins();
  for (std::size_t k = 0; k < K; ++k) {
    load_padded(z.atom(k), f.real);
    f.fft.forward(f.real, f.work_spec[k]);
  }
  const double scale = 1.0 / static_cast<double>(f.fft.size());
  for (std::size_t p = 0; p < P; ++p) {
    f.acc.zero();
    for (std::size_t k = 0; k < K; ++k) {
      kern.cmul_acc(f.dict_spec[k * P + p].data(), f.work_spec[k].data(), f.acc.data(), bins);
    }
    f.fft.inverse(f.acc, f.real);
    auto out_p = out.channel(p);
    for (std::size_t t = 0; t < signal_len_; ++t) out_p[t] = f.real.data()[t] * scale;
  }
}

void ConvolutionOperator::adjoint(const SignalTensor& r, ActivationMap& out) {
  const std::size_t K = dict_.n_atoms(), P = dict_.channels(), L = dict_.atom_length();
  if (r.channels() != P || r.length() != signal_len_) {
    throw DimensionError("correlate_dictionary: residual is " + std::to_string(r.channels()) +
                         "x" + std::to_string(r.length()) + ", operator expects " +
                         std::to_string(P) + "x" + std::to_string(signal_len_));
  }
  if (out.n_atoms() != K || out.valid_length() != valid_len_) out = ActivationMap(K, valid_len_);

  if (!impl_) {
    std::fill(out.values().begin(), out.values().end(), 0.0);
    for (std::size_t k = 0; k < K; ++k) {
      auto gk = out.atom(k);
      for (std::size_t p = 0; p < P; ++p) {
        const auto rp = r.channel(p);
        const auto dkp = dict_.row(k, p);
        for (std::size_t l = 0; l < L; ++l) {
          if (dkp[l] != 0.0) simd::axpy(dkp[l], rp.subspan(l, valid_len_), gk);
        }
      }
    }
    return;
  }

  FftImpl& f = *impl_;
  const auto& kern = simd::active();
  const std::size_t bins = f.fft.bins();
  for (std::size_t p = 0; p < P; ++p) {
    load_padded(r.channel(p), f.real);
    f.fft.forward(f.real, f.work_spec[p]);
  }
  const double scale = 1.0 / static_cast<double>(f.fft.size());
  for (std::size_t k = 0; k < K; ++k) {
    f.acc.zero();
    for (std::size_t p = 0; p < P; ++p) {
      kern.cmul_conj_acc(f.dict_spec[k * P + p].data(), f.work_spec[p].data(), f.acc.data(),
                         bins);
    }
    f.fft.inverse(f.acc, f.real);
    auto gk = out.atom(k);
    for (std::size_t t = 0; t < valid_len_; ++t) gk[t] = f.real.data()[t] * scale;
  }
}

// ---------------------------------------------------------------------------
// Free functions

SignalTensor convolve(const Dictionary& d, const ActivationMap& z, ConvPath path) {
  if (z.n_atoms() != d.n_atoms()) {
    throw DimensionError("convolve: dictionary has " + std::to_string(d.n_atoms()) +
                         " atoms, activation map has " + std::to_string(z.n_atoms()));
  }
  if (z.valid_length() == 0 || d.atom_length() == 0) {
    throw DimensionError("convolve: empty activation map or atoms");
  }
  ConvolutionOperator op(d, z.valid_length() + d.atom_length() - 1, path);
  SignalTensor out;
  op.apply(z, out);
  return out;
}

ActivationMap correlate_dictionary(const SignalTensor& residual, const Dictionary& d,
                                   ConvPath path) {
  if (residual.channels() != d.channels()) {
    throw DimensionError("correlate_dictionary: channel mismatch");
  }
  ConvolutionOperator op(d, residual.length(), path);
  ActivationMap out;
  op.adjoint(residual, out);
  return out;
}

DictionaryGradient correlate(const SignalTensor& residual, const ActivationMap& z,
                             ConvPath path) {
  if (z.valid_length() == 0 || residual.length() < z.valid_length()) {
    throw DimensionError("correlate: residual of length " + std::to_string(residual.length()) +
                         " cannot pair with valid length " + std::to_string(z.valid_length()));
  }
  const std::size_t K = z.n_atoms(), P = residual.channels();
  const std::size_t V = z.valid_length();
  const std::size_t L = residual.length() - V + 1;
  DictionaryGradient out(K, P, L);

  if (!resolve_fft(path, L, V)) {
    for (std::size_t k = 0; k < K; ++k) {
      const auto zk = z.atom(k);
      for (std::size_t p = 0; p < P; ++p) {
        const auto rp = residual.channel(p);
        auto gkp = out.row(k, p);
        for (std::size_t l = 0; l < L; ++l) gkp[l] = simd::dot(zk, rp.subspan(l, V));
      }
    }
    return out;
  }

  const RealFft fft(detail::good_fft_size(residual.length()));
  const auto& kern = simd::active();
  const std::size_t bins = fft.bins();
  FftBuffer real = fft.make_real();
  std::vector<FftBuffer> z_spec, r_spec;
  for (std::size_t k = 0; k < K; ++k) {
    load_padded(z.atom(k), real);
    z_spec.push_back(fft.make_spectrum());
    fft.forward(real, z_spec.back());
  }
  for (std::size_t p = 0; p < P; ++p) {
    load_padded(residual.channel(p), real);
    r_spec.push_back(fft.make_spectrum());
    fft.forward(real, r_spec.back());
  }
  FftBuffer acc = fft.make_spectrum();
  const double scale = 1.0 / static_cast<double>(fft.size());
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t p = 0; p < P; ++p) {
      acc.zero();
      kern.cmul_conj_acc(z_spec[k].data(), r_spec[p].data(), acc.data(), bins);
      fft.inverse(acc, real);
      auto gkp = out.row(k, p);
      for (std::size_t l = 0; l < L; ++l) gkp[l] = real.data()[l] * scale;
    }
  }
  return out;
}

namespace {

/// Largest eigenvalue of the symmetric tridiagonal matrix (alpha, beta) by Sturm bisection.
double tridiagonal_top(const std::vector<double>& alpha, const std::vector<double>& beta) {
  const std::size_t n = alpha.size();
  double lo = alpha[0], hi = alpha[0];
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (i > 0 ? std::fabs(beta[i - 1]) : 0.0) + (i + 1 < n ? std::fabs(beta[i]) : 0.0);
    lo = std::min(lo, alpha[i] - r);
    hi = std::max(hi, alpha[i] + r);
  }
  // Number of eigenvalues below x.
  const auto below = [&](double x) {
    std::size_t count = 0;
    double q = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double b2 = i > 0 ? beta[i - 1] * beta[i - 1] : 0.0;
      q = alpha[i] - x - (i > 0 ? b2 / q : 0.0);
      if (q == 0.0) q = -1e-300;
      if (q < 0.0) ++count;
    }
    return count;
  };
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(std::fabs(hi), 1e-300); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (below(mid) == n) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace

double ConvolutionOperator::norm_sq() {
  constexpr int kMaxIter = 200;
  constexpr double kTol = 1e-8;
  constexpr int kCheckEvery = 10;
  const std::size_t K = dict_.n_atoms();

  // All-ones plus a fixed hashed perturbation, so no eigenvector is missed by symmetry.
  ActivationMap v(K, valid_len_);
  auto v0 = v.values();
  for (std::size_t i = 0; i < v0.size(); ++i) {
    v0[i] = 1.0 + (static_cast<double>(mix64(i) >> 11) * 0x1.0p-53 - 0.5);
  }
  const double inv0 = 1.0 / std::sqrt(squared_norm(v0));
  for (double& e : v0) e *= inv0;

  // Lanczos on A^T A; the top Ritz value never exceeds the top eigenvalue.
  ActivationMap w(K, valid_len_);
  ActivationMap v_prev(K, valid_len_);
  SignalTensor tmp;
  std::vector<double> alpha, beta;
  double estimate = 0.0;
  double checked = 0.0;
  for (int it = 0; it < kMaxIter; ++it) {
    apply(v, tmp);
    adjoint(tmp, w);
    auto wv = w.values();
    const auto vv = v.values();
    const auto pv = v_prev.values();
    if (!beta.empty()) {
      const double b = beta.back();
      for (std::size_t i = 0; i < wv.size(); ++i) wv[i] -= b * pv[i];
    }
    const double a = dot(wv, vv);
    for (std::size_t i = 0; i < wv.size(); ++i) wv[i] -= a * vv[i];
    alpha.push_back(a);
    const double b = std::sqrt(squared_norm(wv));
    estimate = std::max(estimate, tridiagonal_top(alpha, beta));
    if (b <= 1e-13 * std::max(estimate, 1e-300)) break;  // invariant subspace: exact
    if ((it + 1) % kCheckEvery == 0) {
      if (std::fabs(estimate - checked) <= kTol * estimate) break;
      checked = estimate;
    }
    beta.push_back(b);
    std::swap(v_prev, v);
    auto nv = v.values();
    const double inv = 1.0 / b;
    for (std::size_t i = 0; i < nv.size(); ++i) nv[i] = wv[i] * inv;
  }
  return estimate;
}

double operator_norm_sq(const Dictionary& d, std::size_t signal_len) {
  if (signal_len < d.atom_length()) {
    throw DimensionError("operator_norm_sq: signal shorter than atoms");
  }
  ConvolutionOperator op(d, signal_len);
  return op.norm_sq();
}

}  // namespace rosecdl
