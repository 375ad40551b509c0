#pragma once

// Convolution D*Z, its two adjoints, and the operator norm used for FISTA
// step sizes. Each routine has a direct path (shifted axpy/dot loops) and an
// FFT path; both compute the same linear (non-circular) result.

#include <cstddef>
#include <memory>

#include "rosecdl/tensor.hpp"

namespace rosecdl {

enum class ConvPath { Auto, Direct, Fft };

/// Auto resolves to Direct when L * valid_length < 2^14.
bool prefers_fft(std::size_t atom_length, std::size_t valid_length) noexcept;

/// x_hat = sum_k d_k * z_k, length valid_length + L - 1.
SignalTensor convolve(const Dictionary& d, const ActivationMap& z, ConvPath path = ConvPath::Auto);

/// Adjoint of convolve with respect to the dictionary:
/// out[k][p][l] = sum_t z_k[t] residual_p[t + l], with L = T - valid_length + 1.
DictionaryGradient correlate(const SignalTensor& residual, const ActivationMap& z,
                             ConvPath path = ConvPath::Auto);

/// Adjoint of convolve with respect to the activations:
/// out[k][t] = sum_p sum_l d[k][p][l] residual_p[t + l].
ActivationMap correlate_dictionary(const SignalTensor& residual, const Dictionary& d,
                                   ConvPath path = ConvPath::Auto);

/// Squared operator norm of Z -> D*Z for signals of length signal_len, by
/// power iteration on the normal operator (all-ones start, relative
/// tolerance 1e-6, at most 200 iterations).
double operator_norm_sq(const Dictionary& d, std::size_t signal_len);

/// D*Z bound to one dictionary and signal length. Caches the dictionary
/// spectra and scratch buffers, so an instance must not be shared between
/// threads; build one per worker.
class ConvolutionOperator {
 public:
  ConvolutionOperator(const Dictionary& d, std::size_t signal_len, ConvPath path = ConvPath::Auto);
  ~ConvolutionOperator();
  ConvolutionOperator(ConvolutionOperator&&) noexcept;
  ConvolutionOperator& operator=(ConvolutionOperator&&) noexcept;

  std::size_t signal_length() const noexcept { return signal_len_; }
  std::size_t valid_length() const noexcept { return valid_len_; }
  std::size_t n_atoms() const noexcept { return dict_.n_atoms(); }
  std::size_t channels() const noexcept { return dict_.channels(); }
  bool uses_fft() const noexcept { return impl_ != nullptr; }

  /// out = D*Z (out is resized if needed).
  void apply(const ActivationMap& z, SignalTensor& out);
  /// out = correlate_dictionary(r, D).
  void adjoint(const SignalTensor& r, ActivationMap& out);
  /// Power-iteration estimate of ||A||^2; see operator_norm_sq.
  double norm_sq();

 private:
  struct FftImpl;
  Dictionary dict_;
  std::size_t signal_len_;
  std::size_t valid_len_;
  std::unique_ptr<FftImpl> impl_;
};

}  // namespace rosecdl
