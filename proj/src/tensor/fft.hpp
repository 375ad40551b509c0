#pragma once

// Thin RAII layer over FFTW's real-to-complex transforms. Plans are built
// once per size with FFTW_ESTIMATE (deterministic) and shared across threads;
// execution uses the new-array interface, so every buffer must come from
// FftBuffer to keep FFTW's alignment assumptions.

#include <cstddef>
#include <memory>

namespace rosecdl::detail {

struct FftwDeleter {
  void operator()(double* p) const noexcept;
};

class FftBuffer {
 public:
  FftBuffer() = default;
  explicit FftBuffer(std::size_t n_doubles);

  double* data() noexcept { return ptr_.get(); }
  const double* data() const noexcept { return ptr_.get(); }
  std::size_t size() const noexcept { return size_; }
  void zero() noexcept;

 private:
  std::unique_ptr<double, FftwDeleter> ptr_;
  std::size_t size_ = 0;
};

/// Smallest 2^a 3^b 5^c 7^d that is >= n.
std::size_t good_fft_size(std::size_t n);

class RealFft {
 public:
  explicit RealFft(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  std::size_t bins() const noexcept { return n_ / 2 + 1; }

  FftBuffer make_real() const { return FftBuffer(n_); }
  FftBuffer make_spectrum() const { return FftBuffer(2 * bins()); }

  // Unnormalized transforms. inverse() clobbers its input.
  void forward(const FftBuffer& in, FftBuffer& out) const;
  void inverse(FftBuffer& in, FftBuffer& out) const;

 private:
  std::size_t n_;
  void* forward_plan_;
  void* inverse_plan_;
};

}  // namespace rosecdl::detail
