#pragma once

// Data-parallel inner loops shared by the convolution and coding routines.
// Every kernel has a scalar reference implementation; wider variants are
// selected once at startup from what the CPU reports and must agree with
// the reference to rounding.

#include <cstddef>
#include <span>
#include <string_view>

namespace rosecdl::simd {

struct KernelTable {
  std::string_view name;
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  // Interleaved complex arrays (re, im pairs), n complex values.
  // out[i] += a[i] * b[i]
  void (*cmul_acc)(const double* a, const double* b, double* out, std::size_t n);
  // out[i] += conj(a[i]) * b[i]
  void (*cmul_conj_acc)(const double* a, const double* b, double* out, std::size_t n);
  // out[i] = sign(v[i]) * max(|v[i]| - theta, 0)
  void (*soft_threshold)(const double* v, double theta, double* out, std::size_t n);
  // sum_i (a[i] - b[i])^2
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
};

const KernelTable& scalar_kernels() noexcept;
/// nullptr when the build or the CPU lacks AVX2+FMA.
const KernelTable* avx2_kernels() noexcept;

/// Table in use. Chosen on first call: ROSECDL_SIMD=scalar|avx2 forces a
/// variant, otherwise the widest supported one wins.
const KernelTable& active() noexcept;

inline void axpy(double a, std::span<const double> x, std::span<double> y) noexcept {
  active().axpy(a, x.data(), y.data(), x.size());
}
inline double dot(std::span<const double> x, std::span<const double> y) noexcept {
  return active().dot(x.data(), y.data(), x.size());
}
inline void soft_threshold(std::span<const double> v, double theta, std::span<double> out) noexcept {
  active().soft_threshold(v.data(), theta, out.data(), v.size());
}
inline double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
  return active().squared_distance(a.data(), b.data(), a.size());
}

}  // namespace rosecdl::simd
