#include "rosecdl/simd/kernels.hpp"

#include <cmath>

namespace rosecdl::simd {
namespace {

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void cmul_acc_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[2 * i], ai = a[2 * i + 1];
    const double br = b[2 * i], bi = b[2 * i + 1];
    out[2 * i] += ar * br - ai * bi;
    out[2 * i + 1] += ar * bi + ai * br;
  }
}

void cmul_conj_acc_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[2 * i], ai = a[2 * i + 1];
    const double br = b[2 * i], bi = b[2 * i + 1];
    out[2 * i] += ar * br + ai * bi;
    out[2 * i + 1] += ar * bi - ai * br;
  }
}

void soft_threshold_scalar(const double* v, double theta, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double mag = std::fabs(v[i]) - theta;
    out[i] = mag > 0.0 ? std::copysign(mag, v[i]) : 0.0;
  }
}

double squared_distance_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

constexpr KernelTable kScalar{
    "scalar",          axpy_scalar,           dot_scalar,
    cmul_acc_scalar,   cmul_conj_acc_scalar,  soft_threshold_scalar,
    squared_distance_scalar,
};

}  // namespace

const KernelTable& scalar_kernels() noexcept { return kScalar; }

}  // namespace rosecdl::simd
