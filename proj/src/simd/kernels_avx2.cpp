#include "rosecdl/simd/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)
#define ROSECDL_HAVE_AVX2_KERNELS 1
#include <immintrin.h>
#endif

namespace rosecdl::simd {

#ifdef ROSECDL_HAVE_AVX2_KERNELS
namespace {

#define ROSECDL_AVX2 __attribute__((target("avx2,fma")))

ROSECDL_AVX2 double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

ROSECDL_AVX2 void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d y0 = _mm256_loadu_pd(y + i);
    __m256d y1 = _mm256_loadu_pd(y + i + 4);
    y0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), y0);
    y1 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), y1);
    _mm256_storeu_pd(y + i, y0);
    _mm256_storeu_pd(y + i + 4, y1);
  }
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

ROSECDL_AVX2 double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

ROSECDL_AVX2 void cmul_acc_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d va = _mm256_loadu_pd(a + 2 * i);
    const __m256d vb = _mm256_loadu_pd(b + 2 * i);
    const __m256d b_re = _mm256_movedup_pd(vb);
    const __m256d b_im = _mm256_permute_pd(vb, 0xF);
    const __m256d a_swap = _mm256_permute_pd(va, 0x5);
    const __m256d prod = _mm256_fmaddsub_pd(va, b_re, _mm256_mul_pd(a_swap, b_im));
    _mm256_storeu_pd(out + 2 * i, _mm256_add_pd(_mm256_loadu_pd(out + 2 * i), prod));
  }
  for (; i < n; ++i) {
    const double ar = a[2 * i], ai = a[2 * i + 1];
    const double br = b[2 * i], bi = b[2 * i + 1];
    out[2 * i] += ar * br - ai * bi;
    out[2 * i + 1] += ar * bi + ai * br;
  }
}

ROSECDL_AVX2 void cmul_conj_acc_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d va = _mm256_loadu_pd(a + 2 * i);
    const __m256d vb = _mm256_loadu_pd(b + 2 * i);
    const __m256d a_re = _mm256_movedup_pd(va);
    const __m256d a_im = _mm256_permute_pd(va, 0xF);
    const __m256d b_swap = _mm256_permute_pd(vb, 0x5);
    const __m256d prod = _mm256_fmsubadd_pd(a_re, vb, _mm256_mul_pd(a_im, b_swap));
    _mm256_storeu_pd(out + 2 * i, _mm256_add_pd(_mm256_loadu_pd(out + 2 * i), prod));
  }
  for (; i < n; ++i) {
    const double ar = a[2 * i], ai = a[2 * i + 1];
    const double br = b[2 * i], bi = b[2 * i + 1];
    out[2 * i] += ar * br + ai * bi;
    out[2 * i + 1] += ar * bi - ai * br;
  }
}

// sign(v)(|v| - theta)_+ == v - clamp(v, -theta, theta), bit for bit.
ROSECDL_AVX2 void soft_threshold_avx2(const double* v, double theta, double* out, std::size_t n) {
  const __m256d hi = _mm256_set1_pd(theta);
  const __m256d lo = _mm256_set1_pd(-theta);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(v + i);
    const __m256d clamped = _mm256_min_pd(_mm256_max_pd(x, lo), hi);
    _mm256_storeu_pd(out + i, _mm256_sub_pd(x, clamped));
  }
  for (; i < n; ++i) {
    const double x = v[i];
    const double clamped = x < -theta ? -theta : (x > theta ? theta : x);
    out[i] = x - clamped;
  }
}

ROSECDL_AVX2 double squared_distance_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

#undef ROSECDL_AVX2

constexpr KernelTable kAvx2{
    "avx2",        axpy_avx2,          dot_avx2,
    cmul_acc_avx2, cmul_conj_acc_avx2, soft_threshold_avx2,
    squared_distance_avx2,
};

}  // namespace

const KernelTable* avx2_kernels() noexcept {
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &kAvx2 : nullptr;
}

#else

const KernelTable* avx2_kernels() noexcept { return nullptr; }

#endif

}  // namespace rosecdl::simd
