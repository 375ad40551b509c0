#include "fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>
#include <new>
#include <utility>

namespace rosecdl::detail {

void FftwDeleter::operator()(double* p) const noexcept { fftw_free(p); }

FftBuffer::FftBuffer(std::size_t n_doubles)
    : ptr_(static_cast<double*>(fftw_malloc(sizeof(double) * (n_doubles ? n_doubles : 1)))),
      size_(n_doubles) {
  if (!ptr_) throw std::bad_alloc();
  zero();
}

void FftBuffer::zero() noexcept {
  if (size_ != 0) std::memset(ptr_.get(), 0, sizeof(double) * size_);
}

std::size_t good_fft_size(std::size_t n) {
  if (n <= 1) return 1;
  for (std::size_t m = n;; ++m) {
    std::size_t r = m;
    for (std::size_t f : {2u, 3u, 5u, 7u}) {
      while (r % f == 0) r /= f;
    }
    if (r == 1) return m;
  }
}

namespace {

struct PlanPair {
  fftw_plan forward;
  fftw_plan inverse;
};

// The FFTW planner is not thread-safe; execution of an existing plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

PlanPair plans_for(std::size_t n) {
  static std::map<std::size_t, PlanPair> cache;
  std::lock_guard lock(planner_mutex());
  if (auto it = cache.find(n); it != cache.end()) return it->second;
  FftBuffer real(n);
  FftBuffer spec(2 * (n / 2 + 1));
  const int len = static_cast<int>(n);
  auto* cplx = reinterpret_cast<fftw_complex*>(spec.data());
  PlanPair plans{
      fftw_plan_dft_r2c_1d(len, real.data(), cplx, FFTW_ESTIMATE),
      fftw_plan_dft_c2r_1d(len, cplx, real.data(), FFTW_ESTIMATE | FFTW_DESTROY_INPUT),
  };
  cache.emplace(n, plans);
  return plans;
}

}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  const PlanPair p = plans_for(n);
  forward_plan_ = p.forward;
  inverse_plan_ = p.inverse;
}

void RealFft::forward(const FftBuffer& in, FftBuffer& out) const {
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void RealFft::inverse(FftBuffer& in, FftBuffer& out) const {
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                       reinterpret_cast<fftw_complex*>(in.data()), out.data());
}

}  // namespace rosecdl::detail
