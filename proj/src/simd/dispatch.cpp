#include <cstdlib>
#include <string_view>

#include "rosecdl/simd/kernels.hpp"

namespace rosecdl::simd {
namespace {

const KernelTable& select() noexcept {
  const char* forced = std::getenv("ROSECDL_SIMD");
  if (forced != nullptr && std::string_view(forced) == "scalar") return scalar_kernels();
  if (const KernelTable* wide = avx2_kernels()) return *wide;
  return scalar_kernels();
}

}  // namespace

const KernelTable& active() noexcept {
  static const KernelTable& table = select();
  return table;
}

}  // namespace rosecdl::simd
