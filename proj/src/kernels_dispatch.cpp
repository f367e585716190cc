#include <cstdlib>
#include <string_view>

#include "mnn/kernels.hpp"

namespace mnn::simd {

#if defined(MNN_HAVE_AVX2_TU)
const KernelTable& avx2_table() noexcept;
#endif
#if defined(MNN_HAVE_NEON_TU)
const KernelTable& neon_table() noexcept;
#endif

const KernelTable* avx2_kernels() noexcept {
#if defined(MNN_HAVE_AVX2_TU)
  static const bool supported =
      __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable* neon_kernels() noexcept {
#if defined(MNN_HAVE_NEON_TU)
  // Advanced SIMD is mandatory on AArch64.
  return &neon_table();
#else
  return nullptr;
#endif
}

namespace {

const KernelTable& select_kernels() noexcept {
  const char* forced = std::getenv("MNN_SIMD");
  if (forced != nullptr && std::string_view(forced) == "scalar") {
    return scalar_kernels();
  }
  if (const auto* t = avx2_kernels()) return *t;
  if (const auto* t = neon_kernels()) return *t;
  return scalar_kernels();
}

}  // namespace

const KernelTable& active_kernels() noexcept {
  static const KernelTable& table = select_kernels();
  return table;
}

const char* backend_name(Backend backend) noexcept {
  switch (backend) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
  }
  return "unknown";
}

}  // namespace mnn::simd
