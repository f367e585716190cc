#pragma once

// Dense inner loops of the network, with a portable scalar reference and
// vectorized variants picked once at startup from the host CPU.
//
// Set MNN_SIMD=scalar in the environment to force the reference kernels.

#include <cstddef>
#include <span>

namespace mnn::simd {

enum class Backend { Scalar, Avx2, Neon };

struct KernelTable {
  Backend backend;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
};

const KernelTable& scalar_kernels() noexcept;
/// nullptr when the variant is not compiled in or the CPU lacks it.
const KernelTable* avx2_kernels() noexcept;
const KernelTable* neon_kernels() noexcept;

/// Best table for this host, honoring MNN_SIMD.
const KernelTable& active_kernels() noexcept;

const char* backend_name(Backend backend) noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active_kernels().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active_kernels().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace mnn::simd
