#pragma once

// Data-parallel inner loops shared by the dense, frontal and leaf-operator
// code. Every kernel has a portable scalar reference; vectorized variants are
// selected at runtime from the CPU features (or forced through HPS_SIMD).
//
// All matrices are row-major with an explicit leading dimension.

#include <cstddef>
#include <string_view>

namespace hps::simd {

enum class Backend { Scalar, Avx2, Neon };

struct KernelTable {
  Backend backend;
  const char* name;

  double (*dot)(std::size_t n, const double* x, const double* y);
  // y += alpha * x
  void (*axpy)(std::size_t n, double alpha, const double* x, double* y);
  void (*scal)(std::size_t n, double alpha, double* x);
  // C(m x n) += alpha * A(m x k) * B(k x n)
  void (*gemm)(std::size_t m, std::size_t n, std::size_t k, double alpha,
               const double* a, std::size_t lda, const double* b,
               std::size_t ldb, double* c, std::size_t ldc);
  // Index of the first entry of maximal magnitude; 0 when n == 0.
  std::size_t (*iamax)(std::size_t n, const double* x);
};

// nullptr when the backend was not compiled in or the CPU lacks support.
const KernelTable* kernels_for(Backend backend);
bool backend_available(Backend backend);

// Best available backend, honouring HPS_SIMD=scalar|avx2|neon|auto.
Backend detect_backend();

const KernelTable& kernels();
Backend active_backend();
// Throws std::invalid_argument if the backend is unavailable.
void set_backend(Backend backend);

std::string_view backend_name(Backend backend);

inline double dot(std::size_t n, const double* x, const double* y) {
  return kernels().dot(n, x, y);
}
inline void axpy(std::size_t n, double alpha, const double* x, double* y) {
  kernels().axpy(n, alpha, x, y);
}
inline void scal(std::size_t n, double alpha, double* x) {
  kernels().scal(n, alpha, x);
}
inline void gemm(std::size_t m, std::size_t n, std::size_t k, double alpha,
                 const double* a, std::size_t lda, const double* b,
                 std::size_t ldb, double* c, std::size_t ldc) {
  if (m == 0 || n == 0 || k == 0) return;
  kernels().gemm(m, n, k, alpha, a, lda, b, ldb, c, ldc);
}
inline std::size_t iamax(std::size_t n, const double* x) {
  return kernels().iamax(n, x);
}

namespace detail {
extern const KernelTable scalar_table;
#if defined(HPS_WITH_AVX2)
extern const KernelTable avx2_table;
#endif
#if defined(HPS_WITH_NEON)
extern const KernelTable neon_table;
#endif
}  // namespace detail

}  // namespace hps::simd
