#include <cmath>

#include "hps/simd/kernels.hpp"

namespace hps::simd {
namespace {

double dot_scalar(std::size_t n, const double* x, const double* y) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy_scalar(std::size_t n, double alpha, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scal_scalar(std::size_t n, double alpha, double* x) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void gemm_scalar(std::size_t m, std::size_t n, std::size_t k, double alpha,
                 const double* a, std::size_t lda, const double* b,
                 std::size_t ldb, double* c, std::size_t ldc) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * ldc;
    const double* ai = a + i * lda;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = alpha * ai[p];
      if (aip == 0.0) continue;
      const double* bp = b + p * ldb;
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

std::size_t iamax_scalar(std::size_t n, const double* x) {
  std::size_t best = 0;
  double best_abs = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::abs(x[i]);
    if (v > best_abs) {
      best_abs = v;
      best = i;
    }
  }
  return best;
}

}  // namespace

namespace detail {
const KernelTable scalar_table{Backend::Scalar, "scalar", dot_scalar,
                               axpy_scalar,     scal_scalar, gemm_scalar,
                               iamax_scalar};
}  // namespace detail

}  // namespace hps::simd
