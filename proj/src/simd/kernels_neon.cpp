// AArch64 variant; built only when targeting arm64.
#include <arm_neon.h>

#include <algorithm>
#include <cmath>

#include "hps/simd/kernels.hpp"

namespace hps::simd {
namespace {

double dot_neon(std::size_t n, const double* x, const double* y) {
  float64x2_t s0 = vdupq_n_f64(0.0);
  float64x2_t s1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 = vfmaq_f64(s0, vld1q_f64(x + i), vld1q_f64(y + i));
    s1 = vfmaq_f64(s1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(s0, s1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy_neon(std::size_t n, double alpha, const double* x, double* y) {
  const float64x2_t a = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), a, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scal_neon(std::size_t n, double alpha, double* x) {
  const float64x2_t a = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_f64(a, vld1q_f64(x + i)));
  for (; i < n; ++i) x[i] *= alpha;
}

// 4 x 4 register block; column tails fall back to scalar.
void gemm_neon(std::size_t m, std::size_t n, std::size_t k, double alpha,
               const double* a, std::size_t lda, const double* b,
               std::size_t ldb, double* c, std::size_t ldc) {
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      float64x2_t acc[4][2];
      for (auto& row : acc) row[0] = row[1] = vdupq_n_f64(0.0);
      for (std::size_t p = 0; p < k; ++p) {
        const float64x2_t b0 = vld1q_f64(b + p * ldb + j);
        const float64x2_t b1 = vld1q_f64(b + p * ldb + j + 2);
        for (int r = 0; r < 4; ++r) {
          const float64x2_t ar = vdupq_n_f64(a[(i + r) * lda + p]);
          acc[r][0] = vfmaq_f64(acc[r][0], ar, b0);
          acc[r][1] = vfmaq_f64(acc[r][1], ar, b1);
        }
      }
      const float64x2_t al = vdupq_n_f64(alpha);
      for (int r = 0; r < 4; ++r) {
        double* cr = c + (i + r) * ldc + j;
        vst1q_f64(cr, vfmaq_f64(vld1q_f64(cr), al, acc[r][0]));
        vst1q_f64(cr + 2, vfmaq_f64(vld1q_f64(cr + 2), al, acc[r][1]));
      }
    }
    for (; j < n; ++j)
      for (int r = 0; r < 4; ++r) {
        double s = 0.0;
        for (std::size_t p = 0; p < k; ++p)
          s += a[(i + r) * lda + p] * b[p * ldb + j];
        c[(i + r) * ldc + j] += alpha * s;
      }
  }
  for (; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p)
      axpy_neon(n, alpha * a[i * lda + p], b + p * ldb, c + i * ldc);
}

std::size_t iamax_neon(std::size_t n, const double* x) {
  std::size_t best = 0;
  double best_abs = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(x[i]) > best_abs) {
      best_abs = std::abs(x[i]);
      best = i;
    }
  }
  return best;
}

}  // namespace

namespace detail {
const KernelTable neon_table{Backend::Neon, "neon", dot_neon,  axpy_neon,
                             scal_neon,     gemm_neon, iamax_neon};
}  // namespace detail

}  // namespace hps::simd
