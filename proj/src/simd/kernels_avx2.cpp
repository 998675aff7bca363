// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "hps/simd/kernels.hpp"

namespace hps::simd {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(std::size_t n, const double* x, const double* y) {
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4),
                         _mm256_loadu_pd(y + i + 4), s1);
  }
  for (; i + 4 <= n; i += 4)
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
  double s = hsum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy_avx2(std::size_t n, double alpha, const double* x, double* y) {
  const __m256d a = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d y0 = _mm256_loadu_pd(y + i);
    __m256d y1 = _mm256_loadu_pd(y + i + 4);
    y0 = _mm256_fmadd_pd(a, _mm256_loadu_pd(x + i), y0);
    y1 = _mm256_fmadd_pd(a, _mm256_loadu_pd(x + i + 4), y1);
    _mm256_storeu_pd(y + i, y0);
    _mm256_storeu_pd(y + i + 4, y1);
  }
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(a, _mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scal_avx2(std::size_t n, double alpha, double* x) {
  const __m256d a = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(a, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= alpha;
}

inline __m256i lane_mask(std::size_t valid) {
  const std::int64_t v = static_cast<std::int64_t>(valid);
  return _mm256_set_epi64x(v > 3 ? -1 : 0, v > 2 ? -1 : 0, v > 1 ? -1 : 0,
                           v > 0 ? -1 : 0);
}

// MR rows by up to 8 columns of C; `cols` < 8 uses masked loads/stores.
template <int MR, bool Full>
inline void micro_kernel(std::size_t kb, std::size_t cols, double alpha,
                         const double* a, std::size_t lda, const double* b,
                         std::size_t ldb, double* c, std::size_t ldc) {
  __m256d acc0[MR];
  __m256d acc1[MR];
  for (int r = 0; r < MR; ++r) {
    acc0[r] = _mm256_setzero_pd();
    acc1[r] = _mm256_setzero_pd();
  }
  __m256i m0 = _mm256_set1_epi64x(-1);
  __m256i m1 = m0;
  if constexpr (!Full) {
    m0 = lane_mask(std::min<std::size_t>(cols, 4));
    m1 = lane_mask(cols > 4 ? cols - 4 : 0);
  }
  for (std::size_t p = 0; p < kb; ++p) {
    const double* bp = b + p * ldb;
    __m256d b0, b1;
    if constexpr (Full) {
      b0 = _mm256_loadu_pd(bp);
      b1 = _mm256_loadu_pd(bp + 4);
    } else {
      b0 = _mm256_maskload_pd(bp, m0);
      b1 = _mm256_maskload_pd(bp + 4, m1);
    }
    for (int r = 0; r < MR; ++r) {
      const __m256d ar = _mm256_broadcast_sd(a + r * lda + p);
      acc0[r] = _mm256_fmadd_pd(ar, b0, acc0[r]);
      acc1[r] = _mm256_fmadd_pd(ar, b1, acc1[r]);
    }
  }
  const __m256d al = _mm256_set1_pd(alpha);
  for (int r = 0; r < MR; ++r) {
    double* cr = c + r * ldc;
    if constexpr (Full) {
      _mm256_storeu_pd(cr, _mm256_fmadd_pd(al, acc0[r], _mm256_loadu_pd(cr)));
      _mm256_storeu_pd(cr + 4,
                       _mm256_fmadd_pd(al, acc1[r], _mm256_loadu_pd(cr + 4)));
    } else {
      _mm256_maskstore_pd(
          cr, m0, _mm256_fmadd_pd(al, acc0[r], _mm256_maskload_pd(cr, m0)));
      _mm256_maskstore_pd(
          cr + 4, m1,
          _mm256_fmadd_pd(al, acc1[r], _mm256_maskload_pd(cr + 4, m1)));
    }
  }
}

template <int MR>
inline void row_block(std::size_t n, std::size_t kb, double alpha,
                      const double* a, std::size_t lda, const double* b,
                      std::size_t ldb, double* c, std::size_t ldc) {
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8)
    micro_kernel<MR, true>(kb, 8, alpha, a, lda, b + j, ldb, c + j, ldc);
  if (j < n)
    micro_kernel<MR, false>(kb, n - j, alpha, a, lda, b + j, ldb, c + j, ldc);
}

constexpr std::size_t kBlockK = 256;
constexpr std::size_t kBlockN = 512;

void gemm_avx2(std::size_t m, std::size_t n, std::size_t k, double alpha,
               const double* a, std::size_t lda, const double* b,
               std::size_t ldb, double* c, std::size_t ldc) {
  for (std::size_t k0 = 0; k0 < k; k0 += kBlockK) {
    const std::size_t kb = std::min(kBlockK, k - k0);
    for (std::size_t j0 = 0; j0 < n; j0 += kBlockN) {
      const std::size_t nb = std::min(kBlockN, n - j0);
      const double* bb = b + k0 * ldb + j0;
      std::size_t i = 0;
      for (; i + 4 <= m; i += 4)
        row_block<4>(nb, kb, alpha, a + i * lda + k0, lda, bb, ldb,
                     c + i * ldc + j0, ldc);
      switch (m - i) {
        case 3:
          row_block<3>(nb, kb, alpha, a + i * lda + k0, lda, bb, ldb,
                       c + i * ldc + j0, ldc);
          break;
        case 2:
          row_block<2>(nb, kb, alpha, a + i * lda + k0, lda, bb, ldb,
                       c + i * ldc + j0, ldc);
          break;
        case 1:
          row_block<1>(nb, kb, alpha, a + i * lda + k0, lda, bb, ldb,
                       c + i * ldc + j0, ldc);
          break;
        default:
          break;
      }
    }
  }
}

std::size_t iamax_avx2(std::size_t n, const double* x) {
  if (n < 8) {
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
  // Vector pass for the maximum, scalar pass for its first position.
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d vmax = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    vmax = _mm256_max_pd(vmax, _mm256_andnot_pd(sign, _mm256_loadu_pd(x + i)));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, vmax);
  double best_abs = std::max(std::max(lanes[0], lanes[1]),
                             std::max(lanes[2], lanes[3]));
  for (; i < n; ++i) best_abs = std::max(best_abs, std::abs(x[i]));
  for (std::size_t j = 0; j < n; ++j)
    if (std::abs(x[j]) == best_abs) return j;
  return 0;
}

}  // namespace

namespace detail {
const KernelTable avx2_table{Backend::Avx2, "avx2", dot_avx2,  axpy_avx2,
                             scal_avx2,     gemm_avx2, iamax_avx2};
}  // namespace detail

}  // namespace hps::simd
