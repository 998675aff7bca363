#include "hps/dense.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "hps/errors.hpp"
#include "hps/simd/kernels.hpp"

namespace hps {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  multiply_add(1.0, a, b, c);
  return c;
}

void multiply_add(double alpha, const Matrix& a, const Matrix& b, Matrix& c) {
  if (a.cols() != b.rows() || c.rows() != a.rows() || c.cols() != b.cols())
    throw std::invalid_argument("multiply_add: shape mismatch");
  simd::gemm(a.rows(), b.cols(), a.cols(), alpha, a.data(), a.cols(),
             b.data(), b.cols(), c.data(), c.cols());
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

std::vector<double> mat_vec(const Matrix& a, std::span<const double> x) {
  if (x.size() != a.cols()) throw std::invalid_argument("mat_vec: size");
  std::vector<double> y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    y[i] = simd::dot(a.cols(), a.row(i), x.data());
  return y;
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

double norm_inf(const Matrix& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += std::abs(a(i, j));
    m = std::max(m, s);
  }
  return m;
}

namespace {

void swap_rows(double* f, std::size_t n, std::size_t ld, std::size_t a,
               std::size_t b) {
  if (a == b) return;
  std::swap_ranges(f + a * ld, f + a * ld + n, f + b * ld);
}

void swap_cols(double* f, std::size_t m, std::size_t ld, std::size_t a,
               std::size_t b) {
  if (a == b) return;
  for (std::size_t i = 0; i < m; ++i) std::swap(f[i * ld + a], f[i * ld + b]);
}

}  // namespace

PartialLUResult partial_lu(double* f, std::size_t m, std::size_t n,
                           std::size_t ld, std::size_t fs_rows,
                           std::size_t fs_cols, double threshold,
                           std::size_t panel) {
  PartialLUResult res;
  res.row_perm.resize(m);
  res.col_perm.resize(n);
  std::iota(res.row_perm.begin(), res.row_perm.end(), 0);
  std::iota(res.col_perm.begin(), res.col_perm.end(), 0);
  res.min_pivot = std::numeric_limits<double>::infinity();
  panel = std::max<std::size_t>(panel, 1);

  std::size_t r = 0;      // eliminated so far
  std::size_t carry = 0;  // failed columns at [r, r + carry)
  const std::size_t kmax = std::min(fs_rows, fs_cols);

  while (r < kmax) {
    const std::size_t fresh = std::min(panel, fs_cols - (r + carry));
    const std::size_t width = carry + fresh;
    if (width == 0) break;
    const std::size_t pend = r + width;

    std::size_t q = r;
    for (std::size_t scan = r; scan < pend && q < fs_rows; ++scan) {
      // Pivot search over remaining fully-summed rows; the threshold test
      // uses the whole remaining column, contribution rows included.
      std::size_t best = q;
      double best_abs = -1.0;
      for (std::size_t i = q; i < fs_rows; ++i) {
        const double v = std::abs(f[i * ld + scan]);
        if (v > best_abs) {
          best_abs = v;
          best = i;
        }
      }
      double col_max = best_abs;
      for (std::size_t i = fs_rows; i < m; ++i)
        col_max = std::max(col_max, std::abs(f[i * ld + scan]));
      if (!(best_abs > 0.0) || !std::isfinite(best_abs) ||
          best_abs < threshold * col_max)
        continue;

      swap_cols(f, m, ld, scan, q);
      std::swap(res.col_perm[scan], res.col_perm[q]);
      swap_rows(f, n, ld, best, q);
      std::swap(res.row_perm[best], res.row_perm[q]);

      const double piv = f[q * ld + q];
      res.min_pivot = std::min(res.min_pivot, std::abs(piv));
      res.max_pivot = std::max(res.max_pivot, std::abs(piv));
      const double inv = 1.0 / piv;
      const std::size_t upd = pend - (q + 1);
      const double* urow = f + q * ld + q + 1;
      for (std::size_t i = q + 1; i < m; ++i) {
        double* ri = f + i * ld;
        ri[q] *= inv;
        if (upd > 0 && ri[q] != 0.0) simd::axpy(upd, -ri[q], urow, ri + q + 1);
      }
      ++q;
    }

    const std::size_t e = q - r;
    if (e > 0 && pend < n) {
      // U12 = L11^{-1} A12 on the pivot rows, then the trailing update.
      const std::size_t nt = n - pend;
      for (std::size_t i = 1; i < e; ++i) {
        double* ri = f + (r + i) * ld + pend;
        for (std::size_t t = 0; t < i; ++t) {
          const double l = f[(r + i) * ld + r + t];
          if (l != 0.0) simd::axpy(nt, -l, f + (r + t) * ld + pend, ri);
        }
      }
      if (q < m)
        simd::gemm(m - q, nt, e, -1.0, f + q * ld + r, ld, f + r * ld + pend,
                   ld, f + q * ld + pend, ld);
    }
    r = q;
    carry = pend - q;
    if (e == 0 && fresh == 0) break;
  }
  res.eliminated = r;
  if (r == 0) res.min_pivot = 0.0;
  return res;
}

void lower_unit_solve(const double* lu, std::size_t ld, std::size_t k,
                      double* b, std::size_t nrhs, std::size_t ldb) {
  constexpr std::size_t kBlock = 64;
  for (std::size_t i0 = 0; i0 < k; i0 += kBlock) {
    const std::size_t i1 = std::min(k, i0 + kBlock);
    for (std::size_t i = i0; i < i1; ++i)
      for (std::size_t t = i0; t < i; ++t) {
        const double l = lu[i * ld + t];
        if (l != 0.0) simd::axpy(nrhs, -l, b + t * ldb, b + i * ldb);
      }
    if (i1 < k)
      simd::gemm(k - i1, nrhs, i1 - i0, -1.0, lu + i1 * ld + i0, ld,
                 b + i0 * ldb, ldb, b + i1 * ldb, ldb);
  }
}

void upper_solve(const double* lu, std::size_t ld, std::size_t k, double* b,
                 std::size_t nrhs, std::size_t ldb) {
  constexpr std::size_t kBlock = 64;
  std::size_t i1 = k;
  while (i1 > 0) {
    const std::size_t i0 = i1 > kBlock ? i1 - kBlock : 0;
    for (std::size_t ii = i1; ii-- > i0;) {
      double* bi = b + ii * ldb;
      for (std::size_t t = ii + 1; t < i1; ++t) {
        const double u = lu[ii * ld + t];
        if (u != 0.0) simd::axpy(nrhs, -u, b + t * ldb, bi);
      }
      simd::scal(nrhs, 1.0 / lu[ii * ld + ii], bi);
    }
    if (i0 > 0)
      simd::gemm(i0, nrhs, i1 - i0, -1.0, lu + i0, ld, b + i0 * ldb, ldb, b,
                 ldb);
    i1 = i0;
  }
}

DenseLU::DenseLU(Matrix a) : lu_(std::move(a)) {
  if (lu_.rows() != lu_.cols())
    throw std::invalid_argument("DenseLU: matrix must be square");
  const std::size_t n = lu_.rows();
  auto res = partial_lu(lu_.data(), n, n, n, n, n, 1.0);
  if (res.eliminated < n)
    throw SingularMatrixError(
        "dense LU: no nonzero pivot at step " + std::to_string(res.eliminated),
        res.eliminated);
  perm_ = std::move(res.row_perm);
  min_pivot_ = res.min_pivot;
  max_pivot_ = res.max_pivot;
}

void DenseLU::solve_in_place(double* b, std::size_t nrhs,
                             std::size_t ldb) const {
  const std::size_t n = size();
  if (n == 0 || nrhs == 0) return;
  std::vector<double> tmp(n * nrhs);
  for (std::size_t i = 0; i < n; ++i)
    std::copy_n(b + perm_[i] * ldb, nrhs, tmp.data() + i * nrhs);
  lower_unit_solve(lu_.data(), n, n, tmp.data(), nrhs, nrhs);
  upper_solve(lu_.data(), n, n, tmp.data(), nrhs, nrhs);
  for (std::size_t i = 0; i < n; ++i)
    std::copy_n(tmp.data() + i * nrhs, nrhs, b + i * ldb);
}

Matrix DenseLU::solve(const Matrix& b) const {
  if (b.rows() != size()) throw std::invalid_argument("DenseLU::solve: rows");
  Matrix x = b;
  solve_in_place(x.data(), x.cols(), x.cols());
  return x;
}

std::vector<double> DenseLU::solve(std::span<const double> b) const {
  if (b.size() != size()) throw std::invalid_argument("DenseLU::solve: size");
  std::vector<double> x(b.begin(), b.end());
  solve_in_place(x.data(), 1, 1);
  return x;
}

}  // namespace hps
