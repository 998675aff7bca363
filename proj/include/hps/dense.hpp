#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hps {

// Row-major dense matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  double* row(std::size_t i) noexcept { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const noexcept {
    return data_.data() + i * cols_;
  }
  std::span<const double> values() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// C = A * B.
Matrix multiply(const Matrix& a, const Matrix& b);
// C += alpha * A * B.
void multiply_add(double alpha, const Matrix& a, const Matrix& b, Matrix& c);
Matrix transpose(const Matrix& a);
std::vector<double> mat_vec(const Matrix& a, std::span<const double> x);
double max_abs(const Matrix& a);
// Infinity norm (max row sum).
double norm_inf(const Matrix& a);

struct PartialLUResult {
  std::size_t eliminated = 0;
  // perm[i] is the original index now stored at position i.
  std::vector<std::size_t> row_perm;
  std::vector<std::size_t> col_perm;
  double min_pivot = 0.0;
  double max_pivot = 0.0;
};

// In-place partial LU of an m x n block (leading dimension ld) whose first
// `fs_rows` rows and `fs_cols` columns are fully summed. Pivots are taken
// from fully-summed rows only and must satisfy
//   |pivot| >= threshold * max |column entry over all remaining rows|.
// Columns without an acceptable pivot are retried after later eliminations
// and, if still unacceptable, left at the end of the fully-summed range.
//
// On return the leading `eliminated` rows/columns hold U and the unit lower
// L, and the trailing block holds the Schur complement, with failed
// fully-summed rows and columns placed first.
PartialLUResult partial_lu(double* f, std::size_t m, std::size_t n,
                           std::size_t ld, std::size_t fs_rows,
                           std::size_t fs_cols, double threshold,
                           std::size_t panel = 48);

// Solves with a packed unit-lower L and upper U stored in the leading k x k
// block of `lu` (leading dimension ld): b (k x nrhs) is overwritten.
void lower_unit_solve(const double* lu, std::size_t ld, std::size_t k,
                      double* b, std::size_t nrhs, std::size_t ldb);
void upper_solve(const double* lu, std::size_t ld, std::size_t k, double* b,
                 std::size_t nrhs, std::size_t ldb);

// Dense LU with partial pivoting.
class DenseLU {
 public:
  DenseLU() = default;
  // Throws SingularMatrixError when a column has no nonzero pivot.
  explicit DenseLU(Matrix a);

  std::size_t size() const noexcept { return lu_.rows(); }
  double min_pivot() const noexcept { return min_pivot_; }
  double max_pivot() const noexcept { return max_pivot_; }

  // b is size() x nrhs, row-major with leading dimension ldb.
  void solve_in_place(double* b, std::size_t nrhs, std::size_t ldb) const;
  Matrix solve(const Matrix& b) const;
  std::vector<double> solve(std::span<const double> b) const;

  const Matrix& packed() const noexcept { return lu_; }
  const std::vector<std::size_t>& row_perm() const noexcept { return perm_; }

 private:
  Matrix lu_;
  std::vector<std::size_t> perm_;
  double min_pivot_ = 0.0;
  double max_pivot_ = 0.0;
};

}  // namespace hps
