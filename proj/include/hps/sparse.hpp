#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "hps/dense.hpp"

namespace hps {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

// Square sparse matrix in compressed-row form. Column indices are sorted
// within each row and unique.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  // Pattern-only constructor; values start at zero.
  SparseMatrix(std::size_t n, std::vector<std::size_t> row_ptr,
               std::vector<std::size_t> col_idx);

  // Duplicate (row, col) pairs are summed in input order.
  static SparseMatrix from_triplets(std::size_t n,
                                    std::span<const Triplet> triplets);
  static SparseMatrix from_dense(const Matrix& a, double drop = 0.0);

  std::size_t size() const noexcept { return n_; }
  std::size_t nnz() const noexcept { return col_idx_.size(); }
  const std::vector<std::size_t>& row_ptr() const noexcept { return row_ptr_; }
  const std::vector<std::size_t>& col_idx() const noexcept { return col_idx_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& values() noexcept { return values_; }

  // Position of (row, col) in the value array, or npos.
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t find(std::size_t row, std::size_t col) const;

  std::vector<double> multiply(std::span<const double> x) const;
  // y = A x for x of shape n x nrhs (row-major).
  void multiply(const double* x, std::size_t nrhs, double* y) const;
  Matrix to_dense() const;
  double max_abs() const;

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
};

// One "row col value" triplet per line, 0-based, shortest round-trip
// decimal values.
void write_coordinate(std::ostream& out, const SparseMatrix& a);
// n == 0 infers the size from the largest index.
SparseMatrix read_coordinate(std::istream& in, std::size_t n = 0);

enum class Ordering { Natural, MinimumDegree };

struct FactorOptions {
  Ordering ordering = Ordering::MinimumDegree;
  double pivot_threshold = 0.1;
};

struct FactorStats {
  std::size_t n = 0;
  std::size_t nnz_matrix = 0;
  // Stored entries of L and U (unit diagonal of L not counted).
  std::size_t nnz_factors = 0;
  std::size_t fronts = 0;
  std::size_t supervariables = 0;
  std::size_t max_front = 0;
  std::size_t delayed_pivots = 0;
  double min_pivot = 0.0;
  // max |U| / max |A|
  double growth = 0.0;
  double flops = 0.0;
};

// Result of analyze_and_factor; immutable and safe for concurrent solves.
class FactorizedSystem {
 public:
  virtual ~FactorizedSystem() = default;
  virtual std::size_t size() const = 0;
  // b is size() x nrhs, row-major; overwritten with the solution.
  virtual void solve_in_place(double* b, std::size_t nrhs) const = 0;
  virtual FactorStats stats() const = 0;

  std::vector<double> solve(std::span<const double> b) const;
  Matrix solve(const Matrix& b) const;
};

// The seam through which the interface system is factorized. The built-in
// multifrontal solver is the default; any external direct solver can be
// wrapped behind this interface.
class SparseBackend {
 public:
  virtual ~SparseBackend() = default;
  virtual std::string_view name() const = 0;
  virtual std::unique_ptr<FactorizedSystem> analyze_and_factor(
      const SparseMatrix& a, const FactorOptions& options) const = 0;
};

// Symbolic structure computed from the pattern of A + A^T.
struct SymbolicAnalysis {
  std::size_t n = 0;
  std::size_t supervariables = 0;
  // Fronts in elimination order: eliminated variables and the variables of
  // the update (contribution) pattern.
  std::vector<std::vector<std::size_t>> front_vars;
  std::vector<std::vector<std::size_t>> front_struct;
  // Parent front index, or npos for roots.
  std::vector<std::size_t> parent;
  // Front containing each variable.
  std::vector<std::size_t> front_of;
  // Predicted entries of L + U without delayed pivots.
  std::size_t predicted_nnz = 0;
};

// Throws StructuralSingularityError for empty rows or columns.
SymbolicAnalysis analyze(const SparseMatrix& a, Ordering ordering);

class MultifrontalLU final : public FactorizedSystem {
 public:
  struct Front {
    std::vector<std::size_t> rows;  // pivot rows first
    std::vector<std::size_t> cols;  // pivot columns first
    std::size_t pivots = 0;
    std::vector<double> lu;   // pivots x pivots, packed unit-L / U
    std::vector<double> l21;  // (rows - pivots) x pivots
    std::vector<double> u12;  // pivots x (cols - pivots)
  };

  // Throws SingularMatrixError (no acceptable pivot at the roots) or
  // StructuralSingularityError.
  MultifrontalLU(const SparseMatrix& a, const FactorOptions& options);

  std::size_t size() const override { return n_; }
  void solve_in_place(double* b, std::size_t nrhs) const override;
  FactorStats stats() const override { return stats_; }

  const std::vector<Front>& fronts() const noexcept { return fronts_; }
  // L*U mapped back to the ordering of A (small problems / testing).
  Matrix reconstruct() const;

 private:
  std::size_t n_ = 0;
  std::vector<Front> fronts_;
  FactorStats stats_;
};

class MultifrontalBackend final : public SparseBackend {
 public:
  std::string_view name() const override { return "multifrontal"; }
  std::unique_ptr<FactorizedSystem> analyze_and_factor(
      const SparseMatrix& a, const FactorOptions& options) const override;
};

const SparseBackend& default_backend();

std::unique_ptr<FactorizedSystem> analyze_and_factor(
    const SparseMatrix& a, const FactorOptions& options = {});

}  // namespace hps
