#include <cmath>
#include <random>

#include "doctest.h"
#include "hps/dense.hpp"
#include "hps/errors.hpp"
#include "hps/simd/kernels.hpp"

using hps::DenseLU;
using hps::Matrix;

namespace {

Matrix random_matrix(std::size_t m, std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Matrix a(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = d(rng);
  return a;
}

// Textbook Gaussian elimination with partial pivoting.
std::vector<double> reference_solve(Matrix a, std::vector<double> b) {
  const std::size_t n = a.rows();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
    for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
    std::swap(b[k], b[p]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double l = a(i, k) / a(k, k);
      for (std::size_t j = k; j < n; ++j) a(i, j) -= l * a(k, j);
      b[i] -= l * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
    x[i] = s / a(i, i);
  }
  return x;
}

}  // namespace

TEST_CASE("dense LU solves random systems like textbook elimination") {
  std::mt19937_64 rng(3);
  for (std::size_t n : {1u, 2u, 7u, 48u, 49u, 130u, 301u}) {
    CAPTURE(n);
    Matrix a = random_matrix(n, n, rng);
    Matrix b = random_matrix(n, 1, rng);
    std::vector<double> bv(b.values().begin(), b.values().end());
    DenseLU lu(a);
    auto x = lu.solve(std::span<const double>(bv));
    auto xr = reference_solve(a, bv);
    double err = 0.0, nrm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      err = std::max(err, std::abs(x[i] - xr[i]));
      nrm = std::max(nrm, std::abs(xr[i]));
    }
    CHECK(err <= 1e-10 * nrm);
  }
}

TEST_CASE("dense LU multi-RHS residual is at rounding level") {
  std::mt19937_64 rng(5);
  const std::size_t n = 200, r = 37;
  Matrix a = random_matrix(n, n, rng);
  Matrix b = random_matrix(n, r, rng);
  Matrix x = DenseLU(a).solve(b);
  Matrix res = b;
  hps::multiply_add(-1.0, a, x, res);
  CHECK(hps::max_abs(res) <= 1e-12 * hps::norm_inf(a) * hps::max_abs(x));
}

TEST_CASE("dense LU pivots through a zero leading entry") {
  Matrix a(2, 2);
  a(0, 1) = 1.0;
  a(1, 0) = 1.0;
  std::vector<double> b{1.0, 2.0};
  auto x = DenseLU(a).solve(std::span<const double>(b));
  CHECK(x[0] == doctest::Approx(2.0));
  CHECK(x[1] == doctest::Approx(1.0));
}

TEST_CASE("dense LU reports the failing step of a singular matrix") {
  Matrix a(3, 3);
  a(0, 0) = 1.0;
  a(1, 1) = 1.0;  // third column is zero
  try {
    DenseLU lu(a);
    FAIL("expected SingularMatrixError");
  } catch (const hps::SingularMatrixError& e) {
    CHECK(e.step() == 2);
  }
}

TEST_CASE("threshold partial LU delays columns without an acceptable pivot") {
  // Fully-summed 2x2 block is [[0,1e-8],[1e-8,0]] but the contribution rows
  // hold large entries, so a threshold of 0.1 rejects every candidate.
  Matrix f(4, 4);
  f(0, 1) = 1e-8;
  f(1, 0) = 1e-8;
  f(2, 0) = 1.0;
  f(3, 1) = 1.0;
  f(2, 2) = f(3, 3) = 1.0;
  auto res = hps::partial_lu(f.data(), 4, 4, 4, 2, 2, 0.1);
  CHECK(res.eliminated == 0);
  // With threshold 0 the same block factorizes.
  Matrix g(4, 4);
  g(0, 1) = 1e-8;
  g(1, 0) = 1e-8;
  g(2, 0) = 1.0;
  g(3, 1) = 1.0;
  g(2, 2) = g(3, 3) = 1.0;
  auto res2 = hps::partial_lu(g.data(), 4, 4, 4, 2, 2, 0.0);
  CHECK(res2.eliminated == 2);
}

TEST_CASE("partial LU leaves the exact Schur complement in the trailing block") {
  std::mt19937_64 rng(9);
  const std::size_t m = 70, k = 50;
  Matrix a = random_matrix(m, m, rng);
  for (std::size_t i = 0; i < k; ++i) a(i, i) += 10.0;
  Matrix f = a;
  auto res = hps::partial_lu(f.data(), m, m, m, k, k, 0.1, 16);
  REQUIRE(res.eliminated == k);
  // Oracle: A22 - A21 A11^{-1} A12 in the original ordering, mapped through
  // the trailing permutations (which only touch the leading k indices).
  Matrix a11(k, k), a12(k, m - k), a21(m - k, k), a22(m - k, m - k);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      if (i < k && j < k) a11(i, j) = a(i, j);
      else if (i < k) a12(i, j - k) = a(i, j);
      else if (j < k) a21(i - k, j) = a(i, j);
      else a22(i - k, j - k) = a(i, j);
    }
  Matrix x = DenseLU(a11).solve(a12);
  hps::multiply_add(-1.0, a21, x, a22);
  double err = 0.0;
  for (std::size_t i = k; i < m; ++i) {
    CHECK(res.row_perm[i] == i);
    for (std::size_t j = k; j < m; ++j)
      err = std::max(err, std::abs(f(i, j) - a22(i - k, j - k)));
  }
  CHECK(err <= 1e-12 * hps::max_abs(a22));
}

TEST_CASE("dense LU is backend independent to rounding") {
  std::mt19937_64 rng(13);
  Matrix a = random_matrix(150, 150, rng);
  Matrix b = random_matrix(150, 3, rng);
  const auto before = hps::simd::active_backend();
  hps::simd::set_backend(hps::simd::Backend::Scalar);
  Matrix xs = DenseLU(a).solve(b);
  hps::simd::set_backend(hps::simd::detect_backend());
  Matrix xv = DenseLU(a).solve(b);
  hps::simd::set_backend(before);
  double err = 0.0;
  for (std::size_t i = 0; i < xs.rows(); ++i)
    for (std::size_t j = 0; j < xs.cols(); ++j)
      err = std::max(err, std::abs(xs(i, j) - xv(i, j)));
  CHECK(err <= 1e-10 * hps::max_abs(xs));
}
