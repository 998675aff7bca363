#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace hps {

// Second-order operator
//   L u = -sum_ij a_ij d_i d_j u - sum_i b_i d_i u + c u.
// Empty callbacks mean: a = identity, b = 0, c = 0.
struct CoefficientField {
  std::size_t dim = 0;
  std::function<void(const double* x, double* a)> second_order;  // dim x dim
  std::function<void(const double* x, double* b)> first_order;
  std::function<double(const double* x)> zeroth_order;
  // Declared presence of off-diagonal second-order terms.
  bool cross_terms = false;

  // a is 9 wide (3x3 layout regardless of dim), b is 3 wide.
  void evaluate(const double* x, double* a, double* b, double& c) const;
};

CoefficientField laplace(std::size_t dim);
// -Delta u - kappa2 * u.
CoefficientField helmholtz(std::size_t dim, double kappa2);

// Largest off-diagonal second-order coefficient over a deterministic sample
// of points in the box [lo, hi].
double sample_cross_terms(const CoefficientField& c, std::span<const double> lo,
                          std::span<const double> hi, std::size_t per_dim = 7);

}  // namespace hps
