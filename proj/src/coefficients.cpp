#include "hps/coefficients.hpp"

#include <algorithm>
#include <cmath>

namespace hps {

void CoefficientField::evaluate(const double* x, double* a, double* b, double& c) const {
  std::fill(a, a + 9, 0.0);
  std::fill(b, b + 3, 0.0);
  if (second_order) {
    double tmp[9] = {};
    second_order(x, tmp);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) a[i * 3 + j] = tmp[i * dim + j];
  } else {
    for (std::size_t i = 0; i < dim; ++i) a[i * 3 + i] = 1.0;
  }
  if (first_order) first_order(x, b);
  c = zeroth_order ? zeroth_order(x) : 0.0;
}

CoefficientField laplace(std::size_t dim) {
  CoefficientField c;
  c.dim = dim;
  return c;
}

CoefficientField helmholtz(std::size_t dim, double kappa2) {
  CoefficientField c;
  c.dim = dim;
  c.zeroth_order = [kappa2](const double*) { return -kappa2; };
  return c;
}

double sample_cross_terms(const CoefficientField& c, std::span<const double> lo,
                          std::span<const double> hi, std::size_t per_dim) {
  if (!c.second_order) return 0.0;
  const std::size_t d = c.dim;
  std::size_t total = 1;
  for (std::size_t k = 0; k < d; ++k) total *= per_dim;
  double worst = 0.0;
  double x[3] = {0, 0, 0}, a[9], b[3], z;
  for (std::size_t s = 0; s < total; ++s) {
    std::size_t rem = s;
    for (std::size_t k = 0; k < d; ++k) {
      const double t = (static_cast<double>(rem % per_dim) + 0.5) / static_cast<double>(per_dim);
      rem /= per_dim;
      x[k] = lo[k] + (hi[k] - lo[k]) * t;
    }
    c.evaluate(x, a, b, z);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        if (i != j) worst = std::max(worst, std::abs(a[i * 3 + j]));
  }
  return worst;
}

}  // namespace hps
