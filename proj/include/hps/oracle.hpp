#pragma once

#include <cstddef>
#include <vector>

#include "hps/coefficients.hpp"
#include "hps/condensation.hpp"
#include "hps/geometry.hpp"

namespace hps {

// Assembles the full collocation system over every retained node (PDE rows
// at leaf interiors, summed outward normal derivatives at interface nodes,
// Dirichlet nodes eliminated) and solves it with dense LU. Returns values at
// every global node. Throws ConfigError when the unknown count exceeds `cap`.
std::vector<double> dense_full_system_oracle(const Discretization& disc,
                                             const CoefficientField& coeffs,
                                             const LoadData& load,
                                             std::size_t cap = 20000);

}  // namespace hps
