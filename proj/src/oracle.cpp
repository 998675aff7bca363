#include "hps/oracle.hpp"

#include <string>

#include "hps/dense.hpp"
#include "hps/errors.hpp"
#include "hps/local_ops.hpp"

namespace hps {

std::vector<double> dense_full_system_oracle(const Discretization& disc,
                                             const CoefficientField& coeffs,
                                             const LoadData& load, std::size_t cap) {
  const std::size_t n = disc.dirichlet_begin;
  if (n > cap)
    throw ConfigError("dense oracle: " + std::to_string(n) + " unknowns exceed the cap of " +
                      std::to_string(cap));
  if (load.f.size() != disc.interface_begin ||
      load.g.size() != disc.node_count() - disc.dirichlet_begin)
    throw ConfigError("dense oracle: load data does not match the discretization");
  check_corner_mode(coeffs, disc);
  auto tmpl = make_leaf_template(disc);
  const std::size_t ni = tmpl->n_i(), nf = tmpl->face_dofs;

  Matrix a(n, n);
  std::vector<double> rhs(n, 0.0);
  for (std::size_t i = 0; i < disc.interface_begin; ++i) rhs[i] = load.f[i];

  // Adds `coef` times boundary DOF `dof` of leaf `id` to row `row`.
  auto add_boundary = [&](std::size_t row, std::size_t id, std::size_t dof, double coef) {
    const Face& f = disc.faces[disc.leaf_faces(id)[dof / nf]];
    const std::size_t node = f.first_node + dof % nf;
    if (node < disc.dirichlet_begin) a(row, node) += coef;
    else rhs[row] -= coef * load.g[node - disc.dirichlet_begin];
  };

  for (std::size_t id = 0; id < disc.leaves.size(); ++id) {
    const auto blocks = collocate(*tmpl, disc.leaves[id], coeffs);
    const auto& interior = disc.index_interior[id];
    for (std::size_t r = 0; r < ni; ++r) {
      for (std::size_t c = 0; c < ni; ++c) a(interior[r], interior[c]) += blocks.a_ii(r, c);
      for (std::size_t c = 0; c < tmpl->n_b; ++c)
        if (blocks.a_ib(r, c) != 0.0) add_boundary(interior[r], id, c, blocks.a_ib(r, c));
    }
    // Outward normal derivative of this leaf at its interface face nodes.
    const auto& lf = disc.leaf_faces(id);
    for (std::size_t k = 0; k < lf.size(); ++k) {
      const Face& f = disc.faces[lf[k]];
      if (f.boundary) continue;
      for (std::size_t j = 0; j < nf; ++j) {
        const std::size_t row = f.first_node + j;
        const std::size_t br = k * nf + j;
        for (std::size_t c = 0; c < ni; ++c) a(row, interior[c]) += tmpl->a_bi(br, c);
        for (std::size_t c = 0; c < tmpl->n_b; ++c)
          if (tmpl->a_bb(br, c) != 0.0) add_boundary(row, id, c, tmpl->a_bb(br, c));
      }
    }
  }

  std::vector<double> u(disc.node_count());
  if (n > 0) {
    auto x = DenseLU(std::move(a)).solve(std::span<const double>(rhs));
    std::copy(x.begin(), x.end(), u.begin());
  }
  std::copy(load.g.begin(), load.g.end(), u.begin() + static_cast<std::ptrdiff_t>(n));
  return u;
}

}  // namespace hps
