#include <algorithm>
#include <cmath>

#include "hps/errors.hpp"
#include "hps/problems.hpp"

namespace hps {

std::vector<double> leaf_boundary_values(const Discretization& disc, std::size_t leaf,
                                         std::span<const double> u) {
  const std::size_t nf = disc.nodes_per_face();
  const auto& faces = disc.leaf_faces(leaf);
  std::vector<double> vals(faces.size() * nf);
  for (std::size_t k = 0; k < faces.size(); ++k) {
    const std::size_t first = disc.faces[faces[k]].first_node;
    for (std::size_t j = 0; j < nf; ++j) vals[k * nf + j] = u[first + j];
  }
  return vals;
}

std::vector<double> leaf_grid_values(const Discretization& disc, const LeafTemplate& tmpl,
                                     std::size_t leaf, std::span<const double> u) {
  const std::size_t ni = tmpl.n_i();
  std::vector<double> vals(tmpl.grid_size, std::nan(""));
  for (std::size_t r = 0; r < ni; ++r) vals[tmpl.interior[r]] = u[leaf * ni + r];
  const auto ub = leaf_boundary_values(disc, leaf, u);
  for (std::size_t k = 0; k < tmpl.boundary.size(); ++k) {
    double v = 0.0;
    for (auto [dof, w] : tmpl.extend[k]) v += w * ub[dof];
    vals[tmpl.boundary[k]] = v;
  }
  return vals;
}

std::vector<double> clenshaw_curtis_weights(std::size_t p) {
  if (p < 2) throw ConfigError("clenshaw_curtis_weights: need at least two points");
  const std::size_t n = p - 1;
  std::vector<double> w(p);
  for (std::size_t k = 0; k <= n; ++k) {
    const double theta = std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    double v = 1.0;
    for (std::size_t j = 1; j <= n / 2; ++j) {
      const double b = (2 * j == n) ? 1.0 : 2.0;
      v -= b * std::cos(2.0 * static_cast<double>(j) * theta) / (4.0 * static_cast<double>(j * j) - 1.0);
    }
    w[k] = (k == 0 || k == n ? 1.0 : 2.0) * v / static_cast<double>(n);
  }
  return w;
}


std::vector<double> upper_mass_center(const Discretization& disc, std::span<const double> u) {
  if (disc.dim() != 3) throw ConfigError("upper_mass_center needs a three-dimensional mesh");
  if (u.size() != disc.node_count()) throw ConfigError("upper_mass_center: size mismatch");
  const auto tmpl = make_leaf_template(disc);
  const std::size_t p = tmpl->p;
  const auto cc = clenshaw_curtis_weights(p);
  double mass = 0.0, m[3] = {0.0, 0.0, 0.0};
  for (std::size_t id = 0; id < disc.leaves.size(); ++id) {
    const Leaf& leaf = disc.leaves[id];
    if (leaf.hi[2] <= 0.0) continue;
    const auto x = leaf_grid(*tmpl, leaf);
    const auto vals = leaf_grid_values(disc, *tmpl, id, u);
    const double scale = 0.125 * (leaf.hi[0] - leaf.lo[0]) * (leaf.hi[1] - leaf.lo[1]) *
                         (leaf.hi[2] - leaf.lo[2]);
    for (std::size_t idx = 0; idx < tmpl->grid_size; ++idx) {
      if (std::isnan(vals[idx])) continue;
      const double* xi = x.data() + idx * 3;
      double side = 1.0;
      if (leaf.lo[2] < 0.0) side = xi[2] > 0.0 ? 1.0 : (xi[2] == 0.0 ? 0.5 : 0.0);
      const std::size_t i0 = idx / (p * p), i1 = (idx / p) % p, i2 = idx % p;
      const double w = scale * cc[i0] * cc[i1] * cc[i2] * side * vals[idx];
      mass += w;
      for (std::size_t k = 0; k < 3; ++k) m[k] += w * xi[k];
    }
  }
  if (mass == 0.0) throw NumericError("upper_mass_center: zero mass");
  return {m[0] / mass, m[1] / mass, m[2] / mass};
}

std::vector<double> interpolate_solution(const Discretization& disc, std::span<const double> u,
                                         std::span<const double> points) {
  if (disc.mesh.corner_mode != CornerMode::LegendreFaces)
    throw ConfigError("interpolate_solution needs a legendre-faces discretization");
  const std::size_t d = disc.dim(), p = disc.p();
  if (points.size() % d != 0) throw ConfigError("interpolate_solution: ragged point list");
  const auto tmpl = make_leaf_template(disc);
  const std::size_t count = points.size() / d;
  std::vector<double> out(count);
  std::vector<std::vector<double>> grid_cache(disc.leaves.size());
  for (std::size_t q = 0; q < count; ++q) {
    const double* x = points.data() + q * d;
    std::array<std::size_t, 3> box{};
    for (std::size_t k = 0; k < d; ++k) {
      const std::size_t n = disc.mesh.boxes_per_dim[k];
      const double lo = disc.domain.lo[k], hi = disc.domain.hi[k];
      if (x[k] < lo || x[k] > hi) throw ConfigError("interpolate_solution: point outside domain");
      const double t = (x[k] - lo) / (hi - lo) * static_cast<double>(n);
      box[k] = std::min(n - 1, static_cast<std::size_t>(std::max(0.0, t)));
    }
    const std::size_t id = disc.leaf_id(box);
    const Leaf& leaf = disc.leaves[id];
    if (grid_cache[id].empty()) grid_cache[id] = leaf_grid_values(disc, *tmpl, id, u);
    std::array<std::vector<double>, 3> w;
    for (std::size_t k = 0; k < d; ++k) {
      const auto nodes = cheb_nodes(p, leaf.lo[k], leaf.hi[k]);
      const double at[1] = {x[k]};
      const Matrix m = interpolation_matrix(nodes, at);
      w[k].assign(m.row(0), m.row(0) + p);
    }
    const auto& vals = grid_cache[id];
    double s = 0.0;
    for (std::size_t idx = 0; idx < tmpl->grid_size; ++idx) {
      double c = vals[idx];
      std::size_t rest = idx;
      for (std::size_t k = d; k-- > 0;) {
        c *= w[k][rest % p];
        rest /= p;
      }
      s += c;
    }
    out[q] = s;
  }
  return out;
}

}  // namespace hps
