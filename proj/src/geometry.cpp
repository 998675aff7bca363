#include "hps/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "hps/errors.hpp"
#include "hps/local_ops.hpp"

namespace hps {

std::string to_string(CornerMode m) {
  return m == CornerMode::DropCorners ? "drop-corners" : "legendre-faces";
}

CornerMode parse_corner_mode(const std::string& s) {
  if (s == "drop-corners" || s == "DropCorners" || s == "drop") return CornerMode::DropCorners;
  if (s == "legendre-faces" || s == "LegendreFaces" || s == "legendre")
    return CornerMode::LegendreFaces;
  throw ConfigError("unknown corner mode '" + s + "' (expected drop-corners or legendre-faces)");
}

void DomainBox::validate() const {
  if (lo.size() != hi.size()) throw ConfigError("domain: lo and hi differ in length");
  if (dim() != 2 && dim() != 3) throw ConfigError("domain: dimension must be 2 or 3");
  for (std::size_t k = 0; k < dim(); ++k)
    if (!(lo[k] < hi[k]))
      throw ConfigError("domain: lo[" + std::to_string(k) + "] must be below hi");
}

std::size_t MeshConfig::leaf_count() const {
  std::size_t n = 1;
  for (std::size_t b : boxes_per_dim) n *= b;
  return n;
}

double plane_coordinate(double lo, double hi, std::size_t i, std::size_t n) {
  if (i == 0) return lo;
  if (i == n) return hi;
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
}

std::size_t Discretization::interior_per_leaf() const noexcept {
  std::size_t n = 1;
  for (std::size_t k = 0; k < dim(); ++k) n *= p() - 2;
  return n;
}

std::size_t Discretization::nodes_per_face() const noexcept {
  const std::size_t q = mesh.corner_mode == CornerMode::DropCorners ? p() - 2 : p() - 1;
  return dim() == 2 ? q : q * q;
}

double Discretization::width(std::size_t axis) const {
  return (domain.hi[axis] - domain.lo[axis]) / static_cast<double>(mesh.boxes_per_dim[axis]);
}

std::size_t Discretization::leaf_id(const std::array<std::size_t, 3>& index) const {
  std::size_t id = 0;
  for (std::size_t k = 0; k < dim(); ++k) {
    if (index[k] >= mesh.boxes_per_dim[k]) throw ConfigError("leaf index out of range");
    id = id * mesh.boxes_per_dim[k] + index[k];
  }
  return id;
}

Discretization build_discretization(const DomainBox& domain, const MeshConfig& mesh) {
  domain.validate();
  const std::size_t d = domain.dim();
  if (mesh.boxes_per_dim.size() != d)
    throw ConfigError("mesh: boxes_per_dim must have one entry per dimension");
  for (std::size_t b : mesh.boxes_per_dim)
    if (b == 0) throw ConfigError("mesh: boxes_per_dim entries must be at least 1");
  if (mesh.p < 4) throw ConfigError("mesh: p must be at least 4");

  Discretization disc;
  disc.domain = domain;
  disc.mesh = mesh;
  const std::size_t p = mesh.p;
  const auto& nb = mesh.boxes_per_dim;

  const std::size_t nleaves = mesh.leaf_count();
  disc.leaves.resize(nleaves);
  for (std::size_t id = 0; id < nleaves; ++id) {
    Leaf& leaf = disc.leaves[id];
    std::size_t rem = id;
    for (std::size_t k = d; k-- > 0;) {
      leaf.index[k] = rem % nb[k];
      rem /= nb[k];
    }
    for (std::size_t k = 0; k < d; ++k) {
      leaf.lo[k] = plane_coordinate(domain.lo[k], domain.hi[k], leaf.index[k], nb[k]);
      leaf.hi[k] = plane_coordinate(domain.lo[k], domain.hi[k], leaf.index[k] + 1, nb[k]);
    }
  }

  // Faces: axis-major, then plane, then the remaining box indices.
  std::map<std::array<std::size_t, 5>, std::size_t> face_lookup;
  for (std::size_t axis = 0; axis < d; ++axis) {
    std::vector<std::size_t> others;
    for (std::size_t k = 0; k < d; ++k)
      if (k != axis) others.push_back(k);
    const std::size_t n0 = nb[others[0]];
    const std::size_t n1 = others.size() > 1 ? nb[others[1]] : 1;
    for (std::size_t plane = 0; plane <= nb[axis]; ++plane)
      for (std::size_t i0 = 0; i0 < n0; ++i0)
        for (std::size_t i1 = 0; i1 < n1; ++i1) {
          Face f;
          f.axis = axis;
          f.plane = plane;
          f.index[others[0]] = i0;
          if (others.size() > 1) f.index[others[1]] = i1;
          f.boundary = plane == 0 || plane == nb[axis];
          auto side = f.index;
          f.leaves = {kDirichlet, kDirichlet};
          if (plane > 0) {
            side[axis] = plane - 1;
            f.leaves[0] = disc.leaf_id(side);
          }
          if (plane < nb[axis]) {
            side[axis] = plane;
            f.leaves[1] = disc.leaf_id(side);
          }
          face_lookup[{axis, plane, f.index[0], f.index[1], f.index[2]}] = disc.faces.size();
          disc.faces.push_back(f);
        }
  }

  disc.leaf_faces_.resize(nleaves);
  for (std::size_t id = 0; id < nleaves; ++id) {
    const Leaf& leaf = disc.leaves[id];
    for (std::size_t axis = 0; axis < d; ++axis)
      for (std::size_t s = 0; s < 2; ++s) {
        auto key = leaf.index;
        key[axis] = 0;
        disc.leaf_faces_[id].push_back(
            face_lookup.at({axis, leaf.index[axis] + s, key[0], key[1], key[2]}));
      }
  }

  // Interior nodes.
  const std::size_t nint = disc.interior_per_leaf();
  const std::size_t nface = disc.nodes_per_face();
  disc.coords.reserve((nleaves * nint + disc.faces.size() * nface) * d);
  disc.index_interior.resize(nleaves);
  std::size_t next = 0;
  for (std::size_t id = 0; id < nleaves; ++id) {
    const Leaf& leaf = disc.leaves[id];
    std::array<std::vector<double>, 3> axis_nodes;
    for (std::size_t k = 0; k < d; ++k) axis_nodes[k] = cheb_nodes(p, leaf.lo[k], leaf.hi[k]);
    std::array<std::size_t, 3> m{1, 1, 1};
    for (std::size_t c = 0; c < nint; ++c) {
      std::size_t rem = c;
      for (std::size_t k = d; k-- > 0;) {
        m[k] = 1 + rem % (p - 2);
        rem /= (p - 2);
      }
      for (std::size_t k = 0; k < d; ++k) disc.coords.push_back(axis_nodes[k][m[k]]);
      disc.index_interior[id].push_back(next++);
    }
  }

  auto emit_face = [&](Face& f) {
    f.first_node = next;
    std::vector<std::size_t> tang;
    for (std::size_t k = 0; k < d; ++k)
      if (k != f.axis) tang.push_back(k);
    std::array<std::vector<double>, 3> tn;
    for (std::size_t k : tang) {
      const double a = plane_coordinate(domain.lo[k], domain.hi[k], f.index[k], nb[k]);
      const double b = plane_coordinate(domain.lo[k], domain.hi[k], f.index[k] + 1, nb[k]);
      if (mesh.corner_mode == CornerMode::DropCorners) {
        auto c = cheb_nodes(p, a, b);
        tn[k].assign(c.begin() + 1, c.end() - 1);
      } else {
        tn[k] = legendre_nodes(p - 1, a, b);
      }
    }
    const double normal = plane_coordinate(domain.lo[f.axis], domain.hi[f.axis], f.plane, nb[f.axis]);
    const std::size_t q = tn[tang[0]].size();
    const std::size_t q1 = tang.size() > 1 ? tn[tang[1]].size() : 1;
    for (std::size_t i = 0; i < q; ++i)
      for (std::size_t j = 0; j < q1; ++j) {
        for (std::size_t k = 0; k < d; ++k) {
          if (k == f.axis) disc.coords.push_back(normal);
          else if (k == tang[0]) disc.coords.push_back(tn[k][i]);
          else disc.coords.push_back(tn[k][j]);
        }
        ++next;
      }
  };

  disc.interface_begin = next;
  for (Face& f : disc.faces)
    if (!f.boundary) emit_face(f);
  disc.dirichlet_begin = next;
  for (Face& f : disc.faces)
    if (f.boundary) emit_face(f);
  for (std::size_t i = disc.interface_begin; i < disc.dirichlet_begin; ++i)
    disc.index_interface.push_back(i);
  for (std::size_t i = disc.dirichlet_begin; i < next; ++i) disc.index_dirichlet.push_back(i);

  if (mesh.corner_mode == CornerMode::DropCorners) {
    std::size_t total = 1;
    for (std::size_t k = 0; k < d; ++k) total *= nb[k] * (p - 1) + 1;
    disc.dropped = total - next;
  }
  return disc;
}

std::vector<FaceNeighbor> leaf_neighbors(const Discretization& disc, std::size_t leaf) {
  if (leaf >= disc.leaves.size())
    throw ConfigError("leaf id " + std::to_string(leaf) + " out of range");
  std::vector<FaceNeighbor> out;
  const auto& lf = disc.leaf_faces(leaf);
  for (std::size_t k = 0; k < lf.size(); ++k) {
    const Face& f = disc.faces[lf[k]];
    // Side 0 is the leaf's low face: the neighbour sits below it.
    out.push_back({lf[k], f.leaves[k % 2 == 0 ? 0 : 1]});
  }
  return out;
}

CoefficientField ParameterMap::coefficient_transform(const CoefficientField& physical) const {
  if (physical.dim != dim) throw ConfigError("parameter map: dimension mismatch");
  CoefficientField out;
  out.dim = dim;
  out.cross_terms = cross_terms || physical.cross_terms;
  const auto fwd = forward;
  const auto der = derivatives;
  const std::size_t d = dim;
  auto eval = [fwd, der, physical, d](const double* x, double* a2, double* b1, double& c) {
    double z[3] = {0, 0, 0}, jac[9] = {}, hess[27] = {};
    fwd(x, z);
    der(x, jac, hess);
    double a[9], b[3];
    physical.evaluate(z, a, b, c);
    for (std::size_t k = 0; k < d; ++k) {
      for (std::size_t l = 0; l < d; ++l) {
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i)
          for (std::size_t j = 0; j < d; ++j) s += a[i * 3 + j] * jac[k * 3 + i] * jac[l * 3 + j];
        a2[k * 3 + l] = s;
      }
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        s += b[i] * jac[k * 3 + i];
        for (std::size_t j = 0; j < d; ++j) s += a[i * 3 + j] * hess[(k * 3 + i) * 3 + j];
      }
      b1[k] = s;
    }
  };
  out.second_order = [eval, d](const double* x, double* a) {
    double a2[9], b[3], c;
    eval(x, a2, b, c);
    for (std::size_t k = 0; k < d; ++k)
      for (std::size_t l = 0; l < d; ++l) a[k * d + l] = a2[k * 3 + l];
  };
  out.first_order = [eval, d](const double* x, double* b) {
    double a2[9], b1[3], c;
    eval(x, a2, b1, c);
    for (std::size_t k = 0; k < d; ++k) b[k] = b1[k];
  };
  out.zeroth_order = [fwd, physical](const double* x) {
    double z[3] = {0, 0, 0}, a[9], b[3], c;
    fwd(x, z);
    physical.evaluate(z, a, b, c);
    return c;
  };
  return out;
}

ParameterMap identity_map(std::size_t dim) {
  ParameterMap m;
  m.dim = dim;
  m.forward = [dim](const double* x, double* z) {
    for (std::size_t k = 0; k < dim; ++k) z[k] = x[k];
  };
  m.derivatives = [](const double*, double* jac, double* hess) {
    std::fill(jac, jac + 9, 0.0);
    std::fill(hess, hess + 27, 0.0);
    for (std::size_t k = 0; k < 3; ++k) jac[k * 3 + k] = 1.0;
  };
  return m;
}

ParameterMap sinusoidal_map(double amplitude, double frequency, std::size_t dim) {
  if (!(std::abs(amplitude) < 1.0))
    throw ConfigError("sinusoidal map: |amplitude| must be below 1 so that psi stays positive");
  if (dim != 2 && dim != 3) throw ConfigError("sinusoidal map: dimension must be 2 or 3");
  ParameterMap m;
  m.dim = dim;
  m.cross_terms = amplitude != 0.0;
  const double amp = amplitude, fr = frequency;
  auto psi = [amp, fr](double s) { return 1.0 - amp * std::sin(fr * s); };
  auto dpsi = [amp, fr](double s) { return -amp * fr * std::cos(fr * s); };
  auto ddpsi = [amp, fr](double s) { return amp * fr * fr * std::sin(fr * s); };
  m.forward = [psi, dim](const double* x, double* z) {
    for (std::size_t k = 0; k < dim; ++k) z[k] = x[k];
    z[1] = x[1] / psi(x[0]);
  };
  m.derivatives = [psi, dpsi, ddpsi](const double* x, double* jac, double* hess) {
    std::fill(jac, jac + 9, 0.0);
    std::fill(hess, hess + 27, 0.0);
    for (std::size_t k = 0; k < 3; ++k) jac[k * 3 + k] = 1.0;
    const double ps = psi(x[0]);
    jac[1 * 3 + 0] = dpsi(x[0]) * x[1] / ps;
    jac[1 * 3 + 1] = ps;
    hess[(1 * 3 + 0) * 3 + 0] = ddpsi(x[0]) * x[1] / ps;
    hess[(1 * 3 + 0) * 3 + 1] = dpsi(x[0]);
    hess[(1 * 3 + 1) * 3 + 0] = dpsi(x[0]);
  };
  return m;
}

}  // namespace hps
