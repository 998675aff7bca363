#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "hps/coefficients.hpp"

namespace hps {

enum class CornerMode { DropCorners, LegendreFaces };

std::string to_string(CornerMode m);
CornerMode parse_corner_mode(const std::string& s);

struct DomainBox {
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t dim() const noexcept { return lo.size(); }
  void validate() const;
};

struct MeshConfig {
  std::vector<std::size_t> boxes_per_dim;
  std::size_t p = 8;
  CornerMode corner_mode = CornerMode::DropCorners;

  std::size_t leaf_count() const;
};

struct Leaf {
  std::array<std::size_t, 3> index{};
  std::array<double, 3> lo{};
  std::array<double, 3> hi{};
};

// A face of the box partition, identified by the normal axis, the plane
// index along that axis (0..boxes[axis]) and the box indices along the other
// axes. Faces on planes 0 and boxes[axis] lie on the domain boundary.
struct Face {
  std::size_t axis = 0;
  std::size_t plane = 0;
  std::array<std::size_t, 3> index{};  // box index tuple; index[axis] unused
  bool boundary = false;
  std::size_t first_node = 0;  // global id of the first face node
  // Leaf on the low side (or npos) and on the high side (or npos).
  std::array<std::size_t, 2> leaves{};
};

inline constexpr std::size_t kDirichlet = static_cast<std::size_t>(-1);

struct FaceNeighbor {
  std::size_t face;
  std::size_t neighbor;  // leaf id or kDirichlet
};

// Global numbering: leaf interiors (contiguous per leaf, leaves in order),
// then interface face nodes, then Dirichlet face nodes. Face nodes are
// ordered lexicographically over the tangential axes (lowest axis slowest).
class Discretization {
 public:
  std::size_t dim() const noexcept { return domain.dim(); }
  std::size_t p() const noexcept { return mesh.p; }
  std::size_t node_count() const noexcept { return coords.size() / dim(); }
  const double* node(std::size_t id) const { return coords.data() + id * dim(); }
  std::size_t interior_per_leaf() const noexcept;
  std::size_t nodes_per_face() const noexcept;
  // Nominal leaf width along each axis.
  double width(std::size_t axis) const;
  std::size_t leaf_id(const std::array<std::size_t, 3>& index) const;
  // Faces of a leaf in the order -x, +x, -y, +y[, -z, +z].
  const std::vector<std::size_t>& leaf_faces(std::size_t leaf) const {
    return leaf_faces_.at(leaf);
  }
  bool is_interface(std::size_t node) const noexcept {
    return node >= interface_begin && node < dirichlet_begin;
  }

  DomainBox domain;
  MeshConfig mesh;
  std::vector<Leaf> leaves;
  std::vector<Face> faces;
  std::vector<double> coords;  // node_count x dim
  std::vector<std::vector<std::size_t>> index_interior;
  std::vector<std::size_t> index_interface;
  std::vector<std::size_t> index_dirichlet;
  std::size_t interface_begin = 0;
  std::size_t dirichlet_begin = 0;
  // Tensor-grid corner/edge nodes not represented (DropCorners only).
  std::size_t dropped = 0;

 private:
  friend Discretization build_discretization(const DomainBox&, const MeshConfig&);
  std::vector<std::vector<std::size_t>> leaf_faces_;
};

Discretization build_discretization(const DomainBox& domain, const MeshConfig& mesh);

std::vector<FaceNeighbor> leaf_neighbors(const Discretization& disc, std::size_t leaf);

// Coordinate `i` of the plane lo + (hi - lo) * i / n; every caller shares this
// formula so that leaves agree exactly on common faces.
double plane_coordinate(double lo, double hi, std::size_t i, std::size_t n);

// Change of variables from physical coordinates z to reference coordinates
// x. The solver works on the reference box; `forward` maps reference points
// to physical ones and `derivatives` returns, at a reference point,
// J[k][i] = dx_k/dz_i and H[k][i][j] = d2x_k/dz_i dz_j.
struct ParameterMap {
  std::size_t dim = 0;
  std::function<void(const double* x, double* z)> forward;
  std::function<void(const double* x, double* jac, double* hess)> derivatives;
  bool cross_terms = false;

  // Coefficients on the reference box of the operator whose physical
  // coefficients are `physical` (evaluated at forward(x)).
  CoefficientField coefficient_transform(const CoefficientField& physical) const;
};

ParameterMap identity_map(std::size_t dim);
// Reference x_2 = psi(z_1) z_2 with psi(s) = 1 - amplitude * sin(frequency s).
ParameterMap sinusoidal_map(double amplitude, double frequency, std::size_t dim = 3);

}  // namespace hps
