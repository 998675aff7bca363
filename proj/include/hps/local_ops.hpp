#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "hps/coefficients.hpp"
#include "hps/dense.hpp"
#include "hps/geometry.hpp"

namespace hps {

// Chebyshev-Lobatto points on [a, b] in ascending order.
std::vector<double> cheb_nodes(std::size_t p, double a = -1.0, double b = 1.0);
// Differentiation matrix for the ascending Chebyshev points on [-1, 1].
Matrix cheb_diff_matrix(std::size_t p);
// Gauss-Legendre points on [a, b] in ascending order.
std::vector<double> legendre_nodes(std::size_t q, double a = -1.0, double b = 1.0);
// Barycentric Lagrange interpolation from `from` to `to`.
Matrix interpolation_matrix(std::span<const double> from, std::span<const double> to);
Matrix kron(const Matrix& a, const Matrix& b);

struct FaceInterp {
  Matrix forward;  // Chebyshev face grid -> Legendre face grid
  Matrix reverse;  // Legendre -> Chebyshev
};
// Face grids of a d-dimensional leaf: p^(d-1) Chebyshev nodes and
// (p-1)^(d-1) Legendre nodes.
FaceInterp face_interp_cheb_to_legendre(std::size_t p, std::size_t d);

// Everything about a leaf that depends only on p, d, the leaf widths and the
// corner mode. Shared read-only by all leaves of a discretization.
struct LeafTemplate {
  std::size_t d = 0;
  std::size_t p = 0;
  CornerMode mode = CornerMode::DropCorners;
  std::array<double, 3> width{};
  std::size_t grid_size = 0;       // p^d
  std::vector<std::size_t> interior;  // tensor indices of interior nodes
  // Tensor indices of the Chebyshev boundary nodes the interior rows may
  // touch: face-interior nodes (DropCorners) or every boundary node.
  std::vector<std::size_t> boundary;
  std::size_t face_dofs = 0;  // per face
  std::size_t n_b = 0;        // 2d * face_dofs
  std::array<Matrix, 3> diff;  // per-axis first derivative, physical scaling
  // Value at boundary[k] as a combination of boundary DOFs: a selection in
  // DropCorners mode, averaged face reinterpolation in LegendreFaces mode.
  std::vector<std::vector<std::pair<std::size_t, double>>> extend;
  Matrix a_bi;  // n_b x n_i
  Matrix a_bb;  // n_b x n_b

  std::size_t n_i() const noexcept { return interior.size(); }
};

std::shared_ptr<const LeafTemplate> make_leaf_template(const Discretization& disc);
std::shared_ptr<const LeafTemplate> make_leaf_template(std::size_t d, std::size_t p,
                                                       std::array<double, 3> width,
                                                       CornerMode mode);

// Leaf Chebyshev grid coordinates (grid_size x d).
std::vector<double> leaf_grid(const LeafTemplate& t, const Leaf& leaf);

// Interior collocation rows split into the interior block and the block on
// boundary DOFs (after Legendre composition in LegendreFaces mode).
struct CollocationBlocks {
  Matrix a_ii;  // n_i x n_i
  Matrix a_ib;  // n_i x n_b
};
CollocationBlocks collocate(const LeafTemplate& t, const Leaf& leaf,
                            const CoefficientField& coeffs);
// Full interior collocation rows over the leaf grid (n_i x p^d).
Matrix collocation_rows(const LeafTemplate& t, const Leaf& leaf,
                        const CoefficientField& coeffs);

class LeafFactors {
 public:
  LeafFactors(std::shared_ptr<const LeafTemplate> t, CollocationBlocks blocks,
              std::size_t leaf_id, bool form_dtn = true);

  const LeafTemplate& tmpl() const { return *tmpl_; }
  const DenseLU& a_ii_factor() const { return a_ii_; }
  const Matrix& a_ib() const { return a_ib_; }
  const Matrix& a_bi() const { return tmpl_->a_bi; }
  const Matrix& a_bb() const { return tmpl_->a_bb; }
  const Matrix& s() const { return s_; }
  const Matrix& dtn() const { return dtn_; }
  Matrix release_dtn() { return std::move(dtn_); }

  // A_ii^{-1} f for interior data of shape n_i x nrhs.
  void interior_solve(double* f, std::size_t nrhs) const;

 private:
  std::shared_ptr<const LeafTemplate> tmpl_;
  DenseLU a_ii_;
  Matrix a_ib_;
  Matrix s_;
  Matrix dtn_;
};

// Throws ConfigError for cross terms under DropCorners and
// SingularLeafError when A_ii cannot be factorized.
LeafFactors build_leaf_operator(std::shared_ptr<const LeafTemplate> t, const Leaf& leaf,
                                std::size_t leaf_id, const CoefficientField& coeffs,
                                bool form_dtn = true);

// Rejects a coefficient field that is incompatible with the corner mode.
void check_corner_mode(const CoefficientField& coeffs, const Discretization& disc);

}  // namespace hps
