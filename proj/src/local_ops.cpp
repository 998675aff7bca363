#include "hps/local_ops.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "hps/errors.hpp"
#include "hps/simd/kernels.hpp"

namespace hps {

std::vector<double> cheb_nodes(std::size_t p, double a, double b) {
  if (p < 2) throw ConfigError("cheb_nodes: p must be at least 2");
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  const double m = static_cast<double>(p - 1);
  std::vector<double> x(p);
  for (std::size_t j = 0; j < p; ++j) {
    // -cos(j pi / m) in sine form, odd about the centre.
    const double t = std::sin(std::numbers::pi * (2.0 * static_cast<double>(j) - m) / (2.0 * m));
    x[j] = mid + half * t;
  }
  x.front() = a;
  x.back() = b;
  return x;
}

Matrix cheb_diff_matrix(std::size_t p) {
  if (p < 2) throw ConfigError("cheb_diff_matrix: p must be at least 2");
  const auto x = cheb_nodes(p);
  std::vector<double> w(p);
  for (std::size_t j = 0; j < p; ++j) {
    w[j] = (j % 2 == 0) ? 1.0 : -1.0;
    if (j == 0 || j == p - 1) w[j] *= 0.5;
  }
  Matrix d(p, p);
  for (std::size_t i = 0; i < p; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      if (i == j) continue;
      d(i, j) = (w[j] / w[i]) / (x[i] - x[j]);
      s += d(i, j);
    }
    d(i, i) = -s;
  }
  return d;
}

std::vector<double> legendre_nodes(std::size_t q, double a, double b) {
  if (q < 1) throw ConfigError("legendre_nodes: need at least one node");
  std::vector<double> t(q, 0.0);
  const double nq = static_cast<double>(q);
  for (std::size_t i = 0; i < q / 2; ++i) {
    double r = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (nq + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = r;
      for (std::size_t k = 2; k <= q; ++k) {
        const double kk = static_cast<double>(k);
        const double p2 = ((2.0 * kk - 1.0) * r * p1 - (kk - 1.0) * p0) / kk;
        p0 = p1;
        p1 = p2;
      }
      const double dp = nq * (r * p1 - p0) / (r * r - 1.0);
      const double step = p1 / dp;
      r -= step;
      if (std::abs(step) < 1e-16) break;
    }
    t[q - 1 - i] = r;
    t[i] = -r;
  }
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (double& v : t) v = mid + half * v;
  return t;
}

Matrix interpolation_matrix(std::span<const double> from, std::span<const double> to) {
  const std::size_t n = from.size();
  std::vector<double> w(n, 1.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k)
      if (k != j) w[j] /= (from[j] - from[k]);
  Matrix m(to.size(), n);
  for (std::size_t i = 0; i < to.size(); ++i) {
    std::size_t exact = n;
    for (std::size_t j = 0; j < n; ++j)
      if (to[i] == from[j]) exact = j;
    if (exact < n) {
      m(i, exact) = 1.0;
      continue;
    }
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      m(i, j) = w[j] / (to[i] - from[j]);
      s += m(i, j);
    }
    for (std::size_t j = 0; j < n; ++j) m(i, j) /= s;
  }
  return m;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      for (std::size_t r = 0; r < b.rows(); ++r)
        for (std::size_t c = 0; c < b.cols(); ++c)
          k(i * b.rows() + r, j * b.cols() + c) = a(i, j) * b(r, c);
  return k;
}

FaceInterp face_interp_cheb_to_legendre(std::size_t p, std::size_t d) {
  if (p < 4) throw ConfigError("face interpolation: p must be at least 4");
  if (d != 2 && d != 3) throw ConfigError("face interpolation: dimension must be 2 or 3");
  const auto c = cheb_nodes(p);
  const auto l = legendre_nodes(p - 1);
  Matrix f = interpolation_matrix(c, l);
  Matrix r = interpolation_matrix(l, c);
  if (d == 2) return {f, r};
  return {kron(f, f), kron(r, r)};
}

namespace {

std::size_t ipow(std::size_t b, std::size_t e) {
  std::size_t r = 1;
  while (e-- > 0) r *= b;
  return r;
}

struct GridIndex {
  std::size_t d, p;
  std::array<std::size_t, 3> stride{};
  GridIndex(std::size_t d_, std::size_t p_) : d(d_), p(p_) {
    for (std::size_t k = 0; k < d; ++k) stride[k] = ipow(p, d - 1 - k);
  }
  std::array<std::size_t, 3> multi(std::size_t idx) const {
    std::array<std::size_t, 3> m{};
    for (std::size_t k = 0; k < d; ++k) m[k] = (idx / stride[k]) % p;
    return m;
  }
};

// Tensor indices of the Chebyshev nodes on face f = 2 * axis + side, in
// lexicographic order over the tangential axes. Endpoints of the tangential
// ranges are included only when `with_edges`.
std::vector<std::size_t> face_cheb_nodes(const GridIndex& g, std::size_t f, bool with_edges) {
  const std::size_t axis = f / 2, side = f % 2;
  const std::size_t lo = with_edges ? 0 : 1, hi = with_edges ? g.p : g.p - 1;
  std::vector<std::size_t> tang;
  for (std::size_t k = 0; k < g.d; ++k)
    if (k != axis) tang.push_back(k);
  const std::size_t base = (side ? g.p - 1 : 0) * g.stride[axis];
  std::vector<std::size_t> out;
  if (tang.size() == 1) {
    for (std::size_t i = lo; i < hi; ++i) out.push_back(base + i * g.stride[tang[0]]);
  } else {
    for (std::size_t i = lo; i < hi; ++i)
      for (std::size_t j = lo; j < hi; ++j)
        out.push_back(base + i * g.stride[tang[0]] + j * g.stride[tang[1]]);
  }
  return out;
}

}  // namespace

std::shared_ptr<const LeafTemplate> make_leaf_template(const Discretization& disc) {
  std::array<double, 3> width{};
  for (std::size_t k = 0; k < disc.dim(); ++k) width[k] = disc.width(k);
  return make_leaf_template(disc.dim(), disc.p(), width, disc.mesh.corner_mode);
}

std::shared_ptr<const LeafTemplate> make_leaf_template(std::size_t d, std::size_t p,
                                                       std::array<double, 3> width,
                                                       CornerMode mode) {
  if (p < 4) throw ConfigError("leaf template: p must be at least 4");
  if (d != 2 && d != 3) throw ConfigError("leaf template: dimension must be 2 or 3");
  auto t = std::make_shared<LeafTemplate>();
  t->d = d;
  t->p = p;
  t->mode = mode;
  t->width = width;
  t->grid_size = ipow(p, d);
  const GridIndex g(d, p);
  const bool legendre = mode == CornerMode::LegendreFaces;

  std::vector<std::size_t> interior_pos(t->grid_size, kDirichlet);
  std::vector<std::size_t> boundary_pos(t->grid_size, kDirichlet);
  for (std::size_t idx = 0; idx < t->grid_size; ++idx) {
    const auto m = g.multi(idx);
    std::size_t on_boundary = 0;
    for (std::size_t k = 0; k < d; ++k)
      if (m[k] == 0 || m[k] == p - 1) ++on_boundary;
    if (on_boundary == 0) {
      interior_pos[idx] = t->interior.size();
      t->interior.push_back(idx);
    } else if (legendre || on_boundary == 1) {
      boundary_pos[idx] = t->boundary.size();
      t->boundary.push_back(idx);
    }
  }

  const Matrix d1 = cheb_diff_matrix(p);
  for (std::size_t k = 0; k < d; ++k) {
    t->diff[k] = d1;
    const double scale = 2.0 / width[k];
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j) t->diff[k](i, j) *= scale;
  }

  const std::size_t q = legendre ? p - 1 : p - 2;
  t->face_dofs = d == 2 ? q : q * q;
  t->n_b = 2 * d * t->face_dofs;
  const std::size_t nf = 2 * d;

  // Boundary-DOF expansion of every Chebyshev boundary node.
  t->extend.assign(t->boundary.size(), {});
  FaceInterp fi;
  if (legendre) fi = face_interp_cheb_to_legendre(p, d);
  std::vector<std::size_t> share(t->boundary.size(), 0);
  for (std::size_t f = 0; f < nf; ++f) {
    const auto nodes = face_cheb_nodes(g, f, legendre);
    for (std::size_t r = 0; r < nodes.size(); ++r) {
      const std::size_t b = boundary_pos[nodes[r]];
      ++share[b];
      if (!legendre) {
        t->extend[b].push_back({f * t->face_dofs + r, 1.0});
        continue;
      }
      for (std::size_t c = 0; c < t->face_dofs; ++c)
        if (fi.reverse(r, c) != 0.0)
          t->extend[b].push_back({f * t->face_dofs + c, fi.reverse(r, c)});
    }
  }
  for (std::size_t b = 0; b < t->boundary.size(); ++b)
    for (auto& e : t->extend[b]) e.second /= static_cast<double>(share[b]);

  // Outward normal derivative at the face nodes, projected to face DOFs.
  t->a_bi = Matrix(t->n_b, t->n_i());
  t->a_bb = Matrix(t->n_b, t->n_b);
  for (std::size_t f = 0; f < nf; ++f) {
    const std::size_t axis = f / 2;
    const double sign = f % 2 ? 1.0 : -1.0;
    const auto nodes = face_cheb_nodes(g, f, legendre);
    Matrix ni(nodes.size(), t->n_i()), nb(nodes.size(), t->n_b);
    for (std::size_t r = 0; r < nodes.size(); ++r) {
      const auto m = g.multi(nodes[r]);
      const std::size_t base = nodes[r] - m[axis] * g.stride[axis];
      for (std::size_t s = 0; s < p; ++s) {
        const double v = sign * t->diff[axis](m[axis], s);
        const std::size_t idx = base + s * g.stride[axis];
        if (interior_pos[idx] != kDirichlet) {
          ni(r, interior_pos[idx]) += v;
        } else {
          for (const auto& [dof, w] : t->extend[boundary_pos[idx]]) nb(r, dof) += v * w;
        }
      }
    }
    if (legendre) {
      ni = multiply(fi.forward, ni);
      nb = multiply(fi.forward, nb);
    }
    for (std::size_t r = 0; r < t->face_dofs; ++r) {
      std::copy_n(ni.row(r), t->n_i(), t->a_bi.row(f * t->face_dofs + r));
      std::copy_n(nb.row(r), t->n_b, t->a_bb.row(f * t->face_dofs + r));
    }
  }
  return t;
}

std::vector<double> leaf_grid(const LeafTemplate& t, const Leaf& leaf) {
  const GridIndex g(t.d, t.p);
  std::array<std::vector<double>, 3> ax;
  for (std::size_t k = 0; k < t.d; ++k) ax[k] = cheb_nodes(t.p, leaf.lo[k], leaf.hi[k]);
  std::vector<double> x(t.grid_size * t.d);
  for (std::size_t idx = 0; idx < t.grid_size; ++idx) {
    const auto m = g.multi(idx);
    for (std::size_t k = 0; k < t.d; ++k) x[idx * t.d + k] = ax[k][m[k]];
  }
  return x;
}

Matrix collocation_rows(const LeafTemplate& t, const Leaf& leaf, const CoefficientField& coeffs) {
  const std::size_t d = t.d, p = t.p;
  const GridIndex g(d, p);
  const auto x = leaf_grid(t, leaf);
  std::array<Matrix, 3> d2;
  for (std::size_t k = 0; k < d; ++k) d2[k] = multiply(t.diff[k], t.diff[k]);

  Matrix rows(t.n_i(), t.grid_size);
  double a[9], b[3], c;
  for (std::size_t r = 0; r < t.n_i(); ++r) {
    const std::size_t idx = t.interior[r];
    coeffs.evaluate(x.data() + idx * d, a, b, c);
    double* row = rows.row(r);
    const auto m = g.multi(idx);
    for (std::size_t i = 0; i < d; ++i) {
      const std::size_t bi = idx - m[i] * g.stride[i];
      const double aii = -a[i * 3 + i], bcoef = -b[i];
      for (std::size_t s = 0; s < p; ++s)
        row[bi + s * g.stride[i]] += aii * d2[i](m[i], s) + bcoef * t.diff[i](m[i], s);
      for (std::size_t j = i + 1; j < d; ++j) {
        const double cross = -(a[i * 3 + j] + a[j * 3 + i]);
        if (cross == 0.0) continue;
        const std::size_t bij = bi - m[j] * g.stride[j];
        for (std::size_t s = 0; s < p; ++s) {
          const double di = cross * t.diff[i](m[i], s);
          for (std::size_t u = 0; u < p; ++u)
            row[bij + s * g.stride[i] + u * g.stride[j]] += di * t.diff[j](m[j], u);
        }
      }
    }
    row[idx] += c;
  }
  return rows;
}

CollocationBlocks collocate(const LeafTemplate& t, const Leaf& leaf, const CoefficientField& coeffs) {
  const Matrix rows = collocation_rows(t, leaf, coeffs);
  std::vector<std::size_t> boundary_pos(t.grid_size, kDirichlet);
  for (std::size_t k = 0; k < t.boundary.size(); ++k) boundary_pos[t.boundary[k]] = k;
  std::vector<char> is_interior(t.grid_size, 0);
  for (std::size_t idx : t.interior) is_interior[idx] = 1;

  CollocationBlocks out{Matrix(t.n_i(), t.n_i()), Matrix(t.n_i(), t.n_b)};
  for (std::size_t r = 0; r < t.n_i(); ++r) {
    const double* row = rows.row(r);
    double* ii = out.a_ii.row(r);
    double* ib = out.a_ib.row(r);
    for (std::size_t c = 0; c < t.n_i(); ++c) ii[c] = row[t.interior[c]];
    for (std::size_t idx = 0; idx < t.grid_size; ++idx) {
      const double v = row[idx];
      if (v == 0.0 || is_interior[idx]) continue;
      if (boundary_pos[idx] == kDirichlet)
        throw ConfigError("cross-derivative terms reach corner nodes; use legendre-faces");
      for (const auto& [dof, w] : t.extend[boundary_pos[idx]]) ib[dof] += v * w;
    }
  }
  return out;
}

LeafFactors::LeafFactors(std::shared_ptr<const LeafTemplate> t, CollocationBlocks blocks,
                         std::size_t leaf_id, bool form_dtn)
    : tmpl_(std::move(t)), a_ib_(std::move(blocks.a_ib)) {
  try {
    a_ii_ = DenseLU(std::move(blocks.a_ii));
  } catch (const SingularMatrixError&) {
    throw SingularLeafError("interior block of leaf " + std::to_string(leaf_id) + " is singular",
                            leaf_id);
  }
  if (a_ii_.size() > 0 && a_ii_.min_pivot() <= 64.0 * 2.2e-16 * a_ii_.max_pivot())
    throw SingularLeafError(
        "interior block of leaf " + std::to_string(leaf_id) + " is numerically singular", leaf_id);
  if (!form_dtn) return;
  s_ = a_ib_;
  a_ii_.solve_in_place(s_.data(), s_.cols(), s_.cols());
  simd::scal(s_.rows() * s_.cols(), -1.0, s_.data());
  dtn_ = tmpl_->a_bb;
  multiply_add(1.0, tmpl_->a_bi, s_, dtn_);
}

void LeafFactors::interior_solve(double* f, std::size_t nrhs) const {
  a_ii_.solve_in_place(f, nrhs, nrhs);
}

LeafFactors build_leaf_operator(std::shared_ptr<const LeafTemplate> t, const Leaf& leaf,
                                std::size_t leaf_id, const CoefficientField& coeffs,
                                bool form_dtn) {
  if (t->mode == CornerMode::DropCorners && coeffs.cross_terms)
    throw ConfigError("operators with cross-derivative terms require legendre-faces");
  CollocationBlocks blocks = collocate(*t, leaf, coeffs);
  return LeafFactors(std::move(t), std::move(blocks), leaf_id, form_dtn);
}

void check_corner_mode(const CoefficientField& coeffs, const Discretization& disc) {
  if (coeffs.dim != disc.dim())
    throw ConfigError("coefficient field dimension does not match the domain");
  if (disc.mesh.corner_mode != CornerMode::DropCorners) return;
  if (coeffs.cross_terms ||
      sample_cross_terms(coeffs, disc.domain.lo, disc.domain.hi) > 0.0)
    throw ConfigError("operators with cross-derivative terms require legendre-faces");
}

}  // namespace hps
