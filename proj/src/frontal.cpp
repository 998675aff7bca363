#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hps/dense.hpp"
#include "hps/errors.hpp"
#include "hps/simd/kernels.hpp"
#include "hps/sparse.hpp"

namespace hps {

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

struct Contribution {
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
  std::vector<double> values;  // rows x cols
  std::size_t delayed = 0;     // leading rows/cols still fully summed
};

// Column-oriented copy of the pattern so original entries below a pivot can
// be assembled without scanning rows.
struct ColumnIndex {
  std::vector<std::size_t> ptr, row, pos;
};

ColumnIndex column_index(const SparseMatrix& a) {
  const std::size_t n = a.size();
  ColumnIndex c;
  c.ptr.assign(n + 1, 0);
  for (std::size_t j : a.col_idx()) ++c.ptr[j + 1];
  for (std::size_t j = 0; j < n; ++j) c.ptr[j + 1] += c.ptr[j];
  c.row.resize(a.nnz());
  c.pos.resize(a.nnz());
  std::vector<std::size_t> next(c.ptr.begin(), c.ptr.end() - 1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = a.row_ptr()[i]; p < a.row_ptr()[i + 1]; ++p) {
      const std::size_t q = next[a.col_idx()[p]]++;
      c.row[q] = i;
      c.pos[q] = p;
    }
  return c;
}

}  // namespace

MultifrontalLU::MultifrontalLU(const SparseMatrix& a, const FactorOptions& options)
    : n_(a.size()) {
  const SymbolicAnalysis sym = analyze(a, options.ordering);
  const std::size_t nf = sym.front_vars.size();
  const ColumnIndex csc = column_index(a);

  stats_.n = n_;
  stats_.nnz_matrix = a.nnz();
  stats_.fronts = nf;
  stats_.supervariables = sym.supervariables;
  stats_.min_pivot = std::numeric_limits<double>::infinity();
  double max_u = 0.0;

  std::vector<std::vector<std::size_t>> children(nf);
  for (std::size_t f = 0; f < nf; ++f)
    if (sym.parent[f] != kNone) children[sym.parent[f]].push_back(f);

  std::vector<Contribution> pending(nf);
  std::vector<std::size_t> row_pos(n_, kNone), col_pos(n_, kNone);
  fronts_.resize(nf);
  std::size_t eliminated_total = 0;

  for (std::size_t f = 0; f < nf; ++f) {
    // Fully-summed variables: own variables plus whatever children delayed.
    std::vector<std::size_t> rows(sym.front_vars[f]);
    std::vector<std::size_t> cols(sym.front_vars[f]);
    for (std::size_t c : children[f]) {
      const Contribution& cb = pending[c];
      rows.insert(rows.end(), cb.rows.begin(), cb.rows.begin() + cb.delayed);
      cols.insert(cols.end(), cb.cols.begin(), cb.cols.begin() + cb.delayed);
    }
    const std::size_t k = rows.size();
    for (std::size_t i = 0; i < rows.size(); ++i) row_pos[rows[i]] = i;
    for (std::size_t j = 0; j < cols.size(); ++j) col_pos[cols[j]] = j;
    auto add_row = [&](std::size_t v) {
      if (row_pos[v] == kNone) {
        row_pos[v] = rows.size();
        rows.push_back(v);
      }
    };
    auto add_col = [&](std::size_t v) {
      if (col_pos[v] == kNone) {
        col_pos[v] = cols.size();
        cols.push_back(v);
      }
    };
    for (std::size_t v : sym.front_struct[f]) {
      add_row(v);
      add_col(v);
    }
    for (std::size_t c : children[f]) {
      for (std::size_t v : pending[c].rows) add_row(v);
      for (std::size_t v : pending[c].cols) add_col(v);
    }
    const std::size_t m = rows.size(), nc = cols.size();
    std::vector<double> fm(m * nc, 0.0);

    for (std::size_t v : sym.front_vars[f]) {
      for (std::size_t p = a.row_ptr()[v]; p < a.row_ptr()[v + 1]; ++p) {
        const std::size_t j = a.col_idx()[p];
        if (sym.front_of[j] >= f) fm[row_pos[v] * nc + col_pos[j]] += a.values()[p];
      }
      for (std::size_t q = csc.ptr[v]; q < csc.ptr[v + 1]; ++q) {
        const std::size_t i = csc.row[q];
        if (sym.front_of[i] > f) fm[row_pos[i] * nc + col_pos[v]] += a.values()[csc.pos[q]];
      }
    }
    for (std::size_t c : children[f]) {
      Contribution& cb = pending[c];
      const std::size_t cn = cb.cols.size();
      std::vector<std::size_t> cmap(cn);
      for (std::size_t j = 0; j < cn; ++j) cmap[j] = col_pos[cb.cols[j]];
      for (std::size_t i = 0; i < cb.rows.size(); ++i) {
        double* dst = fm.data() + row_pos[cb.rows[i]] * nc;
        const double* src = cb.values.data() + i * cn;
        for (std::size_t j = 0; j < cn; ++j) dst[cmap[j]] += src[j];
      }
      cb = Contribution{};
    }

    const PartialLUResult res =
        partial_lu(fm.data(), m, nc, nc, k, k, options.pivot_threshold);
    const std::size_t e = res.eliminated;
    for (std::size_t t = 0; t < e; ++t)
      stats_.flops += static_cast<double>(m - t - 1) +
                      2.0 * static_cast<double>(m - t - 1) * static_cast<double>(nc - t - 1);

    Front& fr = fronts_[f];
    fr.rows.resize(m);
    fr.cols.resize(nc);
    for (std::size_t i = 0; i < m; ++i) fr.rows[i] = rows[res.row_perm[i]];
    for (std::size_t j = 0; j < nc; ++j) fr.cols[j] = cols[res.col_perm[j]];
    for (std::size_t v : rows) row_pos[v] = kNone;
    for (std::size_t v : cols) col_pos[v] = kNone;

    if (e < k && sym.parent[f] == kNone)
      throw SingularMatrixError("sparse LU: no acceptable pivot at step " +
                                    std::to_string(eliminated_total + e),
                                eliminated_total + e);
    stats_.delayed_pivots += k - e;
    eliminated_total += e;

    fr.pivots = e;
    fr.lu.resize(e * e);
    fr.l21.resize((m - e) * e);
    fr.u12.resize(e * (nc - e));
    for (std::size_t i = 0; i < e; ++i) {
      std::copy_n(fm.data() + i * nc, e, fr.lu.data() + i * e);
      std::copy_n(fm.data() + i * nc + e, nc - e, fr.u12.data() + i * (nc - e));
      for (std::size_t j = i; j < nc; ++j) max_u = std::max(max_u, std::abs(fm[i * nc + j]));
    }
    for (std::size_t i = e; i < m; ++i)
      std::copy_n(fm.data() + i * nc, e, fr.l21.data() + (i - e) * e);
    if (e > 0) stats_.min_pivot = std::min(stats_.min_pivot, res.min_pivot);
    stats_.nnz_factors += e * e + e * (m - e) + e * (nc - e);
    stats_.max_front = std::max({stats_.max_front, m, nc});

    if (sym.parent[f] != kNone) {
      Contribution& cb = pending[f];
      cb.rows.assign(fr.rows.begin() + e, fr.rows.end());
      cb.cols.assign(fr.cols.begin() + e, fr.cols.end());
      cb.delayed = k - e;
      cb.values.resize((m - e) * (nc - e));
      for (std::size_t i = e; i < m; ++i)
        std::copy_n(fm.data() + i * nc + e, nc - e, cb.values.data() + (i - e) * (nc - e));
    }
  }
  if (eliminated_total < n_)
    throw SingularMatrixError("sparse LU: factorization incomplete", eliminated_total);
  if (nf == 0) stats_.min_pivot = 0.0;
  const double max_a = a.max_abs();
  stats_.growth = max_a > 0.0 ? max_u / max_a : 0.0;
}

void MultifrontalLU::solve_in_place(double* b, std::size_t nrhs) const {
  if (n_ == 0 || nrhs == 0) return;
  std::vector<double> tmp, x(n_ * nrhs);
  for (const Front& fr : fronts_) {
    const std::size_t e = fr.pivots, m = fr.rows.size();
    if (e == 0) continue;
    tmp.resize(e * nrhs);
    for (std::size_t i = 0; i < e; ++i) std::copy_n(b + fr.rows[i] * nrhs, nrhs, tmp.data() + i * nrhs);
    lower_unit_solve(fr.lu.data(), e, e, tmp.data(), nrhs, nrhs);
    for (std::size_t i = 0; i < e; ++i) std::copy_n(tmp.data() + i * nrhs, nrhs, b + fr.rows[i] * nrhs);
    for (std::size_t i = e; i < m; ++i) {
      double* bi = b + fr.rows[i] * nrhs;
      const double* l = fr.l21.data() + (i - e) * e;
      for (std::size_t t = 0; t < e; ++t)
        if (l[t] != 0.0) simd::axpy(nrhs, -l[t], tmp.data() + t * nrhs, bi);
    }
  }
  std::vector<double> xs;
  for (std::size_t f = fronts_.size(); f-- > 0;) {
    const Front& fr = fronts_[f];
    const std::size_t e = fr.pivots, nc = fr.cols.size(), r = nc - e;
    if (e == 0) continue;
    tmp.resize(e * nrhs);
    for (std::size_t i = 0; i < e; ++i) std::copy_n(b + fr.rows[i] * nrhs, nrhs, tmp.data() + i * nrhs);
    if (r > 0) {
      xs.resize(r * nrhs);
      for (std::size_t j = 0; j < r; ++j) std::copy_n(x.data() + fr.cols[e + j] * nrhs, nrhs, xs.data() + j * nrhs);
      simd::gemm(e, nrhs, r, -1.0, fr.u12.data(), r, xs.data(), nrhs, tmp.data(), nrhs);
    }
    upper_solve(fr.lu.data(), e, e, tmp.data(), nrhs, nrhs);
    for (std::size_t j = 0; j < e; ++j) std::copy_n(tmp.data() + j * nrhs, nrhs, x.data() + fr.cols[j] * nrhs);
  }
  std::copy(x.begin(), x.end(), b);
}

Matrix MultifrontalLU::reconstruct() const {
  Matrix l(n_, n_), u(n_, n_);
  std::size_t g = 0;
  for (const Front& fr : fronts_) {
    const std::size_t e = fr.pivots, m = fr.rows.size(), nc = fr.cols.size();
    for (std::size_t t = 0; t < e; ++t) {
      l(fr.rows[t], g + t) = 1.0;
      for (std::size_t i = t + 1; i < e; ++i) l(fr.rows[i], g + t) = fr.lu[i * e + t];
      for (std::size_t i = e; i < m; ++i) l(fr.rows[i], g + t) = fr.l21[(i - e) * e + t];
      for (std::size_t j = t; j < e; ++j) u(g + t, fr.cols[j]) = fr.lu[t * e + j];
      for (std::size_t j = e; j < nc; ++j) u(g + t, fr.cols[j]) = fr.u12[t * (nc - e) + j - e];
    }
    g += e;
  }
  return multiply(l, u);
}

}  // namespace hps
