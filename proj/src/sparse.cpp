#include "hps/sparse.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "hps/errors.hpp"

namespace hps {

SparseMatrix::SparseMatrix(std::size_t n, std::vector<std::size_t> row_ptr,
                           std::vector<std::size_t> col_idx)
    : n_(n), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)) {
  if (row_ptr_.size() != n_ + 1 || row_ptr_.back() != col_idx_.size())
    throw std::invalid_argument("SparseMatrix: inconsistent row pointers");
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      if (col_idx_[p] >= n_)
        throw std::invalid_argument("SparseMatrix: column index out of range");
      if (p > row_ptr_[i] && col_idx_[p] <= col_idx_[p - 1])
        throw std::invalid_argument("SparseMatrix: columns must be increasing");
    }
  values_.assign(col_idx_.size(), 0.0);
}

SparseMatrix SparseMatrix::from_triplets(std::size_t n,
                                         std::span<const Triplet> triplets) {
  std::vector<std::size_t> order(triplets.size());
  std::iota(order.begin(), order.end(), 0);
  for (const auto& t : triplets)
    if (t.row >= n || t.col >= n)
      throw std::invalid_argument("from_triplets: index out of range");
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (triplets[a].row != triplets[b].row) return triplets[a].row < triplets[b].row;
    return triplets[a].col < triplets[b].col;
  });
  SparseMatrix m;
  m.n_ = n;
  m.row_ptr_.assign(n + 1, 0);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const Triplet& t = triplets[order[k]];
    if (k > 0) {
      const Triplet& prev = triplets[order[k - 1]];
      if (prev.row == t.row && prev.col == t.col) {
        m.values_.back() += t.value;
        continue;
      }
    }
    m.col_idx_.push_back(t.col);
    m.values_.push_back(t.value);
    ++m.row_ptr_[t.row + 1];
  }
  for (std::size_t i = 0; i < n; ++i) m.row_ptr_[i + 1] += m.row_ptr_[i];
  return m;
}

SparseMatrix SparseMatrix::from_dense(const Matrix& a, double drop) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("from_dense: matrix must be square");
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (std::abs(a(i, j)) > drop) t.push_back({i, j, a(i, j)});
  return from_triplets(a.rows(), t);
}

std::size_t SparseMatrix::find(std::size_t row, std::size_t col) const {
  if (row >= n_) return npos;
  const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row]);
  const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row + 1]);
  const auto it = std::lower_bound(first, last, col);
  if (it == last || *it != col) return npos;
  return static_cast<std::size_t>(it - col_idx_.begin());
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
  if (x.size() != n_) throw std::invalid_argument("SparseMatrix::multiply: size");
  std::vector<double> y(n_);
  multiply(x.data(), 1, y.data());
  return y;
}

void SparseMatrix::multiply(const double* x, std::size_t nrhs, double* y) const {
  std::fill(y, y + n_ * nrhs, 0.0);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      const double a = values_[p];
      const double* xr = x + col_idx_[p] * nrhs;
      for (std::size_t r = 0; r < nrhs; ++r) y[i * nrhs + r] += a * xr[r];
    }
}

Matrix SparseMatrix::to_dense() const {
  Matrix d(n_, n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
      d(i, col_idx_[p]) += values_[p];
  return d;
}

double SparseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

void write_coordinate(std::ostream& out, const SparseMatrix& a) {
  char buf[64];
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t p = a.row_ptr()[i]; p < a.row_ptr()[i + 1]; ++p) {
      auto r = std::to_chars(buf, buf + sizeof(buf), a.values()[p]);
      out << i << ' ' << a.col_idx()[p] << ' '
          << std::string_view(buf, static_cast<std::size_t>(r.ptr - buf)) << '\n';
    }
}

SparseMatrix read_coordinate(std::istream& in, std::size_t n) {
  std::vector<Triplet> t;
  std::string line;
  std::size_t max_index = 0;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::size_t i = 0, j = 0;
    std::string vs;
    if (!(ls >> i >> j >> vs))
      throw ConfigError("coordinate file: malformed line " + std::to_string(lineno));
    double v = 0.0;
    auto r = std::from_chars(vs.data(), vs.data() + vs.size(), v);
    if (r.ec != std::errc())
      throw ConfigError("coordinate file: bad value on line " + std::to_string(lineno));
    max_index = std::max({max_index, i + 1, j + 1});
    t.push_back({i, j, v});
  }
  if (n == 0) n = max_index;
  if (max_index > n) throw ConfigError("coordinate file: index exceeds dimension");
  return SparseMatrix::from_triplets(n, t);
}

std::vector<double> FactorizedSystem::solve(std::span<const double> b) const {
  if (b.size() != size())
    throw std::invalid_argument("solve: right-hand side has wrong length");
  std::vector<double> x(b.begin(), b.end());
  solve_in_place(x.data(), 1);
  return x;
}

Matrix FactorizedSystem::solve(const Matrix& b) const {
  if (b.rows() != size())
    throw std::invalid_argument("solve: right-hand side has wrong row count");
  Matrix x = b;
  solve_in_place(x.data(), x.cols());
  return x;
}

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

struct QuotientGraph {
  std::vector<std::vector<std::size_t>> members;  // per supervariable
  std::vector<std::vector<std::size_t>> adj;      // sorted, no self
  std::vector<std::size_t> sv_of;
};

// Groups variables with identical closed adjacency in A + A^T.
QuotientGraph compress(const SparseMatrix& a) {
  const std::size_t n = a.size();
  std::vector<std::vector<std::size_t>> closed(n);
  for (std::size_t i = 0; i < n; ++i) {
    closed[i].push_back(i);
    for (std::size_t p = a.row_ptr()[i]; p < a.row_ptr()[i + 1]; ++p) {
      const std::size_t j = a.col_idx()[p];
      if (j == i) continue;
      closed[i].push_back(j);
      closed[j].push_back(i);
    }
  }
  for (auto& c : closed) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
  }

  QuotientGraph g;
  g.sv_of.assign(n, kNone);
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t h = 1469598103934665603ull;
    for (std::size_t v : closed[i]) h = (h ^ v) * 1099511628211ull;
    auto& bucket = buckets[h];
    std::size_t found = kNone;
    for (std::size_t s : bucket)
      if (closed[g.members[s].front()] == closed[i]) {
        found = s;
        break;
      }
    if (found == kNone) {
      found = g.members.size();
      g.members.emplace_back();
      bucket.push_back(found);
    }
    g.members[found].push_back(i);
    g.sv_of[i] = found;
  }
  g.adj.resize(g.members.size());
  for (std::size_t s = 0; s < g.members.size(); ++s) {
    auto& adj = g.adj[s];
    for (std::size_t v : closed[g.members[s].front()])
      if (g.sv_of[v] != s) adj.push_back(g.sv_of[v]);
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
  return g;
}

// Symbolic block elimination. With `fixed_order` empty the next supervariable
// is the one of minimum weighted external degree (ties to the lowest id).
void eliminate(const QuotientGraph& g, const std::vector<std::size_t>& fixed_order,
               std::vector<std::size_t>& order,
               std::vector<std::vector<std::size_t>>& structure) {
  const std::size_t m = g.members.size();
  std::vector<std::vector<std::size_t>> adj = g.adj;
  std::vector<std::size_t> weight(m), degree(m, 0);
  for (std::size_t s = 0; s < m; ++s) weight[s] = g.members[s].size();
  auto compute_degree = [&](std::size_t s) {
    std::size_t d = 0;
    for (std::size_t u : adj[s]) d += weight[u];
    return d;
  };
  std::set<std::pair<std::size_t, std::size_t>> queue;
  for (std::size_t s = 0; s < m; ++s) {
    degree[s] = compute_degree(s);
    if (fixed_order.empty()) queue.insert({degree[s], s});
  }
  order.clear();
  structure.assign(m, {});
  std::vector<std::size_t> merged;
  for (std::size_t step = 0; step < m; ++step) {
    std::size_t v;
    if (fixed_order.empty()) {
      v = queue.begin()->second;
      queue.erase(queue.begin());
    } else {
      v = fixed_order[step];
    }
    order.push_back(v);
    const std::vector<std::size_t> clique = std::move(adj[v]);
    adj[v].clear();
    for (std::size_t u : clique) {
      merged.clear();
      std::set_union(adj[u].begin(), adj[u].end(), clique.begin(), clique.end(),
                     std::back_inserter(merged));
      merged.erase(std::remove_if(merged.begin(), merged.end(),
                                  [&](std::size_t x) { return x == u || x == v; }),
                   merged.end());
      adj[u].swap(merged);
      if (fixed_order.empty()) {
        queue.erase({degree[u], u});
        degree[u] = compute_degree(u);
        queue.insert({degree[u], u});
      }
    }
    structure[v] = clique;
  }
}

}  // namespace

SymbolicAnalysis analyze(const SparseMatrix& a, Ordering ordering) {
  const std::size_t n = a.size();
  {
    std::vector<char> col_seen(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (a.row_ptr()[i] == a.row_ptr()[i + 1])
        throw StructuralSingularityError("structurally singular: row " +
                                         std::to_string(i) + " is empty");
      for (std::size_t p = a.row_ptr()[i]; p < a.row_ptr()[i + 1]; ++p)
        col_seen[a.col_idx()[p]] = 1;
    }
    for (std::size_t j = 0; j < n; ++j)
      if (!col_seen[j])
        throw StructuralSingularityError("structurally singular: column " +
                                         std::to_string(j) + " is empty");
  }

  SymbolicAnalysis sym;
  sym.n = n;
  if (n == 0) return sym;

  const QuotientGraph g = compress(a);
  const std::size_t m = g.members.size();
  sym.supervariables = m;

  std::vector<std::size_t> fixed;
  if (ordering == Ordering::Natural) {
    fixed.resize(m);
    std::iota(fixed.begin(), fixed.end(), 0);
    std::sort(fixed.begin(), fixed.end(), [&](std::size_t x, std::size_t y) {
      return g.members[x].front() < g.members[y].front();
    });
  }
  std::vector<std::size_t> order;
  std::vector<std::vector<std::size_t>> structure;
  eliminate(g, fixed, order, structure);

  std::vector<std::size_t> pos(m);
  for (std::size_t k = 0; k < m; ++k) pos[order[k]] = k;
  std::vector<std::size_t> sv_parent(m, kNone), child_count(m, 0), only_child(m, kNone);
  for (std::size_t s = 0; s < m; ++s) {
    std::size_t best = kNone;
    for (std::size_t u : structure[s])
      if (best == kNone || pos[u] < pos[best]) best = u;
    sv_parent[s] = best;
    if (best != kNone) {
      ++child_count[best];
      only_child[best] = s;
    }
  }

  // Merge chains into fundamental supernodes: an only child whose update
  // pattern is exactly {parent} + pattern(parent).
  std::vector<std::size_t> group_of(m, kNone);
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::size_t> group_top;
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t s = order[k];
    bool merged = false;
    if (child_count[s] == 1) {
      const std::size_t c = only_child[s];
      const auto& sc = structure[c];
      const auto& sp = structure[s];
      if (sc.size() == sp.size() + 1 && std::binary_search(sc.begin(), sc.end(), s) &&
          std::includes(sc.begin(), sc.end(), sp.begin(), sp.end())) {
        const std::size_t gidx = group_of[c];
        groups[gidx].push_back(s);
        group_top[gidx] = s;
        group_of[s] = gidx;
        merged = true;
      }
    }
    if (!merged) {
      group_of[s] = groups.size();
      groups.push_back({s});
      group_top.push_back(s);
    }
  }
  std::vector<std::size_t> gorder(groups.size());
  std::iota(gorder.begin(), gorder.end(), 0);
  std::sort(gorder.begin(), gorder.end(), [&](std::size_t x, std::size_t y) {
    return pos[group_top[x]] < pos[group_top[y]];
  });
  std::vector<std::size_t> front_index(groups.size());
  for (std::size_t f = 0; f < gorder.size(); ++f) front_index[gorder[f]] = f;

  const std::size_t nf = groups.size();
  sym.front_vars.resize(nf);
  sym.front_struct.resize(nf);
  sym.parent.assign(nf, kNone);
  sym.front_of.assign(n, kNone);
  for (std::size_t f = 0; f < nf; ++f) {
    const std::size_t gidx = gorder[f];
    for (std::size_t s : groups[gidx])
      for (std::size_t v : g.members[s]) {
        sym.front_vars[f].push_back(v);
        sym.front_of[v] = f;
      }
    std::vector<std::size_t> st = structure[group_top[gidx]];
    std::sort(st.begin(), st.end(),
              [&](std::size_t x, std::size_t y) { return pos[x] < pos[y]; });
    for (std::size_t s : st)
      for (std::size_t v : g.members[s]) sym.front_struct[f].push_back(v);
    const std::size_t p = sv_parent[group_top[gidx]];
    if (p != kNone) sym.parent[f] = front_index[group_of[p]];
    const std::size_t k = sym.front_vars[f].size();
    sym.predicted_nnz += k * k + 2 * k * sym.front_struct[f].size();
  }
  return sym;
}

const SparseBackend& default_backend() {
  static const MultifrontalBackend backend;
  return backend;
}

std::unique_ptr<FactorizedSystem> MultifrontalBackend::analyze_and_factor(
    const SparseMatrix& a, const FactorOptions& options) const {
  return std::make_unique<MultifrontalLU>(a, options);
}

std::unique_ptr<FactorizedSystem> analyze_and_factor(const SparseMatrix& a,
                                                     const FactorOptions& options) {
  return default_backend().analyze_and_factor(a, options);
}

}  // namespace hps
