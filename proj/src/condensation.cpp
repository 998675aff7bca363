#include "hps/condensation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "hps/errors.hpp"
#include "hps/simd/kernels.hpp"

namespace hps {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::size_t ipow(std::size_t b, std::size_t e) {
  std::size_t r = 1;
  while (e-- > 0) r *= b;
  return r;
}

std::size_t find_in_row(const std::vector<std::size_t>& row_ptr,
                        const std::vector<std::size_t>& col_idx, std::size_t row,
                        std::size_t col) {
  const auto first = col_idx.begin() + static_cast<std::ptrdiff_t>(row_ptr[row]);
  const auto last = col_idx.begin() + static_cast<std::ptrdiff_t>(row_ptr[row + 1]);
  const auto it = std::lower_bound(first, last, col);
  if (it == last || *it != col) throw Error("interface pattern is missing a coupling block");
  return static_cast<std::size_t>(it - col_idx.begin());
}

}  // namespace

void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& body) {
  const std::size_t nt = std::min(std::max<std::size_t>(workers, 1), n);
  if (nt <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_at = n;
  std::exception_ptr failure;
  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t k = 0; k < nt; ++k) pool.emplace_back(run);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

std::size_t estimate_workspace(std::size_t p, std::size_t d) {
  return estimate_workspace(p, d, CornerMode::DropCorners);
}

std::size_t estimate_workspace(std::size_t p, std::size_t d, CornerMode mode) {
  if (p < 4) throw ConfigError("estimate_workspace: p must be at least 4");
  const std::size_t ni = ipow(p - 2, d);
  const std::size_t q = mode == CornerMode::DropCorners ? p - 2 : p - 1;
  const std::size_t nb = 2 * d * ipow(q, d - 1);
  return sizeof(double) * (ni * ni + ni * nb + nb * nb);
}

void CouplingMatrix::subtract_product(const double* x, double* y) const {
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0.0;
    for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) s += values[p] * x[col_idx[p]];
    y[i] -= s;
  }
}

std::shared_ptr<const LeafFactors> InterfaceSystem::leaf(std::size_t id, bool need_dtn) const {
  if (!cache_.empty()) return cache_[id];
  return std::make_shared<const LeafFactors>(
      build_leaf_operator(tmpl_, disc_->leaves[id], id, coeffs_, need_dtn));
}

InterfaceSystem build(std::shared_ptr<const Discretization> disc_ptr, CoefficientField coeffs,
                      const BatchSchedule& schedule, const BuildOptions& options) {
  const Discretization& disc = *disc_ptr;
  check_corner_mode(coeffs, disc);
  if (schedule.batch_size == 0) throw ConfigError("batch_size must be at least 1");
  if (schedule.resident_limit == 0) throw ConfigError("resident_limit must be at least 1");

  InterfaceSystem sys;
  sys.disc_ = disc_ptr;
  sys.coeffs_ = std::move(coeffs);
  sys.schedule_ = schedule;
  sys.tmpl_ = make_leaf_template(disc);
  const LeafTemplate& tmpl = *sys.tmpl_;
  const std::size_t nf = tmpl.face_dofs;
  const std::size_t ib = disc.interface_begin, db = disc.dirichlet_begin;
  const std::size_t n_if = db - ib, n_dir = disc.node_count() - db;
  const std::size_t nleaves = disc.leaves.size();

  auto t0 = Clock::now();
  // Block pattern: each interface face couples to every face of its two leaves.
  std::vector<std::size_t> row_ptr{0}, col_idx;
  CouplingMatrix& cm = sys.dirichlet_coupling;
  cm.rows = n_if;
  cm.cols = n_dir;
  cm.row_ptr = {0};
  sys.dof_map.resize(n_if);
  for (const Face& f : disc.faces) {
    if (f.boundary) continue;
    std::vector<std::size_t> inner, outer;
    for (std::size_t leaf : f.leaves)
      for (std::size_t g : disc.leaf_faces(leaf)) {
        const Face& fg = disc.faces[g];
        (fg.boundary ? outer : inner).push_back(fg.first_node);
      }
    std::sort(inner.begin(), inner.end());
    inner.erase(std::unique(inner.begin(), inner.end()), inner.end());
    std::sort(outer.begin(), outer.end());
    outer.erase(std::unique(outer.begin(), outer.end()), outer.end());
    for (std::size_t j = 0; j < nf; ++j) {
      for (std::size_t first : inner)
        for (std::size_t c = 0; c < nf; ++c) col_idx.push_back(first - ib + c);
      row_ptr.push_back(col_idx.size());
      for (std::size_t first : outer)
        for (std::size_t c = 0; c < nf; ++c) cm.col_idx.push_back(first - db + c);
      cm.row_ptr.push_back(cm.col_idx.size());
      sys.dof_map[f.first_node - ib + j] = {
          DofRef{f.leaves[0], 2 * f.axis + 1, j}, DofRef{f.leaves[1], 2 * f.axis, j}};
    }
  }
  sys.t = SparseMatrix(n_if, std::move(row_ptr), std::move(col_idx));
  cm.values.assign(cm.col_idx.size(), 0.0);
  double t_assembly = seconds_since(t0);

  auto scatter = [&](std::size_t id, const Matrix& dtn) {
    const auto& lf = disc.leaf_faces(id);
    for (std::size_t k = 0; k < lf.size(); ++k) {
      const Face& fk = disc.faces[lf[k]];
      if (fk.boundary) continue;
      for (std::size_t r = 0; r < nf; ++r) {
        const std::size_t row = fk.first_node - ib + r;
        const double* src = dtn.row(k * nf + r);
        for (std::size_t l = 0; l < lf.size(); ++l) {
          const Face& fl = disc.faces[lf[l]];
          double* dst;
          if (fl.boundary)
            dst = cm.values.data() + find_in_row(cm.row_ptr, cm.col_idx, row, fl.first_node - db);
          else
            dst = sys.t.values().data() +
                  find_in_row(sys.t.row_ptr(), sys.t.col_idx(), row, fl.first_node - ib);
          for (std::size_t c = 0; c < nf; ++c) dst[c] += src[l * nf + c];
        }
      }
    }
  };

  // Two-level schedule: up to batch_size leaves in flight, finished DtN
  // blocks held until resident_limit is reached, then scattered in leaf order.
  const std::size_t ws = estimate_workspace(disc.p(), disc.dim(), disc.mesh.corner_mode);
  const std::size_t tbytes = sizeof(double) * tmpl.n_b * tmpl.n_b;
  if (nleaves > 0 && ws > schedule.memory_budget)
    throw ConfigError("memory budget of " + std::to_string(schedule.memory_budget) +
                      " bytes cannot hold one leaf workspace of " + std::to_string(ws) +
                      " bytes");
  if (schedule.cache_leaves) sys.cache_.resize(nleaves);
  std::vector<std::pair<std::size_t, Matrix>> resident;
  ScheduleStats& st = sys.schedule_stats;
  double dtn_time = 0.0;
  auto flush = [&] {
    auto ts = Clock::now();
    for (auto& [id, dtn] : resident) scatter(id, dtn);
    resident.clear();
    ++st.flushes;
    t_assembly += seconds_since(ts);
  };

  std::size_t next = 0;
  while (next < nleaves) {
    std::size_t b = std::min(schedule.batch_size, nleaves - next);
    while (b > 0 && resident.size() * tbytes + b * ws > schedule.memory_budget) {
      if (!resident.empty()) flush();
      else --b;
    }
    st.peak_bytes = std::max(st.peak_bytes, resident.size() * tbytes + b * ws);
    st.max_in_flight = std::max(st.max_in_flight, b);
    ++st.batches;
    std::vector<Matrix> out(b);
    auto ts = Clock::now();
    parallel_for(b, schedule.workers, [&](std::size_t i) {
      const std::size_t id = next + i;
      auto lf = std::make_shared<LeafFactors>(
          build_leaf_operator(sys.tmpl_, disc.leaves[id], id, sys.coeffs_, true));
      out[i] = lf->release_dtn();
      if (schedule.cache_leaves) sys.cache_[id] = std::move(lf);
    });
    dtn_time += seconds_since(ts);
    for (std::size_t i = 0; i < b; ++i) resident.emplace_back(next + i, std::move(out[i]));
    next += b;
    if (resident.size() >= schedule.resident_limit) flush();
  }
  if (!resident.empty()) flush();

  auto tf = Clock::now();
  const SparseBackend& backend = options.backend ? *options.backend : default_backend();
  sys.factorization = backend.analyze_and_factor(sys.t, options.factor);
  ++sys.factorizations;
  sys.build_times.factorize = seconds_since(tf);
  sys.build_times.dtn_assembly = dtn_time;
  sys.build_times.t_assembly = t_assembly;
  return sys;
}

LoadData sample_load(const Discretization& disc, const ScalarFunction& f,
                     const ScalarFunction& g) {
  LoadData load;
  load.f.resize(disc.interface_begin);
  for (std::size_t i = 0; i < disc.interface_begin; ++i) load.f[i] = f ? f(disc.node(i)) : 0.0;
  load.g.resize(disc.node_count() - disc.dirichlet_begin);
  for (std::size_t i = 0; i < load.g.size(); ++i)
    load.g[i] = g ? g(disc.node(disc.dirichlet_begin + i)) : 0.0;
  return load;
}

ReducedLoad reduce_load(const InterfaceSystem& sys, const LoadData& load) {
  const Discretization& disc = sys.disc();
  if (load.f.size() != disc.interface_begin || load.g.size() != disc.node_count() - disc.dirichlet_begin)
    throw ConfigError("load data does not match the discretization");
  auto t0 = Clock::now();
  const LeafTemplate& tmpl = sys.tmpl();
  const std::size_t ni = tmpl.n_i(), nb = tmpl.n_b, nf = tmpl.face_dofs;
  const std::size_t nleaves = disc.leaves.size();
  ReducedLoad out;
  out.v = load.f;
  out.g = load.g;
  out.g_b.assign(sys.size(), 0.0);
  std::vector<double> contrib(nleaves * nb);
  parallel_for(nleaves, sys.schedule().workers, [&](std::size_t id) {
    auto lf = sys.leaf(id, false);
    double* v = out.v.data() + id * ni;
    lf->interior_solve(v, 1);
    const Matrix& abi = lf->a_bi();
    for (std::size_t r = 0; r < nb; ++r) contrib[id * nb + r] = simd::dot(ni, abi.row(r), v);
  });
  for (std::size_t id = 0; id < nleaves; ++id) {
    const auto& lf = disc.leaf_faces(id);
    for (std::size_t k = 0; k < lf.size(); ++k) {
      const Face& f = disc.faces[lf[k]];
      if (f.boundary) continue;
      for (std::size_t j = 0; j < nf; ++j)
        out.g_b[f.first_node - disc.interface_begin + j] -= contrib[id * nb + k * nf + j];
    }
  }
  sys.dirichlet_coupling.subtract_product(out.g.data(), out.g_b.data());
  out.seconds = seconds_since(t0);
  return out;
}

SolveReport solve(const InterfaceSystem& sys, const ReducedLoad& load) {
  const Discretization& disc = sys.disc();
  if (load.g_b.size() != sys.size() || load.v.size() != disc.interface_begin ||
      load.g.size() != disc.node_count() - disc.dirichlet_begin)
    throw ConfigError("right-hand side does not match the interface system");
  SolveReport rep;
  rep.wall_times.load_reduction = load.seconds;
  rep.u.assign(disc.node_count(), 0.0);

  auto t0 = Clock::now();
  std::vector<double> ub = load.g_b;
  if (!ub.empty()) sys.factorization->solve_in_place(ub.data(), 1);
  rep.wall_times.interface_solve = seconds_since(t0);
  std::copy(ub.begin(), ub.end(), rep.u.begin() + static_cast<std::ptrdiff_t>(disc.interface_begin));
  std::copy(load.g.begin(), load.g.end(), rep.u.begin() + static_cast<std::ptrdiff_t>(disc.dirichlet_begin));

  auto tr = sys.t.multiply(ub);
  double rn = 0.0, gn = 0.0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    rn += (tr[i] - load.g_b[i]) * (tr[i] - load.g_b[i]);
    gn += load.g_b[i] * load.g_b[i];
  }
  rep.residual = gn > 0.0 ? std::sqrt(rn / gn) : std::sqrt(rn);

  auto t1 = Clock::now();
  const LeafTemplate& tmpl = sys.tmpl();
  const std::size_t ni = tmpl.n_i(), nb = tmpl.n_b, nf = tmpl.face_dofs;
  parallel_for(disc.leaves.size(), sys.schedule().workers, [&](std::size_t id) {
    std::vector<double> bvals(nb);
    const auto& lfaces = disc.leaf_faces(id);
    for (std::size_t k = 0; k < lfaces.size(); ++k) {
      const Face& f = disc.faces[lfaces[k]];
      std::copy_n(rep.u.data() + f.first_node, nf, bvals.data() + k * nf);
    }
    auto lf = sys.leaf(id, false);
    double* ui = rep.u.data() + id * ni;
    std::copy_n(load.v.data() + id * ni, ni, ui);
    if (!lf->s().empty()) {
      for (std::size_t r = 0; r < ni; ++r) ui[r] += simd::dot(nb, lf->s().row(r), bvals.data());
    } else {
      std::vector<double> w(ni);
      for (std::size_t r = 0; r < ni; ++r) w[r] = simd::dot(nb, lf->a_ib().row(r), bvals.data());
      lf->interior_solve(w.data(), 1);
      for (std::size_t r = 0; r < ni; ++r) ui[r] -= w[r];
    }
  });
  rep.wall_times.interior_solve = seconds_since(t1);
  return rep;
}

Solver::Solver(std::shared_ptr<const Discretization> disc, CoefficientField coeffs,
               const BatchSchedule& schedule, const BuildOptions& options)
    : sys_(build(std::move(disc), std::move(coeffs), schedule, options)) {
  log_.push_back({"dtn_assembly", sys_.build_times.dtn_assembly});
  log_.push_back({"t_assembly", sys_.build_times.t_assembly});
  log_.push_back({"factorize", sys_.build_times.factorize});
}

SolveReport Solver::solve(const LoadData& load) {
  ReducedLoad red = reduce_load(sys_, load);
  SolveReport rep = hps::solve(sys_, red);
  if (!reported_build_) {
    rep.wall_times.dtn_assembly = sys_.build_times.dtn_assembly;
    rep.wall_times.t_assembly = sys_.build_times.t_assembly;
    rep.wall_times.factorize = sys_.build_times.factorize;
    reported_build_ = true;
  }
  log_.push_back({"load_reduction", rep.wall_times.load_reduction});
  log_.push_back({"interface_solve", rep.wall_times.interface_solve});
  log_.push_back({"interior_solve", rep.wall_times.interior_solve});
  return rep;
}

SolveReport Solver::solve(const ScalarFunction& f, const ScalarFunction& g) {
  return solve(sample_load(sys_.disc(), f, g));
}

}  // namespace hps
