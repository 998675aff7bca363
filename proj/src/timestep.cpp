#include <cmath>
#include <optional>

#include "hps/errors.hpp"
#include "hps/local_ops.hpp"
#include "hps/problems.hpp"

namespace hps {

Trajectory crank_nicolson_run(std::shared_ptr<const Discretization> disc, const ParabolicSpec& spec,
                              const TimeStepConfig& cfg, BatchSchedule schedule) {
  if (!(cfg.dt > 0.0) || !(cfg.t_end >= cfg.dt))
    throw ConfigError("time stepping needs dt > 0 and t_end >= dt");
  if (disc->dim() != spec.domain.dim()) throw ConfigError("problem and mesh dimensions differ");
  const auto steps = static_cast<std::size_t>(std::llround(cfg.t_end / cfg.dt));
  if (std::abs(static_cast<double>(steps) * cfg.dt - cfg.t_end) > 1e-9 * cfg.t_end)
    throw ConfigError("t_end must be a whole number of time steps");

  Solver solver(disc, shifted_operator(spec, 0.5 * cfg.dt), schedule);
  const CoefficientField rhs_op = shifted_operator(spec, -0.5 * cfg.dt);
  const auto tmpl = solver.system().tmpl_ptr();
  const std::size_t ni = tmpl->n_i(), nleaves = disc->leaves.size();

  std::vector<std::optional<CollocationBlocks>> cached(schedule.cache_leaves ? nleaves : 0);

  Trajectory traj;
  std::vector<double> u(disc->node_count(), 0.0);
  for (std::size_t i = 0; i < disc->dirichlet_begin; ++i) u[i] = spec.u0(disc->node(i));
  auto record = [&](double t) {
    traj.times.push_back(t);
    traj.snapshots.push_back(u);
  };
  if (cfg.snapshot_stride > 0) record(0.0);

  LoadData load;
  load.f.resize(disc->interface_begin);
  load.g.assign(disc->node_count() - disc->dirichlet_begin, 0.0);
  for (std::size_t n = 1; n <= steps; ++n) {
    parallel_for(nleaves, schedule.workers, [&](std::size_t id) {
      std::optional<CollocationBlocks> local;
      std::optional<CollocationBlocks>& blocks = schedule.cache_leaves ? cached[id] : local;
      if (!blocks) blocks = collocate(*tmpl, disc->leaves[id], rhs_op);
      const auto ub = leaf_boundary_values(*disc, id, u);
      const double* ui = u.data() + id * ni;
      double* f = load.f.data() + id * ni;
      for (std::size_t r = 0; r < ni; ++r) {
        double s = 0.0;
        const double* aii = blocks->a_ii.row(r);
        const double* aib = blocks->a_ib.row(r);
        for (std::size_t c = 0; c < ni; ++c) s += aii[c] * ui[c];
        for (std::size_t c = 0; c < ub.size(); ++c) s += aib[c] * ub[c];
        f[r] = s;
      }
    });
    u = solver.solve(load).u;
    if (cfg.snapshot_stride > 0 && (n % cfg.snapshot_stride == 0 || n == steps))
      record(static_cast<double>(n) * cfg.dt);
  }

  traj.steps = steps;
  traj.final = u;
  traj.factorizations = solver.system().factorizations;
  traj.log = solver.log();
  if (spec.exact) {
    const double t = static_cast<double>(steps) * cfg.dt;
    traj.final_error = relative_l2_error(*disc, u, [&](const double* x) { return spec.exact(t, x); });
  }
  return traj;
}

}  // namespace hps
