#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hps/coefficients.hpp"
#include "hps/condensation.hpp"
#include "hps/geometry.hpp"
#include "hps/local_ops.hpp"

namespace hps {

struct ProblemSpec {
  std::string name;
  DomainBox domain;  // the box the solver discretizes (reference box when mapped)
  CoefficientField coeffs;
  ScalarFunction f;
  ScalarFunction g;
  ScalarFunction exact;  // empty when no closed form is known

  bool has_exact() const { return static_cast<bool>(exact); }
  CornerMode corner_mode() const {
    return coeffs.cross_terms ? CornerMode::LegendreFaces : CornerMode::DropCorners;
  }
};

struct ProblemParams {
  double kappa = 16.0;
  double amplitude = 0.25;
  double frequency = 6.0;
  std::size_t dim = 3;
};

// Default domain for a named problem in 2D or 3D.
DomainBox default_domain(const std::string& name, std::size_t dim);

// -Delta u = 0 with the free-space Green's function as exact solution.
ProblemSpec poisson_green(const DomainBox& domain);
// Delta u + kappa^2 u = 0, exact cos(kappa r) / (4 pi r) in 3D and
// -Y0(kappa r) / 4 in 2D.
ProblemSpec helmholtz_green(const DomainBox& domain, double kappa);
// Delta u + kappa^2 (1 - x_d) u = -1, u = 0 on the boundary.
ProblemSpec gravity_helmholtz(const DomainBox& domain, double kappa);
// Helmholtz on the sinusoidal domain, posed on the reference box through
// sinusoidal_map(amplitude, frequency).
ProblemSpec curved_helmholtz(double kappa, double amplitude = 0.25, double frequency = 6.0,
                             std::size_t dim = 3);

ProblemSpec make_problem(const std::string& name, const ProblemParams& params);
const std::vector<std::string>& elliptic_problems();

// Relative l2 error over all nodes.
double relative_l2_error(std::span<const double> u, std::span<const double> exact);
double relative_l2_error(const Discretization& disc, std::span<const double> u,
                         const ScalarFunction& exact);

// u_t = A u with A u = k Delta u - div(b u), homogeneous Dirichlet data.
struct ParabolicSpec {
  std::string name;
  DomainBox domain;
  double diffusivity = 1.0;
  std::function<void(const double* x, double* b)> velocity;  // empty: b = 0
  ScalarFunction divergence;                                 // div b; empty: 0
  ScalarFunction u0;
  std::function<double(double t, const double* x)> exact;   // may be empty
};

// u_t = Delta u on [0,1]^d with exact exp(-d pi^2 t) prod sin(pi x_i).
ParabolicSpec heat_manufactured(std::size_t dim = 3);
// Contaminant in a circular horizontal flow on [-0.5,0.5]^3.
ParabolicSpec convection_diffusion(double diffusivity = 1e-4);
ParabolicSpec make_parabolic(const std::string& name, std::size_t dim = 3);
const std::vector<std::string>& parabolic_problems();

// I - s A with s = dt/2 (implicit side) or s = -dt/2 (explicit side).
CoefficientField shifted_operator(const ParabolicSpec& spec, double s);

struct TimeStepConfig {
  double dt = 0.1;
  double t_end = 1.0;
  std::size_t snapshot_stride = 0;  // 0: keep only the final state
};

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> snapshots;  // node values at `times`
  std::vector<double> final;
  std::size_t steps = 0;
  std::size_t factorizations = 0;
  std::vector<Solver::Event> log;
  double final_error = -1.0;  // relative l2 error at t_end when exact is known
};

Trajectory crank_nicolson_run(std::shared_ptr<const Discretization> disc, const ParabolicSpec& spec,
                              const TimeStepConfig& cfg, BatchSchedule schedule = {});

// Leaf boundary DOFs gathered face by face from a global node vector.
std::vector<double> leaf_boundary_values(const Discretization& disc, std::size_t leaf,
                                         std::span<const double> u);
// Values on the full p^d Chebyshev grid of one leaf. Grid nodes without a
// DOF (dropped corners and edges) are NaN.
std::vector<double> leaf_grid_values(const Discretization& disc, const LeafTemplate& tmpl,
                                     std::size_t leaf, std::span<const double> u);

// Centre of mass over x_3 > 0 of the nodal field, using tensor
// Clenshaw-Curtis weights on every leaf.
std::vector<double> upper_mass_center(const Discretization& disc, std::span<const double> u);
std::vector<double> clenshaw_curtis_weights(std::size_t p);

// Leafwise tensor interpolation of a LegendreFaces solution at `points`
// (count x d, each inside the domain).
std::vector<double> interpolate_solution(const Discretization& disc, std::span<const double> u,
                                         std::span<const double> points);

}  // namespace hps
