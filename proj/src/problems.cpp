#include "hps/problems.hpp"

#include <cmath>
#include <numbers>

#include "hps/errors.hpp"

namespace hps {

namespace {

double norm(const double* x, std::size_t d) {
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) s += x[k] * x[k];
  return std::sqrt(s);
}

void require_origin_outside(const DomainBox& domain, const std::string& name) {
  domain.validate();
  bool inside = true;
  for (std::size_t k = 0; k < domain.dim(); ++k)
    inside = inside && domain.lo[k] <= 0.0 && 0.0 <= domain.hi[k];
  if (inside) throw ConfigError(name + ": the origin lies in the closed domain");
}

double green_laplace(const double* x, std::size_t d) {
  const double r = norm(x, d);
  return d == 3 ? 1.0 / (4.0 * std::numbers::pi * r) : -std::log(r) / (2.0 * std::numbers::pi);
}

double green_helmholtz(const double* x, std::size_t d, double kappa) {
  const double r = norm(x, d);
  if (d == 3) return std::cos(kappa * r) / (4.0 * std::numbers::pi * r);
  if (kappa == 0.0) return green_laplace(x, d);
  return -0.25 * std::cyl_neumann(0.0, kappa * r);
}

}  // namespace

DomainBox default_domain(const std::string& name, std::size_t dim) {
  if (dim != 2 && dim != 3) throw ConfigError("dimension must be 2 or 3");
  DomainBox box;
  if (name == "poisson_green" || name == "helmholtz_green") {
    box = {{-1.1, 1.0, 1.2}, {0.1, 2.0, 2.2}};
  } else if (name == "gravity_helmholtz" || name == "curved_helmholtz") {
    box = {{1.1, -1.0, -1.2}, {2.1, 0.0, -0.2}};
  } else if (name == "heat_manufactured") {
    box = {{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}};
  } else if (name == "convection_diffusion" || name == "zero_operator") {
    box = {{-0.5, -0.5, -0.5}, {0.5, 0.5, 0.5}};
  } else {
    throw ConfigError("unknown problem '" + name + "'");
  }
  box.lo.resize(dim);
  box.hi.resize(dim);
  return box;
}

ProblemSpec poisson_green(const DomainBox& domain) {
  require_origin_outside(domain, "poisson_green");
  const std::size_t d = domain.dim();
  ProblemSpec s;
  s.name = "poisson_green";
  s.domain = domain;
  s.coeffs = laplace(d);
  s.exact = [d](const double* x) { return green_laplace(x, d); };
  s.g = s.exact;
  return s;
}

ProblemSpec helmholtz_green(const DomainBox& domain, double kappa) {
  require_origin_outside(domain, "helmholtz_green");
  const std::size_t d = domain.dim();
  ProblemSpec s;
  s.name = "helmholtz_green";
  s.domain = domain;
  s.coeffs = helmholtz(d, kappa * kappa);
  s.exact = [d, kappa](const double* x) { return green_helmholtz(x, d, kappa); };
  s.g = s.exact;
  return s;
}

ProblemSpec gravity_helmholtz(const DomainBox& domain, double kappa) {
  domain.validate();
  const std::size_t d = domain.dim();
  const double k2 = kappa * kappa;
  ProblemSpec s;
  s.name = "gravity_helmholtz";
  s.domain = domain;
  s.coeffs = laplace(d);
  s.coeffs.zeroth_order = [k2, d](const double* x) { return -k2 * (1.0 - x[d - 1]); };
  s.f = [](const double*) { return 1.0; };
  s.g = [](const double*) { return 0.0; };
  return s;
}

ProblemSpec curved_helmholtz(double kappa, double amplitude, double frequency, std::size_t dim) {
  const DomainBox domain = default_domain("curved_helmholtz", dim);
  const ParameterMap map = sinusoidal_map(amplitude, frequency, dim);
  ProblemSpec s;
  s.name = "curved_helmholtz";
  s.domain = domain;
  s.coeffs = map.coefficient_transform(helmholtz(dim, kappa * kappa));
  auto forward = map.forward;
  s.exact = [forward, dim, kappa](const double* x) {
    double z[3];
    forward(x, z);
    return green_helmholtz(z, dim, kappa);
  };
  s.g = s.exact;
  return s;
}

ProblemSpec make_problem(const std::string& name, const ProblemParams& params) {
  if (name == "poisson_green") return poisson_green(default_domain(name, params.dim));
  if (name == "helmholtz_green") return helmholtz_green(default_domain(name, params.dim), params.kappa);
  if (name == "gravity_helmholtz")
    return gravity_helmholtz(default_domain(name, params.dim), params.kappa);
  if (name == "curved_helmholtz")
    return curved_helmholtz(params.kappa, params.amplitude, params.frequency, params.dim);
  throw ConfigError("unknown problem '" + name + "'");
}

const std::vector<std::string>& elliptic_problems() {
  static const std::vector<std::string> names = {"poisson_green", "helmholtz_green",
                                                 "gravity_helmholtz", "curved_helmholtz"};
  return names;
}

double relative_l2_error(std::span<const double> u, std::span<const double> exact) {
  if (u.size() != exact.size()) throw ConfigError("relative_l2_error: size mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    num += (u[i] - exact[i]) * (u[i] - exact[i]);
    den += exact[i] * exact[i];
  }
  if (den == 0.0) throw NumericError("relative_l2_error: exact solution has zero norm");
  return std::sqrt(num / den);
}

double relative_l2_error(const Discretization& disc, std::span<const double> u,
                         const ScalarFunction& exact) {
  std::vector<double> ref(disc.node_count());
  for (std::size_t i = 0; i < ref.size(); ++i) ref[i] = exact(disc.node(i));
  return relative_l2_error(u, ref);
}

ParabolicSpec heat_manufactured(std::size_t dim) {
  ParabolicSpec s;
  s.name = "heat_manufactured";
  s.domain = default_domain(s.name, dim);
  s.diffusivity = 1.0;
  auto shape = [dim](const double* x) {
    double v = 1.0;
    for (std::size_t k = 0; k < dim; ++k) v *= std::sin(std::numbers::pi * x[k]);
    return v;
  };
  const double rate = static_cast<double>(dim) * std::numbers::pi * std::numbers::pi;
  s.u0 = shape;
  s.exact = [shape, rate](double t, const double* x) { return std::exp(-rate * t) * shape(x); };
  return s;
}

ParabolicSpec convection_diffusion(double diffusivity) {
  ParabolicSpec s;
  s.name = "convection_diffusion";
  s.domain = default_domain(s.name, 3);
  s.diffusivity = diffusivity;
  s.velocity = [](const double* x, double* b) {
    b[0] = -std::cos(x[0]) * std::sin(x[1]) * x[2];
    b[1] = std::sin(x[0]) * std::cos(x[1]) * x[2];
    b[2] = 0.0;
  };
  s.divergence = [](const double* x) {
    return std::sin(x[0]) * std::sin(x[1]) * x[2] - std::sin(x[0]) * std::sin(x[1]) * x[2];
  };
  s.u0 = [](const double* x) {
    const double r2 = x[0] * x[0] + (x[1] + 0.3) * (x[1] + 0.3) + x[2] * x[2];
    return std::exp(-r2 / 0.002);
  };
  return s;
}

ParabolicSpec make_parabolic(const std::string& name, std::size_t dim) {
  if (name == "heat_manufactured") return heat_manufactured(dim);
  if (name == "convection_diffusion") {
    if (dim != 3) throw ConfigError("convection_diffusion is three-dimensional");
    return convection_diffusion();
  }
  if (name == "zero_operator") {
    ParabolicSpec s;
    s.name = name;
    s.domain = default_domain(name, dim);
    s.diffusivity = 0.0;
    s.u0 = [dim](const double* x) {
      double v = 1.0;
      for (std::size_t k = 0; k < dim; ++k) v *= 0.25 - x[k] * x[k];
      return v;
    };
    s.exact = [u0 = s.u0](double, const double* x) { return u0(x); };
    return s;
  }
  throw ConfigError("unknown problem '" + name + "'");
}

const std::vector<std::string>& parabolic_problems() {
  static const std::vector<std::string> names = {"heat_manufactured", "convection_diffusion",
                                                 "zero_operator"};
  return names;
}

CoefficientField shifted_operator(const ParabolicSpec& spec, double s) {
  const std::size_t d = spec.domain.dim();
  CoefficientField c;
  c.dim = d;
  const double a = s * spec.diffusivity;
  c.second_order = [a, d](const double*, double* out) {
    for (std::size_t i = 0; i < d * d; ++i) out[i] = 0.0;
    for (std::size_t i = 0; i < d; ++i) out[i * d + i] = a;
  };
  if (spec.velocity) {
    auto vel = spec.velocity;
    c.first_order = [vel, s, d](const double* x, double* b) {
      double v[3] = {0.0, 0.0, 0.0};
      vel(x, v);
      for (std::size_t i = 0; i < d; ++i) b[i] = -s * v[i];
    };
  }
  auto div = spec.divergence;
  c.zeroth_order = [div, s](const double* x) { return 1.0 + (div ? s * div(x) : 0.0); };
  return c;
}

}  // namespace hps
