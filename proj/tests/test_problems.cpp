#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "hps/errors.hpp"
#include "hps/oracle.hpp"
#include "hps/problems.hpp"

using namespace hps;

namespace {

// Sixth-order central differences.
constexpr double kC1[4] = {0.0, 3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0};
constexpr double kC2[4] = {-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0};

double fd_apply(const ProblemSpec& s, const double* x, double h) {
  const std::size_t d = s.domain.dim();
  double a[9], b[3], c;
  s.coeffs.evaluate(x, a, b, c);
  auto u = [&](int i, int oi, int j, int oj) {
    double y[3] = {x[0], x[1], d > 2 ? x[2] : 0.0};
    y[i] += oi * h;
    y[j] += oj * h;
    return s.exact(y);
  };
  double lu = c * s.exact(x);
  for (std::size_t i = 0; i < d; ++i) {
    const int ii = static_cast<int>(i);
    double d1 = 0.0, d2 = kC2[0] * s.exact(x);
    for (int k = 1; k <= 3; ++k) {
      d1 += kC1[k] * (u(ii, k, ii, 0) - u(ii, -k, ii, 0));
      d2 += kC2[k] * (u(ii, k, ii, 0) + u(ii, -k, ii, 0));
    }
    lu -= a[i * 3 + i] * d2 / (h * h) + b[i] * d1 / h;
    for (std::size_t j = 0; j < d; ++j) {
      if (j == i || a[i * 3 + j] == 0.0) continue;
      const int jj = static_cast<int>(j);
      double dij = 0.0;
      for (int k = 1; k <= 3; ++k)
        for (int l = 1; l <= 3; ++l)
          dij += kC1[k] * kC1[l] *
                 (u(ii, k, jj, l) - u(ii, k, jj, -l) - u(ii, -k, jj, l) + u(ii, -k, jj, -l));
      lu -= a[i * 3 + j] * dij / (h * h);
    }
  }
  return lu - (s.f ? s.f(x) : 0.0);
}

std::vector<std::vector<double>> interior_samples(const DomainBox& box, std::size_t n,
                                                  unsigned seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> pts;
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> x(box.dim());
    for (std::size_t i = 0; i < box.dim(); ++i) {
      const double margin = 0.05 * (box.hi[i] - box.lo[i]);
      std::uniform_real_distribution<double> u(box.lo[i] + margin, box.hi[i] - margin);
      x[i] = u(rng);
    }
    pts.push_back(x);
  }
  return pts;
}

}  // namespace

TEST_CASE("Green's function values on the default domain") {
  auto s = poisson_green(default_domain("poisson_green", 3));
  const double x[3] = {0.5, 1.5, 1.7};
  CHECK(s.exact(x) == doctest::Approx(1.0 / (4.0 * std::numbers::pi * std::sqrt(0.25 + 2.25 + 2.89))));
  CHECK(s.g(x) == s.exact(x));
  auto h0 = helmholtz_green(default_domain("helmholtz_green", 3), 0.0);
  CHECK(h0.exact(x) == s.exact(x));
  CHECK_THROWS_AS(poisson_green(DomainBox{{-1, -1, -1}, {1, 1, 1}}), ConfigError);
  CHECK_THROWS_AS(make_problem("no_such_problem", {}), ConfigError);
}

TEST_CASE("manufactured solutions satisfy their PDE at random interior points") {
  struct Case {
    ProblemSpec spec;
    double tol;
  };
  std::vector<Case> cases;
  for (std::size_t d : {2u, 3u}) {
    cases.push_back({poisson_green(default_domain("poisson_green", d)), 1e-9});
    cases.push_back({helmholtz_green(default_domain("helmholtz_green", d), 16.0), 1e-8});
    cases.push_back({curved_helmholtz(16.0, 0.25, 6.0, d), 1e-7});
  }
  for (const auto& c : cases) {
    CAPTURE(c.spec.name);
    CAPTURE(c.spec.domain.dim());
    double worst = 0.0;
    for (const auto& x : interior_samples(c.spec.domain, 20, 7))
      worst = std::max(worst, std::abs(fd_apply(c.spec, x.data(), 2e-3)));
    CHECK(worst <= c.tol);
  }
}

TEST_CASE("gravity Helmholtz coefficients and data") {
  const double kappa = 12.0;
  auto s = gravity_helmholtz(default_domain("gravity_helmholtz", 3), kappa);
  CHECK_FALSE(s.has_exact());
  for (const auto& x : interior_samples(s.domain, 50, 3)) {
    double a[9], b[3], c;
    s.coeffs.evaluate(x.data(), a, b, c);
    const double w = -c / (kappa * kappa);
    CHECK(w > 1.0);
    CHECK(w < 2.2);
    CHECK(s.f(x.data()) == 1.0);
    CHECK(s.g(x.data()) == 0.0);
  }
}

TEST_CASE("curved Helmholtz reduces to the flat operator at zero amplitude") {
  auto flat = helmholtz(3, 16.0 * 16.0);
  auto curved = curved_helmholtz(16.0, 0.0);
  CHECK(curved.corner_mode() == CornerMode::DropCorners);
  for (const auto& x : interior_samples(curved.domain, 20, 5)) {
    double a0[9], b0[3], c0, a1[9], b1[3], c1;
    flat.evaluate(x.data(), a0, b0, c0);
    curved.coeffs.evaluate(x.data(), a1, b1, c1);
    for (int k = 0; k < 9; ++k) CHECK(a1[k] == doctest::Approx(a0[k]));
    for (int k = 0; k < 3; ++k) CHECK(b1[k] == doctest::Approx(b0[k]));
    CHECK(c1 == doctest::Approx(c0));
  }
  auto bent = curved_helmholtz(16.0);
  CHECK(bent.corner_mode() == CornerMode::LegendreFaces);
  // psi'(x1) = 0 where cos(6 x1) = 0.
  const double x[3] = {5.0 * std::numbers::pi / 12.0, -0.5, -0.7};
  double a[9], b[3], c;
  bent.coeffs.evaluate(x, a, b, c);
  CHECK(std::abs(a[1]) <= 1e-14);
  CHECK(std::abs(a[3]) <= 1e-14);
}

TEST_CASE("relative l2 error") {
  std::vector<double> e = {1.0, -2.0, 3.0, 0.5};
  CHECK(relative_l2_error(e, e) == 0.0);
  std::vector<double> u = e;
  for (auto& v : u) v *= 1.01;
  CHECK(relative_l2_error(u, e) == doctest::Approx(0.01).epsilon(1e-12));
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  std::vector<double> big(5000), pert(5000);
  for (std::size_t i = 0; i < big.size(); ++i) {
    big[i] = nd(rng);
    pert[i] = big[i] + 1e-3 * nd(rng);
  }
  // Reverse-order summation as an independent reference.
  double num = 0.0, den = 0.0;
  for (std::size_t i = big.size(); i-- > 0;) {
    num += (pert[i] - big[i]) * (pert[i] - big[i]);
    den += big[i] * big[i];
  }
  CHECK(relative_l2_error(pert, big) == doctest::Approx(std::sqrt(num / den)).epsilon(1e-12));
  std::vector<double> zero(4, 0.0);
  CHECK_THROWS_AS(relative_l2_error(e, zero), NumericError);
}

TEST_CASE("registry problems match the dense oracle on 2x2 boxes") {
  for (std::size_t d : {2u, 3u}) {
    for (const auto& name : elliptic_problems()) {
      CAPTURE(name);
      CAPTURE(d);
      ProblemParams params;
      params.dim = d;
      params.kappa = 6.0;
      auto spec = make_problem(name, params);
      std::vector<std::size_t> boxes(d, 2);
      auto disc = std::make_shared<const Discretization>(
          build_discretization(spec.domain, {boxes, 6, spec.corner_mode()}));
      Solver solver(disc, spec.coeffs);
      auto load = sample_load(*disc, spec.f, spec.g);
      auto u = solver.solve(load).u;
      auto ref = dense_full_system_oracle(*disc, spec.coeffs, load);
      CHECK(relative_l2_error(u, ref) <= 1e-10);
    }
  }
}

TEST_CASE("Clenshaw-Curtis weights integrate polynomials exactly") {
  for (std::size_t p : {3u, 6u, 9u}) {
    auto w = clenshaw_curtis_weights(p);
    auto x = cheb_nodes(p);
    for (std::size_t k = 0; k < p; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < p; ++i) s += w[i] * std::pow(x[i], static_cast<double>(k));
      const double exact = k % 2 ? 0.0 : 2.0 / static_cast<double>(k + 1);
      CHECK(s == doctest::Approx(exact).epsilon(1e-13));
    }
  }
}

TEST_CASE("zero operator leaves a smooth state unchanged") {
  auto spec = make_parabolic("zero_operator", 3);
  auto disc = std::make_shared<const Discretization>(
      build_discretization(spec.domain, {{2, 2, 2}, 6, CornerMode::DropCorners}));
  auto traj = crank_nicolson_run(disc, spec, {0.1, 0.3, 1});
  REQUIRE(traj.snapshots.size() == 4);
  for (std::size_t i = 0; i < disc->node_count(); ++i)
    CHECK(std::abs(traj.final[i] - traj.snapshots[0][i]) <= 1e-13);
  CHECK(traj.factorizations == 1);
  CHECK_THROWS_AS(crank_nicolson_run(disc, spec, {0.1, 0.25}), ConfigError);
  CHECK_THROWS_AS(crank_nicolson_run(disc, spec, {0.0, 1.0}), ConfigError);
}

TEST_CASE("Crank-Nicolson is second order in time for the heat equation") {
  auto spec = heat_manufactured(3);
  auto disc = std::make_shared<const Discretization>(
      build_discretization(spec.domain, {{2, 2, 2}, 8, CornerMode::DropCorners}));
  BatchSchedule sched;
  sched.cache_leaves = true;
  std::vector<double> errs;
  for (double dt : {0.02, 0.01, 0.005, 0.0025}) {
    auto traj = crank_nicolson_run(disc, spec, {dt, 0.1}, sched);
    CHECK(traj.factorizations == 1);
    std::size_t events = 0;
    for (const auto& e : traj.log) events += e.phase == "factorize";
    CHECK(events == 1);
    errs.push_back(traj.final_error);
  }
  for (std::size_t k = 1; k < errs.size(); ++k) {
    const double order = std::log2(errs[k - 1] / errs[k]);
    CAPTURE(order);
    CHECK(order >= 1.7);
    CHECK(order <= 2.3);
  }
}

TEST_CASE("contaminant rotates counterclockwise in the upper half") {
  auto spec = convection_diffusion();
  auto disc = std::make_shared<const Discretization>(
      build_discretization(spec.domain, {{4, 4, 4}, 8, CornerMode::DropCorners}));
  BatchSchedule sched;
  sched.cache_leaves = true;
  sched.workers = 4;
  auto traj = crank_nicolson_run(disc, spec, {0.1, 2.5, 1}, sched);
  CHECK(traj.factorizations == 1);
  double prev = -10.0;
  for (const auto& snap : traj.snapshots) {
    auto c = upper_mass_center(*disc, snap);
    const double angle = std::atan2(c[1], c[0]);
    CHECK(angle > prev);
    prev = angle;
  }
}

TEST_CASE("leafwise interpolation reproduces a polynomial solution") {
  auto harmonic = [](const double* x) { return x[0] * x[0] - x[1] * x[1] + 0.5 * x[0] * x[1] * x[2]; };
  for (auto mode : {CornerMode::LegendreFaces, CornerMode::DropCorners}) {
    auto disc = std::make_shared<const Discretization>(build_discretization(
        DomainBox{{0.0, -1.0, 0.5}, {1.0, 0.0, 1.5}}, {{2, 3, 2}, 6, mode}));
    Solver solver(disc, laplace(3));
    auto u = solver.solve(nullptr, harmonic).u;
    const auto pts = interior_samples(disc->domain, 30, 9);
    std::vector<double> flat;
    for (const auto& p : pts) flat.insert(flat.end(), p.begin(), p.end());
    if (mode == CornerMode::DropCorners) {
      CHECK_THROWS_AS(interpolate_solution(*disc, u, flat), ConfigError);
      continue;
    }
    auto vals = interpolate_solution(*disc, u, flat);
    for (std::size_t k = 0; k < pts.size(); ++k) CHECK(std::abs(vals[k] - harmonic(pts[k].data())) <= 1e-11);
  }
}
