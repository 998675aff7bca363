#include <cmath>
#include <memory>
#include <random>
#include <set>
#include <vector>

#include "doctest.h"
#include "hps/condensation.hpp"
#include "hps/errors.hpp"
#include "hps/oracle.hpp"

using namespace hps;

namespace {

std::shared_ptr<const Discretization> mesh(std::vector<std::size_t> boxes, std::size_t p,
                                           CornerMode mode = CornerMode::DropCorners) {
  const std::size_t d = boxes.size();
  DomainBox dom = d == 2 ? DomainBox{{-0.5, 0.25}, {0.7, 1.0}}
                         : DomainBox{{-0.5, 0.25, 0.0}, {0.7, 1.0, 0.9}};
  return std::make_shared<const Discretization>(build_discretization(dom, {boxes, p, mode}));
}

double rel_l2(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

CoefficientField variable_helmholtz(std::size_t d) {
  CoefficientField c;
  c.dim = d;
  c.second_order = [d](const double* x, double* a) {
    for (std::size_t i = 0; i < d * d; ++i) a[i] = 0.0;
    for (std::size_t i = 0; i < d; ++i) a[i * d + i] = 1.0 + 0.25 * std::sin(x[i] + static_cast<double>(i));
  };
  c.first_order = [d](const double* x, double* b) {
    for (std::size_t i = 0; i < d; ++i) b[i] = 0.3 * std::cos(x[(i + 1) % d]);
  };
  c.zeroth_order = [](const double* x) { return -4.0 * (1.0 + 0.5 * x[0]); };
  return c;
}

CoefficientField anisotropic_cross(std::size_t d) {
  CoefficientField c;
  c.dim = d;
  c.cross_terms = true;
  c.second_order = [d](const double* x, double* a) {
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) a[i * d + j] = i == j ? 1.2 + 0.1 * x[i] : 0.2 + 0.05 * x[0];
  };
  c.zeroth_order = [](const double*) { return -2.0; };
  return c;
}

double smooth_f(const double* x) { return std::sin(2.0 * x[0]) + x[1] * x[1] - 0.5; }
double smooth_g(const double* x) { return std::cos(x[0] + 0.5 * x[1]) + 0.1 * x[0] * x[1]; }

}  // namespace

TEST_CASE("single leaf: empty interface and direct interior solve") {
  auto disc = mesh({1, 1}, 6);
  auto sys = build(disc, laplace(2));
  CHECK(sys.size() == 0);
  CHECK(sys.factorization->size() == 0);
  auto load = sample_load(*disc, [](const double*) { return 1.0; }, nullptr);
  auto red = reduce_load(sys, load);
  CHECK(red.g_b.empty());
  auto rep = solve(sys, red);
  auto ref = dense_full_system_oracle(*disc, laplace(2), load);
  CHECK(rel_l2(rep.u, ref) <= 1e-12);
}

TEST_CASE("two leaves in 2D couple through one dense 4x4 block") {
  auto disc = mesh({2, 1}, 6);
  auto sys = build(disc, laplace(2));
  CHECK(sys.size() == 4);
  CHECK(sys.t.nnz() == 16);
  for (const auto& refs : sys.dof_map) {
    CHECK(refs[0].leaf == 0);
    CHECK(refs[1].leaf == 1);
    CHECK(refs[0].face_slot == 1);
    CHECK(refs[1].face_slot == 0);
  }
}

TEST_CASE("interface pattern in 3D is symmetric and bounded per row") {
  for (std::size_t p : {6u, 8u}) {
    auto disc = mesh({2, 2, 2}, p);
    auto sys = build(disc, laplace(3));
    const std::size_t nf = disc->nodes_per_face();
    CHECK(sys.size() == 12 * nf);
    if (p == 8) CHECK(sys.size() == 432);
    std::set<std::pair<std::size_t, std::size_t>> pat;
    for (std::size_t i = 0; i < sys.size(); ++i)
      for (std::size_t q = sys.t.row_ptr()[i]; q < sys.t.row_ptr()[i + 1]; ++q)
        pat.insert({i, sys.t.col_idx()[q]});
    for (auto [i, j] : pat) CHECK(pat.count({j, i}) == 1);
  }
  // A face shared by two interior boxes sees itself plus 10 other faces.
  auto disc = mesh({4, 4, 4}, 5);
  auto sys = build(disc, laplace(3));
  const std::size_t nf = disc->nodes_per_face();
  std::size_t widest = 0;
  for (std::size_t i = 0; i < sys.size(); ++i)
    widest = std::max(widest, sys.t.row_ptr()[i + 1] - sys.t.row_ptr()[i]);
  CHECK(widest == 11 * nf);
}

TEST_CASE("assembled t equals the brute-force sum of prolonged leaf DtNs") {
  auto disc = mesh({2, 3}, 6);
  auto coeffs = variable_helmholtz(2);
  auto sys = build(disc, coeffs);
  const std::size_t n = sys.size(), nf = disc->nodes_per_face();
  Matrix ref(n, n);
  auto tmpl = make_leaf_template(*disc);
  for (std::size_t id = 0; id < disc->leaves.size(); ++id) {
    auto lf = build_leaf_operator(tmpl, disc->leaves[id], id, coeffs);
    // Prolongation: leaf boundary DOF -> interface DOF (or none).
    std::vector<long> map(tmpl->n_b, -1);
    const auto& faces = disc->leaf_faces(id);
    for (std::size_t k = 0; k < faces.size(); ++k) {
      const Face& f = disc->faces[faces[k]];
      if (f.boundary) continue;
      for (std::size_t j = 0; j < nf; ++j)
        map[k * nf + j] = static_cast<long>(f.first_node - disc->interface_begin + j);
    }
    for (std::size_t r = 0; r < tmpl->n_b; ++r)
      for (std::size_t c = 0; c < tmpl->n_b; ++c)
        if (map[r] >= 0 && map[c] >= 0) ref(map[r], map[c]) += lf.dtn()(r, c);
  }
  Matrix t = sys.t.to_dense();
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) err = std::max(err, std::abs(t(i, j) - ref(i, j)));
  CHECK(err <= 1e-14 * max_abs(ref));
}

TEST_CASE("two-level solution matches the dense full-system oracle") {
  struct Case {
    std::vector<std::size_t> boxes;
    std::size_t p;
    CornerMode mode;
    bool cross;
  };
  const std::vector<Case> cases = {
      {{2, 2}, 6, CornerMode::DropCorners, false},
      {{3, 2}, 5, CornerMode::DropCorners, false},
      {{3, 3}, 8, CornerMode::LegendreFaces, true},
      {{2, 2, 2}, 6, CornerMode::DropCorners, false},
      {{2, 1, 2}, 6, CornerMode::LegendreFaces, true},
  };
  for (const auto& c : cases) {
    CAPTURE(c.boxes.size());
    CAPTURE(c.p);
    auto disc = mesh(c.boxes, c.p, c.mode);
    const std::size_t d = c.boxes.size();
    auto coeffs = c.cross ? anisotropic_cross(d) : variable_helmholtz(d);
    auto load = sample_load(*disc, smooth_f, smooth_g);
    Solver solver(disc, coeffs);
    auto rep = solver.solve(load);
    auto ref = dense_full_system_oracle(*disc, coeffs, load);
    CHECK(rel_l2(rep.u, ref) <= 1e-10);
    CHECK(rep.residual <= 1e-12);
  }
}

TEST_CASE("linear data is reproduced on the interface") {
  auto disc = mesh({2, 1}, 6);
  Solver solver(disc, laplace(2));
  auto rep = solver.solve(nullptr, [](const double* x) { return x[0]; });
  for (std::size_t i = 0; i < disc->node_count(); ++i)
    CHECK(std::abs(rep.u[i] - disc->node(i)[0]) <= 1e-11);
}

TEST_CASE("zero data gives zero solution") {
  auto disc = mesh({2, 2}, 6);
  auto sys = build(disc, laplace(2));
  auto red = reduce_load(sys, sample_load(*disc, nullptr, nullptr));
  for (double v : red.v) CHECK(v == 0.0);
  for (double v : red.g_b) CHECK(v == 0.0);
}

TEST_CASE("build and solve are deterministic across batch sizes and workers") {
  auto disc = mesh({3, 2, 2}, 6);
  auto coeffs = variable_helmholtz(3);
  auto load = sample_load(*disc, smooth_f, smooth_g);
  auto run = [&](std::size_t batch, std::size_t workers) {
    BatchSchedule s;
    s.batch_size = batch;
    s.workers = workers;
    s.resident_limit = 3;
    Solver solver(disc, coeffs, s);
    return std::make_pair(solver.system().t.values(), solver.solve(load).u);
  };
  auto base = run(1, 1);
  auto again = run(1, 1);
  CHECK(base.first == again.first);
  CHECK(base.second == again.second);
  for (auto [batch, workers] : {std::pair<std::size_t, std::size_t>{4, 1}, {5, 4}, {1, 4}}) {
    auto other = run(batch, workers);
    CHECK(rel_l2(other.second, base.second) <= 1e-13);
    CHECK(other.first == base.first);
  }
}

TEST_CASE("scheduler respects the memory budget") {
  auto disc = mesh({3, 3, 2}, 6);
  const std::size_t ws = estimate_workspace(6, 3);
  BatchSchedule s;
  s.batch_size = 8;
  s.resident_limit = 8;
  s.memory_budget = ws * 5 / 2;
  auto sys = build(disc, laplace(3), s);
  CHECK(sys.schedule_stats.peak_bytes <= s.memory_budget);
  CHECK(sys.schedule_stats.max_in_flight <= 2);
  CHECK(sys.schedule_stats.max_in_flight >= 1);

  auto unlimited = build(disc, laplace(3));
  Matrix a = sys.t.to_dense(), b = unlimited.t.to_dense();
  CHECK(a == b);

  s.memory_budget = ws - 1;
  CHECK_THROWS_AS(build(disc, laplace(3), s), ConfigError);
}

TEST_CASE("solve is linear in the data") {
  auto disc = mesh({2, 3}, 7);
  auto coeffs = variable_helmholtz(2);
  Solver solver(disc, coeffs);
  auto f2 = [](const double* x) { return x[0] * x[1]; };
  auto g2 = [](const double* x) { return std::exp(x[1]); };
  const double a = 1.7, b = -0.6;
  auto u1 = solver.solve(smooth_f, smooth_g).u;
  auto u2 = solver.solve(f2, g2).u;
  auto u3 = solver.solve([&](const double* x) { return a * smooth_f(x) + b * f2(x); },
                         [&](const double* x) { return a * smooth_g(x) + b * g2(x); }).u;
  std::vector<double> comb(u1.size());
  for (std::size_t i = 0; i < u1.size(); ++i) comb[i] = a * u1[i] + b * u2[i];
  CHECK(rel_l2(u3, comb) <= 1e-12);
}

TEST_CASE("one factorization serves successive solves") {
  auto disc = mesh({2, 2}, 6);
  Solver solver(disc, laplace(2));
  auto r1 = solver.solve(smooth_f, smooth_g);
  auto r2 = solver.solve([](const double*) { return 2.0; }, smooth_g);
  CHECK(r1.wall_times.factorize > 0.0);
  CHECK(r2.wall_times.factorize == 0.0);
  CHECK(solver.system().factorizations == 1);
  std::size_t events = 0;
  for (const auto& e : solver.log()) events += e.phase == "factorize";
  CHECK(events == 1);
}

TEST_CASE("cached leaf factors give the same solution as recomputation") {
  auto disc = mesh({2, 2, 2}, 6);
  auto coeffs = variable_helmholtz(3);
  BatchSchedule cached;
  cached.cache_leaves = true;
  Solver a(disc, coeffs), b(disc, coeffs, cached);
  auto ua = a.solve(smooth_f, smooth_g).u;
  auto ub = b.solve(smooth_f, smooth_g).u;
  CHECK(rel_l2(ua, ub) <= 1e-12);
}

TEST_CASE("interface solve agrees with the dense inverse of t") {
  auto disc = mesh({2, 2}, 6);
  auto sys = build(disc, laplace(2));
  auto red = reduce_load(sys, sample_load(*disc, smooth_f, smooth_g));
  std::vector<double> x = red.g_b;
  sys.factorization->solve_in_place(x.data(), 1);
  Matrix inv = DenseLU(sys.t.to_dense()).solve(Matrix::identity(sys.size()));
  auto xr = mat_vec(inv, red.g_b);
  CHECK(rel_l2(x, xr) <= 1e-11);
}

TEST_CASE("minimum degree ordering reduces fill on the 3x3x3 interface pattern") {
  auto disc = mesh({3, 3, 3}, 5);
  auto sys = build(disc, laplace(3));
  auto nat = analyze_and_factor(sys.t, {Ordering::Natural, 0.1});
  auto md = analyze_and_factor(sys.t, {Ordering::MinimumDegree, 0.1});
  CHECK(md->stats().nnz_factors < nat->stats().nnz_factors);
}

TEST_CASE("workspace estimate") {
  const double d3p20 = static_cast<double>(estimate_workspace(20, 3)) / 8.0;
  // A_ii 5832^2, S 5832 x 1944, T 1944^2.
  CHECK(d3p20 == 5832.0 * 5832.0 + 5832.0 * 1944.0 + 1944.0 * 1944.0);
  CHECK(estimate_workspace(4, 2) == 8 * (16 + 4 * 8 + 64));
  const double growth = static_cast<double>(estimate_workspace(22, 3)) /
                        static_cast<double>(estimate_workspace(12, 3));
  CHECK(growth > 40.0);
  CHECK(growth < 80.0);
  for (std::size_t p = 4; p < 20; ++p) CHECK(estimate_workspace(p + 1, 3) > estimate_workspace(p, 3));
}
