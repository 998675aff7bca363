#include <cmath>
#include <vector>

#include "doctest.h"
#include "hps/errors.hpp"
#include "hps/geometry.hpp"
#include "hps/local_ops.hpp"

using namespace hps;

namespace {

struct Counts {
  std::size_t interior = 0, interface = 0, dirichlet = 0, dropped = 0;
};

// Classifies every point of the deduplicated tensor lattice by how many
// coordinates sit on a box boundary.
Counts brute_force(const std::vector<std::size_t>& boxes, std::size_t p) {
  const std::size_t d = boxes.size();
  std::vector<std::size_t> n(d);
  std::size_t total = 1;
  for (std::size_t k = 0; k < d; ++k) {
    n[k] = boxes[k] * (p - 1) + 1;
    total *= n[k];
  }
  Counts c;
  for (std::size_t s = 0; s < total; ++s) {
    std::size_t rem = s, on_box = 0;
    bool on_domain = false;
    for (std::size_t k = 0; k < d; ++k) {
      const std::size_t g = rem % n[k];
      rem /= n[k];
      if (g % (p - 1) == 0) {
        ++on_box;
        if (g == 0 || g == n[k] - 1) on_domain = true;
      }
    }
    if (on_box == 0) ++c.interior;
    else if (on_box >= 2) ++c.dropped;
    else if (on_domain) ++c.dirichlet;
    else ++c.interface;
  }
  return c;
}

DomainBox unit_box(std::size_t d) {
  return {std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)};
}

Discretization make(std::vector<std::size_t> boxes, std::size_t p,
                    CornerMode mode = CornerMode::DropCorners) {
  return build_discretization(unit_box(boxes.size()), {boxes, p, mode});
}

std::size_t interior_total(const Discretization& disc) {
  std::size_t n = 0;
  for (const auto& v : disc.index_interior) n += v.size();
  return n;
}

}  // namespace

TEST_CASE("single leaf has every face on the boundary") {
  auto disc = make({1, 1}, 6);
  CHECK(interior_total(disc) == 16);
  CHECK(disc.index_interface.empty());
  CHECK(disc.index_dirichlet.size() == 16);
  CHECK(disc.dropped == 4);
}

TEST_CASE("node classes match a brute-force lattice classification") {
  const std::vector<std::vector<std::size_t>> meshes = {
      {2, 1}, {1, 1}, {3, 2}, {3, 3}, {2, 2, 2}, {1, 2, 3}, {3, 1, 1}};
  for (const auto& boxes : meshes)
    for (std::size_t p : {4u, 6u, 8u}) {
      CAPTURE(boxes.size());
      CAPTURE(p);
      auto disc = make(boxes, p);
      auto ref = brute_force(boxes, p);
      CHECK(interior_total(disc) == ref.interior);
      CHECK(disc.index_interface.size() == ref.interface);
      CHECK(disc.index_dirichlet.size() == ref.dirichlet);
      CHECK(disc.dropped == ref.dropped);
      CHECK(disc.node_count() + disc.dropped ==
            ref.interior + ref.interface + ref.dirichlet + ref.dropped);
    }
  CHECK(make({2, 1}, 6).index_interface.size() == 4);
  CHECK(make({2, 2, 2}, 8).index_interface.size() == 432);
}

TEST_CASE("index sets are disjoint and cover all nodes") {
  auto disc = make({2, 3, 2}, 5);
  std::vector<int> seen(disc.node_count(), 0);
  for (const auto& leaf : disc.index_interior)
    for (auto i : leaf) ++seen[i];
  for (auto i : disc.index_interface) ++seen[i];
  for (auto i : disc.index_dirichlet) ++seen[i];
  for (int s : seen) CHECK(s == 1);
  CHECK(disc.interior_per_leaf() == 27);
  CHECK(disc.nodes_per_face() == 9);
}

TEST_CASE("legendre face grids carry (p-1)^(d-1) nodes") {
  auto disc = make({2, 2, 1}, 6, CornerMode::LegendreFaces);
  CHECK(disc.nodes_per_face() == 25);
  // 4 shared faces.
  CHECK(disc.index_interface.size() == 4 * 25);
  CHECK(disc.dropped == 0);
}

TEST_CASE("shared faces resolve to identical coordinates from both leaves") {
  for (auto mode : {CornerMode::DropCorners, CornerMode::LegendreFaces}) {
    DomainBox dom{{-1.1, 1.0, 1.2}, {0.1, 2.0, 2.2}};
    auto disc = build_discretization(dom, {{3, 3, 3}, 6, mode});
    for (std::size_t leaf = 0; leaf < disc.leaves.size(); ++leaf) {
      const auto& lf = disc.leaf_faces(leaf);
      for (std::size_t k = 0; k < lf.size(); ++k) {
        const Face& f = disc.faces[lf[k]];
        CHECK(f.axis == k / 2);
        CHECK(f.leaves[k % 2 == 0 ? 1 : 0] == leaf);
        // Normal coordinate equals the leaf's own bound bit for bit.
        const double bound = k % 2 ? disc.leaves[leaf].hi[f.axis] : disc.leaves[leaf].lo[f.axis];
        for (std::size_t j = 0; j < disc.nodes_per_face(); ++j)
          CHECK(disc.node(f.first_node + j)[f.axis] == bound);
      }
    }
    // Drop-corner face nodes coincide with each leaf's Chebyshev grid.
    if (mode == CornerMode::DropCorners) {
      auto t = make_leaf_template(disc);
      for (std::size_t leaf = 0; leaf < disc.leaves.size(); ++leaf) {
        auto x = leaf_grid(*t, disc.leaves[leaf]);
        const Face& f = disc.faces[disc.leaf_faces(leaf)[1]];  // +x face
        // +x face node (j0, j1) is grid node (p-1, 1+j0, 1+j1).
        for (std::size_t j0 = 0; j0 < 4; ++j0)
          for (std::size_t j1 = 0; j1 < 4; ++j1) {
            const std::size_t idx = (5 * 6 + 1 + j0) * 6 + 1 + j1;
            const double* node = disc.node(f.first_node + j0 * 4 + j1);
            for (std::size_t k = 0; k < 3; ++k) CHECK(node[k] == x[idx * 3 + k]);
          }
      }
    }
  }
}

TEST_CASE("leaf neighbours follow the fixed face order") {
  auto one = make({1, 1}, 6);
  for (auto& n : leaf_neighbors(one, 0)) CHECK(n.neighbor == kDirichlet);

  auto two = make({2, 1}, 6);
  auto nb = leaf_neighbors(two, 0);
  REQUIRE(nb.size() == 4);
  CHECK(nb[1].neighbor == 1);
  CHECK(nb[0].neighbor == kDirichlet);
  CHECK(leaf_neighbors(two, 1)[0].neighbor == 0);

  auto nine = make({3, 3}, 6);
  const std::size_t centre = nine.leaf_id({1, 1, 0});
  for (auto& n : leaf_neighbors(nine, centre)) CHECK(n.neighbor != kDirichlet);
  CHECK(leaf_neighbors(nine, centre)[2].neighbor == nine.leaf_id({1, 0, 0}));
  CHECK_THROWS_AS(leaf_neighbors(nine, 9), ConfigError);
}

TEST_CASE("permuting boxes_per_dim gives isomorphic index maps") {
  auto a = make({1, 2, 3}, 6);
  auto b = make({3, 1, 2}, 6);
  auto c = make({2, 3, 1}, 6);
  CHECK(a.index_interface.size() == b.index_interface.size());
  CHECK(a.index_interface.size() == c.index_interface.size());
  CHECK(a.index_dirichlet.size() == b.index_dirichlet.size());
  CHECK(a.dropped == c.dropped);
}

TEST_CASE("invalid meshes are rejected") {
  CHECK_THROWS_AS(make({2, 2}, 3), ConfigError);
  CHECK_THROWS_AS(make({0, 2}, 6), ConfigError);
  CHECK_THROWS_AS(build_discretization({{0, 0}, {1, 0}}, {{1, 1}, 6}), ConfigError);
  CHECK_THROWS_AS(build_discretization({{0, 0, 0}, {1, 1, 1}}, {{1, 1}, 6}), ConfigError);
  CHECK_THROWS_AS(parse_corner_mode("corners"), ConfigError);
  CHECK(parse_corner_mode(to_string(CornerMode::LegendreFaces)) == CornerMode::LegendreFaces);
}

TEST_CASE("identity parameter map leaves coefficients unchanged") {
  CoefficientField phys;
  phys.dim = 3;
  phys.second_order = [](const double* x, double* a) {
    for (int i = 0; i < 9; ++i) a[i] = 0.0;
    a[0] = 1.0 + x[0] * x[0];
    a[4] = 2.0;
    a[8] = 1.5 + x[2];
    a[1] = a[3] = 0.1 * x[1];
  };
  phys.first_order = [](const double* x, double* b) {
    b[0] = x[1];
    b[1] = -x[0];
    b[2] = 0.3;
  };
  phys.zeroth_order = [](const double* x) { return x[0] * x[1] - x[2]; };
  auto ref = identity_map(3).coefficient_transform(phys);
  for (double s = -1.0; s <= 1.0; s += 0.25)
    for (double t = -1.0; t <= 1.0; t += 0.5) {
      const double x[3] = {s, t, 0.5 * s * t};
      double a0[9], b0[3], c0, a1[9], b1[3], c1;
      phys.evaluate(x, a0, b0, c0);
      ref.evaluate(x, a1, b1, c1);
      for (int i = 0; i < 9; ++i) CHECK(a0[i] == a1[i]);
      for (int i = 0; i < 3; ++i) CHECK(b0[i] == b1[i]);
      CHECK(c0 == c1);
    }
}

TEST_CASE("sinusoidal map produces the curved-domain operator") {
  auto m = sinusoidal_map(0.25, 6.0);
  auto h = m.coefficient_transform(helmholtz(3, 16.0 * 16.0));
  CHECK(h.cross_terms);
  const double x[3] = {1.3, -0.4, -0.7};
  const double psi = 1.0 - 0.25 * std::sin(6.0 * x[0]);
  const double dpsi = -1.5 * std::cos(6.0 * x[0]);
  const double ddpsi = 9.0 * std::sin(6.0 * x[0]);
  double a[9], b[3], c;
  h.evaluate(x, a, b, c);
  CHECK(a[0] == doctest::Approx(1.0));
  CHECK(a[4] == doctest::Approx(std::pow(dpsi * x[1] / psi, 2) + psi * psi));
  CHECK(a[8] == doctest::Approx(1.0));
  CHECK(a[1] + a[3] == doctest::Approx(2.0 * dpsi * x[1] / psi));
  CHECK(b[0] == doctest::Approx(0.0));
  CHECK(b[1] == doctest::Approx(ddpsi * x[1] / psi));
  CHECK(c == doctest::Approx(-256.0));

  // psi'(z) = 0 at 6 z = pi / 2.
  const double crit[3] = {std::acos(0.0) / 6.0, -0.5, -0.5};
  h.evaluate(crit, a, b, c);
  CHECK(std::abs(a[1]) <= 1e-15);

  auto flat = sinusoidal_map(0.0, 6.0).coefficient_transform(helmholtz(3, 4.0));
  CHECK_FALSE(flat.cross_terms);
  flat.evaluate(x, a, b, c);
  for (int i = 0; i < 9; ++i) CHECK(a[i] == (i % 4 == 0 ? 1.0 : 0.0));
  CHECK(c == -4.0);

  CHECK_THROWS_AS(sinusoidal_map(1.0, 6.0), ConfigError);
}

TEST_CASE("transformed operator agrees with the physical operator by the chain rule") {
  // v on the reference box; u(z) = v(x(z)) on the physical domain. The
  // physical Laplacian of u, by central differences, must equal the
  // transformed operator applied to v analytically.
  auto m = sinusoidal_map(0.25, 6.0);
  auto ref = m.coefficient_transform(laplace(3));
  auto v = [](const double* x) { return std::sin(x[0]) * std::cos(2.0 * x[1]) * std::exp(0.3 * x[2]); };
  auto to_ref = [](const double* z, double* x) {
    x[0] = z[0];
    x[1] = (1.0 - 0.25 * std::sin(6.0 * z[0])) * z[1];
    x[2] = z[2];
  };
  auto u = [&](const double* z) {
    double x[3];
    to_ref(z, x);
    return v(x);
  };
  for (double x0 : {1.2, 1.5, 1.9})
    for (double x1 : {-0.8, -0.3}) {
      const double x[3] = {x0, x1, -0.6};
      double z[3];
      m.forward(x, z);
      const double hfd = 1e-3;
      double lap = 0.0;
      for (int k = 0; k < 3; ++k) {
        double zp[3] = {z[0], z[1], z[2]}, zm[3] = {z[0], z[1], z[2]};
        zp[k] += hfd;
        zm[k] -= hfd;
        lap += (u(zp) - 2.0 * u(z) + u(zm)) / (hfd * hfd);
      }
      // Analytic derivatives of v.
      const double s0 = std::sin(x[0]), c0 = std::cos(x[0]);
      const double s1 = std::sin(2 * x[1]), c1 = std::cos(2 * x[1]);
      const double e = std::exp(0.3 * x[2]);
      const double g[3] = {c0 * c1 * e, -2 * s0 * s1 * e, 0.3 * s0 * c1 * e};
      const double hs[9] = {-s0 * c1 * e, -2 * c0 * s1 * e, 0.3 * c0 * c1 * e,
                            -2 * c0 * s1 * e, -4 * s0 * c1 * e, -0.6 * s0 * s1 * e,
                            0.3 * c0 * c1 * e, -0.6 * s0 * s1 * e, 0.09 * s0 * c1 * e};
      double a[9], b[3], c;
      ref.evaluate(x, a, b, c);
      double lv = 0.0;
      for (int i = 0; i < 3; ++i) {
        lv -= b[i] * g[i];
        for (int j = 0; j < 3; ++j) lv -= a[i * 3 + j] * hs[i * 3 + j];
      }
      CHECK(lv == doctest::Approx(-lap).epsilon(1e-5));
    }
}
