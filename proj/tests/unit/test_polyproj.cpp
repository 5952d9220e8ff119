#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "rmcp/polyproj.hpp"
#include "rmcp/rng.hpp"

using namespace rmcp;

namespace {

Vector v2(double a, double b) { return make_vector({a, b}); }

bool near(const Vector& a, const Vector& b, double tol) { return (a - b).norm() <= tol; }

Polyhedron box_corner() {
  return Polyhedron(2, {Halfspace(v2(1, 0), 1.0), Halfspace(v2(0, 1), 1.0)});
}

// Polyhedron through a known interior point so every instance is feasible.
Polyhedron random_polyhedron(RngStream& rng, std::size_t n, std::size_t rows) {
  const Vector interior = rng.normal_vector(n);
  Polyhedron p(n);
  for (std::size_t i = 0; i < rows; ++i) {
    Vector a = rng.normal_vector(n);
    p.add_row(Halfspace(a, a.dot(interior) + rng.uniform(0.0, 1.0)));
  }
  return p;
}

void check_kkt(const Vector& y, const Polyhedron& p, const QpSolution& s, double tol) {
  Vector reconstructed = y;
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(s.multipliers[i] >= 0.0);
    reconstructed -= s.multipliers[i] * p[i].normal();
    const double slack = p[i].residual(s.point);
    CHECK(slack <= tol * (1.0 + y.norm()));
    CHECK(std::abs(s.multipliers[i] * slack) <= tol * (1.0 + y.squaredNorm()));
  }
  CHECK(near(reconstructed, s.point, tol * (1.0 + y.norm())));
}

}  // namespace

TEST_CASE("cutting polyhedron rows come from the sampled projections") {
  const Vector y = v2(2, 2);
  const std::vector<Vector> proj{v2(1, 2), v2(2, 1)};
  const Polyhedron p = build_cutting_polyhedron(y, proj);
  REQUIRE(p.size() == 2);
  CHECK(near(p[0].normal(), v2(1, 0), 0.0));
  CHECK(p[0].offset() == doctest::Approx(1.0));
  CHECK(near(p[1].normal(), v2(0, 1), 0.0));
  CHECK(p[1].offset() == doctest::Approx(1.0));
}

TEST_CASE("cutting polyhedron drops degenerate rows and keeps duplicates") {
  const Vector y = v2(2, 2);
  CHECK(build_cutting_polyhedron(y, std::vector<Vector>{y, y}).empty());

  const std::vector<Vector> twice{v2(1, 0), v2(1, 0)};
  const Polyhedron p = build_cutting_polyhedron(v2(2, 0), twice);
  REQUIRE(p.size() == 2);
  CHECK(near(p[0].normal(), p[1].normal(), 0.0));
  CHECK(p[1].offset() == doctest::Approx(1.0));

  CHECK_THROWS_AS(build_cutting_polyhedron(y, std::vector<Vector>{make_vector({1, 2, 3})}), DimensionError);
}

TEST_CASE("cutting polyhedron contains every sampled set") {
  // Each row is a supporting halfspace of a convex set at its projection, so
  // points of the set satisfy it.
  RngStream rng(9, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const Vector y = rng.normal_vector(3) * 4.0;
    const Vector c = rng.normal_vector(3);
    const Ball ball(c, 1.0);
    const Polyhedron p = build_cutting_polyhedron(y, std::vector<Vector>{project(ball, y)});
    for (int j = 0; j < 20; ++j) {
      const Vector z = project(ball, Vector(c + rng.normal_vector(3)));
      for (const auto& row : p.rows()) CHECK(row.residual(z) <= 1e-10);
    }
  }
}

TEST_CASE("hildreth on hand-checkable instances") {
  QpSolution s = project_hildreth(v2(2, 2), box_corner());
  CHECK(near(s.point, v2(1, 1), 1e-9));

  const Polyhedron none(2);
  s = project_hildreth(v2(3, -7), none);
  CHECK(s.point == v2(3, -7));
  CHECK(s.multipliers.empty());

  const Polyhedron single(2, {Halfspace(v2(1, 0), 1.0)});
  s = project_hildreth(v2(2, 0), single);
  CHECK(near(s.point, v2(1, 0), 1e-10));
  REQUIRE(s.multipliers.size() == 1);
  CHECK(s.multipliers[0] == doctest::Approx(1.0));

  s = project_hildreth(v2(0.5, -3), box_corner());
  CHECK(s.point == v2(0.5, -3));
}

TEST_CASE("hildreth rejects bad arguments") {
  CHECK_THROWS_AS(project_hildreth(make_vector({1, 2, 3}), box_corner()), DimensionError);
  HildrethOptions bad;
  bad.tol = 0.0;
  CHECK_THROWS_AS(project_hildreth(v2(2, 2), box_corner(), bad), InvalidArgument);
  CHECK_THROWS_AS(Polyhedron(2, {Halfspace(make_vector({1, 0, 0}), 1.0)}), DimensionError);
}

TEST_CASE("hildreth reports nonconvergence with its last iterate") {
  // Nearly antiparallel rows meeting at a sharp apex need many sweeps.
  const double phi = 179.0 * std::numbers::pi / 180.0;
  const Polyhedron wedge(2, {Halfspace(v2(1, 0), 0.0), Halfspace(v2(std::cos(phi), std::sin(phi)), 0.0)});
  HildrethOptions opts;
  opts.max_iter = 2;
  opts.polish_every = 0;
  opts.tol = 1e-14;
  try {
    (void)project_hildreth(v2(0.3, 5.0), wedge, opts);
    FAIL("expected QpNonConvergence");
  } catch (const QpNonConvergence& e) {
    CHECK(e.best().point.size() == 2);
    CHECK(e.best().iterations == 2);
  }
}

TEST_CASE("active-set oracle on hand-checkable instances") {
  QpSolution s = project_activeset_oracle(v2(2, 2), box_corner());
  CHECK(near(s.point, v2(1, 1), 1e-12));
  CHECK(s.multipliers[0] == doctest::Approx(1.0));
  CHECK(s.multipliers[1] == doctest::Approx(1.0));

  s = project_activeset_oracle(v2(0, 0), box_corner());
  CHECK(s.point == v2(0, 0));
  CHECK(s.multipliers[0] == 0.0);
  CHECK(s.multipliers[1] == 0.0);

  const Polyhedron duplicated(2, {Halfspace(v2(1, 0), 1.0), Halfspace(v2(1, 0), 1.0)});
  s = project_activeset_oracle(v2(2, 0), duplicated);
  CHECK(near(s.point, v2(1, 0), 1e-12));
}

TEST_CASE("active-set oracle enforces its size limits") {
  Polyhedron big(2);
  for (int i = 0; i < 13; ++i) big.add_row(Halfspace(v2(std::cos(i), std::sin(i)), 1.0));
  CHECK_THROWS_AS(project_activeset_oracle(v2(5, 5), big), InvalidArgument);
}

TEST_CASE("hildreth satisfies the KKT conditions and matches the oracle") {
  RngStream rng(21, 0);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(5);
    const std::size_t rows = 1 + rng.uniform_index(8);
    const Polyhedron p = random_polyhedron(rng, n, rows);
    const Vector y = rng.normal_vector(n) * 3.0;
    HildrethOptions opts;
    opts.tol = 1e-12;
    opts.max_iter = 1000000;
    const QpSolution h = project_hildreth(y, p, opts);
    const QpSolution o = project_activeset_oracle(y, p);
    check_kkt(y, p, h, 1e-9);
    CHECK(near(h.point, o.point, 1e-6 * (1.0 + y.norm())));
    CHECK(p.max_violation(h.point) <= 1e-9);
  }
}

TEST_CASE("improvement factor closed forms") {
  const Polyhedron single(2, {Halfspace(v2(1, 0), 1.0)});
  const Vector y1 = v2(2, 0);
  CHECK(improvement_factor(y1, single, project_hildreth(y1, single)) == doctest::Approx(1.0));

  const Vector y2 = v2(2, 2);
  CHECK(improvement_factor(y2, box_corner(), project_hildreth(y2, box_corner())) == doctest::Approx(2.0));

  // Two active unit normals at angle phi: ||A'A|| = 1 + |cos phi|.
  for (double degrees : {60.0, 120.0, 170.0}) {
    const double phi = degrees * std::numbers::pi / 180.0;
    const Vector b = v2(std::cos(phi), std::sin(phi));
    const Polyhedron wedge(2, {Halfspace(v2(1, 0), 0.0), Halfspace(b, 0.0)});
    // A point outside both halfspaces whose projection is the apex.
    const Vector y = 3.0 * (v2(1, 0) + b);
    const QpSolution s = project_activeset_oracle(y, wedge);
    REQUIRE(near(s.point, v2(0, 0), 1e-12));
    const double expected = 2.0 / (1.0 + std::abs(std::cos(phi)));
    CHECK(improvement_factor(y, wedge, s) == doctest::Approx(expected).epsilon(1e-8));
  }

  CHECK_THROWS_AS(improvement_factor(v2(0, 0), single, project_hildreth(v2(0, 0), single)), InvalidArgument);
}

TEST_CASE("improvement factor is at least one") {
  RngStream rng(4, 0);
  int evaluated = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const Polyhedron p = random_polyhedron(rng, 3, 1 + rng.uniform_index(6));
    const Vector y = rng.normal_vector(3) * 5.0;
    if (p.max_violation(y) == 0.0) continue;
    const QpSolution s = project_activeset_oracle(y, p);
    CHECK(improvement_factor(y, p, s) >= 1.0 - 1e-9);
    ++evaluated;
  }
  CHECK(evaluated > 100);
}
