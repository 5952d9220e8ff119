#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/QR>

#include "rmcp/metrics.hpp"
#include "rmcp/polyproj.hpp"
#include "rmcp/problems.hpp"
#include "rmcp/solver.hpp"

using namespace rmcp;

namespace {

Vector v2(double a, double b) { return make_vector({a, b}); }

bool near(const Vector& a, const Vector& b, double tol) { return (a - b).norm() <= tol; }

ConstraintFamily quadrant() { return ConstraintFamily({Halfspace(v2(1, 0), 0.0), Halfspace(v2(0, 1), 0.0)}); }

std::vector<MetricRecord> records_from(const std::vector<std::size_t>& ks, double (*f)(double)) {
  std::vector<MetricRecord> out;
  for (std::size_t k : ks) {
    MetricRecord r;
    r.k = k;
    r.samples_used = 6 * k;
    r.feasibility_error = f(static_cast<double>(k));
    out.push_back(r);
  }
  return out;
}

std::vector<std::size_t> grid(std::size_t lo, std::size_t hi, std::size_t step) {
  std::vector<std::size_t> ks;
  for (std::size_t k = lo; k <= hi; k += step) ks.push_back(k);
  return ks;
}

// Halfspaces through a common interior point, optionally with a ball.
ConstraintFamily random_family(RngStream& rng, std::size_t n, std::size_t m, bool with_ball) {
  const Vector interior = rng.normal_vector(n);
  std::vector<ConvexSet> sets;
  for (std::size_t i = 0; i < m; ++i) {
    Vector a = rng.normal_vector(n);
    sets.emplace_back(Halfspace(a, a.dot(interior) + rng.uniform(0.0, 1.0)));
  }
  if (with_ball) sets.emplace_back(Ball(interior + rng.normal_vector(n) * 0.3, 1.0 + rng.uniform()));
  return ConstraintFamily(std::move(sets));
}

}  // namespace

TEST_CASE("reference projection on hand-checkable families") {
  const ConstraintFamily q = quadrant();
  CHECK(reference_projection(q, v2(-1, -2)) == v2(-1, -2));
  const Vector corner = reference_projection(q, v2(1, 1));
  CHECK(near(corner, v2(0, 0), 1e-10));
  const QpSolution oracle = project_activeset_oracle(v2(1, 1), Polyhedron(2, {Halfspace(v2(1, 0), 0.0), Halfspace(v2(0, 1), 0.0)}));
  CHECK(near(corner, oracle.point, 1e-10));

  const ConstraintFamily disc({Ball(v2(0, 0), 1.0), Halfspace(v2(0, 1), 0.0)});
  CHECK(near(reference_projection(disc, v2(0, 3)), v2(0, 0), 1e-9));
  CHECK(near(reference_projection(disc, v2(3, -4)), v2(0.6, -0.8), 1e-9));
}

TEST_CASE("reference projection agrees with hildreth on stacked halfspaces") {
  RngStream rng(41, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(4);
    const ConstraintFamily family = random_family(rng, n, 2 + rng.uniform_index(10), false);
    Polyhedron poly(n);
    for (const auto& s : family) poly.add_row(*s.as_halfspace());
    const Vector x = rng.normal_vector(n) * 4.0;
    HildrethOptions opts;
    opts.tol = 1e-12;
    opts.max_iter = 1000000;
    const Vector h = project_hildreth(x, poly, opts).point;
    CHECK(near(reference_projection(family, x), h, 10 * 1e-10 * (1.0 + x.norm())));
  }
}

TEST_CASE("reference projection satisfies the variational inequality") {
  RngStream rng(42, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const ConstraintFamily family = random_family(rng, 3, 5, trial % 2 == 0);
    const Vector x = rng.normal_vector(3) * 4.0;
    const double tol = 1e-10;
    const Vector z = reference_projection(family, x, tol);
    for (const auto& s : family) CHECK(distance(s, z) <= tol);
    for (int j = 0; j < 20; ++j) {
      const Vector w = reference_projection(family, Vector(rng.normal_vector(3) * 4.0), tol);
      CHECK((x - z).dot(w - z) <= 10 * tol * (1.0 + (x - z).norm() + (w - z).norm()));
    }
    for (const auto& s : family) CHECK(std::sqrt(feasibility_error(family, x)) >= distance(s, x) - 10 * tol);
  }
}

TEST_CASE("dykstra reports an exhausted budget") {
  const ConstraintFamily disc({Ball(v2(0, 0), 1.0), Ball(v2(1.5, 0), 1.0)});
  DykstraOptions opts;
  opts.max_visits = 4;
  opts.tol = 1e-14;
  CHECK_THROWS_AS(dykstra_projection(disc, v2(0.75, 5), opts), NumericalError);
  CHECK_THROWS_AS(reference_projection(disc, make_vector({1, 2, 3})), DimensionError);
}

TEST_CASE("feasibility and optimality errors") {
  const ConstraintFamily half({Halfspace(v2(1, 0), 1.0)});
  CHECK(feasibility_error(half, v2(0, 5)) == 0.0);
  CHECK(feasibility_error(half, v2(2, 0)) == doctest::Approx(1.0));
  CHECK(optimality_error(v2(1, 2), v2(1, 2)) == 0.0);
  CHECK(optimality_error(v2(1, 2), v2(4, 6)) == doctest::Approx(25.0));
}

TEST_CASE("violation fraction") {
  std::vector<ConvexSet> sets;
  for (int i = 0; i < 200; ++i) sets.emplace_back(Halfspace(v2(1, 0), 1.0 + i));
  const ConstraintFamily family(std::move(sets));
  CHECK(violation_fraction(family, v2(0, 0)) == 0.0);
  CHECK(violation_fraction(family, v2(1.5, 0)) == doctest::Approx(0.005));
  CHECK(violation_fraction(family, v2(500, 0)) == 1.0);
  CHECK(violation_fraction(family, v2(1 + 1e-12, 0)) == 0.0);
}

TEST_CASE("ergodic gap uses the objective in closed form") {
  const Vector beta_star = v2(2, 0);
  Problem p(ScenarioKind::custom, ConstraintFamily({Halfspace(v2(1, 0), 1.0)}),
            Objective(StreamingLeastSquares{beta_star, 10.0}));
  p.reference_optimum = v2(1, 0);
  CHECK(ergodic_gap(p, v2(1, 0)) == doctest::Approx(0.0));
  // ||x - b*||^2 = 4 and ||x* - b*||^2 = 1.
  CHECK(ergodic_gap(p, v2(0, 0)) == doctest::Approx(3.0));

  SolverState state;
  state.ergodic_projection_sum = v2(3, 0);
  state.ergodic_count = 3;
  CHECK(ergodic_gap(p, state) == doctest::Approx(0.0));
  state.ergodic_count = 0;
  CHECK_THROWS_AS(ergodic_gap(p, state), InvalidArgument);

  Problem bare(ScenarioKind::custom, ConstraintFamily({Halfspace(v2(1, 0), 1.0)}),
               Objective(StreamingLeastSquares{beta_star, 10.0}));
  CHECK_THROWS_AS(ergodic_gap(bare, v2(0, 0)), InvalidArgument);
}

TEST_CASE("eta estimates on simple families") {
  EtaProbeOptions opts;
  opts.probe_count = 200;
  opts.half_width = 3.0;
  RngStream rng(43, 0);

  CHECK(estimate_eta(ConstraintFamily({Halfspace(v2(1, 0), 0.0)}), opts, rng) == doctest::Approx(1.0));
  CHECK(estimate_eta(ConstraintFamily({Halfspace(v2(1, 1), 0.0), Halfspace(v2(1, 1), 0.0)}), opts, rng) ==
        doctest::Approx(1.0));

  // Along the diagonal (t, t) the ratio is t^2 / (2 t^2) = 1/2.
  const double eta = estimate_eta(quadrant(), opts, rng);
  CHECK(eta <= 0.5 + 0.05);
  CHECK(eta > 0.0);

  opts.probe_count = 10;
  CHECK_THROWS_AS(estimate_eta(quadrant(), opts, rng), InvalidArgument);

  // Probes confined to the feasible region never find a violation.
  EtaProbeOptions inside;
  inside.probe_count = 100;
  inside.center = v2(-10, -10);
  inside.half_width = 1.0;
  inside.max_attempts_factor = 2;
  CHECK_THROWS_AS(estimate_eta(quadrant(), inside, rng), NumericalError);
}

TEST_CASE("eta is in (0, 1] and redundant copies do not raise it") {
  RngStream rng(44, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const ConstraintFamily family = random_family(rng, 2, 5, false);
    std::vector<ConvexSet> doubled = family.sets();
    doubled.push_back(family[0]);
    EtaProbeOptions opts;
    opts.probe_count = 300;
    opts.half_width = 5.0;
    RngStream a(45, static_cast<std::uint64_t>(trial));
    RngStream b(45, static_cast<std::uint64_t>(trial));
    const double eta = estimate_eta(family, opts, a);
    const double eta_doubled = estimate_eta(ConstraintFamily(doubled), opts, b);
    CHECK(eta > 0.0);
    CHECK(eta <= 1.0);
    CHECK(eta_doubled <= eta + 1e-9);
  }
}

TEST_CASE("log-log slope fits") {
  const auto ks = grid(10, 1000, 10);
  auto exact = records_from(ks, [](double k) { return 1.0 / (k * k); });
  RateFit fit = fit_loglog_slope(exact, MetricField::feasibility_error, 10, 1000);
  CHECK(fit.slope == doctest::Approx(-2.0));
  CHECK(fit.r_squared == doctest::Approx(1.0));
  CHECK(fit.points == ks.size());

  auto scaled = records_from(ks, [](double k) { return 7.0 / k; });
  fit = fit_loglog_slope(scaled, MetricField::feasibility_error, 10, 1000);
  CHECK(fit.slope == doctest::Approx(-1.0));
  CHECK(fit.intercept == doctest::Approx(std::log(7.0)));

  auto envelope = records_from(grid(1000, 100000, 1000), [](double k) { return (1.0 + std::log(k)) / k; });
  fit = fit_loglog_slope(envelope, MetricField::feasibility_error, 1000, 100000);
  CHECK(fit.slope >= -1.2);
  CHECK(fit.slope <= -0.85);

  // Nonpositive values are dropped; too few points is an error.
  auto with_zero = exact;
  with_zero[3].feasibility_error = 0.0;
  CHECK(fit_loglog_slope(with_zero, MetricField::feasibility_error, 10, 1000).points == ks.size() - 1);
  CHECK_THROWS_AS(fit_loglog_slope(exact, MetricField::feasibility_error, 10, 50), NumericalError);
}

TEST_CASE("inverse linearity fits") {
  const auto ks = grid(10, 1000, 10);
  auto a = records_from(ks, [](double k) { return 1.0 / (3.0 * k); });
  RateFit fit = fit_inverse_linearity(a, MetricField::feasibility_error, Abscissa::iteration);
  CHECK(fit.slope == doctest::Approx(3.0));
  CHECK(fit.r_squared == doctest::Approx(1.0));

  auto b = records_from(ks, [](double k) { return 1.0 / (3.0 * k + 5.0); });
  fit = fit_inverse_linearity(b, MetricField::feasibility_error, Abscissa::iteration);
  CHECK(fit.slope == doctest::Approx(3.0));
  CHECK(fit.intercept == doctest::Approx(5.0));

  // samples_used = 6k, so the slope per sample is 3/6.
  fit = fit_inverse_linearity(b, MetricField::feasibility_error, Abscissa::samples_used);
  CHECK(fit.slope == doctest::Approx(0.5));

  auto c = records_from(ks, [](double k) { return 1.0 / (2.0 * k * k); });
  fit = fit_inverse_linearity(c, MetricField::feasibility_distance, Abscissa::iteration);
  CHECK(fit.slope == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("ordinary least squares matches the normal equations") {
  RngStream rng(46, 0);
  std::vector<double> xs;
  std::vector<double> ys;
  for (int i = 0; i < 50; ++i) {
    xs.push_back(rng.uniform(0.0, 10.0));
    ys.push_back(2.0 - 0.7 * xs.back() + 0.3 * rng.normal());
  }
  const RateFit fit = ordinary_least_squares(xs, ys);
  Eigen::MatrixXd a(50, 2);
  Eigen::VectorXd b(50);
  for (int i = 0; i < 50; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = xs[static_cast<std::size_t>(i)];
    b[i] = ys[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(b);
  CHECK(fit.intercept == doctest::Approx(coef[0]).epsilon(1e-10));
  CHECK(fit.slope == doctest::Approx(coef[1]).epsilon(1e-10));
  const double ss_res = (a * coef - b).squaredNorm();
  const double ss_tot = (b.array() - b.mean()).matrix().squaredNorm();
  CHECK(fit.r_squared == doctest::Approx(1.0 - ss_res / ss_tot).epsilon(1e-10));

  CHECK_THROWS_AS(ordinary_least_squares(std::vector<double>{1.0}, std::vector<double>{1.0}), InvalidArgument);
  CHECK_THROWS_AS(ordinary_least_squares(std::vector<double>{1.0, 1.0}, std::vector<double>{1.0, 2.0}),
                  NumericalError);
}

TEST_CASE("field values") {
  MetricRecord r;
  r.optimality_error = 1.0;
  r.feasibility_error = 4.0;
  r.violation_fraction = 0.25;
  CHECK(field_value(r, MetricField::feasibility_distance) == 2.0);
  CHECK(field_value(r, MetricField::violation_fraction) == 0.25);
  CHECK_THROWS_AS(field_value(r, MetricField::ergodic_gap), InvalidArgument);
  r.ergodic_gap = 0.5;
  CHECK(field_value(r, MetricField::ergodic_gap) == 0.5);
}
