#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "rmcp/metrics.hpp"
#include "rmcp/polyproj.hpp"
#include "rmcp/problems.hpp"
#include "rmcp/rng.hpp"

using namespace rmcp;

namespace {

Vector v2(double a, double b) { return make_vector({a, b}); }

double min_slack(const Problem& p, const Vector& x) {
  double slack = std::numeric_limits<double>::infinity();
  for (const auto& s : p.family) {
    if (const auto* h = s.as_halfspace()) slack = std::min(slack, -h->residual(x) / std::sqrt(h->normal_squared_norm()));
  }
  return slack;
}

Vector random_box_point(const Problem& p, RngStream& rng) {
  Vector z = p.probe_center;
  for (Eigen::Index j = 0; j < z.size(); ++j) z[j] += rng.uniform(-p.probe_half_width, p.probe_half_width);
  return z;
}

// Mean of n subgradient draws at x compared with the analytic gradient,
// coordinate-wise within `sigmas` standard errors.
void check_unbiased(const Problem& p, const Vector& x, RngStream& rng, int n, double sigmas) {
  const auto d = x.size();
  Vector sum = Vector::Zero(d);
  Vector sum_sq = Vector::Zero(d);
  for (int i = 0; i < n; ++i) {
    const Vector g = p.sample_subgradient(x, rng);
    sum += g;
    sum_sq += g.cwiseProduct(g);
  }
  const Vector mean = sum / n;
  const Vector expected = p.objective.gradient(x);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double var = std::max(sum_sq[j] / n - mean[j] * mean[j], 0.0);
    const double se = std::sqrt(var / n);
    CHECK(std::abs(mean[j] - expected[j]) <= sigmas * se + 1e-12 * (1.0 + std::abs(expected[j])));
  }
}

}  // namespace

TEST_CASE("sample_indices draws distinct indices") {
  RngStream rng(1, 0);
  std::vector<std::size_t> all = sample_indices(5, 5, rng);
  std::sort(all.begin(), all.end());
  CHECK(all == std::vector<std::size_t>{0, 1, 2, 3, 4});

  for (int i = 0; i < 1000; ++i) {
    const auto idx = sample_indices(20, 7, rng);
    CHECK(std::set<std::size_t>(idx.begin(), idx.end()).size() == 7);
    for (auto j : idx) CHECK(j < 20);
  }
  CHECK_THROWS_AS(sample_indices(3, 4, rng), InvalidArgument);
  CHECK_THROWS_AS(sample_indices(3, 0, rng), InvalidArgument);
}

TEST_CASE("single draws are uniform over 300 indices") {
  RngStream rng(2, 0);
  IndexSampler sampler(300);
  std::vector<std::size_t> out;
  std::vector<int> counts(300, 0);
  constexpr int kDraws = 1000000;
  for (int i = 0; i < kDraws; ++i) {
    sampler.sample(1, rng, out);
    ++counts[out[0]];
  }
  const double expected = kDraws / 300.0;
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 99% quantile of chi-square with 299 degrees of freedom.
  CHECK(chi2 < 359.9);
}

TEST_CASE("pairs from three indices are equally likely") {
  RngStream rng(3, 0);
  std::map<std::pair<std::size_t, std::size_t>, int> counts;
  constexpr int kDraws = 100000;
  for (int i = 0; i < kDraws; ++i) {
    auto idx = sample_indices(3, 2, rng);
    std::sort(idx.begin(), idx.end());
    ++counts[{idx[0], idx[1]}];
  }
  CHECK(counts.size() == 3);
  const double p = 1.0 / 3.0;
  const double sd = std::sqrt(p * (1 - p) / kDraws);
  for (const auto& [pair, c] : counts) CHECK(std::abs(c / double(kDraws) - p) <= 3.0 * sd);
}

TEST_CASE("a long-lived sampler reproduces fresh draws") {
  RngStream a(4, 0);
  RngStream b(4, 0);
  IndexSampler sampler(50);
  std::vector<std::size_t> out;
  for (int i = 0; i < 100; ++i) {
    sampler.sample(6, a, out);
    CHECK(out == sample_indices(50, 6, b));
  }
}

TEST_CASE("sample_batch projects onto the sampled sets") {
  const ConstraintFamily family({Halfspace(v2(1, 0), 1.0), Halfspace(v2(0, 1), 1.0)});
  Problem p(ScenarioKind::custom, family, Objective(Quadratic{v2(0, 0), 0.5}));
  RngStream rng(5, 0);

  SampleBatch inside = sample_batch(p, v2(0, 0), 2, rng);
  for (const auto& proj : inside.projections) CHECK(proj == v2(0, 0));

  SampleBatch both = sample_batch(p, v2(2, 0), 2, rng);
  std::vector<std::size_t> idx = both.indices;
  std::sort(idx.begin(), idx.end());
  CHECK(idx == std::vector<std::size_t>{0, 1});
  int moved = 0;
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(both.projections[i] == project(family[both.indices[i]], v2(2, 0)));
    if (both.projections[i] != v2(2, 0)) ++moved;
  }
  CHECK(moved == 1);
}

TEST_CASE("sphere scenario structure") {
  RngStream rng(6, kScenarioStream);
  SphereParams params;
  params.radius = 10.0;
  const Problem p = make_sphere_scenario(params, rng);
  CHECK(p.family.size() == 300);
  CHECK(p.dimension == 2);
  CHECK(p.strong_convexity == 2.0);
  CHECK(min_slack(p, p.witness) >= 1e-6);
  for (const auto& s : p.family) {
    const auto* h = s.as_halfspace();
    REQUIRE(h != nullptr);
    CHECK(std::sqrt(h->normal_squared_norm()) == doctest::Approx(1.0));
    CHECK(h->offset() == doctest::Approx(10.0));
  }
  // The planted point lies outside the polytope, so the constraint binds.
  CHECK(feasibility_error(p.family, p.planted) > 0.0);
  REQUIRE(p.reference_optimum.has_value());
  CHECK(feasibility_error(p.family, *p.reference_optimum) < 1e-16);
}

TEST_CASE("sphere reference optimum for a far planted point") {
  RngStream rng(7, kScenarioStream);
  SphereParams params;
  params.radius = 10.0;
  params.beta_star = v2(20.0, 0.0);
  const Problem p = make_sphere_scenario(params, rng);
  // Polytope vertices lie within r / cos(2 pi / m) of the origin.
  CHECK((*p.reference_optimum - v2(10.0, 0.0)).norm() < 0.05);
  CHECK(p.planted == v2(20.0, 0.0));
}

TEST_CASE("least squares reference optimum is b* when b* is feasible") {
  RngStream rng(8, kScenarioStream);
  SphereParams params;
  params.radius = 10.0;
  params.beta_star = v2(1.0, -2.0);
  const Problem p = make_sphere_scenario(params, rng);
  CHECK((*p.reference_optimum - v2(1.0, -2.0)).norm() < 1e-12);
}

TEST_CASE("least squares subgradients are unbiased") {
  RngStream scenario(9, kScenarioStream);
  SphereParams params;
  params.radius = 10.0;
  const Problem p = make_sphere_scenario(params, scenario);
  RngStream rng(9, 0);
  check_unbiased(p, v2(0, 0), rng, 1000000, 4.0);
  const Vector g0 = p.objective.gradient(v2(0, 0));
  CHECK((g0 + 2.0 * p.planted).norm() < 1e-12);
  for (int i = 0; i < 4; ++i) check_unbiased(p, random_box_point(p, rng), rng, 200000, 4.0);
}

TEST_CASE("least squares objective has the closed form") {
  const Objective f(StreamingLeastSquares{v2(1, 2), 10.0});
  CHECK(f.value(v2(1, 2)) == doctest::Approx(10.0));
  CHECK(f.value(v2(3, 2)) == doctest::Approx(14.0));
  CHECK((f.gradient(v2(3, 2)) - v2(4, 0)).norm() < 1e-15);
  CHECK(f.unconstrained_minimizer() == v2(1, 2));
}

TEST_CASE("second moment stays below the documented bound") {
  RngStream scenario(10, kScenarioStream);
  const Problem sphere = make_sphere_scenario(SphereParams{}, scenario);
  const Problem lens = make_two_sphere_scenario(TwoSphereParams{}, scenario);
  RngStream rng(10, 0);
  for (const Problem* p : {&sphere, &lens}) {
    const double b2 = p->gradient_bound * p->gradient_bound;
    for (int point = 0; point < 5; ++point) {
      const Vector x = random_box_point(*p, rng);
      double second = 0.0;
      constexpr int kDraws = 20000;
      for (int i = 0; i < kDraws; ++i) second += p->sample_subgradient(x, rng).squaredNorm();
      CHECK(second / kDraws <= b2);
    }
  }
}

TEST_CASE("two-sphere scenario structure") {
  RngStream rng(11, kScenarioStream);
  const Problem p = make_two_sphere_scenario(TwoSphereParams{}, rng);
  CHECK(p.family.size() == 300);
  // Every tangent row keeps the origin with slack at least r - |u'c| >= 1.
  CHECK(min_slack(p, v2(0, 0)) >= 1.0 - 1e-12);
  for (double x1 : {-1.0, -0.5, 0.5, 1.0}) CHECK(min_slack(p, v2(x1, 0)) >= -1e-12);

  std::size_t left = 0;
  for (const auto& s : p.family) {
    const auto* h = s.as_halfspace();
    REQUIRE(h != nullptr);
    if (h->normal()[0] > 0.0) ++left;  // rows of the sphere centred at (-60, 0) face +x
  }
  CHECK(left == 150);
  REQUIRE(p.reference_optimum.has_value());
  CHECK(feasibility_error(p.family, *p.reference_optimum) < 1e-16);
}

TEST_CASE("rows from opposite spheres near the tip cross at an obtuse angle") {
  RngStream rng(12, kScenarioStream);
  const Problem p = make_two_sphere_scenario(TwoSphereParams{}, rng);
  const Vector tip_region = *p.reference_optimum + v2(0.0, 5.0);
  // Most violated row from each sphere.
  const Halfspace* best[2] = {nullptr, nullptr};
  double worst[2] = {0.0, 0.0};
  for (const auto& s : p.family) {
    const auto* h = s.as_halfspace();
    const int side = h->normal()[0] > 0.0 ? 0 : 1;
    const double r = h->residual(tip_region);
    if (r > worst[side]) {
      worst[side] = r;
      best[side] = h;
    }
  }
  REQUIRE(best[0] != nullptr);
  REQUIRE(best[1] != nullptr);
  CHECK(best[0]->normal().dot(best[1]->normal()) < 0.0);
  const Polyhedron pair(2, {*best[0], *best[1]});
  const QpSolution s = project_activeset_oracle(tip_region, pair);
  REQUIRE(s.multipliers[0] > 0.0);
  REQUIRE(s.multipliers[1] > 0.0);
  const double cosine = best[0]->normal().dot(best[1]->normal());
  CHECK(improvement_factor(tip_region, pair, s) == doctest::Approx(2.0 / (1.0 + std::abs(cosine))).epsilon(1e-8));
}

TEST_CASE("svm scenario structure") {
  RngStream rng(13, kScenarioStream);
  SvmParams params;
  params.dimension = 10;
  params.constraints = 40;
  const Problem p = make_svm_scenario(params, rng);
  CHECK(p.family.size() == 40);
  CHECK(p.strong_convexity == 1.0);
  // The rescaled planted separator meets every constraint with margin.
  CHECK(min_slack(p, p.witness) > 1e-6);
  Vector beta = Vector::Zero(10);
  beta[0] = 3.0;
  beta[1] = -1.0;
  CHECK(p.objective.gradient(beta) == beta);
  RngStream draws(13, 0);
  CHECK(p.sample_subgradient(beta, draws) == beta);
  REQUIRE(p.reference_optimum.has_value());
  CHECK(feasibility_error(p.family, *p.reference_optimum) < 1e-16);
  CHECK(p.reference_optimum->norm() <= p.witness.norm() + 1e-9);
}

TEST_CASE("svm reference optimum on tiny instances") {
  RngStream rng(14, kScenarioStream);
  SvmParams params;
  params.dimension = 2;
  params.constraints = 4;
  const Problem p = make_svm_scenario(params, rng);
  Polyhedron poly(2);
  for (const auto& s : p.family) poly.add_row(*s.as_halfspace());
  const QpSolution oracle = project_activeset_oracle(v2(0, 0), poly);
  CHECK((*p.reference_optimum - oracle.point).norm() < 1e-8);

  // y_1 x_1'b >= 1 with x_1 = e_1: optimum e_1.
  const ConstraintFamily one({Halfspace(make_vector({-1, 0, 0}), -1.0)});
  Problem single(ScenarioKind::svm, one, Objective(Quadratic{Vector::Zero(3), 0.5}));
  CHECK((reference_optimum(single) - make_vector({1, 0, 0})).norm() < 1e-10);

  const ConstraintFamily corner({Halfspace(v2(-1, 0), -1.0), Halfspace(v2(0, -1), -1.0)});
  Problem both(ScenarioKind::svm, corner, Objective(Quadratic{v2(0, 0), 0.5}));
  CHECK((reference_optimum(both) - v2(1, 1)).norm() < 1e-10);
}

TEST_CASE("scenario builders validate parameters") {
  RngStream rng(15, kScenarioStream);
  SphereParams sphere;
  sphere.constraints = 2;
  CHECK_THROWS_AS(make_sphere_scenario(sphere, rng), InvalidArgument);
  sphere = SphereParams{};
  sphere.radius = -1.0;
  CHECK_THROWS_AS(make_sphere_scenario(sphere, rng), InvalidArgument);
  SvmParams svm;
  svm.dimension = 10;
  svm.constraints = 5;
  CHECK_THROWS_AS(make_svm_scenario(svm, rng), InvalidArgument);
}

TEST_CASE("scenario generation is reproducible") {
  RngStream a(16, kScenarioStream);
  RngStream b(16, kScenarioStream);
  const Problem p = make_two_sphere_scenario(TwoSphereParams{}, a);
  const Problem q = make_two_sphere_scenario(TwoSphereParams{}, b);
  for (std::size_t i = 0; i < p.family.size(); ++i) {
    CHECK(p.family[i].as_halfspace()->normal() == q.family[i].as_halfspace()->normal());
    CHECK(p.family[i].as_halfspace()->offset() == q.family[i].as_halfspace()->offset());
  }
  CHECK(*p.reference_optimum == *q.reference_optimum);
}
