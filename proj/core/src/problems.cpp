#include "rmcp/problems.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "rmcp/metrics.hpp"
#include "rmcp/polyproj.hpp"

namespace rmcp {

namespace {

constexpr double kReferenceTol = 1e-12;
constexpr double kOracleAgreementTol = 1e-8;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::size_t model_dimension(const Objective::Model& model) {
  return std::visit(Overloaded{
                        [](const StreamingLeastSquares& ls) { return static_cast<std::size_t>(ls.beta_star.size()); },
                        [](const Quadratic& q) { return static_cast<std::size_t>(q.center.size()); },
                    },
                    model);
}

Vector unit_direction(double angle) { return make_vector({std::cos(angle), std::sin(angle)}); }

}  // namespace

Objective::Objective(Model model) : model_(std::move(model)), dimension_(model_dimension(model_)) {
  if (dimension_ == 0) throw DimensionError("objective: zero dimension");
  std::visit(Overloaded{
                 [](const StreamingLeastSquares& ls) {
                   require_finite(ls.beta_star, "least squares beta*");
                   if (!(ls.noise_variance >= 0.0)) throw InvalidArgument("least squares: negative noise variance");
                 },
                 [](const Quadratic& q) {
                   require_finite(q.center, "quadratic center");
                   if (!(q.weight > 0.0)) throw InvalidArgument("quadratic: weight must be positive");
                 },
             },
             model_);
}

double Objective::value(const Vector& x) const {
  return std::visit(Overloaded{
                        [&](const StreamingLeastSquares& ls) {
                          return (x - ls.beta_star).squaredNorm() + ls.noise_variance;
                        },
                        [&](const Quadratic& q) { return q.weight * (x - q.center).squaredNorm(); },
                    },
                    model_);
}

Vector Objective::gradient(const Vector& x) const {
  return std::visit(Overloaded{
                        [&](const StreamingLeastSquares& ls) -> Vector { return 2.0 * (x - ls.beta_star); },
                        [&](const Quadratic& q) -> Vector { return 2.0 * q.weight * (x - q.center); },
                    },
                    model_);
}

Vector Objective::sample_subgradient(const Vector& x, RngStream& rng) const {
  if (static_cast<std::size_t>(x.size()) != dimension_) throw DimensionError("sample_subgradient: dimension mismatch");
  return std::visit(Overloaded{
                        [&](const StreamingLeastSquares& ls) -> Vector {
                          // g = -2 (Y - X'b) X with Y = X'b* + eta
                          Vector features = rng.normal_vector(dimension_);
                          const double noise = std::sqrt(ls.noise_variance) * rng.normal();
                          const double response = features.dot(ls.beta_star) + noise;
                          return -2.0 * (response - features.dot(x)) * features;
                        },
                        [&](const Quadratic& q) -> Vector { return 2.0 * q.weight * (x - q.center); },
                    },
                    model_);
}

const Vector& Objective::unconstrained_minimizer() const {
  return std::visit(Overloaded{
                        [](const StreamingLeastSquares& ls) -> const Vector& { return ls.beta_star; },
                        [](const Quadratic& q) -> const Vector& { return q.center; },
                    },
                    model_);
}

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::sphere: return "sphere";
    case ScenarioKind::two_sphere: return "two_sphere";
    case ScenarioKind::svm: return "svm";
    case ScenarioKind::custom: return "custom";
  }
  return "?";
}

Problem::Problem(ScenarioKind kind_, ConstraintFamily family_, Objective objective_)
    : kind(kind_),
      dimension(family_.dimension()),
      family(std::move(family_)),
      objective(std::move(objective_)),
      witness(Vector::Zero(static_cast<Eigen::Index>(dimension))),
      planted(Vector::Zero(static_cast<Eigen::Index>(dimension))),
      probe_center(Vector::Zero(static_cast<Eigen::Index>(dimension))) {
  if (objective.dimension() != dimension) throw DimensionError("problem: objective and constraints differ in dimension");
}

// ---------------------------------------------------------------------------

IndexSampler::IndexSampler(std::size_t m) : scratch_(m) {
  if (m == 0) throw InvalidArgument("IndexSampler: empty population");
  for (std::size_t i = 0; i < m; ++i) scratch_[i] = i;
}

void IndexSampler::sample(std::size_t count, RngStream& rng, std::vector<std::size_t>& out) {
  const std::size_t m = scratch_.size();
  if (count == 0 || count > m) {
    throw InvalidArgument("sample_indices: need 1 <= M <= m (M=" + std::to_string(count) + ", m=" + std::to_string(m) + ")");
  }
  out.resize(count);
  swaps_.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + rng.uniform_index(m - i);
    std::swap(scratch_[i], scratch_[j]);
    swaps_[i] = j;
    out[i] = scratch_[i];
  }
  for (std::size_t i = count; i-- > 0;) std::swap(scratch_[i], scratch_[swaps_[i]]);
}

std::vector<std::size_t> sample_indices(std::size_t m, std::size_t count, RngStream& rng) {
  if (count == 0 || count > m) {
    throw InvalidArgument("sample_indices: need 1 <= M <= m (M=" + std::to_string(count) + ", m=" + std::to_string(m) + ")");
  }
  IndexSampler sampler(m);
  std::vector<std::size_t> out;
  sampler.sample(count, rng, out);
  return out;
}

void sample_batch(const Problem& problem, const Vector& y, std::size_t count, RngStream& rng, IndexSampler& sampler,
                  SampleBatch& out) {
  if (sampler.population() != problem.family.size()) throw InvalidArgument("sample_batch: sampler population mismatch");
  sampler.sample(count, rng, out.indices);
  out.projections.resize(count);
  for (std::size_t i = 0; i < count; ++i) out.projections[i] = project(problem.family[out.indices[i]], y);
}

SampleBatch sample_batch(const Problem& problem, const Vector& y, std::size_t count, RngStream& rng) {
  IndexSampler sampler(problem.family.size());
  SampleBatch batch;
  sample_batch(problem, y, count, rng, sampler, batch);
  return batch;
}

// ---------------------------------------------------------------------------

double documented_gradient_bound(const Problem& problem) {
  const auto n = static_cast<double>(problem.dimension);
  // Largest distance from `anchor` to a point of the probe box.
  auto reach = [&](const Vector& anchor) {
    return (anchor - problem.probe_center).norm() + std::sqrt(n) * problem.probe_half_width;
  };
  return std::visit(Overloaded{
                        [&](const StreamingLeastSquares& ls) {
                          // E||g||^2 = 4 ((n + 2) ||b - b*||^2 + n var(eta)) for X ~ N(0, I_n)
                          const double r = reach(ls.beta_star);
                          return 2.0 * std::sqrt((n + 2.0) * r * r + n * ls.noise_variance);
                        },
                        [&](const Quadratic& q) { return 2.0 * q.weight * reach(q.center); },
                    },
                    problem.objective.model());
}

Vector reference_optimum(const Problem& problem) {
  const Vector& target = problem.objective.unconstrained_minimizer();
  if (problem.kind != ScenarioKind::svm) return reference_projection(problem.family, target, kReferenceTol);

  Polyhedron poly(problem.dimension);
  for (const auto& set : problem.family) {
    const auto* h = set.as_halfspace();
    if (h == nullptr) throw InvalidArgument("reference_optimum: SVM constraints must be halfspaces");
    poly.add_row(*h);
  }
  HildrethOptions options;
  options.tol = kReferenceTol;
  options.max_iter = 1'000'000;
  QpSolution solution = project_hildreth(target, poly, options);
  if (poly.size() <= 12 && poly.dimension() <= 16) {
    const QpSolution check = project_activeset_oracle(target, poly);
    if ((check.point - solution.point).norm() > kOracleAgreementTol * (1.0 + target.norm())) {
      throw NumericalError("reference_optimum: Hildreth and active-set oracle disagree");
    }
  }
  return solution.point;
}

namespace {

void finalize_least_squares(Problem& problem) {
  problem.gradient_bound = documented_gradient_bound(problem);
  problem.reference_optimum = reference_optimum(problem);
}

}  // namespace

Problem make_sphere_scenario(const SphereParams& params, RngStream& rng) {
  if (params.dimension != 2) throw InvalidArgument("sphere scenario: only dimension 2 is supported");
  if (params.constraints < 3) throw InvalidArgument("sphere scenario: need at least 3 constraints");
  if (!(params.radius > 0.0)) throw InvalidArgument("sphere scenario: radius must be positive");
  if (!(params.planted_offset > 0.0)) throw InvalidArgument("sphere scenario: planted_offset must be positive");
  if (!(params.jitter >= 0.0 && params.jitter < 1.0)) throw InvalidArgument("sphere scenario: jitter must be in [0, 1)");

  const std::size_t m = params.constraints;
  const double spacing = 2.0 * std::numbers::pi / static_cast<double>(m);
  std::vector<ConvexSet> sets;
  std::vector<Vector> normals;
  sets.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double angle = spacing * (static_cast<double>(i) + params.jitter * (rng.uniform() - 0.5));
    normals.push_back(unit_direction(angle));
    sets.emplace_back(Halfspace(normals.back(), params.radius));
  }

  Vector beta_star;
  if (params.beta_star) {
    beta_star = *params.beta_star;
    if (beta_star.size() != 2) throw DimensionError("sphere scenario: beta_star must be 2-dimensional");
  } else {
    // On the ray of a cutting-plane normal, so the optimum is that plane's
    // tangent point and the constraint binds.
    beta_star = (params.radius + params.planted_offset) * normals[rng.uniform_index(m)];
  }

  Problem problem(ScenarioKind::sphere, ConstraintFamily(std::move(sets)),
                  Objective(StreamingLeastSquares{beta_star, params.noise_variance}));
  problem.strong_convexity = 2.0;
  problem.witness = Vector::Zero(2);
  problem.planted = beta_star;
  problem.probe_center = Vector::Zero(2);
  problem.probe_half_width = 3.0 * params.radius;
  finalize_least_squares(problem);
  return problem;
}

Problem make_two_sphere_scenario(const TwoSphereParams& params, RngStream& rng) {
  if (params.constraints < 4) throw InvalidArgument("two-sphere scenario: need at least 4 constraints");
  if (!(params.radius > params.center_offset && params.center_offset > 0.0)) {
    throw InvalidArgument("two-sphere scenario: need radius > center_offset > 0 for a nonempty lens");
  }
  if (!(params.arc_degrees > 0.0 && params.arc_degrees < 90.0)) {
    throw InvalidArgument("two-sphere scenario: arc_degrees must be in (0, 90)");
  }
  if (!(params.jitter >= 0.0 && params.jitter < 1.0)) throw InvalidArgument("two-sphere scenario: jitter must be in [0, 1)");

  const double arc = params.arc_degrees * std::numbers::pi / 180.0;
  const std::size_t left_count = (params.constraints + 1) / 2;
  const std::size_t right_count = params.constraints - left_count;

  std::vector<ConvexSet> sets;
  sets.reserve(params.constraints);
  // Tangent halfspaces u'x <= r + u'c with normals on an arc facing the other sphere.
  auto add_sphere = [&](double center_x, double facing, std::size_t count) {
    const Vector center = make_vector({center_x, 0.0});
    const double spacing = 2.0 * arc / static_cast<double>(count);
    for (std::size_t i = 0; i < count; ++i) {
      const double offset = -arc + spacing * (static_cast<double>(i) + 0.5 + params.jitter * (rng.uniform() - 0.5));
      Vector u = unit_direction(facing + offset);
      const double b = params.radius + u.dot(center);
      sets.emplace_back(Halfspace(std::move(u), b));
    }
  };
  add_sphere(-params.center_offset, 0.0, left_count);
  add_sphere(params.center_offset, std::numbers::pi, right_count);

  const double tip = std::sqrt(params.radius * params.radius - params.center_offset * params.center_offset);
  Vector beta_star = params.beta_star ? *params.beta_star : make_vector({0.0, 2.0 * tip});
  if (beta_star.size() != 2) throw DimensionError("two-sphere scenario: beta_star must be 2-dimensional");

  Problem problem(ScenarioKind::two_sphere, ConstraintFamily(std::move(sets)),
                  Objective(StreamingLeastSquares{beta_star, params.noise_variance}));
  problem.strong_convexity = 2.0;
  problem.witness = Vector::Zero(2);
  problem.planted = beta_star;
  problem.probe_center = Vector::Zero(2);
  problem.probe_half_width = 3.0 * tip;
  finalize_least_squares(problem);
  return problem;
}

Problem make_svm_scenario(const SvmParams& params, RngStream& rng) {
  const std::size_t d = params.dimension;
  const std::size_t m = params.constraints;
  if (d < 2) throw InvalidArgument("svm scenario: dimension must be at least 2");
  if (m < d) throw InvalidArgument("svm scenario: need constraints >= dimension");
  if (!(params.margin > 0.0)) throw InvalidArgument("svm scenario: margin must be positive");

  Vector direction = rng.normal_vector(d);
  direction.normalize();

  std::vector<Vector> points;
  std::vector<double> labels;
  points.reserve(m);
  labels.reserve(m);
  double min_margin = std::numeric_limits<double>::infinity();
  while (points.size() < m) {
    const double component = rng.uniform() < 0.5 ? -1.0 : 1.0;
    Vector x = component * params.mean_separation * direction + rng.normal_vector(d);
    const double score = direction.dot(x);
    if (x.norm() == 0.0 || score == 0.0) continue;  // degenerate draw; resample
    const double label = score > 0.0 ? 1.0 : -1.0;
    min_margin = std::min(min_margin, label * score);
    points.push_back(std::move(x));
    labels.push_back(label);
  }

  std::vector<ConvexSet> sets;
  sets.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    // y_i x_i'b >= 1  <=>  -y_i x_i'b <= -1
    sets.emplace_back(Halfspace(-labels[i] * points[i], -1.0));
  }

  Problem problem(ScenarioKind::svm, ConstraintFamily(std::move(sets)), Objective(Quadratic{Vector::Zero(d), 0.5}));
  problem.strong_convexity = 1.0;
  problem.planted = ((1.0 + params.margin) / min_margin) * direction;
  problem.witness = problem.planted;
  problem.reference_optimum = reference_optimum(problem);
  problem.probe_center = *problem.reference_optimum;
  problem.probe_half_width = 3.0 * std::max(1.0, problem.reference_optimum->norm());
  problem.gradient_bound = documented_gradient_bound(problem);
  return problem;
}

}  // namespace rmcp
