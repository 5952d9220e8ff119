#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "rmcp/geometry.hpp"
#include "rmcp/rng.hpp"

namespace rmcp {

// ---------------------------------------------------------------------------
// Objectives and their stochastic subgradient oracles
// ---------------------------------------------------------------------------

/// F(b) = E[(Y - X'b)^2], X ~ N(0, I), Y = X'b* + eta, eta ~ N(0, noise_variance).
/// In closed form F(b) = ||b - b*||^2 + noise_variance.
struct StreamingLeastSquares {
  Vector beta_star;
  double noise_variance = 10.0;
};

/// F(x) = weight * ||x - center||^2 with exact gradients.
struct Quadratic {
  Vector center;
  double weight = 0.5;
};

class Objective {
 public:
  using Model = std::variant<StreamingLeastSquares, Quadratic>;

  explicit Objective(Model model);

  const Model& model() const noexcept { return model_; }
  std::size_t dimension() const noexcept { return dimension_; }

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  /// One draw of g(x, v) with E[g(x, v)] = gradient(x).
  Vector sample_subgradient(const Vector& x, RngStream& rng) const;
  /// The unconstrained minimizer.
  const Vector& unconstrained_minimizer() const;

 private:
  Model model_;
  std::size_t dimension_;
};

// ---------------------------------------------------------------------------
// Problem bundle
// ---------------------------------------------------------------------------

enum class ScenarioKind { sphere, two_sphere, svm, custom };

std::string_view to_string(ScenarioKind kind);

struct Problem {
  Problem(ScenarioKind kind, ConstraintFamily family, Objective objective);

  ScenarioKind kind;
  std::size_t dimension;
  ConstraintFamily family;
  Objective objective;
  std::optional<double> strong_convexity;
  std::optional<Vector> reference_optimum;
  /// Documented bound B with E||g(x, v)||^2 <= B^2 for x in the probe box.
  double gradient_bound = 0.0;
  /// A point satisfying every constraint with slack.
  Vector witness;
  /// b* for least squares, the rescaled planted separator for the SVM.
  Vector planted;
  /// Box (center, half-width) covering the region of interest; used for
  /// linear-regularity probes and the gradient bound.
  Vector probe_center;
  double probe_half_width = 1.0;

  Vector sample_subgradient(const Vector& x, RngStream& rng) const { return objective.sample_subgradient(x, rng); }
};

// ---------------------------------------------------------------------------
// Sampling oracle
// ---------------------------------------------------------------------------

/// Uniform M-subsets of {0..m-1} via partial Fisher-Yates on a scratch array.
/// The scratch array is restored after each draw, so a long-lived sampler
/// yields the same sequence as fresh ones given the same stream.
class IndexSampler {
 public:
  explicit IndexSampler(std::size_t m);

  std::size_t population() const noexcept { return scratch_.size(); }
  void sample(std::size_t count, RngStream& rng, std::vector<std::size_t>& out);

 private:
  std::vector<std::size_t> scratch_;
  std::vector<std::size_t> swaps_;
};

std::vector<std::size_t> sample_indices(std::size_t m, std::size_t count, RngStream& rng);

struct SampleBatch {
  std::vector<std::size_t> indices;
  std::vector<Vector> projections;
};

SampleBatch sample_batch(const Problem& problem, const Vector& y, std::size_t count, RngStream& rng);
void sample_batch(const Problem& problem, const Vector& y, std::size_t count, RngStream& rng,
                  IndexSampler& sampler, SampleBatch& out);

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

struct SphereParams {
  std::size_t dimension = 2;
  std::size_t constraints = 300;
  double radius = 1000.0;
  /// Angular jitter as a fraction of the normal spacing.
  double jitter = 0.5;
  double noise_variance = 10.0;
  /// Distance of the default b* beyond its cutting plane.
  double planted_offset = 1.0;
  /// Defaults to (radius + planted_offset) * u_j for a random cutting-plane normal u_j.
  std::optional<Vector> beta_star;
};

struct TwoSphereParams {
  std::size_t constraints = 300;
  double radius = 61.0;
  double center_offset = 60.0;
  /// Half-width (degrees) of the arc of tangent normals on each sphere,
  /// centred on the direction facing the other sphere.
  double arc_degrees = 20.0;
  double jitter = 0.5;
  double noise_variance = 10.0;
  /// Defaults to a point above the upper lens tip.
  std::optional<Vector> beta_star;
};

struct SvmParams {
  std::size_t dimension = 100;
  std::size_t constraints = 200;
  double margin = 0.1;
  /// Mixture component means are +/- mean_separation * w*.
  double mean_separation = 2.0;
};

Problem make_sphere_scenario(const SphereParams& params, RngStream& rng);
Problem make_two_sphere_scenario(const TwoSphereParams& params, RngStream& rng);
Problem make_svm_scenario(const SvmParams& params, RngStream& rng);

/// Constrained minimizer of the problem's objective. Least squares reduces to
/// the projection of b* onto X; the SVM to the projection of the origin onto
/// the constraint polyhedron.
Vector reference_optimum(const Problem& problem);

/// Upper bound on sqrt(E||g||^2) over the problem's probe box.
double documented_gradient_bound(const Problem& problem);

}  // namespace rmcp
