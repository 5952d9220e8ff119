#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "rmcp/geometry.hpp"
#include "rmcp/problems.hpp"
#include "rmcp/rng.hpp"

namespace rmcp {

struct SolverState;

struct DykstraOptions {
  double tol = 1e-10;
  std::size_t max_visits = 1'000'000;
  /// Cycles between exact solves on the current correction support
  /// (halfspace-only families). Zero disables.
  std::size_t polish_every = 4;
};

/// Dykstra's cyclic projections with correction terms over every set of the
/// family. Halfspace-only families additionally try an exact equality solve on
/// the rows carrying a correction, which terminates the slow zig-zag between
/// nearly parallel cutting planes. Throws NumericalError when the visit budget
/// is exhausted.
Vector dykstra_projection(const ConstraintFamily& family, const Vector& x, const DykstraOptions& options = {});

/// High-accuracy Euclidean projection onto the full intersection.
Vector reference_projection(const ConstraintFamily& family, const Vector& x, double tol = 1e-10);

/// ||x - Pi_X x||^2
double feasibility_error(const ConstraintFamily& family, const Vector& x, double tol = 1e-10);
/// ||x - x*||^2
double optimality_error(const Vector& x, const Vector& x_star);
/// Fraction of sets with distance(set, x) > tol.
double violation_fraction(const ConstraintFamily& family, const Vector& x, double tol = 1e-9);

/// F(x~) - F(x*) for the ergodic projected iterate. Requires a reference optimum.
double ergodic_gap(const Problem& problem, const Vector& ergodic_point);
double ergodic_gap(const Problem& problem, const SolverState& state);

struct EtaProbeOptions {
  std::size_t probe_count = 1000;
  Vector center;
  double half_width = 1.0;
  /// Attempts per requested probe before giving up on finding infeasible points.
  std::size_t max_attempts_factor = 100;
  double projection_tol = 1e-10;
};

/// Empirical linear-regularity constant: the smallest ratio
/// max_i d^2(z, X_i) / d^2(z, X) over infeasible probes z, clamped to (0, 1].
double estimate_eta(const ConstraintFamily& family, const EtaProbeOptions& options, RngStream& rng);

struct MetricRecord {
  std::size_t k = 0;
  std::uint64_t samples_used = 0;
  double optimality_error = 0.0;
  double feasibility_error = 0.0;
  double violation_fraction = 0.0;
  std::optional<double> ergodic_gap;
};

/// feasibility_distance is sqrt(feasibility_error).
enum class MetricField { optimality_error, feasibility_error, violation_fraction, ergodic_gap, feasibility_distance };
enum class Abscissa { iteration, samples_used };

std::string_view to_string(MetricField field);
double field_value(const MetricRecord& record, MetricField field);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t k_min = 0;
  std::size_t k_max = 0;
  std::size_t points = 0;
};

/// OLS of log(value) on log(k) over records with k in [k_min, k_max].
/// Nonpositive values are dropped; fewer than 10 remaining is an error.
RateFit fit_loglog_slope(std::span<const MetricRecord> records, MetricField field, std::size_t k_min,
                         std::size_t k_max);

/// OLS of 1/value on k (or on samples_used).
RateFit fit_inverse_linearity(std::span<const MetricRecord> records, MetricField field, Abscissa against);

/// Plain OLS y = intercept + slope * x with coefficient of determination.
RateFit ordinary_least_squares(std::span<const double> xs, std::span<const double> ys);

}  // namespace rmcp
