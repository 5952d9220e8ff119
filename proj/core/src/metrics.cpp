#include "rmcp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "rmcp/polyproj.hpp"
#include "rmcp/solver.hpp"

namespace rmcp {

namespace {

constexpr double kPolishMultiplierTol = 1e-10;

double max_family_violation(const ConstraintFamily& family, const Vector& x) {
  double worst = 0.0;
  for (const auto& set : family) worst = std::max(worst, distance(set, x));
  return worst;
}

// Exact solve seeded with the rows currently carrying a Dykstra correction,
// which terminates the slow zig-zag between nearly parallel planes.
bool try_polish(const ConstraintFamily& family, const Vector& x0, const std::vector<double>& lambda,
                double tol, Vector& out) {
  std::vector<const Halfspace*> rows;
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < family.size(); ++i) {
    rows.push_back(family[i].as_halfspace());
    if (lambda[i] > 0.0) support.push_back(i);
  }
  const auto dim = static_cast<std::size_t>(x0.size());
  if (support.size() > dim) support.clear();
  Vector point;
  Vector mu;
  if (!detail::refine_active_set(x0, rows, support, tol, kPolishMultiplierTol, 2 * rows.size() + 32, point, mu)) return false;
  if (max_family_violation(family, point) > tol) return false;
  out = std::move(point);
  return true;
}

std::string format_sci(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.3e", v);
  return buffer;
}

std::string format_point(const Vector& x) {
  std::string out = "[";
  char buffer[32];
  for (Eigen::Index i = 0; i < x.size() && i < 8; ++i) {
    std::snprintf(buffer, sizeof buffer, "%s%.17g", i == 0 ? "" : ", ", x[i]);
    out += buffer;
  }
  if (x.size() > 8) out += ", ...";
  return out + "]";
}

}  // namespace

Vector dykstra_projection(const ConstraintFamily& family, const Vector& x, const DykstraOptions& options) {
  if (static_cast<std::size_t>(x.size()) != family.dimension()) {
    throw DimensionError("dykstra_projection: point dimension does not match family");
  }
  require_finite(x, "dykstra_projection");
  if (!(options.tol > 0.0)) throw InvalidArgument("dykstra_projection: tol must be positive");

  const std::size_t m = family.size();
  // Halfspace corrections are multiples of the normal: p_i = lambda_i a_i.
  std::vector<double> lambda(m, 0.0);
  std::vector<Vector> ball_correction(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (family[i].as_ball() != nullptr) ball_correction[i] = Vector::Zero(x.size());
  }

  Vector current = x;
  Vector cycle_start(x.size());
  std::size_t visits = 0;
  std::size_t cycle = 0;
  while (true) {
    cycle_start = current;
    // The iterate can stand still for a cycle while a correction is handed
    // from one set to another, so the corrections must settle as well.
    double correction_change = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (const auto* h = family[i].as_halfspace()) {
        // z = current + lambda_i a; new lambda = (a'z - b)^+ / ||a||^2
        const double r = h->residual(current) + lambda[i] * h->normal_squared_norm();
        const double next = std::max(0.0, r / h->normal_squared_norm());
        const double shift = lambda[i] - next;
        if (shift != 0.0) current.noalias() += shift * h->normal();
        correction_change += shift * shift * h->normal_squared_norm();
        lambda[i] = next;
      } else {
        Vector z = current + ball_correction[i];
        current = project(*family[i].as_ball(), z);
        Vector next = z - current;
        correction_change += (next - ball_correction[i]).squaredNorm();
        ball_correction[i] = std::move(next);
      }
    }
    visits += m;
    ++cycle;

    const double displacement = (current - cycle_start).norm();
    if (displacement <= options.tol && std::sqrt(correction_change) <= options.tol &&
        max_family_violation(family, current) <= options.tol) {
      return current;
    }

    if (family.all_halfspaces() && options.polish_every != 0 && (cycle == 2 || cycle % options.polish_every == 0)) {
      Vector polished;
      if (try_polish(family, x, lambda, options.tol, polished)) return polished;
    }
    if (visits >= options.max_visits) {
      throw NumericalError("dykstra_projection: visit budget of " + std::to_string(options.max_visits) +
                           " exhausted (last displacement " + format_sci(displacement) + ", violation " +
                           format_sci(max_family_violation(family, current)) + ", at x = " + format_point(x) + ")");
    }
  }
}

Vector reference_projection(const ConstraintFamily& family, const Vector& x, double tol) {
  DykstraOptions options;
  options.tol = tol;
  return dykstra_projection(family, x, options);
}

double feasibility_error(const ConstraintFamily& family, const Vector& x, double tol) {
  return (x - reference_projection(family, x, tol)).squaredNorm();
}

double optimality_error(const Vector& x, const Vector& x_star) {
  require_same_dimension(x, x_star, "optimality_error");
  return (x - x_star).squaredNorm();
}

double violation_fraction(const ConstraintFamily& family, const Vector& x, double tol) {
  if (!(tol >= 0.0)) throw InvalidArgument("violation_fraction: tol must be nonnegative");
  std::size_t violated = 0;
  for (const auto& set : family) {
    if (distance(set, x) > tol) ++violated;
  }
  return static_cast<double>(violated) / static_cast<double>(family.size());
}

double ergodic_gap(const Problem& problem, const Vector& ergodic_point) {
  if (!problem.reference_optimum) throw InvalidArgument("ergodic_gap: problem has no reference optimum");
  require_same_dimension(ergodic_point, *problem.reference_optimum, "ergodic_gap");
  return problem.objective.value(ergodic_point) - problem.objective.value(*problem.reference_optimum);
}

double ergodic_gap(const Problem& problem, const SolverState& state) {
  if (state.ergodic_count == 0) throw InvalidArgument("ergodic_gap: no projected iterates accumulated");
  return ergodic_gap(problem, state.ergodic_point());
}

double estimate_eta(const ConstraintFamily& family, const EtaProbeOptions& options, RngStream& rng) {
  if (options.probe_count < 100) throw InvalidArgument("estimate_eta: probe_count must be at least 100");
  if (!(options.half_width > 0.0)) throw InvalidArgument("estimate_eta: half_width must be positive");
  const std::size_t n = family.dimension();
  Vector center = options.center.size() == 0 ? Vector::Zero(static_cast<Eigen::Index>(n)) : options.center;
  if (static_cast<std::size_t>(center.size()) != n) throw DimensionError("estimate_eta: probe center dimension");

  double eta = 1.0;
  std::size_t accepted = 0;
  const std::size_t max_attempts = options.probe_count * options.max_attempts_factor;
  Vector z(static_cast<Eigen::Index>(n));
  for (std::size_t attempt = 0; attempt < max_attempts && accepted < options.probe_count; ++attempt) {
    for (Eigen::Index j = 0; j < z.size(); ++j) {
      z[j] = center[j] + rng.uniform(-options.half_width, options.half_width);
    }
    double max_single = 0.0;
    for (const auto& set : family) max_single = std::max(max_single, squared_distance(set, z));
    if (max_single == 0.0) continue;  // feasible probe
    const double full = feasibility_error(family, z, options.projection_tol);
    if (!(full > 0.0)) continue;
    ++accepted;
    eta = std::min(eta, max_single / full);
  }
  if (accepted == 0) throw NumericalError("estimate_eta: no infeasible probe found");
  return std::clamp(eta, std::numeric_limits<double>::min(), 1.0);
}

std::string_view to_string(MetricField field) {
  switch (field) {
    case MetricField::optimality_error: return "optimality_error";
    case MetricField::feasibility_error: return "feasibility_error";
    case MetricField::violation_fraction: return "violation_fraction";
    case MetricField::ergodic_gap: return "ergodic_gap";
    case MetricField::feasibility_distance: return "feasibility_distance";
  }
  return "?";
}

double field_value(const MetricRecord& record, MetricField field) {
  switch (field) {
    case MetricField::optimality_error: return record.optimality_error;
    case MetricField::feasibility_error: return record.feasibility_error;
    case MetricField::violation_fraction: return record.violation_fraction;
    case MetricField::ergodic_gap:
      if (!record.ergodic_gap) throw InvalidArgument("record has no ergodic gap");
      return *record.ergodic_gap;
    case MetricField::feasibility_distance: return std::sqrt(record.feasibility_error);
  }
  return 0.0;
}

RateFit ordinary_least_squares(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw InvalidArgument("ordinary_least_squares: need >= 2 paired points");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw NumericalError("ordinary_least_squares: abscissa has no spread");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  fit.points = xs.size();
  return fit;
}

RateFit fit_loglog_slope(std::span<const MetricRecord> records, MetricField field, std::size_t k_min,
                         std::size_t k_max) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& r : records) {
    if (r.k < k_min || r.k > k_max || r.k == 0) continue;
    const double v = field_value(r, field);
    if (!(v > 0.0) || !std::isfinite(v)) continue;
    xs.push_back(std::log(static_cast<double>(r.k)));
    ys.push_back(std::log(v));
  }
  if (xs.size() < 10) {
    throw NumericalError("fit_loglog_slope: only " + std::to_string(xs.size()) + " usable points for " +
                         std::string(to_string(field)));
  }
  RateFit fit = ordinary_least_squares(xs, ys);
  fit.k_min = k_min;
  fit.k_max = k_max;
  return fit;
}

RateFit fit_inverse_linearity(std::span<const MetricRecord> records, MetricField field, Abscissa against) {
  std::vector<double> xs;
  std::vector<double> ys;
  std::size_t k_min = std::numeric_limits<std::size_t>::max();
  std::size_t k_max = 0;
  for (const auto& r : records) {
    const double v = field_value(r, field);
    if (!(v > 0.0) || !std::isfinite(v)) continue;
    xs.push_back(against == Abscissa::iteration ? static_cast<double>(r.k) : static_cast<double>(r.samples_used));
    ys.push_back(1.0 / v);
    k_min = std::min(k_min, r.k);
    k_max = std::max(k_max, r.k);
  }
  if (xs.size() < 10) {
    throw NumericalError("fit_inverse_linearity: only " + std::to_string(xs.size()) + " usable points");
  }
  RateFit fit = ordinary_least_squares(xs, ys);
  fit.k_min = k_min;
  fit.k_max = k_max;
  return fit;
}

}  // namespace rmcp
