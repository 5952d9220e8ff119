#include "rmcp/polyproj.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Dense>

namespace rmcp {

namespace {

constexpr double kZeroRowTol = 1e-12;
constexpr double kActiveTol = 1e-8;
constexpr double kOracleMultiplierTol = 1e-10;
constexpr double kOracleFeasibilityTol = 1e-9;
constexpr std::size_t kOracleMaxRows = 12;
constexpr std::size_t kOracleMaxDim = 16;
constexpr double kDependenceTol = 1e-9;

void check_point(const Polyhedron& poly, const Vector& y, const char* what) {
  if (static_cast<std::size_t>(y.size()) != poly.dimension()) {
    throw DimensionError(std::string(what) + ": point dimension " + std::to_string(y.size()) +
                         " does not match polyhedron dimension " + std::to_string(poly.dimension()));
  }
  require_finite(y, what);
}

Eigen::MatrixXd stack_rows(const Polyhedron& poly) {
  Eigen::MatrixXd a(static_cast<Eigen::Index>(poly.size()), static_cast<Eigen::Index>(poly.dimension()));
  for (std::size_t i = 0; i < poly.size(); ++i) a.row(static_cast<Eigen::Index>(i)) = poly[i].normal().transpose();
  return a;
}

Vector stack_offsets(const Polyhedron& poly) {
  Vector b(static_cast<Eigen::Index>(poly.size()));
  for (std::size_t i = 0; i < poly.size(); ++i) b[static_cast<Eigen::Index>(i)] = poly[i].offset();
  return b;
}

// Fills violation / complementarity from exact residuals of `point`.
void measure(const Polyhedron& poly, QpSolution& sol) {
  sol.max_violation = 0.0;
  sol.complementarity_residual = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const double norm = std::sqrt(poly[i].normal_squared_norm());
    const double slack = poly[i].residual(sol.point) / norm;
    sol.max_violation = std::max(sol.max_violation, slack);
    const double step = sol.multipliers[i] * norm;
    sol.complementarity_residual = std::max(sol.complementarity_residual, std::min(step, std::abs(slack)));
  }
}

}  // namespace

Polyhedron::Polyhedron(std::size_t dimension, std::vector<Halfspace> rows) : dimension_(dimension) {
  rows_.reserve(rows.size());
  for (auto& r : rows) add_row(std::move(r));
}

void Polyhedron::add_row(Halfspace row) {
  if (row.dimension() != dimension_) throw DimensionError("polyhedron: row dimension mismatch");
  rows_.push_back(std::move(row));
}

double Polyhedron::max_violation(const Vector& x) const {
  double worst = 0.0;
  for (const auto& r : rows_) worst = std::max(worst, r.residual(x) / std::sqrt(r.normal_squared_norm()));
  return worst;
}

Polyhedron build_cutting_polyhedron(const Vector& y, std::span<const Vector> projections) {
  require_finite(y, "build_cutting_polyhedron");
  const double drop = kZeroRowTol * (1.0 + y.norm());
  Polyhedron poly(static_cast<std::size_t>(y.size()));
  for (const Vector& p : projections) {
    require_same_dimension(y, p, "build_cutting_polyhedron");
    require_finite(p, "build_cutting_polyhedron projection");
    Vector a = y - p;
    if (a.norm() <= drop) continue;
    const double b = a.dot(p);
    poly.add_row(Halfspace(std::move(a), b));
  }
  return poly;
}

namespace detail {

bool solve_equality_projection(const Vector& y, std::span<const Halfspace* const> rows,
                               bool allow_rank_deficient, Vector& point, Vector& mu) {
  const auto s = static_cast<Eigen::Index>(rows.size());
  if (s == 0) {
    point = y;
    mu.resize(0);
    return true;
  }
  // Unit rows keep the normal equations well scaled.
  Eigen::MatrixXd a(s, y.size());
  Vector rhs(s);
  Vector scale(s);
  for (Eigen::Index k = 0; k < s; ++k) {
    const Halfspace& row = *rows[static_cast<std::size_t>(k)];
    scale[k] = std::sqrt(row.normal_squared_norm());
    a.row(k) = row.normal().transpose() / scale[k];
    rhs[k] = (row.normal().dot(y) - row.offset()) / scale[k];
  }
  const Eigen::MatrixXd gram = a * a.transpose();
  Vector unit_mu;
  std::function<Vector(const Vector&)> solve;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
  Eigen::FullPivLU<Eigen::MatrixXd> lu;
  if (allow_rank_deficient) {
    cod.setThreshold(1e-12);
    cod.compute(gram);
    solve = [&](const Vector& r) -> Vector { return cod.solve(r); };
  } else {
    if (s > y.size()) return false;
    lu.setThreshold(1e-10);
    lu.compute(gram);
    if (lu.rank() < s) return false;
    solve = [&](const Vector& r) -> Vector { return lu.solve(r); };
  }
  unit_mu = solve(rhs);
  point = y - a.transpose() * unit_mu;
  // Nearly antiparallel rows make the Gram matrix ill conditioned; a couple
  // of refinement passes on the constraint residual recover the lost digits.
  for (int pass = 0; pass < 2; ++pass) {
    Vector residual(s);
    for (Eigen::Index k = 0; k < s; ++k) {
      const Halfspace& row = *rows[static_cast<std::size_t>(k)];
      residual[k] = (row.normal().dot(point) - row.offset()) / scale[k];
    }
    const Vector correction = solve(residual);
    unit_mu += correction;
    point -= a.transpose() * correction;
  }
  mu = unit_mu.cwiseQuotient(scale);
  return point.allFinite() && mu.allFinite();
}

bool refine_active_set(const Vector& y, std::span<const Halfspace* const> rows, std::vector<std::size_t> working,
                       double feasibility_tol, double multiplier_tol, std::size_t max_swaps, Vector& point,
                       Vector& mu) {
  std::vector<const Halfspace*> selected;
  Vector working_mu;
  std::vector<char> in_working(rows.size(), 0);
  for (std::size_t i : working) in_working[i] = 1;

  for (std::size_t swap = 0; swap <= max_swaps; ++swap) {
    selected.clear();
    for (std::size_t i : working) selected.push_back(rows[i]);
    if (!solve_equality_projection(y, selected, true, point, working_mu)) return false;

    std::size_t drop = working.size();
    double most_negative = -multiplier_tol;
    for (std::size_t k = 0; k < working.size(); ++k) {
      const double scaled = working_mu[static_cast<Eigen::Index>(k)] * std::sqrt(selected[k]->normal_squared_norm());
      if (scaled < most_negative) {
        most_negative = scaled;
        drop = k;
      }
    }
    if (drop < working.size()) {
      in_working[working[drop]] = 0;
      working.erase(working.begin() + static_cast<std::ptrdiff_t>(drop));
      continue;
    }

    std::size_t add = rows.size();
    double worst = feasibility_tol;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (in_working[i]) continue;
      const double v = rows[i]->residual(point) / std::sqrt(rows[i]->normal_squared_norm());
      if (v > worst) {
        worst = v;
        add = i;
      }
    }
    if (add == rows.size()) {
      mu = Vector::Zero(static_cast<Eigen::Index>(rows.size()));
      for (std::size_t k = 0; k < working.size(); ++k) {
        mu[static_cast<Eigen::Index>(working[k])] = std::max(0.0, working_mu[static_cast<Eigen::Index>(k)]);
      }
      return true;
    }
    // A row dependent on the working set displaces one of them: the first
    // multiplier driven to zero as the new row's multiplier grows.
    if (!working.empty()) {
      Eigen::MatrixXd basis(y.size(), static_cast<Eigen::Index>(working.size()));
      Vector unit_mu(static_cast<Eigen::Index>(working.size()));
      for (std::size_t k = 0; k < working.size(); ++k) {
        const double scale = std::sqrt(selected[k]->normal_squared_norm());
        basis.col(static_cast<Eigen::Index>(k)) = selected[k]->normal() / scale;
        unit_mu[static_cast<Eigen::Index>(k)] = working_mu[static_cast<Eigen::Index>(k)] * scale;
      }
      const Vector target = rows[add]->normal() / std::sqrt(rows[add]->normal_squared_norm());
      const Vector coeff = basis.completeOrthogonalDecomposition().solve(target);
      if ((basis * coeff - target).norm() <= kDependenceTol) {
        std::size_t leave = working.size();
        double ratio = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < working.size(); ++k) {
          const double c = coeff[static_cast<Eigen::Index>(k)];
          if (c > kDependenceTol && unit_mu[static_cast<Eigen::Index>(k)] / c < ratio) {
            ratio = unit_mu[static_cast<Eigen::Index>(k)] / c;
            leave = k;
          }
        }
        if (leave == working.size()) return false;  // infeasible
        in_working[working[leave]] = 0;
        working.erase(working.begin() + static_cast<std::ptrdiff_t>(leave));
      }
    }
    in_working[add] = 1;
    working.push_back(add);
  }
  return false;
}

}  // namespace detail

QpSolution project_hildreth(const Vector& y, const Polyhedron& poly, const HildrethOptions& options) {
  check_point(poly, y, "project_hildreth");
  if (!(options.tol > 0.0)) throw InvalidArgument("project_hildreth: tol must be positive");
  if (options.max_iter == 0) throw InvalidArgument("project_hildreth: max_iter must be positive");

  QpSolution sol;
  sol.multipliers.assign(poly.size(), 0.0);
  if (poly.empty()) {
    sol.point = y;
    return sol;
  }

  const Eigen::MatrixXd a = stack_rows(poly);
  const Vector b = stack_offsets(poly);
  const Eigen::MatrixXd gram = a * a.transpose();
  const Vector norms = gram.diagonal().cwiseSqrt();
  const Eigen::Index m = a.rows();
  const double threshold = options.tol * (1.0 + y.norm());

  Vector lambda = Vector::Zero(m);
  // slack[i] = a_i'x - b_i for x = y - A'lambda, maintained incrementally.
  Vector slack = a * y - b;

  auto converged = [&](const Vector& lam, const Vector& sl) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const double viol = sl[i] / norms[i];
      if (viol > threshold) return false;
      if (std::min(lam[i] * norms[i], std::abs(viol)) > threshold) return false;
    }
    return true;
  };

  auto finish = [&](const Vector& point, const Vector& lam, std::size_t sweeps) {
    sol.point = point;
    for (Eigen::Index i = 0; i < m; ++i) sol.multipliers[static_cast<std::size_t>(i)] = std::max(0.0, lam[i]);
    sol.iterations = sweeps;
    measure(poly, sol);
    return sol.max_violation <= threshold && sol.complementarity_residual <= threshold;
  };

  std::vector<const Halfspace*> all_rows;
  for (std::size_t i = 0; i < poly.size(); ++i) all_rows.push_back(&poly[i]);
  const std::size_t dim = static_cast<std::size_t>(y.size());
  std::vector<std::size_t> support;
  Vector polished_point;
  Vector polished_mu;

  for (std::size_t sweep = 1; sweep <= options.max_iter; ++sweep) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const double delta = std::max(-lambda[i], slack[i] / gram(i, i));
      if (delta != 0.0) {
        lambda[i] += delta;
        slack.noalias() -= delta * gram.col(i);
      }
    }

    if (converged(lambda, slack)) {
      const Vector point = y - a.transpose() * lambda;
      if (finish(point, lambda, sweep)) return sol;
      slack = a * point - b;  // incremental drift; resync and keep sweeping
    }

    if (options.polish_every != 0 && sweep % options.polish_every == 0) {
      support.clear();
      for (Eigen::Index i = 0; i < m; ++i) {
        if (lambda[i] > 0.0) support.push_back(static_cast<std::size_t>(i));
      }
      // A support wider than the dimension is mostly stale multipliers.
      if (support.size() > dim) support.clear();
      if (detail::refine_active_set(y, all_rows, support, threshold, kOracleMultiplierTol, 2 * all_rows.size() + 32, polished_point,
                                    polished_mu) &&
          finish(polished_point, polished_mu, sweep)) {
        return sol;
      }
    }
  }

  finish(y - a.transpose() * lambda, lambda, options.max_iter);
  throw QpNonConvergence("project_hildreth: no convergence after " + std::to_string(options.max_iter) +
                             " sweeps (violation " + std::to_string(sol.max_violation) + ")",
                         sol);
}

QpSolution project_activeset_oracle(const Vector& y, const Polyhedron& poly) {
  check_point(poly, y, "project_activeset_oracle");
  if (poly.size() > kOracleMaxRows) throw InvalidArgument("project_activeset_oracle: more than 12 rows");
  if (poly.dimension() > kOracleMaxDim) throw InvalidArgument("project_activeset_oracle: dimension above 16");

  const std::size_t m = poly.size();
  std::vector<std::uint32_t> masks(std::size_t{1} << m);
  std::iota(masks.begin(), masks.end(), 0u);
  std::stable_sort(masks.begin(), masks.end(), [](std::uint32_t lhs, std::uint32_t rhs) {
    return std::popcount(lhs) < std::popcount(rhs);
  });

  const double feas_tol = kOracleFeasibilityTol * (1.0 + y.norm());
  std::vector<std::size_t> subset;
  std::vector<const Halfspace*> subset_rows;
  Vector point;
  Vector mu;
  std::size_t examined = 0;
  for (std::uint32_t mask : masks) {
    ++examined;
    subset.clear();
    subset_rows.clear();
    for (std::size_t i = 0; i < m; ++i) {
      if (mask & (1u << i)) {
        subset.push_back(i);
        subset_rows.push_back(&poly[i]);
      }
    }
    if (!detail::solve_equality_projection(y, subset_rows, false, point, mu)) continue;
    if (mu.size() > 0 && mu.minCoeff() < -kOracleMultiplierTol) continue;
    if (poly.max_violation(point) > feas_tol) continue;

    QpSolution sol;
    sol.point = point;
    sol.multipliers.assign(m, 0.0);
    for (std::size_t k = 0; k < subset.size(); ++k) {
      sol.multipliers[subset[k]] = std::max(0.0, mu[static_cast<Eigen::Index>(k)]);
    }
    sol.iterations = examined;
    measure(poly, sol);
    return sol;
  }
  throw NumericalError("project_activeset_oracle: no KKT-consistent active set");
}

double improvement_factor(const Vector& y, const Polyhedron& poly, const QpSolution& solution) {
  check_point(poly, y, "improvement_factor");
  require_same_dimension(y, solution.point, "improvement_factor");
  if (solution.multipliers.size() != poly.size()) {
    throw InvalidArgument("improvement_factor: multiplier count does not match rows");
  }
  const double contact_tol = kActiveTol * (1.0 + y.norm());
  std::vector<Vector> active;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Halfspace& row = poly[i];
    const double norm = std::sqrt(row.normal_squared_norm());
    const bool has_multiplier = solution.multipliers[i] * norm > kActiveTol;
    const bool violated_at_y = row.residual(y) > 0.0;
    const bool touches = std::abs(row.residual(solution.point)) / norm <= contact_tol;
    if (has_multiplier || (violated_at_y && touches)) active.push_back(row.normal() / norm);
  }
  if (active.empty()) throw InvalidArgument("improvement_factor: no active rows (y is interior)");
  return static_cast<double>(active.size()) / gram_spectral_norm(active);
}

}  // namespace rmcp
