#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rmcp/error.hpp"
#include "rmcp/geometry.hpp"

namespace rmcp {

/// Finite list of halfspace rows {a_i'x <= b_i}. Zero rows denote the whole space.
class Polyhedron {
 public:
  explicit Polyhedron(std::size_t dimension) : dimension_(dimension) {}
  Polyhedron(std::size_t dimension, std::vector<Halfspace> rows);

  void add_row(Halfspace row);

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }
  const std::vector<Halfspace>& rows() const noexcept { return rows_; }
  const Halfspace& operator[](std::size_t i) const { return rows_[i]; }

  /// Largest row violation measured as a distance, (a_i'x - b_i)^+ / ||a_i||.
  double max_violation(const Vector& x) const;

 private:
  std::size_t dimension_;
  std::vector<Halfspace> rows_;
};

struct QpSolution {
  Vector point;
  /// One per row; point = y - sum_i multipliers[i] * a_i.
  std::vector<double> multipliers;
  double max_violation = 0.0;
  double complementarity_residual = 0.0;
  std::size_t iterations = 0;
};

/// Thrown when the Hildreth sweep budget runs out; carries the last iterate.
class QpNonConvergence : public NumericalError {
 public:
  QpNonConvergence(const std::string& message, QpSolution best)
      : NumericalError(message), best_(std::move(best)) {}
  const QpSolution& best() const noexcept { return best_; }

 private:
  QpSolution best_;
};

struct HildrethOptions {
  double tol = 1e-10;
  std::size_t max_iter = 100000;
  /// Sweeps between attempts to close the problem with an exact solve on the
  /// current positive-multiplier set. Zero disables the polish step.
  std::size_t polish_every = 8;
};

/// Supporting halfspaces at the sampled projections of y: a_i = y - p_i,
/// b_i = a_i'p_i. Rows with ||a_i|| <= 1e-12 (1 + ||y||) are dropped.
Polyhedron build_cutting_polyhedron(const Vector& y, std::span<const Vector> projections);

/// Euclidean projection of y onto P by Hildreth's dual coordinate descent.
/// Throws QpNonConvergence when max_iter sweeps do not meet the tolerances.
QpSolution project_hildreth(const Vector& y, const Polyhedron& poly, const HildrethOptions& options = {});

/// Exhaustive active-set enumeration (rows <= 12, n <= 16). Verification only.
QpSolution project_activeset_oracle(const Vector& y, const Polyhedron& poly);

/// row(A)/||A'A|| over the unit normals of rows active at solution.point.
double improvement_factor(const Vector& y, const Polyhedron& poly, const QpSolution& solution);

namespace detail {

/// Projection of y onto {x : a'x = b for every row}. Returns false when the
/// normal equations are rank deficient (unless a least-norm solve is allowed).
/// `mu` holds one multiplier per row, in the original row scaling.
bool solve_equality_projection(const Vector& y, std::span<const Halfspace* const> rows,
                               bool allow_rank_deficient, Vector& point, Vector& mu);

/// Primal active-set iteration for the projection of y onto {x : a_i'x <= b_i}.
/// Starting from `working` (indices into `rows`), repeatedly drops the row with
/// the most negative multiplier or adds the most violated row, until the
/// equality projection on the working set is KKT. `mu` is indexed like `rows`.
/// Returns false if the swap budget runs out.
bool refine_active_set(const Vector& y, std::span<const Halfspace* const> rows, std::vector<std::size_t> working,
                       double feasibility_tol, double multiplier_tol, std::size_t max_swaps, Vector& point,
                       Vector& mu);

}  // namespace detail

}  // namespace rmcp
