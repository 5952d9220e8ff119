#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "rmcp/error.hpp"

namespace rmcp {

/// Dense real vector. Length is fixed once constructed; library entry points
/// reject non-finite entries.
using Vector = Eigen::VectorXd;

Vector make_vector(std::initializer_list<double> values);

void require_finite(const Vector& x, std::string_view what);
void require_same_dimension(const Vector& a, const Vector& b, std::string_view what);

/// {x : a'x <= b} with a nonzero normal.
class Halfspace {
 public:
  Halfspace(Vector normal, double offset);

  const Vector& normal() const noexcept { return normal_; }
  double offset() const noexcept { return offset_; }
  double normal_squared_norm() const noexcept { return normal_sq_; }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(normal_.size()); }

  /// a'x - b; positive when x violates the halfspace.
  double residual(const Vector& x) const { return normal_.dot(x) - offset_; }

 private:
  Vector normal_;
  double offset_;
  double normal_sq_;
};

class Ball {
 public:
  Ball(Vector center, double radius);

  const Vector& center() const noexcept { return center_; }
  double radius() const noexcept { return radius_; }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(center_.size()); }

 private:
  Vector center_;
  double radius_;
};

/// A projectable constraint superset X_i.
class ConvexSet {
 public:
  ConvexSet(Halfspace h) : shape_(std::move(h)) {}  // NOLINT(google-explicit-constructor)
  ConvexSet(Ball b) : shape_(std::move(b)) {}       // NOLINT(google-explicit-constructor)

  std::size_t dimension() const;
  const std::variant<Halfspace, Ball>& shape() const noexcept { return shape_; }
  const Halfspace* as_halfspace() const noexcept { return std::get_if<Halfspace>(&shape_); }
  const Ball* as_ball() const noexcept { return std::get_if<Ball>(&shape_); }

 private:
  std::variant<Halfspace, Ball> shape_;
};

/// Ordered list of m >= 1 sets sharing one dimension. Nonemptiness of the
/// intersection is the caller's responsibility.
class ConstraintFamily {
 public:
  explicit ConstraintFamily(std::vector<ConvexSet> sets);

  std::size_t size() const noexcept { return sets_.size(); }
  std::size_t dimension() const noexcept { return dimension_; }
  const ConvexSet& operator[](std::size_t i) const { return sets_[i]; }
  const std::vector<ConvexSet>& sets() const noexcept { return sets_; }
  auto begin() const noexcept { return sets_.begin(); }
  auto end() const noexcept { return sets_.end(); }
  bool all_halfspaces() const noexcept { return all_halfspaces_; }

 private:
  std::vector<ConvexSet> sets_;
  std::size_t dimension_ = 0;
  bool all_halfspaces_ = true;
};

/// Euclidean projection onto a single set. Returns x itself when x is inside.
Vector project(const ConvexSet& set, const Vector& x);
Vector project(const Halfspace& h, const Vector& x);
Vector project(const Ball& b, const Vector& x);

double distance(const ConvexSet& set, const Vector& x);
double squared_distance(const ConvexSet& set, const Vector& x);

bool contains(const ConvexSet& set, const Vector& x, double tol);

/// ||A'A|| for the matrix whose rows are `rows`, computed as the largest
/// eigenvalue of the small Gram matrix AA' by power iteration.
double gram_spectral_norm(std::span<const Vector> rows);

}  // namespace rmcp
