#include "rmcp/geometry.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>

namespace rmcp {

Vector make_vector(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double value : values) v[i++] = value;
  return v;
}

void require_finite(const Vector& x, std::string_view what) {
  if (!x.allFinite()) {
    throw NumericalError(std::string(what) + ": non-finite entry");
  }
}

void require_same_dimension(const Vector& a, const Vector& b, std::string_view what) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()) + ")");
  }
}

Halfspace::Halfspace(Vector normal, double offset)
    : normal_(std::move(normal)), offset_(offset), normal_sq_(normal_.squaredNorm()) {
  if (normal_.size() == 0) throw DimensionError("halfspace: empty normal");
  require_finite(normal_, "halfspace normal");
  if (!std::isfinite(offset_)) throw NumericalError("halfspace offset: non-finite");
  if (!(normal_sq_ > 0.0)) throw InvalidArgument("halfspace: zero normal");
}

Ball::Ball(Vector center, double radius) : center_(std::move(center)), radius_(radius) {
  if (center_.size() == 0) throw DimensionError("ball: empty center");
  require_finite(center_, "ball center");
  if (!std::isfinite(radius_) || !(radius_ > 0.0)) {
    throw InvalidArgument("ball: radius must be positive and finite");
  }
}

std::size_t ConvexSet::dimension() const {
  return std::visit([](const auto& s) { return s.dimension(); }, shape_);
}

ConstraintFamily::ConstraintFamily(std::vector<ConvexSet> sets) : sets_(std::move(sets)) {
  if (sets_.empty()) throw InvalidArgument("constraint family: needs at least one set");
  dimension_ = sets_.front().dimension();
  for (const auto& s : sets_) {
    if (s.dimension() != dimension_) throw DimensionError("constraint family: mixed dimensions");
    if (s.as_halfspace() == nullptr) all_halfspaces_ = false;
  }
}

namespace {

void check_input(std::size_t dim, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != dim) {
    throw DimensionError("project: point has dimension " + std::to_string(x.size()) +
                         ", set has " + std::to_string(dim));
  }
  require_finite(x, "project input");
}

}  // namespace

Vector project(const Halfspace& h, const Vector& x) {
  check_input(h.dimension(), x);
  const double r = h.residual(x);
  if (r <= 0.0) return x;
  return x - (r / h.normal_squared_norm()) * h.normal();
}

Vector project(const Ball& b, const Vector& x) {
  check_input(b.dimension(), x);
  const Vector d = x - b.center();
  const double norm = d.norm();
  if (norm <= b.radius()) return x;
  return b.center() + (b.radius() / norm) * d;
}

Vector project(const ConvexSet& set, const Vector& x) {
  return std::visit([&](const auto& s) { return project(s, x); }, set.shape());
}

double squared_distance(const ConvexSet& set, const Vector& x) {
  if (const auto* h = set.as_halfspace()) {
    check_input(h->dimension(), x);
    const double r = h->residual(x);
    return r <= 0.0 ? 0.0 : r * r / h->normal_squared_norm();
  }
  return (x - project(set, x)).squaredNorm();
}

double distance(const ConvexSet& set, const Vector& x) {
  if (const auto* h = set.as_halfspace()) {
    check_input(h->dimension(), x);
    const double r = h->residual(x);
    return r <= 0.0 ? 0.0 : r / std::sqrt(h->normal_squared_norm());
  }
  if (const auto* b = set.as_ball()) {
    check_input(b->dimension(), x);
    return std::max(0.0, (x - b->center()).norm() - b->radius());
  }
  return (x - project(set, x)).norm();
}

bool contains(const ConvexSet& set, const Vector& x, double tol) {
  if (!(tol >= 0.0)) throw InvalidArgument("contains: tol must be nonnegative");
  return distance(set, x) <= tol;
}

double gram_spectral_norm(std::span<const Vector> rows) {
  if (rows.empty()) throw InvalidArgument("gram_spectral_norm: no rows");
  const auto count = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index dim = rows.front().size();
  Eigen::MatrixXd a(count, dim);
  for (Eigen::Index i = 0; i < count; ++i) {
    const Vector& row = rows[static_cast<std::size_t>(i)];
    if (row.size() != dim) throw DimensionError("gram_spectral_norm: rows of unequal length");
    require_finite(row, "gram_spectral_norm row");
    a.row(i) = row.transpose();
  }
  const Eigen::MatrixXd gram = a * a.transpose();
  if (!(gram.trace() > 0.0)) throw InvalidArgument("gram_spectral_norm: all rows are zero");

  constexpr int kMaxIterations = 10000;
  constexpr double kRelTol = 1e-10;

  // First Gram row plus a small all-ones component, so an exactly orthogonal
  // start (e.g. diagonal Gram with a smaller leading entry) cannot stall.
  Vector v = gram.row(0).transpose();
  const double row_norm = v.norm();
  if (row_norm > 0.0) v /= row_norm;
  v += Vector::Constant(count, 1e-3 / std::sqrt(static_cast<double>(count)));
  v.normalize();

  double lambda = v.dot(gram * v);
  for (int it = 0; it < kMaxIterations; ++it) {
    Vector w = gram * v;
    const double w_norm = w.norm();
    if (w_norm == 0.0) break;
    v = w / w_norm;
    const double next = v.dot(gram * v);
    const bool done = std::abs(next - lambda) <= kRelTol * std::abs(next);
    lambda = next;
    if (done) break;
  }
  return lambda;
}

}  // namespace rmcp
