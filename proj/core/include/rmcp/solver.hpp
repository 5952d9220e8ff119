#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "rmcp/geometry.hpp"
#include "rmcp/polyproj.hpp"
#include "rmcp/problems.hpp"
#include "rmcp/rng.hpp"

namespace rmcp {

// alpha_k = alpha0 * max(k, 1)^-exponent
struct PolynomialStep {
  double alpha0 = 1.0;
  double exponent = 0.5;
};
// alpha_k = 1 / (k + k0)
struct OffsetInverseStep {
  double k0 = 10.0;
};
// alpha_k = 1 / (2 sigma (k + 1))
struct StronglyConvexStep {
  double sigma = 1.0;
};
struct ConstantStep {
  double alpha = 0.1;
};

class StepSchedule {
 public:
  using Variant = std::variant<PolynomialStep, OffsetInverseStep, StronglyConvexStep, ConstantStep>;

  StepSchedule(Variant v);  // NOLINT(google-explicit-constructor)
  StepSchedule(PolynomialStep s) : StepSchedule(Variant(s)) {}      // NOLINT(google-explicit-constructor)
  StepSchedule(OffsetInverseStep s) : StepSchedule(Variant(s)) {}   // NOLINT(google-explicit-constructor)
  StepSchedule(StronglyConvexStep s) : StepSchedule(Variant(s)) {}  // NOLINT(google-explicit-constructor)
  StepSchedule(ConstantStep s) : StepSchedule(Variant(s)) {}        // NOLINT(google-explicit-constructor)

  const Variant& variant() const noexcept { return v_; }

 private:
  Variant v_;
};

double step_size(const StepSchedule& schedule, std::size_t k);

enum class Scheme { baseline, averaging, max_set, polyhedral_set };

std::string_view to_string(Scheme scheme);
std::optional<Scheme> parse_scheme(std::string_view name);

class AlgorithmKind {
 public:
  /// M is forced to 1 for the baseline.
  AlgorithmKind(Scheme scheme, std::size_t samples);

  Scheme scheme() const noexcept { return scheme_; }
  std::size_t samples() const noexcept { return samples_; }

 private:
  Scheme scheme_;
  std::size_t samples_;
};

/// y = x - alpha * g
Vector optimality_update(const Vector& x, double alpha, const Vector& g);

struct FeasibilityStep {
  Vector x_next;
  /// The scheme's squared-distance improvement quantity e_{k+1}.
  double e = 0.0;
};

FeasibilityStep feasibility_update(const AlgorithmKind& kind, const Vector& y, const SampleBatch& batch,
                                   const HildrethOptions& qp = {});

struct SolverState {
  std::size_t k = 0;
  Vector x;
  std::uint64_t constraint_samples_used = 0;
  Vector ergodic_projection_sum;
  std::size_t ergodic_count = 0;
  double feasibility_gap_e = 0.0;

  /// Mean of the accumulated projections Pi_X x_t.
  Vector ergodic_point() const;
};

struct TraceRecord {
  std::size_t k = 0;
  std::uint64_t samples_used = 0;
  Vector x;
  double e = 0.0;
  std::optional<Vector> ergodic_point;
};

struct TrialTrace {
  std::vector<TraceRecord> records;
};

struct RunOptions {
  std::size_t stride = 1;
  /// Accumulate Pi_X x_t every iteration (m extra projections per step).
  bool track_ergodic = false;
  double reference_tol = 1e-10;
  HildrethOptions qp;
};

/// K iterations of optimality update followed by feasibility update. Records
/// k = 0, every `stride` iterations, and k = K.
TrialTrace run(const Problem& problem, const AlgorithmKind& kind, const StepSchedule& schedule,
               std::size_t iterations, const Vector& x0, RngStream& rng, const RunOptions& options = {});

}  // namespace rmcp
