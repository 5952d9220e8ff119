#include "rmcp/solver.hpp"

#include <cmath>
#include <string>

#include "rmcp/metrics.hpp"

namespace rmcp {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

StepSchedule::StepSchedule(Variant v) : v_(v) {
  std::visit(Overloaded{
                 [](const PolynomialStep& s) {
                   if (!positive_finite(s.alpha0)) throw InvalidArgument("polynomial step: alpha0 must be positive");
                   if (!(s.exponent > 0.0 && s.exponent <= 1.0)) {
                     throw InvalidArgument("polynomial step: exponent must be in (0, 1]");
                   }
                 },
                 [](const OffsetInverseStep& s) {
                   if (!positive_finite(s.k0)) throw InvalidArgument("offset-inverse step: k0 must be positive");
                 },
                 [](const StronglyConvexStep& s) {
                   if (!positive_finite(s.sigma)) throw InvalidArgument("strongly-convex step: sigma must be positive");
                 },
                 [](const ConstantStep& s) {
                   if (!positive_finite(s.alpha)) throw InvalidArgument("constant step: alpha must be positive");
                 },
             },
             v_);
}

double step_size(const StepSchedule& schedule, std::size_t k) {
  const auto kd = static_cast<double>(k);
  return std::visit(Overloaded{
                        [&](const PolynomialStep& s) { return s.alpha0 * std::pow(std::max(kd, 1.0), -s.exponent); },
                        [&](const OffsetInverseStep& s) { return 1.0 / (kd + s.k0); },
                        [&](const StronglyConvexStep& s) { return 1.0 / (2.0 * s.sigma * (kd + 1.0)); },
                        [&](const ConstantStep& s) { return s.alpha; },
                    },
                    schedule.variant());
}

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::baseline: return "baseline";
    case Scheme::averaging: return "averaging";
    case Scheme::max_set: return "maxset";
    case Scheme::polyhedral_set: return "polyhedral";
  }
  return "?";
}

std::optional<Scheme> parse_scheme(std::string_view name) {
  if (name == "baseline") return Scheme::baseline;
  if (name == "averaging") return Scheme::averaging;
  if (name == "maxset" || name == "max_set") return Scheme::max_set;
  if (name == "polyhedral" || name == "polyhedral_set") return Scheme::polyhedral_set;
  return std::nullopt;
}

AlgorithmKind::AlgorithmKind(Scheme scheme, std::size_t samples)
    : scheme_(scheme), samples_(scheme == Scheme::baseline ? 1 : samples) {
  if (samples_ == 0) throw InvalidArgument("algorithm: M must be at least 1");
}

Vector optimality_update(const Vector& x, double alpha, const Vector& g) {
  require_same_dimension(x, g, "optimality_update");
  if (!std::isfinite(alpha)) throw NumericalError("optimality_update: non-finite step size");
  Vector y = x - alpha * g;
  require_finite(y, "optimality_update result");
  return y;
}

FeasibilityStep feasibility_update(const AlgorithmKind& kind, const Vector& y, const SampleBatch& batch,
                                   const HildrethOptions& qp) {
  const auto& proj = batch.projections;
  if (proj.empty()) throw InvalidArgument("feasibility_update: empty batch");
  if (proj.size() != kind.samples()) {
    throw InvalidArgument("feasibility_update: batch holds " + std::to_string(proj.size()) + " projections, M=" +
                          std::to_string(kind.samples()));
  }
  for (const auto& p : proj) require_same_dimension(y, p, "feasibility_update");

  FeasibilityStep step;
  switch (kind.scheme()) {
    case Scheme::baseline: {
      step.x_next = proj.front();
      step.e = (proj.front() - y).squaredNorm();
      break;
    }
    case Scheme::averaging: {
      Vector sum = Vector::Zero(y.size());
      double e = 0.0;
      for (const auto& p : proj) {
        sum += p;
        e += (p - y).squaredNorm();
      }
      const auto count = static_cast<double>(proj.size());
      step.x_next = sum / count;
      step.e = e / count;
      break;
    }
    case Scheme::max_set: {
      std::size_t best = 0;
      double best_sq = (proj[0] - y).squaredNorm();
      for (std::size_t i = 1; i < proj.size(); ++i) {
        const double sq = (proj[i] - y).squaredNorm();
        if (sq > best_sq) {  // strict: ties keep the earliest sample
          best = i;
          best_sq = sq;
        }
      }
      step.x_next = proj[best];
      step.e = best_sq;
      break;
    }
    case Scheme::polyhedral_set: {
      const Polyhedron poly = build_cutting_polyhedron(y, proj);
      QpSolution sol = project_hildreth(y, poly, qp);
      step.e = (sol.point - y).squaredNorm();
      step.x_next = std::move(sol.point);
      break;
    }
  }
  return step;
}

Vector SolverState::ergodic_point() const {
  if (ergodic_count == 0) throw InvalidArgument("ergodic_point: nothing accumulated");
  return ergodic_projection_sum / static_cast<double>(ergodic_count);
}

TrialTrace run(const Problem& problem, const AlgorithmKind& kind, const StepSchedule& schedule,
               std::size_t iterations, const Vector& x0, RngStream& rng, const RunOptions& options) {
  if (options.stride == 0) throw InvalidArgument("run: stride must be positive");
  if (kind.samples() > problem.family.size()) {
    throw InvalidArgument("run: M=" + std::to_string(kind.samples()) + " exceeds m=" +
                          std::to_string(problem.family.size()));
  }
  if (static_cast<std::size_t>(x0.size()) != problem.dimension) throw DimensionError("run: x0 dimension mismatch");
  require_finite(x0, "run x0");

  SolverState state;
  state.x = x0;
  state.ergodic_projection_sum = Vector::Zero(x0.size());

  auto accumulate_ergodic = [&] {
    if (!options.track_ergodic) return;
    state.ergodic_projection_sum += reference_projection(problem.family, state.x, options.reference_tol);
    ++state.ergodic_count;
  };

  TrialTrace trace;
  trace.records.reserve(iterations / options.stride + 2);
  auto record = [&] {
    TraceRecord r;
    r.k = state.k;
    r.samples_used = state.constraint_samples_used;
    r.x = state.x;
    r.e = state.feasibility_gap_e;
    if (options.track_ergodic) r.ergodic_point = state.ergodic_point();
    trace.records.push_back(std::move(r));
  };

  accumulate_ergodic();
  record();

  IndexSampler sampler(problem.family.size());
  SampleBatch batch;
  const std::size_t samples = kind.samples();
  for (std::size_t k = 0; k < iterations; ++k) {
    const double alpha = step_size(schedule, k);
    const Vector g = problem.sample_subgradient(state.x, rng);
    const Vector y = optimality_update(state.x, alpha, g);
    sample_batch(problem, y, samples, rng, sampler, batch);
    FeasibilityStep step = feasibility_update(kind, y, batch, options.qp);

    state.x = std::move(step.x_next);
    state.feasibility_gap_e = step.e;
    state.k = k + 1;
    state.constraint_samples_used += samples + 1;
    accumulate_ergodic();
    if (state.k % options.stride == 0 || state.k == iterations) record();
  }
  return trace;
}

}  // namespace rmcp
