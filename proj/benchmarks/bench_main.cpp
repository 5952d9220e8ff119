#include <benchmark/benchmark.h>

#include <vector>

#include "rmcp/metrics.hpp"
#include "rmcp/polyproj.hpp"
#include "rmcp/problems.hpp"
#include "rmcp/solver.hpp"

using namespace rmcp;

namespace {

const Problem& two_sphere() {
  static const Problem p = [] {
    RngStream rng(1, kScenarioStream);
    return make_two_sphere_scenario(TwoSphereParams{}, rng);
  }();
  return p;
}

const Problem& svm() {
  static const Problem p = [] {
    RngStream rng(1, kScenarioStream);
    return make_svm_scenario(SvmParams{}, rng);
  }();
  return p;
}

void BM_HalfspaceProjection(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  RngStream rng(1, 0);
  const Halfspace h(rng.normal_vector(n), 0.5);
  const Vector x = rng.normal_vector(n) * 3.0;
  for (auto _ : state) benchmark::DoNotOptimize(project(h, x));
}
BENCHMARK(BM_HalfspaceProjection)->Arg(2)->Arg(100);

void BM_Hildreth(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const Problem& p = two_sphere();
  RngStream rng(2, 0);
  const Vector y = *p.reference_optimum + make_vector({0.3, 4.0});
  const SampleBatch batch = sample_batch(p, y, m, rng);
  const Polyhedron poly = build_cutting_polyhedron(y, batch.projections);
  for (auto _ : state) benchmark::DoNotOptimize(project_hildreth(y, poly));
}
BENCHMARK(BM_Hildreth)->Arg(5)->Arg(30);

void BM_ActiveSetOracle(benchmark::State& state) {
  const Problem& p = two_sphere();
  RngStream rng(3, 0);
  const Vector y = *p.reference_optimum + make_vector({0.3, 4.0});
  const SampleBatch batch = sample_batch(p, y, 8, rng);
  const Polyhedron poly = build_cutting_polyhedron(y, batch.projections);
  for (auto _ : state) benchmark::DoNotOptimize(project_activeset_oracle(y, poly));
}
BENCHMARK(BM_ActiveSetOracle);

void BM_FeasibilityUpdate(benchmark::State& state) {
  const auto scheme = static_cast<Scheme>(state.range(0));
  const Problem& p = svm();
  RngStream rng(4, 0);
  const Vector y = Vector::Zero(static_cast<Eigen::Index>(p.dimension));
  const SampleBatch batch = sample_batch(p, y, 30, rng);
  const AlgorithmKind kind(scheme, 30);
  for (auto _ : state) benchmark::DoNotOptimize(feasibility_update(kind, y, batch));
  state.SetLabel(std::string(to_string(scheme)));
}
BENCHMARK(BM_FeasibilityUpdate)
    ->Arg(static_cast<int>(Scheme::averaging))
    ->Arg(static_cast<int>(Scheme::max_set))
    ->Arg(static_cast<int>(Scheme::polyhedral_set));

void BM_RunIterations(benchmark::State& state) {
  const Problem& p = two_sphere();
  const AlgorithmKind kind(Scheme::polyhedral_set, 5);
  RunOptions opts;
  opts.stride = 1000;
  for (auto _ : state) {
    RngStream rng(5, 0);
    benchmark::DoNotOptimize(run(p, kind, OffsetInverseStep{10.0}, 1000, p.planted, rng, opts));
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_RunIterations)->Unit(benchmark::kMillisecond);

void BM_ReferenceProjection(benchmark::State& state) {
  const Problem& p = two_sphere();
  const Vector x = *p.reference_optimum + make_vector({1.0, 3.0});
  for (auto _ : state) benchmark::DoNotOptimize(reference_projection(p.family, x));
}
BENCHMARK(BM_ReferenceProjection)->Unit(benchmark::kMicrosecond);

void BM_SvmReferenceProjection(benchmark::State& state) {
  const Problem& p = svm();
  const Vector x = Vector::Zero(static_cast<Eigen::Index>(p.dimension));
  for (auto _ : state) benchmark::DoNotOptimize(reference_projection(p.family, x));
}
BENCHMARK(BM_SvmReferenceProjection)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
