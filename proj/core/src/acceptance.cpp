#include "rmcp/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "rmcp/config.hpp"
#include "rmcp/harness.hpp"
#include "rmcp/metrics.hpp"
#include "rmcp/polyproj.hpp"
#include "rmcp/problems.hpp"
#include "rmcp/rng.hpp"
#include "rmcp/solver.hpp"

namespace rmcp {

namespace {

// Stream indices below 2^20 belong to the harness trials; the suite's own
// Monte Carlo draws live above that.
constexpr std::uint64_t kSuiteStreamBase = std::uint64_t{1} << 40;

constexpr std::size_t kBootstrapResamples = 2000;

std::string fmt(const char* format, double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, format, value);
  return buffer;
}

std::string g(double value) { return fmt("%.4g", value); }

const std::vector<Scheme>& rate_schemes() {
  static const std::vector<Scheme> schemes{Scheme::averaging, Scheme::max_set, Scheme::polyhedral_set};
  return schemes;
}

// ---------------------------------------------------------------------------
// Random instances
// ---------------------------------------------------------------------------

// A nonempty polyhedron around a random witness, with some rows through the
// witness, some parallel pairs and some badly scaled normals.
Polyhedron random_polyhedron(RngStream& rng, std::size_t n, std::size_t rows, Vector& witness) {
  witness = rng.normal_vector(n);
  Polyhedron poly(n);
  for (std::size_t i = 0; i < rows; ++i) {
    Vector a = rng.normal_vector(n);
    const double roll = rng.uniform();
    if (roll < 0.1 && i > 0) {
      a = poly[rng.uniform_index(i)].normal() * rng.uniform(0.5, 2.0);
    } else if (roll < 0.2) {
      a *= rng.uniform(1e-2, 1e2);
    }
    if (a.norm() < 1e-6) a = Vector::Ones(static_cast<Eigen::Index>(n));
    const double slack = rng.uniform() < 0.3 ? 0.0 : std::abs(rng.normal()) * a.norm();
    poly.add_row(Halfspace(a, a.dot(witness) + slack));
  }
  return poly;
}

ConstraintFamily random_family(RngStream& rng, std::size_t n, std::size_t m) {
  const Vector witness = rng.normal_vector(n);
  std::vector<ConvexSet> sets;
  for (std::size_t i = 0; i < m; ++i) {
    if (rng.uniform() < 0.3) {
      const Vector center = witness + rng.normal_vector(n);
      const double radius = (center - witness).norm() + rng.uniform(0.1, 2.0);
      sets.emplace_back(Ball(center, radius));
    } else {
      const Vector a = rng.normal_vector(n);
      sets.emplace_back(Halfspace(a, a.dot(witness) + rng.uniform(0.0, 1.0)));
    }
  }
  return ConstraintFamily(std::move(sets));
}

// ---------------------------------------------------------------------------
// Statistics helpers
// ---------------------------------------------------------------------------

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double standard_error(const std::vector<double>& v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  const auto n = static_cast<double>(v.size());
  return std::sqrt(ss / (n - 1.0) / n);
}

double bootstrap_mean(const std::vector<double>& v, RngStream& rng) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += v[rng.uniform_index(v.size())];
  return s / static_cast<double>(v.size());
}

std::vector<double> final_feasibility(const AggregateResult& result) {
  std::vector<double> out;
  out.reserve(result.trials.size());
  for (const auto& trial : result.trials) out.push_back(trial.back().feasibility_error);
  return out;
}

// ---------------------------------------------------------------------------
// Shared experiment runs
// ---------------------------------------------------------------------------

class SuiteContext {
 public:
  explicit SuiteContext(const SuiteOptions& options) : options_(options) {}

  const SuiteOptions& options() const { return options_; }

  void note(const std::string& line) const {
    if (options_.progress) options_.progress(line);
  }

  ExperimentConfig base_config(ScenarioKind kind) const {
    ExperimentConfig c;
    c.scenario.kind = kind;
    if (kind == ScenarioKind::svm) {
      c.scenario.dimension = 100;
      c.scenario.constraints = 200;
      c.x0_policy = X0Policy::zero;
    }
    c.base_seed = options_.seed;
    c.workers = options_.workers;
    return c;
  }

  const AggregateResult& run(const std::string& key, const ExperimentConfig& config) {
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    note("  running " + key + " (T=" + std::to_string(config.trials) + ", K=" + std::to_string(config.iterations) + ")");
    return cache_.emplace(key, run_experiment(config)).first->second;
  }

  // Strongly convex sphere runs shared by the feasibility and optimality rate checks.
  const AggregateResult& strongly_convex_run(Scheme scheme) {
    ExperimentConfig c = base_config(ScenarioKind::sphere);
    c.algorithm = scheme;
    c.samples = 5;
    c.schedule = StronglyConvexStep{2.0};
    c.iterations = 100'000;
    c.trials = 50;
    c.metric_stride = 1000;
    return run("sphere/strongly-convex/" + std::string(to_string(scheme)), c);
  }

  ExperimentConfig ordering_config(ScenarioKind kind, Scheme scheme) const {
    ExperimentConfig c = base_config(kind);
    c.algorithm = scheme;
    c.samples = 5;
    c.schedule = OffsetInverseStep{10.0};
    c.iterations = 2000;
    c.trials = 100;
    c.metric_stride = 100;
    return c;
  }

  const AggregateResult& ordering_run(ScenarioKind kind, Scheme scheme) {
    return run(std::string(to_string(kind)) + "/ordering/" + std::string(to_string(scheme)), ordering_config(kind, scheme));
  }

 private:
  SuiteOptions options_;
  std::map<std::string, AggregateResult> cache_;
};

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

CriterionResult qp_oracle_equivalence(SuiteContext& ctx) {
  CriterionResult r;
  const QpCheckReport report = check_qp_equivalence(1000, ctx.options().seed);
  r.passed = report.failures == 0;
  r.detail = std::to_string(report.cases - report.failures) + "/" + std::to_string(report.cases) +
             " cases agree; worst ||hildreth - oracle|| / (1 + ||y||) = " + g(report.worst_scaled_gap) + " (limit 1e-6)";
  if (!r.passed) r.detail += "; " + report.first_failure;
  return r;
}

CriterionResult projection_properties(SuiteContext& ctx) {
  constexpr std::size_t kCases = 10'000;
  constexpr double kTol = 1e-9;
  RngStream rng(ctx.options().seed, kSuiteStreamBase + 2);

  auto random_set = [&](std::size_t n) -> ConvexSet {
    if (rng.uniform() < 0.5) {
      Vector a = rng.normal_vector(n) * rng.uniform(0.1, 10.0);
      return Halfspace(std::move(a), rng.normal() * 3.0);
    }
    return Ball(rng.normal_vector(n) * 2.0, rng.uniform(0.1, 5.0));
  };

  std::size_t idempotence = 0;
  std::size_t nonexpansive = 0;
  std::size_t obtuse = 0;
  std::size_t dominance = 0;
  double worst_dominance = 0.0;
  for (std::size_t i = 0; i < kCases; ++i) {
    const std::size_t n = 1 + rng.uniform_index(6);
    const ConvexSet set = random_set(n);
    const Vector x = rng.normal_vector(n) * 5.0;
    const Vector y = rng.normal_vector(n) * 5.0;
    const Vector px = project(set, x);
    const Vector py = project(set, y);
    const double scale = 1.0 + x.norm();

    if ((project(set, px) - px).norm() > kTol * scale) ++idempotence;
    if ((px - py).norm() > (x - y).norm() + kTol * (scale + y.norm())) ++nonexpansive;
    // (x - Pi x)'(w - Pi x) <= 0 for w in the set; Pi y is such a w.
    if ((x - px).dot(py - px) > kTol * scale * (1.0 + (py - px).norm())) ++obtuse;
  }
  for (std::size_t i = 0; i < kCases; ++i) {
    const std::size_t n = 2 + rng.uniform_index(4);
    const ConstraintFamily family = random_family(rng, n, 2 + rng.uniform_index(5));
    const Vector x = rng.normal_vector(n) * 4.0;
    const double d_full = std::sqrt(feasibility_error(family, x, 1e-12));
    double d_max = 0.0;
    for (const auto& set : family) d_max = std::max(d_max, distance(set, x));
    const double shortfall = d_max - d_full;
    worst_dominance = std::max(worst_dominance, shortfall);
    if (shortfall > kTol * (1.0 + x.norm())) ++dominance;
  }

  CriterionResult r;
  r.passed = idempotence == 0 && nonexpansive == 0 && obtuse == 0 && dominance == 0;
  r.detail = "violations per 1e4 cases: idempotence " + std::to_string(idempotence) + ", nonexpansiveness " +
             std::to_string(nonexpansive) + ", obtuse angle " + std::to_string(obtuse) + ", intersection dominance " +
             std::to_string(dominance) + " (worst shortfall " + g(worst_dominance) + ")";
  return r;
}

CriterionResult improvement_bound_monte_carlo(SuiteContext& ctx) {
  constexpr std::size_t kBatches = 100'000;
  RngStream scenario_rng(ctx.options().seed, kScenarioStream);
  const Problem problem = make_two_sphere_scenario(TwoSphereParams{}, scenario_rng);
  const auto m = static_cast<double>(problem.family.size());

  EtaProbeOptions probe;
  probe.probe_count = 10'000;
  probe.center = problem.probe_center;
  probe.half_width = problem.probe_half_width;
  RngStream eta_rng(ctx.options().seed, kSuiteStreamBase + 3);
  const double eta = estimate_eta(problem.family, probe, eta_rng);

  const std::vector<Vector> points{make_vector({0.0, 14.0}), make_vector({0.0, -13.0}), make_vector({2.0, 12.0}),
                                   make_vector({25.0, 0.0}), make_vector({-40.0, 8.0})};

  CriterionResult r;
  r.passed = true;
  double tightest = std::numeric_limits<double>::infinity();
  std::string tightest_case;
  std::uint64_t stream = kSuiteStreamBase + 100;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const Vector& y = points[p];
    const double d2 = feasibility_error(problem.family, y);
    for (std::size_t M : {std::size_t{1}, std::size_t{5}}) {
      for (Scheme scheme : rate_schemes()) {
        const AlgorithmKind kind(scheme, M);
        const double c_hat = scheme == Scheme::averaging ? eta / m : static_cast<double>(M) * eta / m;
        RngStream rng(ctx.options().seed, stream++);
        IndexSampler sampler(problem.family.size());
        SampleBatch batch;
        std::vector<double> e(kBatches);
        for (std::size_t b = 0; b < kBatches; ++b) {
          sample_batch(problem, y, M, rng, sampler, batch);
          e[b] = feasibility_update(kind, y, batch).e;
        }
        const double mean = mean_of(e);
        const double se = standard_error(e);
        const double bound = c_hat * d2 - 3.0 * se;
        const double margin = (mean - bound) / std::max(1e-300, c_hat * d2);
        if (mean < bound) {
          r.passed = false;
          r.detail += "failed at point " + std::to_string(p) + " " + std::string(to_string(scheme)) + " M=" +
                      std::to_string(M) + "; ";
        }
        if (margin < tightest) {
          tightest = margin;
          tightest_case = "point " + std::to_string(p) + ", " + std::string(to_string(scheme)) + ", M=" +
                          std::to_string(M) + ": mean(e) " + g(mean) + " vs C*d^2 " + g(c_hat * d2) + ", SE " + g(se);
        }
      }
    }
  }
  r.detail += "eta_hat = " + g(eta) + "; tightest " + tightest_case;
  return r;
}

CriterionResult e_ordering(SuiteContext& ctx) {
  constexpr std::size_t kPairs = 10'000;
  RngStream rng(ctx.options().seed, kSuiteStreamBase + 4);
  RngStream scenario_rng(ctx.options().seed, kScenarioStream);
  const Problem two_sphere = make_two_sphere_scenario(TwoSphereParams{}, scenario_rng);

  HildrethOptions qp;
  qp.tol = 1e-12;
  qp.max_iter = 1'000'000;

  std::size_t poly_below_max = 0;
  std::size_t max_below_avg = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < kPairs; ++i) {
    Vector y;
    SampleBatch batch;
    std::size_t M;
    if (i % 2 == 0) {
      // Random halfspace families in low dimension.
      const std::size_t n = 2 + rng.uniform_index(4);
      M = 1 + rng.uniform_index(8);
      Vector witness;
      const Polyhedron poly = random_polyhedron(rng, n, M, witness);
      y = witness + rng.normal_vector(n) * 3.0;
      for (std::size_t k = 0; k < poly.size(); ++k) {
        batch.indices.push_back(k);
        batch.projections.push_back(project(poly[k], y));
      }
    } else {
      M = 1 + rng.uniform_index(10);
      y = make_vector({rng.uniform(-20.0, 20.0), rng.uniform(-20.0, 20.0)});
      batch = sample_batch(two_sphere, y, M, rng);
    }
    const double e_avg = feasibility_update(AlgorithmKind(Scheme::averaging, M), y, batch).e;
    const double e_max = feasibility_update(AlgorithmKind(Scheme::max_set, M), y, batch).e;
    const double e_poly = feasibility_update(AlgorithmKind(Scheme::polyhedral_set, M), y, batch, qp).e;
    const double tol = 1e-9 * std::max(1.0, e_poly);
    worst = std::max({worst, (e_max - e_poly) / std::max(1.0, e_poly), (e_avg - e_max) / std::max(1.0, e_max)});
    if (e_poly < e_max - tol) ++poly_below_max;
    if (e_max < e_avg - 1e-9 * std::max(1.0, e_max)) ++max_below_avg;
  }
  CriterionResult r;
  r.passed = poly_below_max == 0 && max_below_avg == 0;
  r.detail = std::to_string(kPairs) + " pairs: e_poly < e_max in " + std::to_string(poly_below_max) +
             ", e_max < e_avg in " + std::to_string(max_below_avg) + "; worst relative inversion " + g(worst) +
             " (tolerance 1e-9 relative to max(1, e))";
  return r;
}

CriterionResult feasibility_rate(SuiteContext& ctx) {
  CriterionResult r;
  r.passed = true;
  for (Scheme scheme : rate_schemes()) {
    const auto records = ctx.strongly_convex_run(scheme).mean_records();
    const RateFit fit = fit_loglog_slope(records, MetricField::feasibility_error, 1000, 100'000);
    const bool ok = fit.slope >= -2.3 && fit.slope <= -1.7 && fit.r_squared >= 0.9;
    r.passed = r.passed && ok;
    r.detail += std::string(to_string(scheme)) + " slope " + fmt("%.3f", fit.slope) + " r2 " + fmt("%.3f", fit.r_squared) +
                (ok ? "" : " (out of range)") + "; ";
  }
  r.detail += "target slope in [-2.3, -1.7], r2 >= 0.9";
  return r;
}

CriterionResult optimality_rate(SuiteContext& ctx) {
  CriterionResult r;
  r.passed = true;
  for (Scheme scheme : rate_schemes()) {
    const auto records = ctx.strongly_convex_run(scheme).mean_records();
    const RateFit fit = fit_loglog_slope(records, MetricField::optimality_error, 1000, 100'000);
    const bool ok = fit.slope >= -1.25 && fit.slope <= -0.8 && fit.r_squared >= 0.9;
    r.passed = r.passed && ok;
    r.detail += std::string(to_string(scheme)) + " slope " + fmt("%.3f", fit.slope) + " r2 " + fmt("%.3f", fit.r_squared) +
                (ok ? "" : " (out of range)") + "; ";
  }
  r.detail += "target slope in [-1.25, -0.8], r2 >= 0.9";
  return r;
}

CriterionResult ergodic_rate(SuiteContext& ctx) {
  CriterionResult r;
  r.passed = true;
  for (Scheme scheme : rate_schemes()) {
    ExperimentConfig c = ctx.base_config(ScenarioKind::sphere);
    // b* close to its face, so the iterates cross into the interior often
    // enough for the linear part of the gap to dominate.
    c.scenario.planted_offset = 0.15;
    c.algorithm = scheme;
    c.samples = 5;
    c.schedule = PolynomialStep{0.3, 0.5};
    c.iterations = 10'000;
    c.trials = 50;
    c.metric_stride = 100;
    c.track_ergodic = true;
    const auto records = ctx.run("sphere/ergodic/" + std::string(to_string(scheme)), c).mean_records();
    const RateFit fit = fit_loglog_slope(records, MetricField::ergodic_gap, 100, 10'000);
    const bool ok = fit.slope >= -0.7 && fit.slope <= -0.35;
    r.passed = r.passed && ok;
    r.detail += std::string(to_string(scheme)) + " slope " + fmt("%.3f", fit.slope) + " r2 " + fmt("%.3f", fit.r_squared) +
                (ok ? "" : " (out of range)") + "; ";
  }
  r.detail += "target slope in [-0.7, -0.35] over k in [1e2, 1e4]";
  return r;
}

CriterionResult sphere_ordering(SuiteContext& ctx) {
  const auto& avg_run = ctx.ordering_run(ScenarioKind::sphere, Scheme::averaging);
  const auto avg = final_feasibility(avg_run);
  const auto max = final_feasibility(ctx.ordering_run(ScenarioKind::sphere, Scheme::max_set));
  const auto poly = final_feasibility(ctx.ordering_run(ScenarioKind::sphere, Scheme::polyhedral_set));
  const auto base = final_feasibility(ctx.ordering_run(ScenarioKind::sphere, Scheme::baseline));
  // Design tolerance: an order-of-magnitude reduction of the initial mean
  // feasibility error.
  const double tolerance = 0.1 * avg_run.rows.front().mean_feasibility_error;

  RngStream rng(ctx.options().seed, kSuiteStreamBase + 8);
  std::size_t holds = 0;
  for (std::size_t b = 0; b < kBootstrapResamples; ++b) {
    const double a = bootstrap_mean(avg, rng);
    const double mx = bootstrap_mean(max, rng);
    const double p = bootstrap_mean(poly, rng);
    if (mx < a && p < a && a < tolerance) ++holds;
  }
  const double confidence = static_cast<double>(holds) / static_cast<double>(kBootstrapResamples);
  const double mean_max = mean_of(max);
  const double mean_poly = mean_of(poly);
  const double ratio = std::max(mean_max, mean_poly) / std::min(mean_max, mean_poly);

  CriterionResult r;
  r.passed = confidence >= 0.95 && ratio <= 2.0;
  r.detail = "mean d^2 at k=2000: polyhedral " + g(mean_poly) + ", maxset " + g(mean_max) + ", averaging " +
             g(mean_of(avg)) + ", tolerance " + g(tolerance) + " (baseline " + g(mean_of(base)) +
             "); ordering confidence " + fmt("%.3f", confidence) + ", maxset/polyhedral ratio " + fmt("%.3f", ratio);
  return r;
}

CriterionResult two_sphere_separation(SuiteContext& ctx) {
  const auto max = final_feasibility(ctx.ordering_run(ScenarioKind::two_sphere, Scheme::max_set));
  const auto poly = final_feasibility(ctx.ordering_run(ScenarioKind::two_sphere, Scheme::polyhedral_set));
  RngStream rng(ctx.options().seed, kSuiteStreamBase + 9);
  std::size_t holds = 0;
  for (std::size_t b = 0; b < kBootstrapResamples; ++b) {
    if (bootstrap_mean(poly, rng) < bootstrap_mean(max, rng)) ++holds;
  }
  const double confidence = static_cast<double>(holds) / static_cast<double>(kBootstrapResamples);
  CriterionResult r;
  r.passed = mean_of(poly) < mean_of(max) && confidence >= 0.95;
  r.detail = "mean d^2 at k=2000: polyhedral " + g(mean_of(poly)) + ", maxset " + g(mean_of(max)) +
             "; bootstrap confidence " + fmt("%.3f", confidence);
  return r;
}

CriterionResult svm_linearity(SuiteContext& ctx) {
  CriterionResult r;
  r.passed = true;
  std::string informational;
  for (std::size_t M : {std::size_t{10}, std::size_t{30}}) {
    std::map<Scheme, double> sample_slope;
    for (Scheme scheme : rate_schemes()) {
      ExperimentConfig c = ctx.base_config(ScenarioKind::svm);
      c.algorithm = scheme;
      c.samples = M;
      c.schedule = OffsetInverseStep{10.0};
      c.iterations = 2000;
      c.trials = 100;
      c.metric_stride = 20;
      const auto records = ctx.run("svm/M" + std::to_string(M) + "/" + std::string(to_string(scheme)), c).mean_records();
      const RateFit by_k = fit_inverse_linearity(records, MetricField::feasibility_error, Abscissa::iteration);
      const RateFit by_samples = fit_inverse_linearity(records, MetricField::feasibility_error, Abscissa::samples_used);
      const bool ok = by_k.r_squared >= 0.95 && by_samples.r_squared >= 0.95;
      r.passed = r.passed && ok;
      sample_slope[scheme] = by_samples.slope;
      r.detail += "M=" + std::to_string(M) + " " + std::string(to_string(scheme)) + " r2(k) " +
                  fmt("%.3f", by_k.r_squared) + " r2(samples) " + fmt("%.3f", by_samples.r_squared) + " slope " +
                  g(by_samples.slope) + (ok ? "" : " (r2 below 0.95)") + "; ";
      const RateFit distance = fit_inverse_linearity(records, MetricField::feasibility_distance, Abscissa::iteration);
      informational += std::string(to_string(scheme)) + "/M" + std::to_string(M) + " " + fmt("%.3f", distance.r_squared) + " ";
    }
    const bool ordered = sample_slope[Scheme::polyhedral_set] >= sample_slope[Scheme::max_set] &&
                         sample_slope[Scheme::max_set] >= sample_slope[Scheme::averaging];
    r.passed = r.passed && ordered;
    if (!ordered) r.detail += "M=" + std::to_string(M) + " sample-efficiency slopes out of order; ";
  }
  r.detail += "[info] r2 of 1/d (unsquared distance) vs k: " + informational;
  return r;
}

CriterionResult determinism(SuiteContext& ctx) {
  ExperimentConfig c = ctx.ordering_config(ScenarioKind::two_sphere, Scheme::polyhedral_set);
  c.metric_stride = 10;
  const auto dir = std::filesystem::temp_directory_path() /
                   ("rmcp_determinism_" + std::to_string(ctx.options().seed) + "_" +
                    std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
  std::filesystem::create_directories(dir);

  auto read = [](const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
  };

  std::vector<std::string> outputs;
  std::vector<std::size_t> worker_counts{1, 4, 16, 4};
  for (std::size_t i = 0; i < worker_counts.size(); ++i) {
    c.workers = worker_counts[i];
    const auto path = dir / ("run" + std::to_string(i) + ".csv");
    write_csv(run_experiment(c), path);
    outputs.push_back(read(path));
  }
  std::error_code ignored;
  std::filesystem::remove_all(dir, ignored);

  CriterionResult r;
  r.passed = std::all_of(outputs.begin(), outputs.end(), [&](const std::string& s) { return s == outputs.front(); }) &&
             !outputs.front().empty();
  r.detail = "two-sphere polyhedral CSV (" + std::to_string(outputs.front().size()) +
             " bytes) with 1/4/16 workers and a repeat run: " + (r.passed ? "bit-identical" : "outputs differ");
  return r;
}

using CriterionFn = CriterionResult (*)(SuiteContext&);

struct CriterionEntry {
  const char* name;
  CriterionFn fn;
};

const std::vector<CriterionEntry>& registry() {
  static const std::vector<CriterionEntry> entries{
      {"QP oracle equivalence", qp_oracle_equivalence},
      {"projection property suite", projection_properties},
      {"feasibility improvement lower bound (Monte Carlo)", improvement_bound_monte_carlo},
      {"e ordering polyhedral >= maxset >= averaging", e_ordering},
      {"strongly convex feasibility rate", feasibility_rate},
      {"strongly convex optimality rate", optimality_rate},
      {"ergodic gap rate", ergodic_rate},
      {"sphere ordering", sphere_ordering},
      {"two-sphere separation", two_sphere_separation},
      {"SVM inverse feasibility linearity", svm_linearity},
      {"determinism across worker counts", determinism},
  };
  return entries;
}

CriterionResult run_one(int id, SuiteContext& ctx) {
  if (id < 1 || id > kCriterionCount) throw InvalidArgument("unknown acceptance criterion " + std::to_string(id));
  const auto& entry = registry()[static_cast<std::size_t>(id - 1)];
  ctx.note("criterion " + std::to_string(id) + ": " + entry.name);
  const auto start = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    r = entry.fn(ctx);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("error: ") + e.what();
  }
  r.id = id;
  r.name = entry.name;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace

std::string criterion_name(int id) {
  if (id < 1 || id > kCriterionCount) throw InvalidArgument("unknown acceptance criterion " + std::to_string(id));
  return registry()[static_cast<std::size_t>(id - 1)].name;
}

CriterionResult run_criterion(int id, const SuiteOptions& options) {
  SuiteContext ctx(options);
  return run_one(id, ctx);
}

std::vector<CriterionResult> run_acceptance_suite(const SuiteOptions& options) {
  SuiteContext ctx(options);
  std::vector<CriterionResult> results;
  for (int id = 1; id <= kCriterionCount; ++id) {
    if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), id) == options.only.end()) continue;
    results.push_back(run_one(id, ctx));
  }
  return results;
}

std::string format_result(const CriterionResult& result) {
  return std::string(result.passed ? "[PASS] " : "[FAIL] ") + std::to_string(result.id) + " " + result.name + " (" +
         fmt("%.1f", result.seconds) + " s): " + result.detail;
}

QpCheckReport check_qp_equivalence(std::size_t cases, std::uint64_t seed, double tolerance) {
  QpCheckReport report;
  RngStream rng(seed, kSuiteStreamBase + 1);
  HildrethOptions options;
  options.tol = 1e-12;
  options.max_iter = 1'000'000;
  for (std::size_t i = 0; i < cases; ++i) {
    const std::size_t n = 1 + rng.uniform_index(5);
    const std::size_t rows = 1 + rng.uniform_index(8);
    Vector witness;
    const Polyhedron poly = random_polyhedron(rng, n, rows, witness);
    const Vector y = witness + rng.normal_vector(n) * rng.uniform(0.5, 5.0);
    ++report.cases;
    try {
      const QpSolution fast = project_hildreth(y, poly, options);
      const QpSolution exact = project_activeset_oracle(y, poly);
      const double gap = (fast.point - exact.point).norm() / (1.0 + y.norm());
      report.worst_scaled_gap = std::max(report.worst_scaled_gap, gap);
      if (gap > tolerance) {
        ++report.failures;
        if (report.first_failure.empty()) {
          report.first_failure = "case " + std::to_string(i) + ": scaled gap " + g(gap);
        }
      }
    } catch (const std::exception& e) {
      ++report.failures;
      if (report.first_failure.empty()) report.first_failure = "case " + std::to_string(i) + ": " + e.what();
    }
  }
  return report;
}

}  // namespace rmcp
