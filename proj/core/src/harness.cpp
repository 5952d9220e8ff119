#include "rmcp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "rmcp/solver.hpp"

namespace rmcp {

namespace {

struct TrialOutcome {
  std::vector<MetricRecord> records;
  std::optional<std::string> error;
};

std::vector<MetricRecord> measure(const Problem& problem, const TrialTrace& trace) {
  const Vector& x_star = *problem.reference_optimum;
  std::vector<MetricRecord> out;
  out.reserve(trace.records.size());
  for (const auto& r : trace.records) {
    MetricRecord m;
    m.k = r.k;
    m.samples_used = r.samples_used;
    m.optimality_error = optimality_error(r.x, x_star);
    m.feasibility_error = feasibility_error(problem.family, r.x);
    m.violation_fraction = violation_fraction(problem.family, r.x);
    if (r.ergodic_point) m.ergodic_gap = ergodic_gap(problem, *r.ergodic_point);
    out.push_back(m);
  }
  return out;
}

TrialOutcome run_trial(const ExperimentConfig& config, const Problem& shared, std::size_t t) {
  TrialOutcome outcome;
  try {
    std::optional<Problem> own;
    if (config.resample_instance_per_trial) {
      RngStream scenario_rng(config.base_seed, kScenarioStream + t);
      own.emplace(build_problem(config.scenario, scenario_rng));
    }
    const Problem& problem = own ? *own : shared;
    RngStream rng(config.base_seed, t);
    RunOptions options;
    options.stride = config.metric_stride;
    options.track_ergodic = config.track_ergodic;
    const TrialTrace trace =
        run(problem, config.algorithm_kind(), config.schedule, config.iterations, initial_point(config, problem), rng,
            options);
    outcome.records = measure(problem, trace);
  } catch (const std::exception& e) {
    outcome.error = e.what();
  }
  return outcome;
}

std::string format_real(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", v);
  return buffer;
}

}  // namespace

std::vector<MetricRecord> AggregateResult::mean_records() const {
  std::vector<MetricRecord> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    MetricRecord m;
    m.k = row.k;
    m.samples_used = row.samples_used;
    m.optimality_error = row.mean_optimality_error;
    m.feasibility_error = row.mean_feasibility_error;
    m.violation_fraction = row.mean_violation_fraction;
    m.ergodic_gap = row.mean_ergodic_gap;
    out.push_back(m);
  }
  return out;
}

Problem build_problem(const ScenarioConfig& scenario, RngStream& rng) {
  switch (scenario.kind) {
    case ScenarioKind::sphere: {
      SphereParams p;
      p.dimension = scenario.dimension;
      p.constraints = scenario.constraints;
      if (scenario.radius) p.radius = *scenario.radius;
      p.jitter = scenario.jitter;
      p.noise_variance = scenario.noise_variance;
      p.planted_offset = scenario.planted_offset;
      p.beta_star = scenario.beta_star;
      return make_sphere_scenario(p, rng);
    }
    case ScenarioKind::two_sphere: {
      TwoSphereParams p;
      p.constraints = scenario.constraints;
      if (scenario.radius) p.radius = *scenario.radius;
      p.center_offset = scenario.center_offset;
      p.arc_degrees = scenario.arc_degrees;
      p.jitter = scenario.jitter;
      p.noise_variance = scenario.noise_variance;
      p.beta_star = scenario.beta_star;
      return make_two_sphere_scenario(p, rng);
    }
    case ScenarioKind::svm: {
      SvmParams p;
      p.dimension = scenario.dimension;
      p.constraints = scenario.constraints;
      p.margin = scenario.margin;
      p.mean_separation = scenario.mean_separation;
      return make_svm_scenario(p, rng);
    }
    case ScenarioKind::custom:
      break;
  }
  throw ConfigError("scenario.kind", "custom scenarios cannot be built from a config");
}

Problem build_problem(const ExperimentConfig& config) {
  RngStream rng(config.base_seed, kScenarioStream);
  return build_problem(config.scenario, rng);
}

Vector initial_point(const ExperimentConfig& config, const Problem& problem) {
  switch (config.x0_policy) {
    case X0Policy::zero: return Vector::Zero(static_cast<Eigen::Index>(problem.dimension));
    case X0Policy::planted: return problem.planted;
    case X0Policy::explicit_vector:
      if (!config.x0) throw ConfigError("x0", "explicit policy without a vector");
      if (static_cast<std::size_t>(config.x0->size()) != problem.dimension) {
        throw ConfigError("x0", "dimension does not match the scenario");
      }
      return *config.x0;
  }
  throw InvalidArgument("initial_point: unknown policy");
}

AggregateResult run_experiment(const ExperimentConfig& config) { return run_experiment(config, build_problem(config)); }

AggregateResult run_experiment(const ExperimentConfig& config, const Problem& problem) {
  if (config.trials == 0) throw ConfigError("trials", "must be at least 1");
  if (config.metric_stride == 0) throw ConfigError("metric_stride", "must be at least 1");
  if (config.workers == 0) throw ConfigError("workers", "must be at least 1");
  if (!problem.reference_optimum) throw InvalidArgument("run_experiment: problem has no reference optimum");

  std::vector<TrialOutcome> outcomes(config.trials);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next.fetch_add(1); t < config.trials; t = next.fetch_add(1)) {
      outcomes[t] = run_trial(config, problem, t);
    }
  };
  const std::size_t thread_count = std::min(config.workers, config.trials);
  if (thread_count <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(thread_count);
    for (std::size_t i = 0; i < thread_count; ++i) pool.emplace_back(worker);
  }

  AggregateResult result;
  for (std::size_t t = 0; t < config.trials; ++t) {
    if (outcomes[t].error) {
      result.failed_trials.push_back({t, *outcomes[t].error});
    } else {
      result.trials.push_back(std::move(outcomes[t].records));
      result.trial_indices.push_back(t);
    }
  }
  result.trial_count = result.trials.size();
  if (result.failed_trials.size() * 100 > config.trials || result.trial_count == 0) {
    std::ostringstream msg;
    msg << result.failed_trials.size() << " of " << config.trials
        << " trials failed; first failure (trial " << result.failed_trials.front().trial
        << "): " << result.failed_trials.front().message;
    throw ExperimentFailure(msg.str(), result.failed_trials);
  }

  const auto& first = result.trials.front();
  const double count = static_cast<double>(result.trial_count);
  result.rows.resize(first.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    AggregateRow& row = result.rows[i];
    row.k = first[i].k;
    row.samples_used = first[i].samples_used;
    double ergodic = 0.0;
    bool has_ergodic = true;
    for (const auto& trial : result.trials) {
      const MetricRecord& r = trial[i];
      row.mean_optimality_error += r.optimality_error;
      row.mean_feasibility_error += r.feasibility_error;
      row.mean_violation_fraction += r.violation_fraction;
      if (r.ergodic_gap) {
        ergodic += *r.ergodic_gap;
      } else {
        has_ergodic = false;
      }
    }
    row.mean_optimality_error /= count;
    row.mean_feasibility_error /= count;
    row.mean_violation_fraction /= count;
    if (has_ergodic) row.mean_ergodic_gap = ergodic / count;
  }
  return result;
}

std::string format_csv(const AggregateResult& result) {
  std::string out = "k,samples_used,mean_opt_err,mean_feas_err,violation_pct\n";
  for (const auto& row : result.rows) {
    out += std::to_string(row.k);
    out += ',';
    out += std::to_string(row.samples_used);
    out += ',';
    out += format_real(row.mean_optimality_error);
    out += ',';
    out += format_real(row.mean_feasibility_error);
    out += ',';
    out += format_real(100.0 * row.mean_violation_fraction);
    out += '\n';
  }
  return out;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

void write_csv(const AggregateResult& result, const std::filesystem::path& path) { write_text(path, format_csv(result)); }

std::filesystem::path config_echo_path(const std::filesystem::path& csv_path) {
  return std::filesystem::path(csv_path.string() + ".config.json");
}

void write_config_echo(const ExperimentConfig& config, const std::filesystem::path& csv_path) {
  write_text(config_echo_path(csv_path), to_json(config));
}

std::filesystem::path sweep_output_path(const std::filesystem::path& base, Scheme scheme, std::size_t samples) {
  std::filesystem::path out = base;
  out.replace_filename(base.stem().string() + "_" + std::string(to_string(scheme)) + "_M" + std::to_string(samples) +
                       base.extension().string());
  return out;
}

}  // namespace rmcp
