#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rmcp/config.hpp"
#include "rmcp/metrics.hpp"
#include "rmcp/problems.hpp"

namespace rmcp {

struct TrialFailure {
  std::size_t trial = 0;
  std::string message;
};

struct AggregateRow {
  std::size_t k = 0;
  std::uint64_t samples_used = 0;
  double mean_optimality_error = 0.0;
  double mean_feasibility_error = 0.0;
  double mean_violation_fraction = 0.0;
  std::optional<double> mean_ergodic_gap;
};

struct AggregateResult {
  std::vector<AggregateRow> rows;
  /// Metric records of each successful trial, in trial-index order.
  std::vector<std::vector<MetricRecord>> trials;
  std::vector<std::size_t> trial_indices;
  std::size_t trial_count = 0;
  std::vector<TrialFailure> failed_trials;

  /// Rows as MetricRecords (means), for the rate fits.
  std::vector<MetricRecord> mean_records() const;
};

/// Raised when more than 1% of trials fail.
class ExperimentFailure : public NumericalError {
 public:
  ExperimentFailure(const std::string& message, std::vector<TrialFailure> failures)
      : NumericalError(message), failures_(std::move(failures)) {}
  const std::vector<TrialFailure>& failures() const noexcept { return failures_; }

 private:
  std::vector<TrialFailure> failures_;
};

Problem build_problem(const ScenarioConfig& scenario, RngStream& rng);
/// The shared instance for a config: generated from the reserved scenario stream.
Problem build_problem(const ExperimentConfig& config);
Vector initial_point(const ExperimentConfig& config, const Problem& problem);

/// Runs `trials` independent trials (trial t on RngStream(base_seed, t)) over
/// `workers` threads and reduces them in trial order. Output is independent of
/// the worker count.
AggregateResult run_experiment(const ExperimentConfig& config);
/// Same, on a caller-supplied instance (ignored when resampling per trial).
AggregateResult run_experiment(const ExperimentConfig& config, const Problem& problem);

/// CSV text: header `k,samples_used,mean_opt_err,mean_feas_err,violation_pct`.
std::string format_csv(const AggregateResult& result);
void write_csv(const AggregateResult& result, const std::filesystem::path& path);
/// Sibling of a CSV path holding the resolved config: `<path>.config.json`.
std::filesystem::path config_echo_path(const std::filesystem::path& csv_path);
void write_config_echo(const ExperimentConfig& config, const std::filesystem::path& csv_path);

/// Per-combination output path used by `sweep`: `<stem>_<algorithm>_M<M><ext>`.
std::filesystem::path sweep_output_path(const std::filesystem::path& base, Scheme scheme, std::size_t samples);

}  // namespace rmcp
