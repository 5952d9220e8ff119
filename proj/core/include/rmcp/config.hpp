#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rmcp/geometry.hpp"
#include "rmcp/problems.hpp"
#include "rmcp/solver.hpp"

namespace rmcp {

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::sphere;
  std::size_t dimension = 2;
  std::size_t constraints = 300;
  /// 1000 for the sphere, 61 for the two-sphere scenario when unset.
  std::optional<double> radius;
  double planted_offset = 1.0;
  double center_offset = 60.0;
  double arc_degrees = 20.0;
  double jitter = 0.5;
  double noise_variance = 10.0;
  double margin = 0.1;
  double mean_separation = 2.0;
  std::optional<Vector> beta_star;
};

enum class X0Policy { zero, planted, explicit_vector };

struct SweepConfig {
  std::vector<Scheme> algorithms;
  std::vector<std::size_t> samples;
};

/// Resolved experiment description; see parse_config for the JSON schema.
struct ExperimentConfig {
  ScenarioConfig scenario;
  Scheme algorithm = Scheme::polyhedral_set;
  std::size_t samples = 5;
  StepSchedule schedule{OffsetInverseStep{10.0}};
  std::size_t iterations = 2000;
  std::size_t trials = 100;
  std::uint64_t base_seed = 1;
  std::size_t metric_stride = 10;
  X0Policy x0_policy = X0Policy::planted;
  std::optional<Vector> x0;
  std::string output_path = "rmcp_run.csv";
  std::size_t workers = 1;
  bool track_ergodic = false;
  bool resample_instance_per_trial = false;
  std::size_t eta_probes = 1000;
  std::optional<SweepConfig> sweep;

  AlgorithmKind algorithm_kind() const { return AlgorithmKind(algorithm, samples); }
};

/// Parses a JSON experiment description. Unknown keys and ill-typed values
/// raise ConfigError naming the field path (e.g. "scenario.radius").
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Fully resolved configuration as JSON; parse_config(to_json(c)) == c.
std::string to_json(const ExperimentConfig& config);

std::string_view to_string(X0Policy policy);

}  // namespace rmcp
