#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace rmcp {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct SuiteOptions {
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  /// Criterion ids to run; empty runs all of them.
  std::vector<int> only;
  /// Receives progress lines while the suite runs.
  std::function<void(const std::string&)> progress;
};

inline constexpr int kCriterionCount = 11;

std::string criterion_name(int id);
CriterionResult run_criterion(int id, const SuiteOptions& options);
std::vector<CriterionResult> run_acceptance_suite(const SuiteOptions& options);

/// "[PASS] 5 feasibility rate ... : detail"
std::string format_result(const CriterionResult& result);

struct QpCheckReport {
  std::size_t cases = 0;
  std::size_t failures = 0;
  /// Largest ||hildreth - oracle|| / (1 + ||y||) seen.
  double worst_scaled_gap = 0.0;
  std::string first_failure;
};

/// Randomized Hildreth-versus-active-set equivalence on polyhedra with at
/// most 8 rows in dimension at most 5.
QpCheckReport check_qp_equivalence(std::size_t cases, std::uint64_t seed, double tolerance = 1e-6);

}  // namespace rmcp
