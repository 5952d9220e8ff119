#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rmcp/acceptance.hpp"
#include "rmcp/config.hpp"
#include "rmcp/error.hpp"
#include "rmcp/harness.hpp"
#include "rmcp/metrics.hpp"
#include "rmcp/rng.hpp"

namespace rmcp::cli {

namespace {

struct RunArgs {
  std::string config_path;
  std::string output;
  std::size_t workers = 0;
};

ExperimentConfig load(const RunArgs& args) {
  ExperimentConfig config = load_config(args.config_path);
  if (!args.output.empty()) config.output_path = args.output;
  if (args.workers != 0) config.workers = args.workers;
  return config;
}

void report_failures(const AggregateResult& result, std::ostream& err) {
  for (const auto& f : result.failed_trials) {
    err << "warning: trial " << f.trial << " failed: " << f.message << "\n";
  }
}

int do_run(const RunArgs& args, std::ostream& out, std::ostream& err) {
  const ExperimentConfig config = load(args);
  const AggregateResult result = run_experiment(config);
  report_failures(result, err);
  write_csv(result, config.output_path);
  write_config_echo(config, config.output_path);
  out << "wrote " << config.output_path << " (" << result.rows.size() << " rows, " << result.trial_count
      << " trials)\n";
  return kSuccess;
}

int do_sweep(const RunArgs& args, std::ostream& out, std::ostream& err) {
  const ExperimentConfig base = load(args);
  std::vector<Scheme> algorithms{base.algorithm};
  std::vector<std::size_t> samples{base.samples};
  if (base.sweep) {
    if (!base.sweep->algorithms.empty()) algorithms = base.sweep->algorithms;
    if (!base.sweep->samples.empty()) samples = base.sweep->samples;
  }
  for (Scheme scheme : algorithms) {
    for (std::size_t M : samples) {
      ExperimentConfig config = base;
      config.algorithm = scheme;
      config.samples = M;
      config.sweep.reset();
      config.output_path = sweep_output_path(base.output_path, scheme, M).string();
      const AggregateResult result = run_experiment(config);
      report_failures(result, err);
      write_csv(result, config.output_path);
      write_config_echo(config, config.output_path);
      char line[160];
      std::snprintf(line, sizeof line, "%-11s M=%-3zu final mean feasibility error %.6g -> %s\n",
                    std::string(to_string(scheme)).c_str(), M, result.rows.back().mean_feasibility_error,
                    config.output_path.c_str());
      out << line;
    }
  }
  return kSuccess;
}

int do_estimate_eta(const RunArgs& args, std::size_t probes, std::ostream& out) {
  const ExperimentConfig config = load(args);
  const Problem problem = build_problem(config);
  EtaProbeOptions options;
  options.probe_count = probes != 0 ? probes : config.eta_probes;
  options.center = problem.probe_center;
  options.half_width = problem.probe_half_width;
  RngStream rng(config.base_seed, kScenarioStream + 1);
  const double eta = estimate_eta(problem.family, options, rng);
  char line[64];
  std::snprintf(line, sizeof line, "%.17g\n", eta);
  out << line;
  return kSuccess;
}

int do_check_qp(std::size_t cases, std::uint64_t seed, std::ostream& out, std::ostream& err) {
  const QpCheckReport report = check_qp_equivalence(cases, seed);
  out << report.cases - report.failures << "/" << report.cases
      << " cases agree; worst scaled gap " << report.worst_scaled_gap << "\n";
  if (report.failures != 0) {
    err << "check-qp failed: " << report.first_failure << "\n";
    return kRuntimeError;
  }
  return kSuccess;
}

int do_suite(const SuiteOptions& base, bool verbose, std::ostream& out) {
  SuiteOptions options = base;
  if (verbose) {
    options.progress = [&out](const std::string& line) { out << line << std::endl; };
  }
  const auto results = run_acceptance_suite(options);
  std::size_t passed = 0;
  for (const auto& r : results) {
    out << format_result(r) << "\n";
    if (r.passed) ++passed;
  }
  out << passed << "/" << results.size() << " criteria passed\n";
  return passed == results.size() ? kSuccess : kAcceptanceFailure;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random multi-constraint projection experiments"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Run one experiment and write its CSV");
  run_cmd->add_option("config", run_args.config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("-o,--output", run_args.output, "Override output_path");
  run_cmd->add_option("-w,--workers", run_args.workers, "Override the worker count")->check(CLI::PositiveNumber);

  RunArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run the algorithm x M cross product, one CSV each");
  sweep_cmd->add_option("config", sweep_args.config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("-o,--output", sweep_args.output, "Base output path");
  sweep_cmd->add_option("-w,--workers", sweep_args.workers, "Override the worker count")->check(CLI::PositiveNumber);

  RunArgs eta_args;
  std::size_t probes = 0;
  auto* eta_cmd = app.add_subcommand("estimate-eta", "Estimate the linear-regularity constant of a scenario");
  eta_cmd->add_option("config", eta_args.config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
  eta_cmd->add_option("-n,--probes", probes, "Probe count (at least 100)");

  std::size_t qp_cases = 1000;
  std::uint64_t qp_seed = 1;
  auto* qp_cmd = app.add_subcommand("check-qp", "Compare Hildreth against the active-set oracle on random QPs");
  qp_cmd->add_option("-n,--cases", qp_cases, "Number of random problems");
  qp_cmd->add_option("-s,--seed", qp_seed, "Seed");

  SuiteOptions suite;
  bool verbose = false;
  auto* suite_cmd = app.add_subcommand("paper-suite", "Run the acceptance experiments");
  suite_cmd->add_option("-s,--seed", suite.seed, "Base seed");
  suite_cmd->add_option("-w,--workers", suite.workers, "Worker threads")->check(CLI::PositiveNumber);
  suite_cmd->add_option("--only", suite.only, "Criterion ids to run")->delimiter(',')->check(CLI::Range(1, kCriterionCount));
  suite_cmd->add_flag("-v,--verbose", verbose, "Print progress");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    if (*run_cmd) return do_run(run_args, out, err);
    if (*sweep_cmd) return do_sweep(sweep_args, out, err);
    if (*eta_cmd) return do_estimate_eta(eta_args, probes, out);
    if (*qp_cmd) return do_check_qp(qp_cases, qp_seed, out, err);
    if (*suite_cmd) return do_suite(suite, verbose, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const InvalidArgument& e) {
    err << "invalid argument: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kUsageError;
}

}  // namespace rmcp::cli
