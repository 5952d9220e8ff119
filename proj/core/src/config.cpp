#include "rmcp/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace rmcp {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string join(const std::string& prefix, const std::string& key) { return prefix.empty() ? key : prefix + "." + key; }

void reject_unknown(const json& object, const std::string& prefix, const std::set<std::string>& allowed) {
  for (const auto& item : object.items()) {
    if (!allowed.contains(item.key())) throw ConfigError(join(prefix, item.key()), "unknown key");
  }
}

const json& require_object(const json& j, const std::string& field) {
  if (!j.is_object()) throw ConfigError(field.empty() ? "<root>" : field, "expected an object");
  return j;
}

double get_real(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(field, "must be finite");
  return v;
}

double get_positive(const json& j, const std::string& field) {
  const double v = get_real(j, field);
  if (!(v > 0.0)) throw ConfigError(field, "must be positive");
  return v;
}

std::uint64_t get_unsigned(const json& j, const std::string& field) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0)) {
    throw ConfigError(field, "expected a nonnegative integer");
  }
  return j.get<std::uint64_t>();
}

std::size_t get_count(const json& j, const std::string& field, std::size_t minimum) {
  const auto v = get_unsigned(j, field);
  if (v < minimum) throw ConfigError(field, "must be at least " + std::to_string(minimum));
  return static_cast<std::size_t>(v);
}

bool get_bool(const json& j, const std::string& field) {
  if (!j.is_boolean()) throw ConfigError(field, "expected true or false");
  return j.get<bool>();
}

Vector get_vector(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw ConfigError(field, "expected a nonempty array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = get_real(j[i], field + "[" + std::to_string(i) + "]");
  return v;
}

Scheme get_scheme(const json& j, const std::string& field) {
  if (!j.is_string()) throw ConfigError(field, "expected an algorithm name");
  const auto scheme = parse_scheme(j.get<std::string>());
  if (!scheme) throw ConfigError(field, "unknown algorithm '" + j.get<std::string>() + "' (baseline|averaging|maxset|polyhedral)");
  return *scheme;
}

ScenarioKind get_scenario_kind(const json& j, const std::string& field) {
  if (!j.is_string()) throw ConfigError(field, "expected a scenario name");
  const auto name = j.get<std::string>();
  if (name == "sphere") return ScenarioKind::sphere;
  if (name == "two_sphere") return ScenarioKind::two_sphere;
  if (name == "svm") return ScenarioKind::svm;
  throw ConfigError(field, "unknown scenario '" + name + "' (sphere|two_sphere|svm)");
}

ScenarioConfig parse_scenario(const json& j) {
  require_object(j, "scenario");
  if (!j.contains("kind")) throw ConfigError("scenario.kind", "missing");
  ScenarioConfig s;
  s.kind = get_scenario_kind(j.at("kind"), "scenario.kind");
  std::set<std::string> allowed{"kind"};
  switch (s.kind) {
    case ScenarioKind::sphere:
      allowed.insert({"dimension", "constraints", "radius", "jitter", "noise_variance", "planted_offset", "beta_star"});
      break;
    case ScenarioKind::two_sphere:
      allowed.insert({"constraints", "radius", "center_offset", "arc_degrees", "jitter", "noise_variance", "beta_star"});
      break;
    case ScenarioKind::svm:
      s.dimension = 100;
      s.constraints = 200;
      allowed.insert({"dimension", "constraints", "margin", "mean_separation"});
      break;
    case ScenarioKind::custom:
      break;
  }
  reject_unknown(j, "scenario", allowed);
  if (j.contains("dimension")) s.dimension = get_count(j.at("dimension"), "scenario.dimension", 1);
  if (j.contains("constraints")) s.constraints = get_count(j.at("constraints"), "scenario.constraints", 1);
  if (j.contains("radius")) s.radius = get_positive(j.at("radius"), "scenario.radius");
  if (j.contains("planted_offset")) s.planted_offset = get_positive(j.at("planted_offset"), "scenario.planted_offset");
  if (j.contains("center_offset")) s.center_offset = get_positive(j.at("center_offset"), "scenario.center_offset");
  if (j.contains("arc_degrees")) s.arc_degrees = get_positive(j.at("arc_degrees"), "scenario.arc_degrees");
  if (j.contains("jitter")) s.jitter = get_real(j.at("jitter"), "scenario.jitter");
  if (j.contains("noise_variance")) s.noise_variance = get_real(j.at("noise_variance"), "scenario.noise_variance");
  if (j.contains("margin")) s.margin = get_positive(j.at("margin"), "scenario.margin");
  if (j.contains("mean_separation")) s.mean_separation = get_real(j.at("mean_separation"), "scenario.mean_separation");
  if (j.contains("beta_star")) s.beta_star = get_vector(j.at("beta_star"), "scenario.beta_star");
  return s;
}

StepSchedule parse_schedule(const json& j) {
  require_object(j, "schedule");
  if (!j.contains("kind") || !j.at("kind").is_string()) throw ConfigError("schedule.kind", "missing or not a string");
  const auto kind = j.at("kind").get<std::string>();
  try {
    if (kind == "polynomial") {
      reject_unknown(j, "schedule", {"kind", "alpha0", "exponent"});
      PolynomialStep s;
      if (j.contains("alpha0")) s.alpha0 = get_positive(j.at("alpha0"), "schedule.alpha0");
      if (j.contains("exponent")) s.exponent = get_positive(j.at("exponent"), "schedule.exponent");
      return StepSchedule(s);
    }
    if (kind == "offset_inverse") {
      reject_unknown(j, "schedule", {"kind", "k0"});
      OffsetInverseStep s;
      if (j.contains("k0")) s.k0 = get_positive(j.at("k0"), "schedule.k0");
      return StepSchedule(s);
    }
    if (kind == "strongly_convex") {
      reject_unknown(j, "schedule", {"kind", "sigma"});
      StronglyConvexStep s;
      if (j.contains("sigma")) s.sigma = get_positive(j.at("sigma"), "schedule.sigma");
      return StepSchedule(s);
    }
    if (kind == "constant") {
      reject_unknown(j, "schedule", {"kind", "alpha"});
      ConstantStep s;
      if (j.contains("alpha")) s.alpha = get_positive(j.at("alpha"), "schedule.alpha");
      return StepSchedule(s);
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError("schedule", e.what());
  }
  throw ConfigError("schedule.kind", "unknown schedule '" + kind + "' (polynomial|offset_inverse|strongly_convex|constant)");
}

json schedule_to_json(const StepSchedule& schedule) {
  return std::visit(Overloaded{
                        [](const PolynomialStep& s) {
                          return json{{"kind", "polynomial"}, {"alpha0", s.alpha0}, {"exponent", s.exponent}};
                        },
                        [](const OffsetInverseStep& s) { return json{{"kind", "offset_inverse"}, {"k0", s.k0}}; },
                        [](const StronglyConvexStep& s) { return json{{"kind", "strongly_convex"}, {"sigma", s.sigma}}; },
                        [](const ConstantStep& s) { return json{{"kind", "constant"}, {"alpha", s.alpha}}; },
                    },
                    schedule.variant());
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

}  // namespace

std::string_view to_string(X0Policy policy) {
  switch (policy) {
    case X0Policy::zero: return "zero";
    case X0Policy::planted: return "planted";
    case X0Policy::explicit_vector: return "explicit";
  }
  return "?";
}

ExperimentConfig parse_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  require_object(root, "");
  reject_unknown(root, "", {"scenario", "algorithm", "M", "schedule", "iterations", "trials", "base_seed",
                            "metric_stride", "x0", "output_path", "workers", "track_ergodic",
                            "resample_instance_per_trial", "eta_probes", "sweep"});

  ExperimentConfig c;
  if (!root.contains("scenario")) throw ConfigError("scenario", "missing");
  c.scenario = parse_scenario(root.at("scenario"));
  if (c.scenario.kind == ScenarioKind::svm) c.x0_policy = X0Policy::zero;

  if (root.contains("algorithm")) c.algorithm = get_scheme(root.at("algorithm"), "algorithm");
  if (root.contains("M")) c.samples = get_count(root.at("M"), "M", 1);
  if (root.contains("schedule")) c.schedule = parse_schedule(root.at("schedule"));
  if (root.contains("iterations")) c.iterations = get_count(root.at("iterations"), "iterations", 0);
  if (root.contains("trials")) c.trials = get_count(root.at("trials"), "trials", 1);
  if (root.contains("base_seed")) c.base_seed = get_unsigned(root.at("base_seed"), "base_seed");
  if (root.contains("metric_stride")) c.metric_stride = get_count(root.at("metric_stride"), "metric_stride", 1);
  if (root.contains("output_path")) {
    if (!root.at("output_path").is_string()) throw ConfigError("output_path", "expected a string");
    c.output_path = root.at("output_path").get<std::string>();
  }
  if (root.contains("workers")) c.workers = get_count(root.at("workers"), "workers", 1);
  if (root.contains("track_ergodic")) c.track_ergodic = get_bool(root.at("track_ergodic"), "track_ergodic");
  if (root.contains("resample_instance_per_trial")) {
    c.resample_instance_per_trial = get_bool(root.at("resample_instance_per_trial"), "resample_instance_per_trial");
  }
  if (root.contains("eta_probes")) c.eta_probes = get_count(root.at("eta_probes"), "eta_probes", 100);

  if (root.contains("x0")) {
    const json& x0 = root.at("x0");
    if (x0.is_string()) {
      const auto name = x0.get<std::string>();
      if (name == "zero") {
        c.x0_policy = X0Policy::zero;
      } else if (name == "planted") {
        c.x0_policy = X0Policy::planted;
      } else {
        throw ConfigError("x0", "expected \"zero\", \"planted\" or an array");
      }
    } else {
      c.x0_policy = X0Policy::explicit_vector;
      c.x0 = get_vector(x0, "x0");
    }
  }

  if (root.contains("sweep")) {
    const json& s = require_object(root.at("sweep"), "sweep");
    reject_unknown(s, "sweep", {"algorithms", "M"});
    SweepConfig sweep;
    if (s.contains("algorithms")) {
      if (!s.at("algorithms").is_array()) throw ConfigError("sweep.algorithms", "expected an array");
      for (std::size_t i = 0; i < s.at("algorithms").size(); ++i) {
        sweep.algorithms.push_back(get_scheme(s.at("algorithms")[i], "sweep.algorithms[" + std::to_string(i) + "]"));
      }
    }
    if (s.contains("M")) {
      if (!s.at("M").is_array()) throw ConfigError("sweep.M", "expected an array");
      for (std::size_t i = 0; i < s.at("M").size(); ++i) {
        sweep.samples.push_back(get_count(s.at("M")[i], "sweep.M[" + std::to_string(i) + "]", 1));
      }
    }
    c.sweep = std::move(sweep);
  }

  const std::size_t m = c.scenario.constraints;
  if (c.algorithm != Scheme::baseline && c.samples > m) throw ConfigError("M", "exceeds the number of constraints");
  if (c.sweep) {
    for (std::size_t M : c.sweep->samples) {
      if (M > m) throw ConfigError("sweep.M", "value exceeds the number of constraints");
    }
  }
  if (c.x0 && static_cast<std::size_t>(c.x0->size()) != c.scenario.dimension) {
    throw ConfigError("x0", "dimension does not match the scenario");
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string to_json(const ExperimentConfig& c) {
  json scenario{{"kind", std::string(to_string(c.scenario.kind))}};
  switch (c.scenario.kind) {
    case ScenarioKind::sphere:
      scenario["dimension"] = c.scenario.dimension;
      scenario["constraints"] = c.scenario.constraints;
      scenario["radius"] = c.scenario.radius.value_or(SphereParams{}.radius);
      scenario["jitter"] = c.scenario.jitter;
      scenario["noise_variance"] = c.scenario.noise_variance;
      scenario["planted_offset"] = c.scenario.planted_offset;
      break;
    case ScenarioKind::two_sphere:
      scenario["constraints"] = c.scenario.constraints;
      scenario["radius"] = c.scenario.radius.value_or(TwoSphereParams{}.radius);
      scenario["center_offset"] = c.scenario.center_offset;
      scenario["arc_degrees"] = c.scenario.arc_degrees;
      scenario["jitter"] = c.scenario.jitter;
      scenario["noise_variance"] = c.scenario.noise_variance;
      break;
    case ScenarioKind::svm:
      scenario["dimension"] = c.scenario.dimension;
      scenario["constraints"] = c.scenario.constraints;
      scenario["margin"] = c.scenario.margin;
      scenario["mean_separation"] = c.scenario.mean_separation;
      break;
    case ScenarioKind::custom:
      break;
  }
  if (c.scenario.beta_star) scenario["beta_star"] = vector_to_json(*c.scenario.beta_star);

  json root{
      {"scenario", scenario},
      {"algorithm", std::string(to_string(c.algorithm))},
      {"M", c.samples},
      {"schedule", schedule_to_json(c.schedule)},
      {"iterations", c.iterations},
      {"trials", c.trials},
      {"base_seed", c.base_seed},
      {"metric_stride", c.metric_stride},
      {"output_path", c.output_path},
      {"workers", c.workers},
      {"track_ergodic", c.track_ergodic},
      {"resample_instance_per_trial", c.resample_instance_per_trial},
      {"eta_probes", c.eta_probes},
  };
  if (c.x0_policy == X0Policy::explicit_vector && c.x0) {
    root["x0"] = vector_to_json(*c.x0);
  } else {
    root["x0"] = std::string(to_string(c.x0_policy));
  }
  if (c.sweep) {
    json algorithms = json::array();
    for (Scheme s : c.sweep->algorithms) algorithms.push_back(std::string(to_string(s)));
    root["sweep"] = json{{"algorithms", algorithms}, {"M", c.sweep->samples}};
  }
  return root.dump(2) + "\n";
}

}  // namespace rmcp
