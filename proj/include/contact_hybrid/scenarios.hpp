#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "contact_hybrid/executor.hpp"
#include "contact_hybrid/mech_system.hpp"

namespace contact_hybrid {

struct ScenarioConfig {
  std::string scenario;
  std::map<std::string, double> parameters;
  std::map<std::string, double> initial;
  std::optional<std::string> initial_mode;
  std::optional<std::vector<double>> initial_q;
  std::optional<std::vector<double>> initial_qd;
  double t_end = 1.0;
  ExecutionOptions run;
  std::string source = "<config>";
};

struct BuiltScenario {
  std::shared_ptr<const MechSystem> system;
  ContactMode mode;
  State state;
  ExecutionOptions options;
  double t_end = 1.0;
};

struct ParamSpec {
  std::string key;
  double default_value = 0.0;
  std::string unit;
  std::string help;
  enum class Range { Any, Positive, NonNegative } range = Range::Any;
};

struct ScenarioSpec {
  std::string name;
  std::string description;
  std::vector<ParamSpec> parameters;
  std::vector<ParamSpec> initial;
  double t_end = 1.0;
  double delta_t = 0.03;
  std::optional<int> zeno_min_events;
};

const std::vector<ScenarioSpec>& scenario_catalog();
const ScenarioSpec& scenario_spec(const std::string& name);

// Catalog defaults for a scenario.
ScenarioConfig default_config(const std::string& name);

// Throws ValidationError with field-level messages.
BuiltScenario build_scenario(const ScenarioConfig& config);

// YAML scenario files; errors carry "source:line:" prefixes. Unknown keys are rejected.
ScenarioConfig parse_scenario(const std::string& text, const std::string& source = "<string>");
ScenarioConfig load_scenario_file(const std::string& path);
std::string dump_scenario(const ScenarioConfig& config);

// Sweepable keys: parameters.<name>, initial.<name>, run.delta_t, run.t_end.
void set_sweep_value(ScenarioConfig& config, const std::string& key, double value);
std::vector<std::string> sweepable_keys(const ScenarioConfig& config);

}  // namespace contact_hybrid
