#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "contact_hybrid/executor.hpp"
#include "contact_hybrid/scenarios.hpp"

namespace contact_hybrid {

struct InvariantCheck {
  std::string name;
  bool passed = true;
  double margin = 0.0;              // worst observed value relative to its bound (<= 1 passes)
  std::optional<double> time;       // offending time of a failure
  std::string detail;
};

struct RunReport {
  std::string scenario;
  std::string system;
  Termination termination = Termination::ReachedTEnd;
  std::string diagnostic;
  double final_time = 0.0;
  std::vector<std::pair<double, double>> intervals;
  std::vector<std::string> word;
  int events = 0;
  int multiple_solution_events = 0;
  int max_transitions_per_time = 0;
  std::vector<InvariantCheck> checks;
  std::vector<std::string> files;
  bool all_checks_passed() const;
};

// Fixed CSV column order: t, mode, q_<coord>..., qd_<coord>..., lambda_<label>...
// with lambda columns for every constraint, empty when inactive.
std::vector<std::string> trajectory_columns(const MechSystem& sys);
void write_trajectory_csv(std::ostream& out, const MechSystem& sys, const Execution& ex);

struct TrajectoryRow {
  double t = 0.0;
  std::string mode;
  std::vector<double> q, qd;
  std::vector<std::optional<double>> lambda;
};
std::vector<TrajectoryRow> read_trajectory_csv(std::istream& in, const MechSystem& sys);

nlohmann::json event_json(const MechSystem& sys, const Event& e);
void write_events_jsonl(std::ostream& out, const MechSystem& sys, const Execution& ex);

// Post-run checks over the execution. Randomized spot checks of the domain
// along the samples draw from the given seed.
std::vector<InvariantCheck> check_invariants(const MechSystem& sys, const Execution& ex,
                                             const ExecutionOptions& opt, std::uint64_t seed);

RunReport make_report(const ScenarioConfig& config, const MechSystem& sys, const Execution& ex,
                      std::vector<InvariantCheck> checks);
nlohmann::json report_json(const RunReport& r);

// A run settles when it ends cleanly at t_end at rest; the settle time is the last transition.
struct SweepRow {
  double value = 0.0;
  Termination termination = Termination::ReachedTEnd;
  bool settled = false;
  int transitions = 0;
  double settle_time = 0.0;
  std::string final_mode;
};
SweepRow summarize_sweep(const MechSystem& sys, const Execution& ex, double value);
void write_sweep_csv(std::ostream& out, const std::string& key, const std::vector<SweepRow>& rows);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace contact_hybrid
