#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "contact_hybrid/complementarity.hpp"
#include "contact_hybrid/dynamics.hpp"
#include "contact_hybrid/impact.hpp"
#include "contact_hybrid/mech_system.hpp"

namespace contact_hybrid {

enum class ZenoPolicy { Project, Abort };
enum class Termination { ReachedTEnd, ZenoTruncated, ZenoProjected, NoSolution, MultipleSolutions };
enum class EventKind { Touchdown, Liftoff, ZenoProjection };

const char* to_string(ZenoPolicy p);
const char* to_string(Termination t);
const char* to_string(EventKind k);
ZenoPolicy parse_zeno_policy(const std::string& s);

struct HybridTimeDomain {
  std::vector<std::pair<double, double>> intervals;
  std::vector<double> event_times;  // shared endpoints, one per transition
};

struct Sample {
  double t = 0.0;
  Eigen::VectorXd q, qd;
  Eigen::VectorXd lambda;  // over the interval's mode constraints
};

struct Segment {
  ContactMode mode;
  std::vector<Sample> samples;
};

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::Touchdown;
  ContactMode from, to;
  ImpulseRecord impulse;
  std::optional<ModeSelectionResult> selection;  // absent for Zeno projections
};

struct ZenoOptions {
  int min_events = 50;
  double window = 0.5;  // seconds
  double ratio = 0.95;
  // Gaps at or below floor times the system time scale count as contracted:
  // the outlet re-arm threshold stops event gaps shrinking below this.
  double floor = 1e-4;
  ZenoPolicy policy = ZenoPolicy::Project;
};

struct ExecutionOptions {
  double delta_t = 0.03;
  Tolerances tol;
  ZenoOptions zeno;
  double sample_dt = 1e-3;
  bool strict_fa_scope = false;
  bool stop_on_multiple_solutions = false;
  int max_transitions_per_time = 8;
  double rtol = 1e-10;
  double atol = 1e-12;  // times the state scales
  double max_step = 0.01;  // times the time scale
};

struct Execution {
  HybridTimeDomain time_domain;
  std::vector<ContactMode> word;
  std::vector<Segment> segments;
  std::vector<Event> events;
  Termination termination = Termination::ReachedTEnd;
  std::string diagnostic;
  State final_state;
  double final_time = 0.0;
  int max_transitions_per_time = 0;
  int multiple_solution_events = 0;
  int zeno_detections = 0;
  double max_domain_residual = 0.0;  // normalized by tol_domain scales
  std::vector<double> zeno_gap_ratios;  // ratios observed when Zeno was declared
};

bool in_domain(const MechSystem& sys, ContactMode mode, const State& s, const Tolerances& tol = {});
bool in_outlet(const MechSystem& sys, ContactMode mode, const State& s, const Tolerances& tol = {});
// PIV on a new touchdown, FA otherwise.
ModeSelectionResult classify_guard_detailed(const MechSystem& sys, ContactMode mode, const State& s,
                                            double delta_t, const SelectionOptions& opt = {});
ContactMode classify_guard(const MechSystem& sys, ContactMode mode, const State& s, double delta_t,
                           const SelectionOptions& opt = {});
State apply_reset(const MechSystem& sys, ContactMode from, ContactMode to, const State& s);

// Outlet scalars of a mode: a_k for inactive normals (over length scale) and
// U_i(lambda) for active constraints (over force scale).
struct OutletFunction {
  int constraint = -1;
  bool is_force = false;
};
std::vector<OutletFunction> outlet_functions(const MechSystem& sys, ContactMode mode);
Eigen::VectorXd outlet_values(const MechSystem& sys, ContactMode mode,
                              const std::vector<OutletFunction>& fns, const State& s);

// Zeno bookkeeping over distinct transition times.
class ZenoMonitor {
 public:
  explicit ZenoMonitor(ZenoOptions opt, double time_scale = 1.0)
      : opt_(opt), gap_floor_(opt.floor * time_scale) {}
  struct Record {
    double t;
    State post;
    ContactMode mode;
  };
  void observe(double t, const State& post, ContactMode mode, ContactMode before);
  bool suspect() const;
  std::vector<double> gap_ratios() const;
  // Limit state and time by geometric extrapolation over the period-two tail.
  std::pair<double, State> extrapolate() const;
  // Union of modes visited during the detection window.
  ContactMode visited_union() const;
  void clear() { records_.clear(); }
  const std::vector<Record>& records() const { return records_; }

 private:
  ZenoOptions opt_;
  double gap_floor_;
  std::vector<Record> records_;
};

// Drops dependent rows from mode, tangentials last in the global order first.
ContactMode independent_submode(const MechSystem& sys, ContactMode mode, const Eigen::VectorXd& q);

// Projects onto the accumulation mode. Throws ProjectionRejected when the
// extrapolated state is not in the mode's domain.
std::pair<ContactMode, State> zeno_project(const MechSystem& sys, const ZenoMonitor& monitor,
                                           const Tolerances& tol, double* t_limit);

Execution execute(const MechSystem& sys, ContactMode initial_mode, const State& initial_state,
                  double t_end, const ExecutionOptions& opt = {});

}  // namespace contact_hybrid
