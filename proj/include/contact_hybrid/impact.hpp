#pragma once

#include <Eigen/Core>

#include "contact_hybrid/dynamics.hpp"
#include "contact_hybrid/mech_system.hpp"

namespace contact_hybrid {

struct ImpulseRecord {
  Eigen::VectorXd body_impulse;     // -M (qd+ - qd-), all coordinates
  Eigen::VectorXd contact_impulse;  // one entry per mode constraint
  Eigen::VectorXd pseudo_impulse;   // one entry per mode constraint
  ContactMode mode;
  Eigen::VectorXd pre_velocity;
  Eigen::VectorXd post_velocity;
  double kinetic_before = 0.0;
  double kinetic_after = 0.0;
};

// Normal k is touching (|a_k| within tol_domain) and approaching faster than tol_vel.
bool touchdown(const MechSystem& sys, int k, const State& s, const Tolerances& tol = {});
bool new_touchdown(const MechSystem& sys, const State& s, const Tolerances& tol = {});

// -Lambda_J A_J qd over the mode's constraints.
Eigen::VectorXd contact_impulse(const MechSystem& sys, ContactMode mode, const State& s);
// A_dag_J (Upsilon - C qd - N) delta_t.
Eigen::VectorXd pseudo_impulse(const MechSystem& sys, ContactMode mode, const State& s,
                               double delta_t);
// Plastic impact into mode J: qd+ = (I - A_dag^T A) qd- on the active
// coordinates; free massless coordinates keep their velocity.
ImpulseRecord post_impact(const MechSystem& sys, ContactMode mode, const State& s,
                          double delta_t = 0.0, const Tolerances& tol = {});

}  // namespace contact_hybrid
