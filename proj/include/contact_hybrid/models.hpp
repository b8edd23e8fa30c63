#pragma once

#include <memory>

#include "contact_hybrid/mech_system.hpp"

namespace contact_hybrid {

// Unit point mass in the plane with one constraint a = sign * x^power + coeff * y
// and no applied forces.
struct CurveParams {
  double sign = 1.0;
  int power = 2;
  double coeff = 4.0;
};
std::shared_ptr<MechSystem> make_curve_point(const std::string& name, const CurveParams& p);

// Point mass (x, z) under gravity with a floor at z = 0 (a = z) or a ceiling
// at z = height (a = height - z).
struct BallParams {
  double mass = 1.0;
  double gravity = 9.81;
  bool ceiling = false;
  double ceiling_height = 1.0;
  double friction = 0.0;  // adds a tangential constraint when positive
};
std::shared_ptr<MechSystem> make_ball(const std::string& name, const BallParams& p);

// Point mass sliding on flat ground toward a hill of slope angle starting at hill_x.
// Constraints: ground_n, ground_t, hill_n, hill_t.
struct SlidingPointParams {
  double mass = 1.0;
  double gravity = 9.81;
  double slope = 0.5235987755982988;  // 30 degrees
  double hill_x = 0.0;
  double mu_ground = 0.3;
  double mu_hill = 0.3;
};
std::shared_ptr<MechSystem> make_sliding_point(const SlidingPointParams& p);

// Planar rectangular block, coordinates (x, z, theta) of the center of mass.
// Constraints: l_n, l_t, r_n, r_t at the bottom corners.
struct RockingBlockParams {
  double height = 0.10;
  double width = 0.05;
  double mass = 5.0;
  double inertia = 0.0;  // 0 selects the uniform value m (w^2 + h^2) / 12
  double gravity = 9.81;
  double friction = 1.0;
  double uniform_inertia() const { return mass * (width * width + height * height) / 12.0; }
  double effective_inertia() const { return inertia > 0.0 ? inertia : uniform_inertia(); }
};
std::shared_ptr<MechSystem> make_rocking_block(const RockingBlockParams& p);

// Sagittal body (x, z, phi) with two massless legs (theta_f, theta_r) driven by
// motors with torque kP kG (1 - kG theta_dot). Constraints: f_n, f_t, r_n, r_t at the
// feet and frictionless nose_n, tail_n at the hips.
struct HexapodParams {
  double body_mass = 7.5;
  double body_inertia = 0.08;
  double hip_offset = 0.2;
  double leg_length = 0.17;
  double gravity = 9.81;
  double friction = 3.0;
  double kappa_p = 40.0;  // N m at unit kG
  double kappa_g = 0.1;    // s / rad
  double swing_gain = 20.0;  // 1/s, relaxation of airborne legs to the motor's free speed
  double retract_gain = 400.0;  // rad/s^2, lifts an airborne foot as retract_gain * sin(psi)
};
std::shared_ptr<MechSystem> make_planar_hexapod(const HexapodParams& p);

}  // namespace contact_hybrid
