#pragma once

#include <vector>

#include <Eigen/Core>

#include "contact_hybrid/block_inverse.hpp"
#include "contact_hybrid/mech_system.hpp"
#include "contact_hybrid/trending.hpp"

namespace contact_hybrid {

struct State {
  Eigen::VectorXd q;
  Eigen::VectorXd qd;
};

// Stacked flow state x = (q, qd).
Eigen::VectorXd pack(const State& s);
State unpack(const Eigen::VectorXd& x);

struct DynamicsResult {
  Eigen::VectorXd qdd;     // all coordinates
  Eigen::VectorXd lambda;  // one entry per mode constraint, ascending global order
  BlockInverse block;      // over active coordinates and mode rows
  std::vector<int> active;
};

// Rows of the mode's constraints restricted to the given columns.
Eigen::MatrixXd constraint_matrix(const MechSystem& sys, ContactMode mode, const Eigen::VectorXd& q,
                                  const std::vector<int>& cols);
Eigen::VectorXd constraint_rates(const MechSystem& sys, ContactMode mode, const Eigen::VectorXd& q,
                                 const Eigen::VectorXd& qd);
// Upsilon - C qd - N over all coordinates.
Eigen::VectorXd net_force(const MechSystem& sys, ContactMode mode, const Eigen::VectorXd& q,
                          const Eigen::VectorXd& qd);

BlockInverse mode_block_inverse(const MechSystem& sys, ContactMode mode, const Eigen::VectorXd& q);

struct DomainResidual {
  double position = 0.0;  // max |a_k| over active normals
  double velocity = 0.0;  // max |A_k qd| over active constraints
  double penetration = 0.0;  // max(-a_k, 0) over inactive normals
};
DomainResidual domain_residual(const MechSystem& sys, ContactMode mode, const State& s);

// Throws DomainViolation when the state is outside the mode's domain by more
// than the tolerances and check_domain is set.
DynamicsResult continuous_dynamics(const MechSystem& sys, ContactMode mode, const State& s,
                                   const Tolerances& tol = {}, bool check_domain = true);

// Same dynamics by a direct saddle-point solve; valid for double and Taylor.
template <class T>
std::pair<VecX<T>, VecX<T>> continuous_dynamics_generic(const MechSystem& sys, ContactMode mode,
                                                        const VecX<T>& q, const VecX<T>& qd);

Eigen::VectorXd flow_field(const MechSystem& sys, ContactMode mode, const Eigen::VectorXd& x);
TaylorVec flow_field(const MechSystem& sys, ContactMode mode, const TaylorVec& x);

struct EquivalenceReport {
  double qdd_deviation = 0.0;     // relative
  double lambda_deviation = 0.0;  // relative
  double max() const { return std::max(qdd_deviation, lambda_deviation); }
};
// Compares against the explicit inverse-inertia expressions. Throws NotApplicable
// when the inertia is singular.
EquivalenceReport dynamics_equivalence_check(const MechSystem& sys, ContactMode mode, const State& s);

// U_k(w) for a multiplier (or impulse) vector w over the mode's constraints.
// Compressive normal loads appear as negative entries of w, so a maintainable
// constraint has U_k >= 0. Tangentials use mu * (-w_parent) - |w_k|.
double cone_value(const MechSystem& sys, ContactMode mode, int k, const Eigen::VectorXd& w);

// Same map applied to series along a flow; |w_k| uses the trend sign of w_k.
Taylor cone_series(const MechSystem& sys, ContactMode mode, int k, const TaylorVec& w,
                   const TrendOptions& opt);

}  // namespace contact_hybrid
