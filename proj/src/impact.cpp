#include "contact_hybrid/impact.hpp"

#include <algorithm>
#include <cmath>

#include "contact_hybrid/errors.hpp"

namespace contact_hybrid {

namespace {

Eigen::VectorXd gather(const Eigen::VectorXd& v, const std::vector<int>& idx) {
  Eigen::VectorXd out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out(i) = v(idx[i]);
  return out;
}

Eigen::MatrixXd gather(const Eigen::MatrixXd& m, const std::vector<int>& idx) {
  Eigen::MatrixXd out(idx.size(), idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j) out(i, j) = m(idx[i], idx[j]);
  return out;
}

}  // namespace

bool touchdown(const MechSystem& sys, int k, const State& s, const Tolerances& tol) {
  if (!sys.is_normal(k)) return false;
  const Scales& sc = sys.scales();
  return std::abs(sys.constraint_value(k, s.q)) <= tol.domain * sc.length &&
         sys.constraint_row(k, s.q).dot(s.qd) < -tol.vel * sc.velocity();
}

bool new_touchdown(const MechSystem& sys, const State& s, const Tolerances& tol) {
  for (int k = 0; k < sys.num_constraints(); ++k)
    if (touchdown(sys, k, s, tol)) return true;
  return false;
}

Eigen::VectorXd contact_impulse(const MechSystem& sys, ContactMode mode, const State& s) {
  const auto active = sys.active_coordinates(mode);
  const BlockInverse bi = mode_block_inverse(sys, mode, s.q);
  const Eigen::MatrixXd a = constraint_matrix(sys, mode, s.q, active);
  return -bi.lambda * (a * gather(s.qd, active));
}

Eigen::VectorXd pseudo_impulse(const MechSystem& sys, ContactMode mode, const State& s,
                               double delta_t) {
  const auto active = sys.active_coordinates(mode);
  const BlockInverse bi = mode_block_inverse(sys, mode, s.q);
  return bi.adag * gather(net_force(sys, mode, s.q, s.qd), active) * delta_t;
}

ImpulseRecord post_impact(const MechSystem& sys, ContactMode mode, const State& s, double delta_t,
                          const Tolerances& tol) {
  const auto active = sys.active_coordinates(mode);
  const Eigen::MatrixXd m_full = sys.inertia(s.q);
  const Eigen::MatrixXd m = gather(m_full, active);
  const Eigen::MatrixXd a = constraint_matrix(sys, mode, s.q, active);
  const BlockInverse bi = build_block_inverse(m, a);
  const Eigen::VectorXd v = gather(s.qd, active);

  ImpulseRecord rec;
  rec.mode = mode;
  rec.pre_velocity = s.qd;
  rec.post_velocity = s.qd;
  const Eigen::VectorXd v_plus = v - bi.adag_t * (a * v);
  for (std::size_t i = 0; i < active.size(); ++i) rec.post_velocity(active[i]) = v_plus(i);
  rec.body_impulse = -m_full * (rec.post_velocity - rec.pre_velocity);
  rec.contact_impulse = -bi.lambda * (a * v);
  const Eigen::VectorXd alt = bi.adag * (m * v);
  const double scale = std::max((bi.adag.norm() * m.norm() + bi.lambda.norm() * a.norm()) * v.norm(),
                                 sys.scales().impulse() * 1e-300);
  if (rec.contact_impulse.size() && (alt - rec.contact_impulse).cwiseAbs().maxCoeff() > tol.lin * scale)
    throw InternalInconsistency("contact impulse forms disagree");
  rec.pseudo_impulse = bi.adag * gather(net_force(sys, mode, s.q, s.qd), active) * delta_t;
  rec.kinetic_before = 0.5 * s.qd.dot(m_full * s.qd);
  rec.kinetic_after = 0.5 * rec.post_velocity.dot(m_full * rec.post_velocity);
  return rec;
}

}  // namespace contact_hybrid
