#include "contact_hybrid/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "contact_hybrid/errors.hpp"

namespace contact_hybrid {

Eigen::VectorXd pack(const State& s) {
  Eigen::VectorXd x(s.q.size() + s.qd.size());
  x << s.q, s.qd;
  return x;
}

State unpack(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size() / 2;
  return {x.head(n), x.tail(n)};
}

Eigen::MatrixXd constraint_matrix(const MechSystem& sys, ContactMode mode, const Eigen::VectorXd& q,
                                  const std::vector<int>& cols) {
  const auto rows = mode.indices();
  Eigen::MatrixXd a(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Eigen::RowVectorXd full = sys.constraint_row(rows[r], q);
    for (std::size_t c = 0; c < cols.size(); ++c) a(r, c) = full(cols[c]);
  }
  return a;
}

Eigen::VectorXd constraint_rates(const MechSystem& sys, ContactMode mode, const Eigen::VectorXd& q,
                                 const Eigen::VectorXd& qd) {
  const auto rows = mode.indices();
  Eigen::VectorXd r(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) r(i) = sys.constraint_rate(rows[i], q, qd);
  return r;
}

Eigen::VectorXd net_force(const MechSystem& sys, ContactMode mode, const Eigen::VectorXd& q,
                          const Eigen::VectorXd& qd) {
  return sys.applied(q, qd, mode) - sys.coriolis(q, qd) - sys.potential(q);
}

namespace {

Eigen::MatrixXd sub_matrix(const Eigen::MatrixXd& m, const std::vector<int>& idx) {
  Eigen::MatrixXd out(idx.size(), idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j) out(i, j) = m(idx[i], idx[j]);
  return out;
}

template <class T>
MatX<T> sub_matrix_t(const MatX<T>& m, const std::vector<int>& idx) {
  MatX<T> out(idx.size(), idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j) out(i, j) = m(idx[i], idx[j]);
  return out;
}

}  // namespace

BlockInverse mode_block_inverse(const MechSystem& sys, ContactMode mode, const Eigen::VectorXd& q) {
  const auto active = sys.active_coordinates(mode);
  return build_block_inverse(sub_matrix(sys.inertia(q), active),
                             constraint_matrix(sys, mode, q, active));
}

DomainResidual domain_residual(const MechSystem& sys, ContactMode mode, const State& s) {
  DomainResidual r;
  for (int k = 0; k < sys.num_constraints(); ++k) {
    if (mode.contains(k)) {
      if (sys.is_normal(k)) r.position = std::max(r.position, std::abs(sys.constraint_value(k, s.q)));
      r.velocity = std::max(r.velocity, std::abs(sys.constraint_row(k, s.q).dot(s.qd)));
    } else if (sys.is_normal(k)) {
      r.penetration = std::max(r.penetration, -sys.constraint_value(k, s.q));
    }
  }
  return r;
}

DynamicsResult continuous_dynamics(const MechSystem& sys, ContactMode mode, const State& s,
                                   const Tolerances& tol, bool check_domain) {
  if (check_domain) {
    const DomainResidual r = domain_residual(sys, mode, s);
    const Scales& sc = sys.scales();
    if (r.position > tol.domain * sc.length || r.velocity > tol.domain * sc.velocity()) {
      std::ostringstream os;
      os << "mode " << sys.mode_id(mode) << ": position residual " << r.position
         << ", velocity residual " << r.velocity;
      throw DomainViolation(os.str());
    }
  }
  DynamicsResult out;
  out.active = sys.active_coordinates(mode);
  const Eigen::MatrixXd m = sub_matrix(sys.inertia(s.q), out.active);
  const Eigen::MatrixXd a = constraint_matrix(sys, mode, s.q, out.active);
  out.block = build_block_inverse(m, a);

  const Eigen::VectorXd f_full = net_force(sys, mode, s.q, s.qd);
  Eigen::VectorXd f(out.active.size());
  for (std::size_t i = 0; i < out.active.size(); ++i) f(i) = f_full(out.active[i]);
  const Eigen::VectorXd rate = constraint_rates(sys, mode, s.q, s.qd);

  const Eigen::VectorXd qdd_active = out.block.mdag * f - out.block.adag_t * rate;
  out.lambda = out.block.adag * f - out.block.lambda * rate;

  out.qdd = sys.free_accel(s.q, s.qd);
  for (std::size_t i = 0; i < out.active.size(); ++i) out.qdd(out.active[i]) = qdd_active(i);
  return out;
}

template <class T>
std::pair<VecX<T>, VecX<T>> continuous_dynamics_generic(const MechSystem& sys, ContactMode mode,
                                                        const VecX<T>& q, const VecX<T>& qd) {
  const auto active = sys.active_coordinates(mode);
  const auto rows = mode.indices();
  const MatX<T> m = sub_matrix_t<T>(sys.inertia(q), active);
  MatX<T> a(rows.size(), active.size());
  VecX<T> rhs_g(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const RowX<T> full = sys.constraint_row(rows[r], q);
    for (std::size_t c = 0; c < active.size(); ++c) a(r, c) = full(active[c]);
    rhs_g(r) = -sys.constraint_rate(rows[r], q, qd);
  }
  const VecX<T> f_full = sys.applied(q, qd, mode) - sys.coriolis(q, qd) - sys.potential(q);
  VecX<T> f(active.size());
  for (std::size_t i = 0; i < active.size(); ++i) f(i) = f_full(active[i]);

  auto [qdd_active, lambda] = solve_saddle<T>(m, a, f, rhs_g);
  VecX<T> qdd = sys.free_accel(q, qd);
  for (std::size_t i = 0; i < active.size(); ++i) qdd(active[i]) = qdd_active(i);
  return {qdd, lambda};
}

template std::pair<VecX<double>, VecX<double>> continuous_dynamics_generic<double>(
    const MechSystem&, ContactMode, const VecX<double>&, const VecX<double>&);
template std::pair<VecX<Taylor>, VecX<Taylor>> continuous_dynamics_generic<Taylor>(
    const MechSystem&, ContactMode, const VecX<Taylor>&, const VecX<Taylor>&);

Eigen::VectorXd flow_field(const MechSystem& sys, ContactMode mode, const Eigen::VectorXd& x) {
  const State s = unpack(x);
  const DynamicsResult d = continuous_dynamics(sys, mode, s, {}, false);
  Eigen::VectorXd out(x.size());
  out << s.qd, d.qdd;
  return out;
}

TaylorVec flow_field(const MechSystem& sys, ContactMode mode, const TaylorVec& x) {
  const Eigen::Index n = x.size() / 2;
  const TaylorVec q = x.head(n);
  const TaylorVec qd = x.tail(n);
  const auto qdd = continuous_dynamics_generic<Taylor>(sys, mode, q, qd).first;
  TaylorVec out(x.size());
  out << qd, qdd;
  return out;
}

EquivalenceReport dynamics_equivalence_check(const MechSystem& sys, ContactMode mode,
                                             const State& s) {
  const Eigen::MatrixXd m = sys.inertia(s.q);
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
  if (sv.size() == 0 || !(sv(sv.size() - 1) > kSingularCutoff * sv(0)))
    throw NotApplicable("inertia is singular");

  const DynamicsResult d = continuous_dynamics(sys, mode, s, {}, false);
  std::vector<int> all(sys.dofs());
  for (int i = 0; i < sys.dofs(); ++i) all[i] = i;
  const Eigen::MatrixXd a = constraint_matrix(sys, mode, s.q, all);
  const Eigen::VectorXd f = net_force(sys, mode, s.q, s.qd);
  const Eigen::VectorXd rate = constraint_rates(sys, mode, s.q, s.qd);

  const Eigen::LDLT<Eigen::MatrixXd> minv(m);
  const Eigen::VectorXd mf = minv.solve(f);
  Eigen::VectorXd lam = Eigen::VectorXd::Zero(a.rows());
  if (a.rows() > 0) {
    const Eigen::MatrixXd mat = minv.solve(a.transpose());
    const Eigen::MatrixXd schur = a * mat;
    lam = schur.ldlt().solve(a * mf + rate);
  }
  const Eigen::VectorXd qdd = minv.solve(f - a.transpose() * lam);

  EquivalenceReport r;
  const double qscale = std::max({qdd.norm(), mf.norm(), 1e-300});
  r.qdd_deviation = (d.qdd - qdd).norm() / qscale;
  const double lscale = std::max({lam.norm(), f.norm(), 1e-300});
  r.lambda_deviation = lam.size() ? (d.lambda - lam).norm() / lscale : 0.0;
  return r;
}

double cone_value(const MechSystem& sys, ContactMode mode, int k, const Eigen::VectorXd& w) {
  const int pk = mode.position(k);
  if (pk < 0 || pk >= w.size()) throw InternalInconsistency("constraint not in the covector's mode");
  const ConstraintInfo& ci = sys.constraint(k);
  if (ci.kind == ConstraintKind::Normal) return -w(pk);
  const int pp = mode.position(ci.parent);
  if (pp < 0) throw InternalInconsistency("tangential without its normal in mode");
  return ci.mu * -w(pp) - std::abs(w(pk));
}

Taylor cone_series(const MechSystem& sys, ContactMode mode, int k, const TaylorVec& w,
                   const TrendOptions& opt) {
  const int pk = mode.position(k);
  if (pk < 0 || pk >= w.size()) throw InternalInconsistency("constraint not in the covector's mode");
  const ConstraintInfo& ci = sys.constraint(k);
  if (ci.kind == ConstraintKind::Normal) return -w(pk);
  const int pp = mode.position(ci.parent);
  if (pp < 0) throw InternalInconsistency("tangential without its normal in mode");
  const double s = static_cast<double>(static_cast<int>(trend_of_series(w(pk), opt).sign));
  return ci.mu * -w(pp) - s * w(pk);
}

}  // namespace contact_hybrid
