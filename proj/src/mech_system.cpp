#include "contact_hybrid/mech_system.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "contact_hybrid/errors.hpp"

namespace contact_hybrid {

namespace {

TaylorVec line(const Eigen::VectorXd& q, const Eigen::VectorXd& dir) {
  TaylorVec x(q.size());
  for (Eigen::Index i = 0; i < q.size(); ++i) x(i) = Taylor::variable(q(i), dir(i));
  return x;
}

Eigen::MatrixXd first_coefficient(const MatX<Taylor>& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = m(i, j)[1];
  return out;
}

}  // namespace

MechSystem::MechSystem(SystemLayout layout) : layout_(std::move(layout)) {
  const int c = num_constraints();
  if (c > ContactMode::kMaxConstraints) throw ValidationError("too many constraints");
  if (layout_.coordinate_names.empty())
    for (int i = 0; i < layout_.dofs; ++i) layout_.coordinate_names.push_back("q" + std::to_string(i));
  if (static_cast<int>(layout_.coordinate_names.size()) != layout_.dofs)
    throw ValidationError("coordinate_names has wrong length");
  std::vector<int> contact_number(c, 0);
  int next = 0;
  for (int k = 0; k < c; ++k) {
    auto& ci = layout_.constraints[k];
    if (ci.kind == ConstraintKind::Normal) {
      ci.parent = k;
      contact_number[k] = ++next;
    } else {
      if (ci.parent < 0 || ci.parent >= c ||
          layout_.constraints[ci.parent].kind != ConstraintKind::Normal)
        throw ValidationError("tangential constraint '" + ci.name +
                              "' does not reference a normal constraint");
      if (ci.mu < 0.0) throw ValidationError("negative friction coefficient on " + ci.name);
    }
  }
  labels_.resize(c);
  for (int k = 0; k < c; ++k) {
    const auto& ci = layout_.constraints[k];
    labels_[k] = (ci.kind == ConstraintKind::Normal ? "n" : "t") +
                 std::to_string(contact_number[ci.parent]);
  }
  for (const auto& mc : layout_.massless) {
    if (mc.coord < 0 || mc.coord >= layout_.dofs) throw ValidationError("bad massless coordinate");
    for (int r : mc.restraints)
      if (r < 0 || r >= c) throw ValidationError("bad massless restraint index");
  }
}

ContactMode MechSystem::all_normals() const {
  ContactMode m;
  for (int k = 0; k < num_constraints(); ++k)
    if (is_normal(k)) m = m.with(k);
  return m;
}

ContactMode MechSystem::normals(ContactMode mode) const { return mode & all_normals(); }

ContactMode MechSystem::tangentials(ContactMode mode) const { return mode - all_normals(); }

ContactMode MechSystem::contact_group(int n) const {
  ContactMode g;
  for (int k = 0; k < num_constraints(); ++k)
    if (parent(k) == parent(n)) g = g.with(k);
  return g;
}

bool MechSystem::valid_mode(ContactMode mode) const {
  if (num_constraints() < 64 && (mode.bits() >> num_constraints()) != 0) return false;
  for (int k : mode.indices())
    if (!mode.contains(parent(k))) return false;
  return true;
}

std::string MechSystem::mode_id(ContactMode mode) const {
  if (mode.empty()) return "none";
  std::string s;
  for (int k : mode.indices()) {
    if (!s.empty()) s += '+';
    s += labels_.at(k);
  }
  return s;
}

std::string MechSystem::mode_names(ContactMode mode) const {
  std::string s;
  for (int k : mode.indices()) {
    if (!s.empty()) s += '+';
    s += constraint(k).name;
  }
  return s;
}

ContactMode MechSystem::parse_mode(const std::string& id) const {
  ContactMode m;
  if (id.empty() || id == "none") return m;
  std::stringstream ss(id);
  std::string tok;
  while (std::getline(ss, tok, '+')) {
    int found = -1;
    for (int k = 0; k < num_constraints(); ++k)
      if (labels_[k] == tok || constraint(k).name == tok) found = k;
    if (found < 0) throw ValidationError("unknown constraint '" + tok + "' in mode '" + id + "'");
    m = m.with(found);
  }
  return m;
}

std::vector<int> MechSystem::free_coordinates(ContactMode mode) const {
  std::vector<int> out;
  for (const auto& mc : layout_.massless) {
    const bool restrained = std::any_of(mc.restraints.begin(), mc.restraints.end(),
                                        [&](int r) { return mode.contains(r); });
    if (!restrained) out.push_back(mc.coord);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> MechSystem::active_coordinates(ContactMode mode) const {
  const auto free = free_coordinates(mode);
  std::vector<int> out;
  for (int i = 0; i < dofs(); ++i)
    if (!std::binary_search(free.begin(), free.end(), i)) out.push_back(i);
  return out;
}

Eigen::VectorXd MechSystem::free_accel(const Eigen::VectorXd& q, const Eigen::VectorXd&) const {
  return Eigen::VectorXd::Zero(q.size());
}

TaylorVec MechSystem::free_accel(const TaylorVec& q, const TaylorVec&) const {
  return TaylorVec::Constant(q.size(), Taylor(0.0));
}

double MechSystem::potential_energy(const Eigen::VectorXd&) const { return 0.0; }

double MechSystem::kinetic_energy(const Eigen::VectorXd& q, const Eigen::VectorXd& qd) const {
  return 0.5 * qd.dot(inertia(q) * qd);
}

Eigen::VectorXd christoffel_coriolis(const MechSystem& sys, const Eigen::VectorXd& q,
                                     const Eigen::VectorXd& qd) {
  const Eigen::Index n = q.size();
  const Eigen::MatrixXd mdot = first_coefficient(sys.inertia(line(q, qd)));
  Eigen::VectorXd grad(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::MatrixXd dm = first_coefficient(sys.inertia(line(q, Eigen::VectorXd::Unit(n, i))));
    grad(i) = qd.dot(dm * qd);
  }
  return mdot * qd - 0.5 * grad;
}

ModelDerivativeCheck check_model_derivatives(const MechSystem& sys, const Eigen::VectorXd& q,
                                             const Eigen::VectorXd& qd) {
  ModelDerivativeCheck out;
  const Eigen::Index n = q.size();
  const double h = 1e-6 * sys.scales().length;
  for (int k = 0; k < sys.num_constraints(); ++k) {
    const Eigen::RowVectorXd row = sys.constraint_row(k, q);
    const double scale = std::max(row.norm(), 1e-12);
    if (sys.is_normal(k)) {
      Eigen::RowVectorXd fd(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd qp = q, qm = q;
        qp(i) += h;
        qm(i) -= h;
        fd(i) = (sys.constraint_value(k, qp) - sys.constraint_value(k, qm)) / (2.0 * h);
      }
      out.gradient = std::max(out.gradient, (fd - row).norm() / scale);
    }
    const RowX<Taylor> rs = sys.constraint_row(k, line(q, qd));
    double oracle = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) oracle += rs(i)[1] * qd(i);
    const double rate = sys.constraint_rate(k, q, qd);
    const double rscale = std::max({std::abs(oracle), scale * qd.squaredNorm() / sys.scales().length, 1e-12});
    out.rate = std::max(out.rate, std::abs(rate - oracle) / rscale);
  }
  return out;
}

}  // namespace contact_hybrid
