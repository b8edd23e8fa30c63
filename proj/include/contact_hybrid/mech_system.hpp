#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "contact_hybrid/contact_mode.hpp"
#include "contact_hybrid/taylor.hpp"

namespace contact_hybrid {

enum class ConstraintKind { Normal, Tangential };

struct ConstraintInfo {
  std::string name;
  ConstraintKind kind = ConstraintKind::Normal;
  int parent = -1;   // normal index this tangential belongs to; self for normals
  double mu = 0.0;   // friction coefficient of a tangential
  // Contact on a massless link: the normal and its tangentials enter and
  // leave a mode together.
  bool whole_contact = false;
};

// Characteristic magnitudes used to normalize tolerances.
struct Scales {
  double length = 1.0;
  double time = 1.0;
  double mass = 1.0;

  double velocity() const { return length / time; }
  double acceleration() const { return length / (time * time); }
  double force() const { return mass * acceleration(); }
  double impulse() const { return mass * velocity(); }
  double energy() const { return mass * velocity() * velocity(); }
};

struct Tolerances {
  double domain = 1e-7;      // times length scale
  double vel = 1e-8;         // times velocity scale
  double lin = 1e-10;        // relative
  double trend = 1e-9;       // normalized Lie derivatives
  int trend_order = 4;
  double event_time = 1e-10; // times time scale
};

// Coordinate with zero inertia, released from the constrained dynamics when
// none of its restraining constraints is active.
struct MasslessCoordinate {
  int coord = -1;
  std::vector<int> restraints;
};

struct SystemLayout {
  std::string name;
  int dofs = 0;
  std::vector<std::string> coordinate_names;
  std::vector<ConstraintInfo> constraints;
  std::vector<MasslessCoordinate> massless;
  Scales scales;
};

class MechSystem {
 public:
  explicit MechSystem(SystemLayout layout);
  virtual ~MechSystem() = default;
  MechSystem(const MechSystem&) = delete;
  MechSystem& operator=(const MechSystem&) = delete;

  const std::string& name() const { return layout_.name; }
  int dofs() const { return layout_.dofs; }
  int num_constraints() const { return static_cast<int>(layout_.constraints.size()); }
  const std::vector<ConstraintInfo>& constraints() const { return layout_.constraints; }
  const ConstraintInfo& constraint(int k) const { return layout_.constraints.at(k); }
  bool is_normal(int k) const { return constraint(k).kind == ConstraintKind::Normal; }
  int parent(int k) const { return constraint(k).parent; }
  const std::vector<std::string>& coordinate_names() const { return layout_.coordinate_names; }
  const std::vector<MasslessCoordinate>& massless() const { return layout_.massless; }
  bool has_massless() const { return !layout_.massless.empty(); }
  const Scales& scales() const { return layout_.scales; }

  ContactMode all_normals() const;
  ContactMode normals(ContactMode mode) const;
  ContactMode tangentials(ContactMode mode) const;
  // Constraints attached to normal n: n itself and its tangentials.
  ContactMode contact_group(int n) const;
  bool valid_mode(ContactMode mode) const;
  // Canonical id such as "n1+t1+n2"; "none" for the empty mode.
  std::string mode_id(ContactMode mode) const;
  // Inverse of mode_id; also accepts constraint names. Throws ValidationError.
  ContactMode parse_mode(const std::string& id) const;
  std::string mode_names(ContactMode mode) const;
  const std::string& label(int k) const { return labels_.at(k); }

  // Coordinates governed by the constrained dynamics in this mode.
  std::vector<int> active_coordinates(ContactMode mode) const;
  // Massless coordinates evolving under free_accel in this mode.
  std::vector<int> free_coordinates(ContactMode mode) const;

  virtual Eigen::MatrixXd inertia(const Eigen::VectorXd& q) const = 0;
  virtual MatX<Taylor> inertia(const TaylorVec& q) const = 0;
  // a_k(q) for normals.
  virtual double constraint_value(int k, const Eigen::VectorXd& q) const = 0;
  virtual Taylor constraint_value(int k, const TaylorVec& q) const = 0;
  virtual Eigen::RowVectorXd constraint_row(int k, const Eigen::VectorXd& q) const = 0;
  virtual RowX<Taylor> constraint_row(int k, const TaylorVec& q) const = 0;
  // (d/dt A_k) qdot.
  virtual double constraint_rate(int k, const Eigen::VectorXd& q,
                                 const Eigen::VectorXd& qd) const = 0;
  virtual Taylor constraint_rate(int k, const TaylorVec& q, const TaylorVec& qd) const = 0;
  virtual Eigen::VectorXd coriolis(const Eigen::VectorXd& q, const Eigen::VectorXd& qd) const = 0;
  virtual TaylorVec coriolis(const TaylorVec& q, const TaylorVec& qd) const = 0;
  virtual Eigen::VectorXd potential(const Eigen::VectorXd& q) const = 0;
  virtual TaylorVec potential(const TaylorVec& q) const = 0;
  virtual Eigen::VectorXd applied(const Eigen::VectorXd& q, const Eigen::VectorXd& qd,
                                  ContactMode mode) const = 0;
  virtual TaylorVec applied(const TaylorVec& q, const TaylorVec& qd, ContactMode mode) const = 0;
  // Accelerations of free massless coordinates; other entries are ignored.
  virtual Eigen::VectorXd free_accel(const Eigen::VectorXd& q, const Eigen::VectorXd& qd) const;
  virtual TaylorVec free_accel(const TaylorVec& q, const TaylorVec& qd) const;

  virtual double potential_energy(const Eigen::VectorXd& q) const;
  double kinetic_energy(const Eigen::VectorXd& q, const Eigen::VectorXd& qd) const;

 private:
  SystemLayout layout_;
  std::vector<std::string> labels_;
};

// Forwards the virtual interface to scalar-generic member templates of Derived:
//   inertia_t, value_t, row_t, rate_t, coriolis_t, potential_t, applied_t, free_accel_t.
template <class Derived>
class Model : public MechSystem {
 public:
  using MechSystem::MechSystem;

  Eigen::MatrixXd inertia(const Eigen::VectorXd& q) const override { return d().inertia_t(q); }
  MatX<Taylor> inertia(const TaylorVec& q) const override { return d().inertia_t(q); }
  double constraint_value(int k, const Eigen::VectorXd& q) const override {
    return d().value_t(k, q);
  }
  Taylor constraint_value(int k, const TaylorVec& q) const override { return d().value_t(k, q); }
  Eigen::RowVectorXd constraint_row(int k, const Eigen::VectorXd& q) const override {
    return d().row_t(k, q);
  }
  RowX<Taylor> constraint_row(int k, const TaylorVec& q) const override {
    return d().row_t(k, q);
  }
  double constraint_rate(int k, const Eigen::VectorXd& q,
                         const Eigen::VectorXd& qd) const override {
    return d().rate_t(k, q, qd);
  }
  Taylor constraint_rate(int k, const TaylorVec& q, const TaylorVec& qd) const override {
    return d().rate_t(k, q, qd);
  }
  Eigen::VectorXd coriolis(const Eigen::VectorXd& q, const Eigen::VectorXd& qd) const override {
    return d().coriolis_t(q, qd);
  }
  TaylorVec coriolis(const TaylorVec& q, const TaylorVec& qd) const override {
    return d().coriolis_t(q, qd);
  }
  Eigen::VectorXd potential(const Eigen::VectorXd& q) const override {
    return d().potential_t(q);
  }
  TaylorVec potential(const TaylorVec& q) const override { return d().potential_t(q); }
  Eigen::VectorXd applied(const Eigen::VectorXd& q, const Eigen::VectorXd& qd,
                          ContactMode mode) const override {
    return d().applied_t(q, qd, mode);
  }
  TaylorVec applied(const TaylorVec& q, const TaylorVec& qd, ContactMode mode) const override {
    return d().applied_t(q, qd, mode);
  }
  Eigen::VectorXd free_accel(const Eigen::VectorXd& q, const Eigen::VectorXd& qd) const override {
    return d().free_accel_t(q, qd);
  }
  TaylorVec free_accel(const TaylorVec& q, const TaylorVec& qd) const override {
    return d().free_accel_t(q, qd);
  }

 protected:
  // Defaults for models without velocity-dependent or free-limb terms.
  template <class T>
  VecX<T> coriolis_t(const VecX<T>& q, const VecX<T>&) const {
    return VecX<T>::Constant(q.size(), T(0.0));
  }
  template <class T>
  VecX<T> applied_t(const VecX<T>& q, const VecX<T>&, ContactMode) const {
    return VecX<T>::Constant(q.size(), T(0.0));
  }
  template <class T>
  VecX<T> free_accel_t(const VecX<T>& q, const VecX<T>&) const {
    return VecX<T>::Constant(q.size(), T(0.0));
  }

 private:
  const Derived& d() const { return static_cast<const Derived&>(*this); }
};

// Coriolis term C(q, qd) qd from Christoffel symbols of the inertia, using
// Taylor directional derivatives of sys.inertia.
Eigen::VectorXd christoffel_coriolis(const MechSystem& sys, const Eigen::VectorXd& q,
                                     const Eigen::VectorXd& qd);

// Largest discrepancy, relative to the row scale, between each normal row and
// the gradient of its constraint function, and between each rate and the
// directional derivative of its row along qd.
struct ModelDerivativeCheck {
  double gradient = 0.0;
  double rate = 0.0;
};
ModelDerivativeCheck check_model_derivatives(const MechSystem& sys, const Eigen::VectorXd& q,
                                             const Eigen::VectorXd& qd);

}  // namespace contact_hybrid
