#include "contact_hybrid/models.hpp"

#include <cmath>

#include "contact_hybrid/errors.hpp"

namespace contact_hybrid {

namespace {

using std::cos;
using std::sin;

template <class T>
T ipow(const T& x, int p) {
  T r(1.0);
  for (int i = 0; i < p; ++i) r = r * x;
  return r;
}

template <class T>
VecX<T> zeros(Eigen::Index n) {
  return VecX<T>::Constant(n, T(0.0));
}

template <class T>
RowX<T> zero_row(Eigen::Index n) {
  return RowX<T>::Constant(n, T(0.0));
}

template <class T>
MatX<T> diagonal(std::initializer_list<double> d) {
  const Eigen::Index n = static_cast<Eigen::Index>(d.size());
  MatX<T> m = MatX<T>::Constant(n, n, T(0.0));
  Eigen::Index i = 0;
  for (double v : d) {
    m(i, i) = T(v);
    ++i;
  }
  return m;
}

ConstraintInfo normal(const std::string& name, bool whole = false) {
  ConstraintInfo c;
  c.name = name;
  c.kind = ConstraintKind::Normal;
  c.whole_contact = whole;
  return c;
}

ConstraintInfo tangential(const std::string& name, int parent, double mu) {
  ConstraintInfo c;
  c.name = name;
  c.kind = ConstraintKind::Tangential;
  c.parent = parent;
  c.mu = mu;
  return c;
}

class CurvePoint : public Model<CurvePoint> {
 public:
  CurvePoint(const std::string& name, const CurveParams& p)
      : Model(SystemLayout{name, 2, {"x", "y"}, {normal("curve_n")}, {}, {}}), p_(p) {
    if (p.power < 1) throw ValidationError("curve power must be at least 1");
  }

  template <class T>
  MatX<T> inertia_t(const VecX<T>&) const {
    return diagonal<T>({1.0, 1.0});
  }
  template <class T>
  T value_t(int, const VecX<T>& q) const {
    return p_.sign * ipow(q(0), p_.power) + p_.coeff * q(1);
  }
  template <class T>
  RowX<T> row_t(int, const VecX<T>& q) const {
    RowX<T> r(2);
    r(0) = p_.sign * p_.power * ipow(q(0), p_.power - 1);
    r(1) = T(p_.coeff);
    return r;
  }
  template <class T>
  T rate_t(int, const VecX<T>& q, const VecX<T>& qd) const {
    if (p_.power < 2) return T(0.0);
    return p_.sign * p_.power * (p_.power - 1) * ipow(q(0), p_.power - 2) * qd(0) * qd(0);
  }
  template <class T>
  VecX<T> potential_t(const VecX<T>& q) const {
    return zeros<T>(q.size());
  }
  using Model::applied_t;
  using Model::coriolis_t;
  using Model::free_accel_t;

 private:
  CurveParams p_;
};

class Ball : public Model<Ball> {
 public:
  Ball(const std::string& name, const BallParams& p)
      : Model(layout(name, p)), p_(p) {}

  static SystemLayout layout(const std::string& name, const BallParams& p) {
    if (!(p.mass > 0.0) || !(p.gravity >= 0.0))
      throw ValidationError("ball: mass must be positive and gravity non-negative");
    SystemLayout l;
    l.name = name;
    l.dofs = 2;
    l.coordinate_names = {"x", "z"};
    const std::string surf = p.ceiling ? "ceiling" : "floor";
    l.constraints.push_back(normal(surf + "_n"));
    if (p.friction > 0.0) l.constraints.push_back(tangential(surf + "_t", 0, p.friction));
    l.scales = {1.0, std::sqrt(1.0 / std::max(p.gravity, 1e-12)), p.mass};
    return l;
  }

  template <class T>
  MatX<T> inertia_t(const VecX<T>&) const {
    return diagonal<T>({p_.mass, p_.mass});
  }
  template <class T>
  T value_t(int, const VecX<T>& q) const {
    return p_.ceiling ? T(p_.ceiling_height) - q(1) : q(1);
  }
  template <class T>
  RowX<T> row_t(int k, const VecX<T>&) const {
    RowX<T> r = zero_row<T>(2);
    if (k == 0)
      r(1) = T(p_.ceiling ? -1.0 : 1.0);
    else
      r(0) = T(1.0);
    return r;
  }
  template <class T>
  T rate_t(int, const VecX<T>&, const VecX<T>&) const {
    return T(0.0);
  }
  template <class T>
  VecX<T> potential_t(const VecX<T>& q) const {
    VecX<T> n = zeros<T>(q.size());
    n(1) = T(p_.mass * p_.gravity);
    return n;
  }
  double potential_energy(const Eigen::VectorXd& q) const override {
    return p_.mass * p_.gravity * q(1);
  }
  using Model::applied_t;
  using Model::coriolis_t;
  using Model::free_accel_t;

 private:
  BallParams p_;
};

class SlidingPoint : public Model<SlidingPoint> {
 public:
  explicit SlidingPoint(const SlidingPointParams& p) : Model(layout(p)), p_(p) {}

  static SystemLayout layout(const SlidingPointParams& p) {
    SystemLayout l;
    l.name = "sliding_point";
    l.dofs = 2;
    l.coordinate_names = {"x", "y"};
    l.constraints = {normal("ground_n"), tangential("ground_t", 0, p.mu_ground), normal("hill_n"),
                     tangential("hill_t", 2, p.mu_hill)};
    l.scales = {1.0, std::sqrt(1.0 / p.gravity), p.mass};
    return l;
  }

  template <class T>
  MatX<T> inertia_t(const VecX<T>&) const {
    return diagonal<T>({p_.mass, p_.mass});
  }
  template <class T>
  T value_t(int k, const VecX<T>& q) const {
    if (k == 0) return q(1);
    return q(1) * std::cos(p_.slope) - (q(0) - p_.hill_x) * std::sin(p_.slope);
  }
  template <class T>
  RowX<T> row_t(int k, const VecX<T>&) const {
    RowX<T> r(2);
    const double c = std::cos(p_.slope), s = std::sin(p_.slope);
    switch (k) {
      case 0:
        r << T(0.0), T(1.0);
        break;
      case 1:
        r << T(1.0), T(0.0);
        break;
      case 2:
        r << T(-s), T(c);
        break;
      default:
        r << T(c), T(s);
        break;
    }
    return r;
  }
  template <class T>
  T rate_t(int, const VecX<T>&, const VecX<T>&) const {
    return T(0.0);
  }
  template <class T>
  VecX<T> potential_t(const VecX<T>& q) const {
    VecX<T> n = zeros<T>(q.size());
    n(1) = T(p_.mass * p_.gravity);
    return n;
  }
  double potential_energy(const Eigen::VectorXd& q) const override {
    return p_.mass * p_.gravity * q(1);
  }
  using Model::applied_t;
  using Model::coriolis_t;
  using Model::free_accel_t;

 private:
  SlidingPointParams p_;
};

class RockingBlock : public Model<RockingBlock> {
 public:
  explicit RockingBlock(const RockingBlockParams& p) : Model(layout(p)), p_(p), inertia_(p.effective_inertia()) {}

  static SystemLayout layout(const RockingBlockParams& p) {
    SystemLayout l;
    l.name = "rocking_block";
    l.dofs = 3;
    l.coordinate_names = {"x", "z", "theta"};
    l.constraints = {normal("l_n"), tangential("l_t", 0, p.friction), normal("r_n"),
                     tangential("r_t", 2, p.friction)};
    l.scales = {p.height, std::sqrt(p.height / p.gravity), p.mass};
    return l;
  }

  // Body-frame offset of the corner used by constraint k.
  double ox(int k) const { return k < 2 ? -0.5 * p_.width : 0.5 * p_.width; }
  double oy() const { return -0.5 * p_.height; }

  template <class T>
  MatX<T> inertia_t(const VecX<T>&) const {
    return diagonal<T>({p_.mass, p_.mass, inertia_});
  }
  template <class T>
  T value_t(int k, const VecX<T>& q) const {
    return q(1) + sin(q(2)) * ox(k) + cos(q(2)) * oy();
  }
  template <class T>
  RowX<T> row_t(int k, const VecX<T>& q) const {
    const T s = sin(q(2)), c = cos(q(2));
    RowX<T> r(3);
    if (k % 2 == 0)
      r << T(0.0), T(1.0), c * ox(k) - s * oy();
    else
      r << T(1.0), T(0.0), -s * ox(k) - c * oy();
    return r;
  }
  template <class T>
  T rate_t(int k, const VecX<T>& q, const VecX<T>& qd) const {
    const T s = sin(q(2)), c = cos(q(2));
    const T w2 = qd(2) * qd(2);
    if (k % 2 == 0) return (-s * ox(k) - c * oy()) * w2;
    return (-c * ox(k) + s * oy()) * w2;
  }
  template <class T>
  VecX<T> potential_t(const VecX<T>& q) const {
    VecX<T> n = zeros<T>(q.size());
    n(1) = T(p_.mass * p_.gravity);
    return n;
  }
  double potential_energy(const Eigen::VectorXd& q) const override {
    return p_.mass * p_.gravity * q(1);
  }
  using Model::applied_t;
  using Model::coriolis_t;
  using Model::free_accel_t;

 private:
  RockingBlockParams p_;
  double inertia_;
};

class PlanarHexapod : public Model<PlanarHexapod> {
 public:
  explicit PlanarHexapod(const HexapodParams& p) : Model(layout(p)), p_(p) {}

  static SystemLayout layout(const HexapodParams& p) {
    SystemLayout l;
    l.name = "planar_hexapod";
    l.dofs = 5;
    l.coordinate_names = {"x", "z", "phi", "theta_f", "theta_r"};
    l.constraints = {normal("f_n", true), tangential("f_t", 0, p.friction), normal("r_n", true),
                     tangential("r_t", 2, p.friction), normal("nose_n"), normal("tail_n")};
    l.massless = {{3, {0, 1}}, {4, {2, 3}}};
    l.scales = {p.leg_length, std::sqrt(p.leg_length / p.gravity), p.body_mass};
    return l;
  }

  double hip(int k) const { return (k < 2 || k == 4) ? p_.hip_offset : -p_.hip_offset; }
  int leg(int k) const { return k < 2 ? 3 : 4; }
  static bool body(int k) { return k >= 4; }

  template <class T>
  MatX<T> inertia_t(const VecX<T>&) const {
    return diagonal<T>({p_.body_mass, p_.body_mass, p_.body_inertia, 0.0, 0.0});
  }
  template <class T>
  T value_t(int k, const VecX<T>& q) const {
    if (body(k)) return q(1) + sin(q(2)) * hip(k);
    return q(1) + sin(q(2)) * hip(k) - p_.leg_length * cos(q(2) + q(leg(k)));
  }
  template <class T>
  RowX<T> row_t(int k, const VecX<T>& q) const {
    const T sp = sin(q(2)), cp = cos(q(2));
    const T psi = q(2) + q(leg(k));
    const T ss = sin(psi), cs = cos(psi);
    RowX<T> r = zero_row<T>(5);
    if (body(k)) {
      r(1) = T(1.0);
      r(2) = cp * hip(k);
    } else if (k % 2 == 0) {
      r(1) = T(1.0);
      r(2) = cp * hip(k) + p_.leg_length * ss;
      r(leg(k)) = p_.leg_length * ss;
    } else {
      r(0) = T(1.0);
      r(2) = -sp * hip(k) + p_.leg_length * cs;
      r(leg(k)) = p_.leg_length * cs;
    }
    return r;
  }
  template <class T>
  T rate_t(int k, const VecX<T>& q, const VecX<T>& qd) const {
    const T sp = sin(q(2)), cp = cos(q(2));
    const T psi = q(2) + q(leg(k));
    const T dpsi = qd(2) + qd(leg(k));
    const T ss = sin(psi), cs = cos(psi);
    const T w2 = qd(2) * qd(2);
    if (body(k)) return -sp * hip(k) * w2;
    if (k % 2 == 0) return -sp * hip(k) * w2 + p_.leg_length * cs * dpsi * dpsi;
    return -cp * hip(k) * w2 - p_.leg_length * ss * dpsi * dpsi;
  }
  template <class T>
  VecX<T> potential_t(const VecX<T>& q) const {
    VecX<T> n = zeros<T>(q.size());
    n(1) = T(p_.body_mass * p_.gravity);
    return n;
  }
  template <class T>
  VecX<T> applied_t(const VecX<T>& q, const VecX<T>& qd, ContactMode) const {
    VecX<T> u = zeros<T>(q.size());
    for (int i : {3, 4}) u(i) = p_.kappa_p * p_.kappa_g * (T(1.0) - p_.kappa_g * qd(i));
    return u;
  }
  template <class T>
  VecX<T> free_accel_t(const VecX<T>& q, const VecX<T>& qd) const {
    VecX<T> a = zeros<T>(q.size());
    for (int i : {3, 4})
      a(i) = p_.swing_gain * (T(1.0 / p_.kappa_g) - qd(i)) + p_.retract_gain * sin(q(2) + q(i));
    return a;
  }
  double potential_energy(const Eigen::VectorXd& q) const override {
    return p_.body_mass * p_.gravity * q(1);
  }
  using Model::coriolis_t;

 private:
  HexapodParams p_;
};

}  // namespace

std::shared_ptr<MechSystem> make_curve_point(const std::string& name, const CurveParams& p) {
  return std::make_shared<CurvePoint>(name, p);
}

std::shared_ptr<MechSystem> make_ball(const std::string& name, const BallParams& p) {
  return std::make_shared<Ball>(name, p);
}

std::shared_ptr<MechSystem> make_sliding_point(const SlidingPointParams& p) {
  if (!(p.mass > 0.0) || !(p.gravity > 0.0)) throw ValidationError("sliding_point: mass and gravity must be positive");
  if (!(p.slope > 0.0 && p.slope < M_PI / 2)) throw ValidationError("sliding_point: slope must lie in (0, pi/2)");
  return std::make_shared<SlidingPoint>(p);
}

std::shared_ptr<MechSystem> make_rocking_block(const RockingBlockParams& p) {
  if (!(p.height > 0.0 && p.width > 0.0 && p.mass > 0.0 && p.gravity > 0.0))
    throw ValidationError("rocking_block: height, width, mass and gravity must be positive");
  if (p.inertia < 0.0) throw ValidationError("rocking_block: inertia must be positive");
  return std::make_shared<RockingBlock>(p);
}

std::shared_ptr<MechSystem> make_planar_hexapod(const HexapodParams& p) {
  if (!(p.body_mass > 0.0 && p.body_inertia > 0.0 && p.leg_length > 0.0 && p.hip_offset > 0.0 &&
        p.kappa_p > 0.0 && p.kappa_g > 0.0 && p.swing_gain > 0.0))
    throw ValidationError("planar_hexapod: masses, lengths and motor constants must be positive");
  return std::make_shared<PlanarHexapod>(p);
}

}  // namespace contact_hybrid
