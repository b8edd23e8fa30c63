#include "random_systems.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace testsupport {

using namespace contact_hybrid;

Eigen::MatrixXd gaussian(Rng& rng, int rows, int cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd out(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) out(i, j) = n(rng);
  return out;
}

Eigen::VectorXd gaussian_vec(Rng& rng, int n) { return gaussian(rng, n, 1); }

Eigen::MatrixXd random_spd(Rng& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian(rng, n, n)).householderQ();
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) d(i) = u(rng);
  Eigen::MatrixXd m = q * d.asDiagonal() * q.transpose();
  return 0.5 * (m + m.transpose());
}

double saddle_condition(const Eigen::MatrixXd& m, const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(m.rows()), c = static_cast<int>(a.rows());
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n + c, n + c);
  b.topLeftCorner(n, n) = m;
  b.topRightCorner(n, c) = a.transpose();
  b.bottomLeftCorner(c, n) = a;
  const Eigen::VectorXd s = Eigen::JacobiSVD<Eigen::MatrixXd>(b).singularValues();
  return s(s.size() - 1) > 0.0 ? s(0) / s(s.size() - 1) : INFINITY;
}

namespace {

Eigen::MatrixXd inertia_with_massless(Rng& rng, int n, int massless) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  m.topLeftCorner(n - massless, n - massless) = random_spd(rng, n - massless);
  return m;
}

}  // namespace

BlockInstance random_block(Rng& rng, int max_dofs, int max_constraints, int max_massless) {
  std::uniform_int_distribution<int> dofs(2, max_dofs);
  while (true) {
    BlockInstance b;
    const int n = dofs(rng);
    const int c = std::uniform_int_distribution<int>(1, std::min(max_constraints, n))(rng);
    b.massless = std::uniform_int_distribution<int>(0, std::min({max_massless, c, n - 1}))(rng);
    b.m = inertia_with_massless(rng, n, b.massless);
    b.a = gaussian(rng, c, n);
    if (saddle_condition(b.m, b.a) < kMaxSaddleCondition) return b;
  }
}

RandomSystemData random_system_data(Rng& rng, bool invertible_m, int max_dofs, int max_constraints) {
  std::uniform_int_distribution<int> dofs(2, max_dofs);
  while (true) {
    RandomSystemData d;
    const int n = dofs(rng);
    const int c = std::uniform_int_distribution<int>(1, std::min(max_constraints, n))(rng);
    d.massless = invertible_m ? 0 : std::uniform_int_distribution<int>(0, std::min({2, c, n - 1}))(rng);
    d.m = inertia_with_massless(rng, n, d.massless);
    d.a = gaussian(rng, c, n);
    for (int k = 0; k < c; ++k) {
      const Eigen::MatrixXd g = gaussian(rng, n, n);
      d.h.push_back(0.5 * (g + g.transpose()));
    }
    d.f0 = gaussian_vec(rng, n);
    d.damping = 0.1 * gaussian(rng, n, n);
    if (saddle_condition(d.m, d.a) < kMaxSaddleCondition) return d;
  }
}

namespace {

class RandomSystem : public Model<RandomSystem> {
 public:
  explicit RandomSystem(const RandomSystemData& d) : Model(layout(d)), d_(d) {}

  static SystemLayout layout(const RandomSystemData& d) {
    SystemLayout l;
    l.name = "random";
    l.dofs = static_cast<int>(d.m.rows());
    for (int i = 0; i < l.dofs; ++i) l.coordinate_names.push_back("q" + std::to_string(i));
    std::vector<int> all;
    for (int k = 0; k < d.a.rows(); ++k) {
      ConstraintInfo c;
      c.name = "c" + std::to_string(k);
      l.constraints.push_back(c);
      all.push_back(k);
    }
    for (int i = 0; i < d.massless; ++i) l.massless.push_back({l.dofs - 1 - i, all});
    return l;
  }

  template <class T>
  MatX<T> inertia_t(const VecX<T>&) const {
    return d_.m.template cast<T>();
  }
  template <class T>
  T value_t(int k, const VecX<T>& q) const {
    const VecX<T> hq = d_.h[k].template cast<T>() * q;
    return (d_.a.row(k).template cast<T>() * q)(0) + T(0.5) * q.dot(hq);
  }
  template <class T>
  RowX<T> row_t(int k, const VecX<T>& q) const {
    return d_.a.row(k).template cast<T>() + (d_.h[k].template cast<T>() * q).transpose();
  }
  template <class T>
  T rate_t(int k, const VecX<T>&, const VecX<T>& qd) const {
    return qd.dot(VecX<T>(d_.h[k].template cast<T>() * qd));
  }
  template <class T>
  VecX<T> potential_t(const VecX<T>& q) const {
    return VecX<T>::Constant(q.size(), T(0.0));
  }
  template <class T>
  VecX<T> applied_t(const VecX<T>&, const VecX<T>& qd, ContactMode) const {
    return VecX<T>(d_.f0.template cast<T>() + d_.damping.template cast<T>() * qd);
  }
  using Model::coriolis_t;
  using Model::free_accel_t;

 private:
  RandomSystemData d_;
};

}  // namespace

std::shared_ptr<MechSystem> make_random_system(const RandomSystemData& d) {
  return std::make_shared<RandomSystem>(d);
}

}  // namespace testsupport
