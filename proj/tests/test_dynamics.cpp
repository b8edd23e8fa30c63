#include <doctest.h>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "contact_hybrid/dynamics.hpp"
#include "contact_hybrid/errors.hpp"
#include "contact_hybrid/models.hpp"
#include "contact_hybrid/scenarios.hpp"
#include "random_systems.hpp"

using namespace contact_hybrid;
using testsupport::Rng;

namespace {

ContactMode all_of(const MechSystem& sys) {
  ContactMode m;
  for (int k = 0; k < sys.num_constraints(); ++k) m = m.with(k);
  return m;
}

}  // namespace

TEST_CASE("free ball falls at g") {
  auto sys = make_ball("ball", {});
  const State s{Eigen::Vector2d(0.0, 1.0), Eigen::Vector2d(0.3, 0.0)};
  const DynamicsResult d = continuous_dynamics(*sys, ContactMode{}, s);
  CHECK(d.qdd(0) == doctest::Approx(0.0));
  CHECK(d.qdd(1) == doctest::Approx(-9.81));
  CHECK(d.lambda.size() == 0);
}

TEST_CASE("resting point mass carries its weight") {
  BallParams p;
  p.mass = 2.5;
  auto sys = make_ball("ball", p);
  const State s{Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(0.0, 0.0)};
  const DynamicsResult d = continuous_dynamics(*sys, ContactMode{0}, s);
  CHECK(d.qdd.norm() < 1e-12);
  CHECK(cone_value(*sys, ContactMode{0}, 0, d.lambda) == doctest::Approx(2.5 * 9.81));
  CHECK(dynamics_equivalence_check(*sys, ContactMode{0}, s).max() < 1e-12);
}

TEST_CASE("rocking block pivoting on a corner matches a rigid pendulum") {
  RockingBlockParams p;
  auto sys = make_rocking_block(p);
  const double w = p.width, h = p.height, m = p.mass, g = p.gravity;
  const double ic = p.effective_inertia() + m * (w * w + h * h) / 4.0;
  Rng rng(3);
  std::uniform_real_distribution<double> ang(0.0, 0.4), vel(-2.0, 2.0);
  for (int i = 0; i < 10; ++i) {
    const double th = ang(rng), om = vel(rng);
    // Center of mass relative to the left corner pinned at (-w/2, 0).
    const double rx = 0.5 * w * std::cos(th) - 0.5 * h * std::sin(th);
    const double rz = 0.5 * w * std::sin(th) + 0.5 * h * std::cos(th);
    const State s{Eigen::Vector3d(-0.5 * w + rx, rz, th), Eigen::Vector3d(-om * rz, om * rx, om)};
    const DynamicsResult d = continuous_dynamics(*sys, ContactMode{0, 1}, s);
    const double al = -m * g * rx / ic;
    CHECK(d.qdd(2) == doctest::Approx(al).epsilon(1e-6));
    CHECK(d.qdd(0) == doctest::Approx(-al * rz - om * om * rx).epsilon(1e-6));
    CHECK(d.qdd(1) == doctest::Approx(al * rx - om * om * rz).epsilon(1e-6));
  }
}

TEST_CASE("massless legs make the explicit form inapplicable") {
  const BuiltScenario b = build_scenario(default_config("planar_hexapod"));
  CHECK_THROWS_AS(dynamics_equivalence_check(*b.system, b.mode, b.state), NotApplicable);
}

TEST_CASE("cone values") {
  BallParams p;
  p.friction = 0.8;
  auto sys = make_ball("ball", p);
  const ContactMode both{0, 1};
  CHECK(cone_value(*sys, both, 0, Eigen::Vector2d(-5.0, 0.0)) == doctest::Approx(5.0));
  CHECK(cone_value(*sys, both, 1, Eigen::Vector2d(-1.0, 0.5)) == doctest::Approx(0.3));
  CHECK(cone_value(*sys, both, 1, Eigen::Vector2d(-1.0, -0.5)) == doctest::Approx(0.3));
  CHECK(cone_value(*sys, both, 0, Eigen::Vector2d::Zero()) == 0.0);
  CHECK(cone_value(*sys, both, 1, Eigen::Vector2d::Zero()) == 0.0);
}

TEST_CASE("property: random invertible systems against the explicit inverse-inertia form") {
  Rng rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    const auto data = testsupport::random_system_data(rng, true);
    auto sys = testsupport::make_random_system(data);
    const int n = sys->dofs();
    const State s{0.3 * testsupport::gaussian_vec(rng, n), testsupport::gaussian_vec(rng, n)};
    const ContactMode mode = all_of(*sys);
    const DynamicsResult d = continuous_dynamics(*sys, mode, s, {}, false);

    Eigen::MatrixXd a(data.a.rows(), n);
    Eigen::VectorXd rate(data.a.rows());
    for (int k = 0; k < data.a.rows(); ++k) {
      a.row(k) = data.a.row(k) + (data.h[k] * s.q).transpose();
      rate(k) = s.qd.dot(data.h[k] * s.qd);
    }
    const Eigen::VectorXd f = data.f0 + data.damping * s.qd;
    const Eigen::LLT<Eigen::MatrixXd> llt(data.m);
    const Eigen::MatrixXd sch = a * llt.solve(a.transpose());
    const Eigen::VectorXd lam = sch.llt().solve(a * llt.solve(f) + rate);
    const Eigen::VectorXd qdd = llt.solve(f - a.transpose() * lam);

    const double qs = std::max(1.0, qdd.norm()), ls = std::max(1.0, lam.norm());
    CHECK((d.qdd - qdd).norm() / qs < 1e-8);
    CHECK((d.lambda - lam).norm() / ls < 1e-8);
    CHECK((a * d.qdd + rate).norm() < 1e-9 * std::max(1.0, a.norm() * qs));
    CHECK(dynamics_equivalence_check(*sys, mode, s).max() < 1e-8);
  }
}

TEST_CASE("property: catalog models have consistent rows, rates and inertia") {
  Rng rng(8);
  for (const auto& spec : scenario_catalog()) {
    CAPTURE(spec.name);
    const BuiltScenario b = build_scenario(default_config(spec.name));
    const MechSystem& sys = *b.system;
    const int n = sys.dofs();
    for (int trial = 0; trial < 5; ++trial) {
      const Eigen::VectorXd q = b.state.q + 0.05 * testsupport::gaussian_vec(rng, n);
      const Eigen::VectorXd qd = testsupport::gaussian_vec(rng, n);
      const Eigen::MatrixXd m = sys.inertia(q);
      CHECK((m - m.transpose()).norm() <= 1e-12 * std::max(1.0, m.norm()));
      CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues().minCoeff() >=
            -1e-12 * std::max(1.0, m.norm()));
      for (int k = 0; k < sys.num_constraints(); ++k) {
        CAPTURE(k);
        const int par = sys.parent(k);
        CHECK(sys.is_normal(par));
        const Eigen::RowVectorXd row = sys.constraint_row(k, q);
        const double hstep = 1e-6;
        if (sys.is_normal(k)) {
          Eigen::RowVectorXd fd(n);
          for (int i = 0; i < n; ++i) {
            Eigen::VectorXd qp = q, qm = q;
            qp(i) += hstep;
            qm(i) -= hstep;
            fd(i) = (sys.constraint_value(k, qp) - sys.constraint_value(k, qm)) / (2 * hstep);
          }
          CHECK((fd - row).norm() <= 1e-6 * std::max(1.0, row.norm()));
        }
        // d/dt (A_k qd) at fixed qd equals the rate term.
        const double fdr = (sys.constraint_row(k, Eigen::VectorXd(q + hstep * qd)).dot(qd) -
                            sys.constraint_row(k, Eigen::VectorXd(q - hstep * qd)).dot(qd)) /
                           (2 * hstep);
        CHECK(std::abs(fdr - sys.constraint_rate(k, q, qd)) <=
              1e-6 * std::max(1.0, std::abs(fdr)));
      }
    }
  }
}

TEST_CASE("mode validity requires the parent normal") {
  auto sys = make_sliding_point({});
  CHECK(sys->valid_mode(ContactMode{0, 1}));
  CHECK_FALSE(sys->valid_mode(ContactMode{1}));
  CHECK(sys->mode_id(ContactMode{0, 1, 2}) == "n1+t1+n2");
  CHECK(sys->parse_mode("n1+t1+n2") == ContactMode{0, 1, 2});
  CHECK(sys->mode_id(ContactMode{}) == "none");
}
