#include "contact_hybrid/integrator.hpp"

#include <algorithm>
#include <cmath>

namespace contact_hybrid {

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

}  // namespace

Dopri5::Dopri5(Rhs f, Dopri5Options opt) : f_(std::move(f)), opt_(std::move(opt)) {}

void Dopri5::reset(double t0, const Eigen::VectorXd& x0) {
  t_ = t_prev_ = t0;
  x_ = x_prev_ = x0;
  if (opt_.atol.size() != x0.size()) opt_.atol = Eigen::VectorXd::Constant(x0.size(), 1e-12);
  k1_ = f_(t_, x_);
  ++evals_;
  h_ = opt_.h_init;
  r1_ = x0;
  r2_ = r3_ = r4_ = r5_ = Eigen::VectorXd::Zero(x0.size());
}

bool Dopri5::step(double t_limit) {
  while (true) {
    double h = std::min(h_, opt_.h_max);
    bool clipped = false;
    if (t_ + h >= t_limit) {
      h = t_limit - t_;
      clipped = true;
    }
    if (h < opt_.h_min && !clipped) return false;
    const Eigen::VectorXd& y = x_;
    const Eigen::VectorXd k2 = f_(t_ + c2 * h, y + h * (a21 * k1_));
    const Eigen::VectorXd k3 = f_(t_ + c3 * h, y + h * (a31 * k1_ + a32 * k2));
    const Eigen::VectorXd k4 = f_(t_ + c4 * h, y + h * (a41 * k1_ + a42 * k2 + a43 * k3));
    const Eigen::VectorXd k5 =
        f_(t_ + c5 * h, y + h * (a51 * k1_ + a52 * k2 + a53 * k3 + a54 * k4));
    const Eigen::VectorXd k6 =
        f_(t_ + h, y + h * (a61 * k1_ + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Eigen::VectorXd y1 =
        y + h * (a71 * k1_ + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const Eigen::VectorXd k7 = f_(t_ + h, y1);
    evals_ += 6;
    const Eigen::VectorXd err =
        h * (e1 * k1_ + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double sc = opt_.atol(i) + opt_.rtol * std::max(std::abs(y(i)), std::abs(y1(i)));
      sum += (err(i) / sc) * (err(i) / sc);
    }
    const double norm = y.size() ? std::sqrt(sum / y.size()) : 0.0;
    const double fac = std::clamp(0.9 * std::pow(std::max(norm, 1e-10), -0.2), 0.2, 5.0);
    if (norm <= 1.0 || h <= opt_.h_min) {
      r1_ = y;
      r2_ = y1 - y;
      r3_ = h * k1_ - r2_;
      r4_ = r2_ - h * k7 - r3_;
      r5_ = h * (d1 * k1_ + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      t_prev_ = t_;
      x_prev_ = x_;
      t_ = clipped ? t_limit : t_ + h;
      x_ = y1;
      k1_ = k7;
      if (!clipped || fac < 1.0) h_ = h * fac;
      return true;
    }
    h_ = h * std::max(fac, 0.1);
  }
}

Eigen::VectorXd Dopri5::dense(double t) const {
  const double h = t_ - t_prev_;
  if (h <= 0.0) return x_;
  const double th = (t - t_prev_) / h;
  const double th1 = 1.0 - th;
  return r1_ + th * (r2_ + th1 * (r3_ + th * (r4_ + th1 * r5_)));
}

}  // namespace contact_hybrid
