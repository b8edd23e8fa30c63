#pragma once

#include <functional>

#include <Eigen/Core>

namespace contact_hybrid {

struct Dopri5Options {
  double rtol = 1e-10;
  Eigen::VectorXd atol;  // per component; empty means 1e-12
  double h_init = 1e-4;
  double h_max = 1e-2;
  double h_min = 1e-15;
};

// Dormand-Prince 5(4) with the fourth-order continuous extension.
class Dopri5 {
 public:
  using Rhs = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;

  Dopri5(Rhs f, Dopri5Options opt);

  void reset(double t0, const Eigen::VectorXd& x0);
  // Takes one accepted step that ends no later than t_limit. Returns false if
  // the step size underflows h_min.
  bool step(double t_limit);

  double t() const { return t_; }
  double t_prev() const { return t_prev_; }
  const Eigen::VectorXd& x() const { return x_; }
  const Eigen::VectorXd& x_prev() const { return x_prev_; }
  // Dense output on [t_prev, t].
  Eigen::VectorXd dense(double t) const;
  long rhs_evaluations() const { return evals_; }
  void set_step(double h) { h_ = h; }

 private:
  Rhs f_;
  Dopri5Options opt_;
  double t_ = 0.0;
  double t_prev_ = 0.0;
  double h_ = 0.0;
  Eigen::VectorXd x_, x_prev_, k1_;
  Eigen::VectorXd r1_, r2_, r3_, r4_, r5_;
  long evals_ = 0;
};

}  // namespace contact_hybrid
