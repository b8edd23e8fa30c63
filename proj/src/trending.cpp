#include "contact_hybrid/trending.hpp"

#include <cmath>
#include <string>

#include "contact_hybrid/errors.hpp"

namespace contact_hybrid {

const char* to_string(Trend t) {
  switch (t) {
    case Trend::Negative:
      return "negative";
    case Trend::Zero:
      return "zero";
    case Trend::Positive:
      return "positive";
  }
  return "?";
}

TaylorVec flow_series(const SeriesVectorFn& f, const Eigen::VectorXd& x0, int order) {
  if (order < 0 || order > kTaylorOrder)
    throw DerivativeUnavailable("flow order " + std::to_string(order) + " exceeds capacity " +
                                std::to_string(kTaylorOrder));
  TaylorVec x(x0.size());
  for (Eigen::Index i = 0; i < x0.size(); ++i) x(i) = Taylor(x0(i));
  for (int n = 0; n < order; ++n) {
    const TaylorVec fx = f(x);
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i)[n + 1] = fx(i)[n] / (n + 1);
  }
  return x;
}

std::vector<double> series_derivatives(const Taylor& s, int order) {
  std::vector<double> d(order + 1);
  double fact = 1.0;
  for (int j = 0; j <= order; ++j) {
    if (j > 0) fact *= j;
    d[j] = fact * s[j];
  }
  return d;
}

std::vector<double> lie_derivatives(const SeriesScalarFn& h, const SeriesVectorFn& f,
                                    const Eigen::VectorXd& x0, int order) {
  return series_derivatives(h(flow_series(f, x0, order)), order);
}

TrendSign trend_from_derivatives(std::span<const double> derivs, const TrendOptions& opt) {
  double tpow = 1.0;
  const int n = static_cast<int>(derivs.size());
  for (int j = 0; j < n; ++j) {
    const double d = derivs[j] * tpow / opt.value_scale;
    if (d > opt.tol) return {Trend::Positive, j};
    if (d < -opt.tol) return {Trend::Negative, j};
    tpow *= opt.time_scale;
  }
  return {Trend::Zero, n - 1};
}

TrendSign trend_of_series(const Taylor& s, const TrendOptions& opt) {
  if (opt.max_order < 0 || opt.max_order > kTaylorOrder)
    throw DerivativeUnavailable("requested order " + std::to_string(opt.max_order));
  const auto d = series_derivatives(s, opt.max_order);
  return trend_from_derivatives(d, opt);
}

TrendSign trend_sign(const SeriesScalarFn& h, const SeriesVectorFn& f, const Eigen::VectorXd& x0,
                     const TrendOptions& opt) {
  if (opt.max_order < 0 || opt.max_order > kTaylorOrder)
    throw DerivativeUnavailable("requested order " + std::to_string(opt.max_order));
  return trend_from_derivatives(lie_derivatives(h, f, x0, opt.max_order), opt);
}

Trend trend_sign_flow_probe(const ScalarFn& h, const VectorFn& f, const Eigen::VectorXd& x0,
                            double horizon, int steps, double tol) {
  const double dt = horizon / steps;
  Eigen::VectorXd x = x0;
  for (int k = 0; k <= steps; ++k) {
    const double v = h(x);
    if (v > tol) return Trend::Positive;
    if (v < -tol) return Trend::Negative;
    if (k == steps) break;
    const Eigen::VectorXd k1 = f(x);
    const Eigen::VectorXd k2 = f(x + 0.5 * dt * k1);
    const Eigen::VectorXd k3 = f(x + 0.5 * dt * k2);
    const Eigen::VectorXd k4 = f(x + dt * k3);
    x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  throw Inconclusive("no sample left the tolerance band");
}

}  // namespace contact_hybrid
