#pragma once

// Sign of a scalar function along a flow, decided lexicographically on its
// Lie derivatives [h, L_F h, L_F^2 h, ...].

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "contact_hybrid/taylor.hpp"

namespace contact_hybrid {

enum class Trend { Negative = -1, Zero = 0, Positive = 1 };

struct TrendSign {
  Trend sign = Trend::Zero;
  // Order of the first derivative outside the tolerance band; equals the
  // maximum order examined when the sign is Zero.
  int decided_at_order = 0;
};

struct TrendOptions {
  int max_order = 4;
  double tol = 1e-9;
  double value_scale = 1.0;  // units of h
  double time_scale = 1.0;   // derivative j is normalized by time_scale^j / value_scale
};

inline bool trending_nonnegative(const TrendSign& s) { return s.sign != Trend::Negative; }
inline bool trending_nonpositive(const TrendSign& s) { return s.sign != Trend::Positive; }
inline TrendSign negate(TrendSign s) {
  s.sign = static_cast<Trend>(-static_cast<int>(s.sign));
  return s;
}
const char* to_string(Trend t);

using SeriesScalarFn = std::function<Taylor(const TaylorVec&)>;
using SeriesVectorFn = std::function<TaylorVec(const TaylorVec&)>;
using ScalarFn = std::function<double(const Eigen::VectorXd&)>;
using VectorFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Taylor expansion x(t) of the flow of f through x0, through t^order.
TaylorVec flow_series(const SeriesVectorFn& f, const Eigen::VectorXd& x0, int order);

// L_F^j h (x0) for j = 0..order.
std::vector<double> lie_derivatives(const SeriesScalarFn& h, const SeriesVectorFn& f,
                                    const Eigen::VectorXd& x0, int order);

// Time derivatives j! * s[j] of a series already expressed along a flow.
std::vector<double> series_derivatives(const Taylor& s, int order);

TrendSign trend_from_derivatives(std::span<const double> derivs, const TrendOptions& opt);
TrendSign trend_of_series(const Taylor& s, const TrendOptions& opt);

// Throws DerivativeUnavailable if opt.max_order exceeds kTaylorOrder.
TrendSign trend_sign(const SeriesScalarFn& h, const SeriesVectorFn& f, const Eigen::VectorXd& x0,
                     const TrendOptions& opt = {});

// Integrates f forward with fixed RK4 steps and reports the sign of the first
// sample with |h| > tol. Throws Inconclusive when every sample is inside the band.
Trend trend_sign_flow_probe(const ScalarFn& h, const VectorFn& f, const Eigen::VectorXd& x0,
                            double horizon, int steps, double tol = 1e-9);

}  // namespace contact_hybrid
