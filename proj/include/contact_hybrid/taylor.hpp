#pragma once

// Truncated Taylor series in one variable with a fixed number of terms.
// Models are written once as templates on the scalar type and evaluated either
// on doubles or on Taylor series of the state along a flow, which yields Lie
// derivatives of any model quantity to order kTaylorOrder.

#include <array>
#include <cmath>
#include <ostream>

#include <Eigen/Core>

namespace contact_hybrid {

inline constexpr int kTaylorOrder = 8;
inline constexpr int kTaylorTerms = kTaylorOrder + 1;

class Taylor {
 public:
  Taylor() { c_.fill(0.0); }
  Taylor(double v) {  // NOLINT(google-explicit-constructor)
    c_.fill(0.0);
    c_[0] = v;
  }

  static Taylor variable(double v, double slope = 1.0) {
    Taylor t(v);
    t.c_[1] = slope;
    return t;
  }

  double& operator[](int i) { return c_[i]; }
  double operator[](int i) const { return c_[i]; }
  double value() const { return c_[0]; }

  Taylor& operator+=(const Taylor& o) {
    for (int i = 0; i < kTaylorTerms; ++i) c_[i] += o.c_[i];
    return *this;
  }
  Taylor& operator-=(const Taylor& o) {
    for (int i = 0; i < kTaylorTerms; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Taylor& operator*=(const Taylor& o) {
    *this = *this * o;
    return *this;
  }
  Taylor& operator/=(const Taylor& o) {
    *this = *this / o;
    return *this;
  }

  friend Taylor operator-(const Taylor& a) {
    Taylor r;
    for (int i = 0; i < kTaylorTerms; ++i) r.c_[i] = -a.c_[i];
    return r;
  }
  friend Taylor operator+(Taylor a, const Taylor& b) { return a += b; }
  friend Taylor operator-(Taylor a, const Taylor& b) { return a -= b; }
  friend Taylor operator*(const Taylor& a, const Taylor& b) {
    Taylor r;
    for (int n = 0; n < kTaylorTerms; ++n) {
      double s = 0.0;
      for (int k = 0; k <= n; ++k) s += a.c_[k] * b.c_[n - k];
      r.c_[n] = s;
    }
    return r;
  }
  friend Taylor operator/(const Taylor& a, const Taylor& b) {
    Taylor r;
    for (int n = 0; n < kTaylorTerms; ++n) {
      double s = a.c_[n];
      for (int k = 1; k <= n; ++k) s -= b.c_[k] * r.c_[n - k];
      r.c_[n] = s / b.c_[0];
    }
    return r;
  }

  friend bool operator==(const Taylor& a, const Taylor& b) { return a.c_ == b.c_; }
  friend bool operator!=(const Taylor& a, const Taylor& b) { return !(a == b); }

  friend Taylor sqrt(const Taylor& a) {
    Taylor r;
    r.c_[0] = std::sqrt(a.c_[0]);
    for (int n = 1; n < kTaylorTerms; ++n) {
      double s = a.c_[n];
      for (int k = 1; k < n; ++k) s -= r.c_[k] * r.c_[n - k];
      r.c_[n] = s / (2.0 * r.c_[0]);
    }
    return r;
  }

  friend void sincos(const Taylor& a, Taylor& s, Taylor& c) {
    s = Taylor();
    c = Taylor();
    s.c_[0] = std::sin(a.c_[0]);
    c.c_[0] = std::cos(a.c_[0]);
    for (int n = 1; n < kTaylorTerms; ++n) {
      double ss = 0.0;
      double cc = 0.0;
      for (int k = 1; k <= n; ++k) {
        ss += k * a.c_[k] * c.c_[n - k];
        cc -= k * a.c_[k] * s.c_[n - k];
      }
      s.c_[n] = ss / n;
      c.c_[n] = cc / n;
    }
  }
  friend Taylor sin(const Taylor& a) {
    Taylor s, c;
    sincos(a, s, c);
    return s;
  }
  friend Taylor cos(const Taylor& a) {
    Taylor s, c;
    sincos(a, s, c);
    return c;
  }
  friend Taylor exp(const Taylor& a) {
    Taylor r;
    r.c_[0] = std::exp(a.c_[0]);
    for (int n = 1; n < kTaylorTerms; ++n) {
      double s = 0.0;
      for (int k = 1; k <= n; ++k) s += k * a.c_[k] * r.c_[n - k];
      r.c_[n] = s / n;
    }
    return r;
  }

  friend std::ostream& operator<<(std::ostream& os, const Taylor& t) {
    os << '[';
    for (int i = 0; i < kTaylorTerms; ++i) os << (i ? ", " : "") << t.c_[i];
    return os << ']';
  }

 private:
  std::array<double, kTaylorTerms> c_;
};

inline double scalar_value(double x) { return x; }
inline double scalar_value(const Taylor& x) { return x.value(); }

template <class T>
using VecX = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <class T>
using MatX = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using RowX = Eigen::Matrix<T, 1, Eigen::Dynamic>;

using TaylorVec = VecX<Taylor>;

}  // namespace contact_hybrid

namespace Eigen {
template <>
struct NumTraits<contact_hybrid::Taylor> : NumTraits<double> {
  using Real = contact_hybrid::Taylor;
  using NonInteger = contact_hybrid::Taylor;
  using Nested = contact_hybrid::Taylor;
  using Literal = double;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = contact_hybrid::kTaylorTerms,
    AddCost = contact_hybrid::kTaylorTerms,
    MulCost = contact_hybrid::kTaylorTerms * contact_hybrid::kTaylorTerms
  };
};
}  // namespace Eigen
