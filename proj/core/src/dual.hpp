#pragma once

#include <Eigen/Core>
#include <cmath>

namespace wacal::detail {

/// First-order forward-mode scalar with a dynamic partial vector.
/// An empty partial vector means "constant" (all partials zero); this lets
/// templated projection code construct constants without knowing the
/// number of active variables.
struct Dual {
  double v = 0.0;
  Eigen::VectorXd d;

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT: implicit by design
  Dual(double value, Eigen::VectorXd deriv) : v(value), d(std::move(deriv)) {}

  static Dual variable(double value, int n, int index) {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    d(index) = 1.0;
    return {value, std::move(d)};
  }

  Dual& operator+=(const Dual& o) { return *this = *this + o; }
  Dual& operator-=(const Dual& o) { return *this = *this - o; }
  Dual& operator*=(const Dual& o) { return *this = *this * o; }
  Dual& operator/=(const Dual& o) { return *this = *this / o; }

  friend Eigen::VectorXd combine(const Dual& a, double ca, const Dual& b,
                                 double cb) {
    if (a.d.size() == 0 && b.d.size() == 0) return {};
    if (a.d.size() == 0) return cb * b.d;
    if (b.d.size() == 0) return ca * a.d;
    return ca * a.d + cb * b.d;
  }

  friend Dual operator+(const Dual& a, const Dual& b) {
    return {a.v + b.v, combine(a, 1.0, b, 1.0)};
  }
  friend Dual operator-(const Dual& a, const Dual& b) {
    return {a.v - b.v, combine(a, 1.0, b, -1.0)};
  }
  friend Dual operator-(const Dual& a) { return {-a.v, combine(a, -1.0, a, 0.0)}; }
  friend Dual operator*(const Dual& a, const Dual& b) {
    return {a.v * b.v, combine(a, b.v, b, a.v)};
  }
  friend Dual operator/(const Dual& a, const Dual& b) {
    const double inv = 1.0 / b.v;
    return {a.v * inv, combine(a, inv, b, -a.v * inv * inv)};
  }

  friend bool operator<(const Dual& a, const Dual& b) { return a.v < b.v; }
  friend bool operator>(const Dual& a, const Dual& b) { return a.v > b.v; }
  friend bool operator<=(const Dual& a, const Dual& b) { return a.v <= b.v; }
  friend bool operator>=(const Dual& a, const Dual& b) { return a.v >= b.v; }
};

inline Dual chain(double value, const Dual& x, double dvalue_dx) {
  return {value, combine(x, dvalue_dx, x, 0.0)};
}

inline Dual sqrt(const Dual& x) {
  const double s = std::sqrt(x.v);
  return chain(s, x, 0.5 / s);
}
inline Dual sin(const Dual& x) { return chain(std::sin(x.v), x, std::cos(x.v)); }
inline Dual cos(const Dual& x) { return chain(std::cos(x.v), x, -std::sin(x.v)); }
inline Dual tan(const Dual& x) {
  const double t = std::tan(x.v);
  return chain(t, x, 1.0 + t * t);
}
inline Dual atan(const Dual& x) {
  return chain(std::atan(x.v), x, 1.0 / (1.0 + x.v * x.v));
}
inline Dual atan2(const Dual& y, const Dual& x) {
  const double n = x.v * x.v + y.v * y.v;
  return {std::atan2(y.v, x.v), combine(y, x.v / n, x, -y.v / n)};
}
inline Dual abs(const Dual& x) { return x.v < 0 ? -x : x; }

inline double value_of(double x) { return x; }
inline double value_of(const Dual& x) { return x.v; }

}  // namespace wacal::detail
