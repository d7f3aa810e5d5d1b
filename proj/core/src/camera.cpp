#include "wacal/camera.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "dual.hpp"

namespace wacal {
namespace {

using detail::Dual;
using detail::value_of;

// denominator / depth validity threshold, normalized units
constexpr double kEps = 1e-9;

template <class T>
struct Pix2 {
  T u, v;
};

// ---------------------------------------------------------------------------
// distortion building blocks

// Brown-Conrady distortion with two radial terms, applied to normalized
// coordinates: (x, y) -> (x d(r) + tangential).
template <class T>
void radtan_distort(const T& k1, const T& k2, const T& p1, const T& p2,
                    const T& x, const T& y, T& xd, T& yd) {
  const T r2 = x * x + y * y;
  const T radial = T(1.0) + k1 * r2 + k2 * r2 * r2;
  xd = x * radial + T(2.0) * p1 * x * y + p2 * (r2 + T(2.0) * x * x);
  yd = y * radial + p1 * (r2 + T(2.0) * y * y) + T(2.0) * p2 * x * y;
}

// Backward radial-tangential map: distorted normalized -> undistorted
// normalized, using the distorted radius r_d inside the polynomial.
template <class T>
void radtan_backward_map(const std::vector<T>& p, const T& xd, const T& yd,
                         T& xn, T& yn) {
  radtan_distort(p[4], p[5], p[6], p[7], xd, yd, xn, yn);
}

// 2x2 Jacobian of a normalized-plane map at (x, y), via duals.
template <class F>
Eigen::Matrix2d map_jacobian(const F& f, double x, double y) {
  Dual xs = Dual::variable(x, 2, 0);
  Dual ys = Dual::variable(y, 2, 1);
  Dual u, v;
  f(xs, ys, u, v);
  Eigen::Matrix2d J;
  J << u.d(0), u.d(1), v.d(0), v.d(1);
  return J;
}

// Solves f(x, y) = (tx, ty) by 2D Newton. Returns false on non-convergence.
template <class F>
bool newton2d(const F& f, double tx, double ty, double& x, double& y) {
  for (int it = 0; it < 30; ++it) {
    double fx, fy;
    f(x, y, fx, fy);
    const double rx = fx - tx, ry = fy - ty;
    if (rx * rx + ry * ry < 1e-28) return true;
    const Eigen::Matrix2d J = map_jacobian(f, x, y);
    const double det = J(0, 0) * J(1, 1) - J(0, 1) * J(1, 0);
    if (std::abs(det) < 1e-15) return false;
    x -= (J(1, 1) * rx - J(0, 1) * ry) / det;
    y -= (-J(1, 0) * rx + J(0, 0) * ry) / det;
  }
  double fx, fy;
  f(x, y, fx, fy);
  const double rx = fx - tx, ry = fy - ty;
  return rx * rx + ry * ry < 1e-20;
}

// ---------------------------------------------------------------------------
// forward projections, templated over the scalar

template <class T>
bool project_pinhole_family(ModelKind kind, const std::vector<T>& p, const T& X,
                            const T& Y, const T& Z, Pix2<T>& out) {
  const double rho =
      std::sqrt(value_of(X) * value_of(X) + value_of(Y) * value_of(Y) +
                value_of(Z) * value_of(Z));
  if (value_of(Z) <= kEps * rho) return false;
  const T xn = X / Z;
  const T yn = Y / Z;
  T xd = xn, yd = yn;
  switch (kind) {
    case ModelKind::Pinhole:
      break;
    case ModelKind::RadTan:
      radtan_distort(p[4], p[5], p[6], p[7], xn, yn, xd, yd);
      break;
    case ModelKind::ThinPrism: {
      const T r2 = xn * xn + yn * yn;
      const T& k1 = p[4];
      const T& p1 = p[5];
      const T& p2 = p[6];
      xd = xn * (T(1.0) + k1 * r2) + T(2.0) * p1 * xn * yn +
           p2 * (r2 + T(2.0) * xn * xn) + p[7] * r2;
      yd = yn * (T(1.0) + k1 * r2) + p1 * (r2 + T(2.0) * yn * yn) +
           T(2.0) * p2 * xn * yn + p[8] * r2;
      if (p.size() == 11) {
        // quartic prism terms: du = s1 r^2 + s2 r^4, dv = s3 r^2 + s4 r^4
        xd = xn * (T(1.0) + k1 * r2) + T(2.0) * p1 * xn * yn +
             p2 * (r2 + T(2.0) * xn * xn) + p[7] * r2 + p[8] * r2 * r2;
        yd = yn * (T(1.0) + k1 * r2) + p1 * (r2 + T(2.0) * yn * yn) +
             T(2.0) * p2 * xn * yn + p[9] * r2 + p[10] * r2 * r2;
      }
      break;
    }
    case ModelKind::Division: {
      // root of k1 r_n r_d^2 - r_d + r_n = 0 continuous at k1 -> 0:
      // r_d = 2 r_n / (1 + sqrt(1 - 4 k1 r_n^2)), so x_d = x_n * 2/(1+sqrt).
      const T rn2 = xn * xn + yn * yn;
      const T disc = T(1.0) - T(4.0) * p[4] * rn2;
      if (value_of(disc) < 0.0) return false;
      const T scale = T(2.0) / (T(1.0) + sqrt(disc));
      xd = xn * scale;
      yd = yn * scale;
      break;
    }
    case ModelKind::Rational: {
      // invert the backward radial map r_d * N(r_d)/D(r_d) = r_n
      const T rnT = sqrt(xn * xn + yn * yn);
      const double rn = value_of(rnT);
      if (rn < 1e-14) break;  // on axis, x_d = x_n
      auto g_double = [&](double r) {
        const double r2 = r * r;
        const double num = 1.0 + value_of(p[4]) * r2 + value_of(p[5]) * r2 * r2 +
                           value_of(p[6]) * r2 * r2 * r2;
        const double den = 1.0 + value_of(p[7]) * r2 + value_of(p[8]) * r2 * r2 +
                           value_of(p[9]) * r2 * r2 * r2;
        return r * num / den - rn;
      };
      double rd = rn;
      bool ok = false;
      for (int it = 0; it < 50; ++it) {
        const double f0 = g_double(rd);
        if (std::abs(f0) < 1e-15) {
          ok = true;
          break;
        }
        const double h = 1e-7 * (1.0 + std::abs(rd));
        const double dg = (g_double(rd + h) - g_double(rd - h)) / (2.0 * h);
        if (std::abs(dg) < 1e-14) break;
        rd -= f0 / dg;
        if (!(rd == rd) || rd < 0.0) return false;
      }
      if (!ok && std::abs(g_double(rd)) > 1e-10) return false;
      const double h = 1e-7 * (1.0 + std::abs(rd));
      const double dg = (g_double(rd + h) - g_double(rd - h)) / (2.0 * h);
      // one Newton step in the outer scalar; at g ~ 0 this carries the exact
      // implicit derivative of the root w.r.t. params and the point
      const T rdc = T(rd);
      const T r2 = rdc * rdc;
      const T num = T(1.0) + p[4] * r2 + p[5] * r2 * r2 + p[6] * r2 * r2 * r2;
      const T den = T(1.0) + p[7] * r2 + p[8] * r2 * r2 + p[9] * r2 * r2 * r2;
      const T gT = rdc * num / den - rnT;
      const T rdT = rdc - gT / T(dg);
      const T scale = rdT / rnT;
      xd = xn * scale;
      yd = yn * scale;
      break;
    }
    default:
      return false;
  }
  out.u = p[0] * xd + p[2];
  out.v = p[1] * yd + p[3];
  return true;
}

template <class T>
bool project_radtan_backward(const std::vector<T>& p, const T& X, const T& Y,
                             const T& Z, Pix2<T>& out) {
  const double rho =
      std::sqrt(value_of(X) * value_of(X) + value_of(Y) * value_of(Y) +
                value_of(Z) * value_of(Z));
  if (value_of(Z) <= kEps * rho) return false;
  const T xn = X / Z;
  const T yn = Y / Z;
  std::vector<double> pd(p.size());
  for (size_t i = 0; i < p.size(); ++i) pd[i] = value_of(p[i]);
  auto bmap = [&pd](auto x, auto y, auto& u, auto& v) {
    using S = std::decay_t<decltype(x)>;
    std::vector<S> ps(pd.begin(), pd.end());
    radtan_backward_map(ps, x, y, u, v);
  };
  double xd = value_of(xn), yd = value_of(yn);
  if (!newton2d(bmap, value_of(xn), value_of(yn), xd, yd)) return false;
  // outer-scalar polish step carrying the implicit derivatives
  const Eigen::Matrix2d J = map_jacobian(bmap, xd, yd);
  const double det = J(0, 0) * J(1, 1) - J(0, 1) * J(1, 0);
  if (std::abs(det) < 1e-15) return false;
  T bx, by;
  radtan_backward_map(p, T(xd), T(yd), bx, by);
  const T rx = bx - xn, ry = by - yn;
  const T xdT = T(xd) - (T(J(1, 1)) * rx - T(J(0, 1)) * ry) / T(det);
  const T ydT = T(yd) - (T(-J(1, 0)) * rx + T(J(0, 0)) * ry) / T(det);
  out.u = p[0] * xdT + p[2];
  out.v = p[1] * ydT + p[3];
  return true;
}

template <class T>
bool project_kb8(const std::vector<T>& p, const T& X, const T& Y, const T& Z,
                 double theta_max, Pix2<T>& out) {
  const T rc2 = X * X + Y * Y;
  const double rc = std::sqrt(value_of(rc2));
  const double z = value_of(Z);
  if (rc < 1e-10 * std::max(1.0, std::abs(z))) {
    if (z <= 0.0) return false;
    out.u = p[0] * X / Z + p[2];
    out.v = p[1] * Y / Z + p[3];
    return true;
  }
  const T rcT = sqrt(rc2);
  const T theta = atan2(rcT, Z);
  if (value_of(theta) > theta_max) return false;
  const T t2 = theta * theta;
  const T d = theta * (T(1.0) + t2 * (p[4] + t2 * (p[5] + t2 * (p[6] + t2 * p[7]))));
  out.u = p[0] * d * X / rcT + p[2];
  out.v = p[1] * d * Y / rcT + p[3];
  return true;
}

template <class T>
bool project_scaramuzza(const std::vector<T>& p, const T& X, const T& Y,
                        const T& Z, Pix2<T>& out) {
  // p = [a0 a2 a3 a4 cx cy c d e]
  const double a0 = value_of(p[0]), a2 = value_of(p[1]), a3 = value_of(p[2]),
               a4 = value_of(p[3]);
  const T rc2 = X * X + Y * Y;
  const double rc = std::sqrt(value_of(rc2));
  const double z = value_of(Z);
  if (rc < 1e-12 * std::max(1.0, std::abs(z))) {
    if (a0 * z <= 0.0) return false;
    out.u = p[4];
    out.v = p[5];
    return true;
  }
  const double m = z / rc;
  // smallest positive real root of a4 r^4 + a3 r^3 + a2 r^2 - m r + a0 = 0
  Eigen::VectorXd coef(5);  // ascending
  coef << a0, -m, a2, a3, a4;
  int deg = 4;
  while (deg > 0 && std::abs(coef(deg)) < 1e-300) --deg;
  if (deg < 1) return false;
  double best = -1.0;
  if (deg == 1) {
    const double r = -coef(0) / coef(1);
    if (r > 0) best = r;
  } else {
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
    for (int i = 0; i < deg - 1; ++i) comp(i + 1, i) = 1.0;
    for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -coef(i) / coef(deg);
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, /*computeEigenvectors=*/false);
    for (int i = 0; i < deg; ++i) {
      const std::complex<double> r = es.eigenvalues()(i);
      if (std::abs(r.imag()) < 1e-8 * (1.0 + std::abs(r.real())) &&
          r.real() > 1e-12) {
        if (best < 0 || r.real() < best) best = r.real();
      }
    }
  }
  if (best < 0) return false;
  // Newton polish on the quartic
  auto f = [&](double r) {
    return a0 + r * (-m + r * (a2 + r * (a3 + r * a4)));
  };
  auto fp = [&](double r) { return -m + r * (2 * a2 + r * (3 * a3 + r * 4 * a4)); };
  // The companion matrix is badly scaled when a4 is tiny, so polish until
  // the step stalls rather than a fixed count.
  double rho = best;
  for (int it = 0; it < 25; ++it) {
    const double d = fp(rho);
    if (std::abs(d) < 1e-14) break;
    const double step = f(rho) / d;
    rho -= step;
    if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(rho))) break;
  }
  const double dfp = fp(rho);
  if (std::abs(dfp) < 1e-12) return false;
  // outer-scalar polish for implicit derivatives
  const T rcT = sqrt(rc2);
  const T rhoc = T(rho);
  const T fT = p[0] + rhoc * rhoc * (p[1] + rhoc * (p[2] + rhoc * p[3])) -
               (Z / rcT) * rhoc;
  const T rhoT = rhoc - fT / T(dfp);
  const T uh = X / rcT * rhoT;
  const T vh = Y / rcT * rhoT;
  out.u = p[6] * uh + p[7] * vh + p[4];
  out.v = p[8] * uh + vh + p[5];
  return true;
}

template <class T>
bool project_fov(const std::vector<T>& p, const T& X, const T& Y, const T& Z,
                 Pix2<T>& out) {
  const double w = value_of(p[4]);
  const double rho =
      std::sqrt(value_of(X) * value_of(X) + value_of(Y) * value_of(Y) +
                value_of(Z) * value_of(Z));
  if (w < 1e-8) {
    if (value_of(Z) <= kEps * rho) return false;
    out.u = p[0] * X / Z + p[2];
    out.v = p[1] * Y / Z + p[3];
    return true;
  }
  const T ru2 = X * X + Y * Y;
  const double ru = std::sqrt(value_of(ru2));
  const double z = value_of(Z);
  if (ru < 1e-10 * std::max(1.0, std::abs(z))) {
    if (z <= 0.0) return false;
    const T s = T(2.0) * tan(p[4] / T(2.0)) / (p[4] * Z);
    out.u = p[0] * X * s + p[2];
    out.v = p[1] * Y * s + p[3];
    return true;
  }
  const T ruT = sqrt(ru2);
  const T rd = atan2(T(2.0) * ruT * tan(p[4] / T(2.0)), Z) / p[4];
  out.u = p[0] * X * rd / ruT + p[2];
  out.v = p[1] * Y * rd / ruT + p[3];
  return true;
}

// Usenko validity margin for the unified-model family.
inline double ucm_w(double alpha) {
  return alpha <= 0.5 ? alpha / (1.0 - alpha) : (1.0 - alpha) / alpha;
}

template <class T>
bool project_ucm_core(const T& gx, const T& gy, const T& cx, const T& cy,
                      double xi, const T& xiT, const T& X, const T& Y,
                      const T& Z, Pix2<T>& out) {
  const T rho = sqrt(X * X + Y * Y + Z * Z);
  const double w = xi <= 0.0 ? 0.0 : (xi <= 1.0 ? xi : 1.0 / xi);
  if (value_of(Z) <= -w * value_of(rho)) return false;
  const T denom = xiT * rho + Z;
  if (value_of(denom) <= kEps * value_of(rho)) return false;
  out.u = gx * X / denom + cx;
  out.v = gy * Y / denom + cy;
  return true;
}

template <class T>
bool project_ucm_alpha(const std::vector<T>& p, const T& X, const T& Y,
                       const T& Z, Pix2<T>& out) {
  const double alpha = value_of(p[4]);
  const T rho = sqrt(X * X + Y * Y + Z * Z);
  if (value_of(Z) <= -ucm_w(alpha) * value_of(rho)) return false;
  const T denom = p[4] * rho + (T(1.0) - p[4]) * Z;
  if (value_of(denom) <= kEps * value_of(rho)) return false;
  out.u = p[0] * X / denom + p[2];
  out.v = p[1] * Y / denom + p[3];
  return true;
}

template <class T>
bool project_eucm(const std::vector<T>& p, const T& X, const T& Y, const T& Z,
                  Pix2<T>& out) {
  const double alpha = value_of(p[4]);
  const T rho = sqrt(p[5] * (X * X + Y * Y) + Z * Z);
  if (value_of(Z) <= -ucm_w(alpha) * value_of(rho)) return false;
  const T denom = p[4] * rho + (T(1.0) - p[4]) * Z;
  if (value_of(denom) <= kEps * value_of(rho)) return false;
  out.u = p[0] * X / denom + p[2];
  out.v = p[1] * Y / denom + p[3];
  return true;
}

template <class T>
bool project_ds(const std::vector<T>& p, const T& X, const T& Y, const T& Z,
                Pix2<T>& out) {
  const double xi = value_of(p[4]);
  const double alpha = value_of(p[5]);
  const T d1 = sqrt(X * X + Y * Y + Z * Z);
  const double w1 = ucm_w(alpha);
  const double w2 = (w1 + xi) / std::sqrt(2.0 * w1 * xi + xi * xi + 1.0);
  if (value_of(Z) <= -w2 * value_of(d1)) return false;
  const T z1 = p[4] * d1 + Z;
  const T d2 = sqrt(X * X + Y * Y + z1 * z1);
  const T denom = p[5] * d2 + (T(1.0) - p[5]) * z1;
  if (value_of(denom) <= kEps * value_of(d1)) return false;
  out.u = p[0] * X / denom + p[2];
  out.v = p[1] * Y / denom + p[3];
  return true;
}

template <class T>
bool project_mei(const std::vector<T>& p, const T& X, const T& Y, const T& Z,
                 Pix2<T>& out) {
  // p = [gx gy cx cy xi k1 k2 k3 p1 p2 s]
  const double xi = value_of(p[4]);
  const T rho = sqrt(X * X + Y * Y + Z * Z);
  const double w = xi <= 0.0 ? 0.0 : (xi <= 1.0 ? xi : 1.0 / xi);
  if (value_of(Z) <= -w * value_of(rho)) return false;
  const T denom = Z + p[4] * rho;
  if (value_of(denom) <= kEps * value_of(rho)) return false;
  const T xn = X / denom;
  const T yn = Y / denom;
  const T r2 = xn * xn + yn * yn;
  const T d = T(1.0) + r2 * (p[5] + r2 * (p[6] + r2 * p[7]));
  const T xd = xn * d + T(2.0) * p[8] * xn * yn + p[9] * (r2 + T(2.0) * xn * xn);
  const T yd = yn * d + p[8] * (r2 + T(2.0) * yn * yn) + T(2.0) * p[9] * xn * yn;
  out.u = p[0] * (xd + p[10] * yd) + p[2];
  out.v = p[1] * yd + p[3];
  return true;
}

template <class T>
bool project_impl(const CameraSpec& spec, const std::vector<T>& p, const T& X,
                  const T& Y, const T& Z, Pix2<T>& out) {
  switch (spec.kind) {
    case ModelKind::Pinhole:
    case ModelKind::RadTan:
    case ModelKind::ThinPrism:
    case ModelKind::Division:
    case ModelKind::Rational:
      return project_pinhole_family(spec.kind, p, X, Y, Z, out);
    case ModelKind::RadTanBackward:
      return project_radtan_backward(p, X, Y, Z, out);
    case ModelKind::KB8:
      return project_kb8(p, X, Y, Z, spec.theta_max, out);
    case ModelKind::Scaramuzza:
      return project_scaramuzza(p, X, Y, Z, out);
    case ModelKind::FOV:
      return project_fov(p, X, Y, Z, out);
    case ModelKind::UCM:
      return project_ucm_core(p[0], p[1], p[2], p[3], value_of(p[4]), p[4], X,
                              Y, Z, out);
    case ModelKind::UCMAlpha:
      return project_ucm_alpha(p, X, Y, Z, out);
    case ModelKind::EUCM:
      return project_eucm(p, X, Y, Z, out);
    case ModelKind::DS:
      return project_ds(p, X, Y, Z, out);
    case ModelKind::Mei:
      return project_mei(p, X, Y, Z, out);
  }
  return false;
}

std::vector<double> params_as_doubles(const CameraSpec& spec) {
  return {spec.params.data(), spec.params.data() + spec.params.size()};
}

}  // namespace

// ---------------------------------------------------------------------------

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Pinhole: return "pinhole";
    case ModelKind::RadTan: return "radtan";
    case ModelKind::RadTanBackward: return "radtan_backward";
    case ModelKind::Division: return "division";
    case ModelKind::Rational: return "rational";
    case ModelKind::ThinPrism: return "thin_prism";
    case ModelKind::KB8: return "kb8";
    case ModelKind::Scaramuzza: return "scaramuzza";
    case ModelKind::FOV: return "fov";
    case ModelKind::UCM: return "ucm";
    case ModelKind::UCMAlpha: return "ucm_alpha";
    case ModelKind::DS: return "ds";
    case ModelKind::EUCM: return "eucm";
    case ModelKind::Mei: return "mei";
  }
  return "unknown";
}

std::optional<ModelKind> model_kind_from_string(const std::string& name) {
  static const std::pair<const char*, ModelKind> table[] = {
      {"pinhole", ModelKind::Pinhole},
      {"radtan", ModelKind::RadTan},
      {"radtan_backward", ModelKind::RadTanBackward},
      {"division", ModelKind::Division},
      {"rational", ModelKind::Rational},
      {"thin_prism", ModelKind::ThinPrism},
      {"kb8", ModelKind::KB8},
      {"scaramuzza", ModelKind::Scaramuzza},
      {"fov", ModelKind::FOV},
      {"ucm", ModelKind::UCM},
      {"ucm_alpha", ModelKind::UCMAlpha},
      {"ds", ModelKind::DS},
      {"eucm", ModelKind::EUCM},
      {"mei", ModelKind::Mei},
  };
  for (const auto& [key, kind] : table)
    if (name == key) return kind;
  return std::nullopt;
}

bool valid_param_count(ModelKind kind, Eigen::Index n) {
  switch (kind) {
    case ModelKind::Pinhole: return n == 4;
    case ModelKind::RadTan:
    case ModelKind::RadTanBackward:
    case ModelKind::KB8: return n == 8;
    case ModelKind::Division:
    case ModelKind::FOV:
    case ModelKind::UCM:
    case ModelKind::UCMAlpha: return n == 5;
    case ModelKind::Rational: return n == 10;
    case ModelKind::ThinPrism: return n == 9 || n == 11;
    case ModelKind::Scaramuzza: return n == 9;
    case ModelKind::DS:
    case ModelKind::EUCM: return n == 6;
    case ModelKind::Mei: return n == 11;
  }
  return false;
}

bool validate_params(ModelKind kind, const Eigen::VectorXd& params,
                     double theta_max) {
  if (!valid_param_count(kind, params.size())) {
    throw std::invalid_argument("parameter vector length " +
                                std::to_string(params.size()) +
                                " does not match model kind " +
                                to_string(kind));
  }
  if (!params.allFinite()) return false;
  if (kind == ModelKind::Scaramuzza) {
    if (params(0) == 0.0) return false;
  } else {
    if (params(0) <= 0.0 || params(1) <= 0.0) return false;
  }
  switch (kind) {
    case ModelKind::EUCM:
      return params(4) >= 0.0 && params(4) <= 1.0 && params(5) > 0.0;
    case ModelKind::DS:
      return params(5) > 0.0 && params(5) <= 1.0 && params(4) > -1.0 &&
             params(4) < 1.0;
    case ModelKind::UCMAlpha:
      return params(4) >= 0.0 && params(4) <= 1.0;
    case ModelKind::UCM:
    case ModelKind::Mei:
      return params(4) >= 0.0;
    case ModelKind::FOV:
      return params(4) >= 0.0;
    case ModelKind::KB8: {
      // d(theta) must be strictly increasing on [0, theta_max]
      const double k1 = params(4), k2 = params(5), k3 = params(6),
                   k4 = params(7);
      for (int i = 0; i <= 1000; ++i) {
        const double t = theta_max * i / 1000.0;
        const double t2 = t * t;
        const double dp =
            1.0 + t2 * (3 * k1 + t2 * (5 * k2 + t2 * (7 * k3 + t2 * 9 * k4)));
        if (dp <= 0.0) return false;
      }
      return true;
    }
    default:
      return true;
  }
}

ProjectionResult project(const CameraSpec& spec, const Point3& x) {
  ProjectionResult res;
  Pix2<double> out;
  const std::vector<double> p = params_as_doubles(spec);
  if (project_impl(spec, p, x.x(), x.y(), x.z(), out)) {
    res.pixel = {out.u, out.v};
    res.valid = std::isfinite(out.u) && std::isfinite(out.v);
  }
  return res;
}

Eigen::Matrix<double, 2, 3> jacobian_point(const CameraSpec& spec,
                                           const Point3& x) {
  std::vector<Dual> p;
  p.reserve(spec.params.size());
  for (Eigen::Index i = 0; i < spec.params.size(); ++i)
    p.emplace_back(spec.params(i));
  const Dual X = Dual::variable(x.x(), 3, 0);
  const Dual Y = Dual::variable(x.y(), 3, 1);
  const Dual Z = Dual::variable(x.z(), 3, 2);
  Pix2<Dual> out;
  if (!project_impl(spec, p, X, Y, Z, out))
    throw std::domain_error("jacobian_point: point does not project validly");
  Eigen::Matrix<double, 2, 3> J = Eigen::Matrix<double, 2, 3>::Zero();
  if (out.u.d.size() == 3) J.row(0) = out.u.d.transpose();
  if (out.v.d.size() == 3) J.row(1) = out.v.d.transpose();
  return J;
}

Eigen::Matrix<double, 2, Eigen::Dynamic> jacobian_params(const CameraSpec& spec,
                                                         const Point3& x) {
  const int n = static_cast<int>(spec.params.size());
  std::vector<Dual> p;
  p.reserve(n);
  for (int i = 0; i < n; ++i)
    p.push_back(Dual::variable(spec.params(i), n, i));
  Pix2<Dual> out;
  if (!project_impl(spec, p, Dual(x.x()), Dual(x.y()), Dual(x.z()), out))
    throw std::domain_error("jacobian_params: point does not project validly");
  Eigen::Matrix<double, 2, Eigen::Dynamic> J =
      Eigen::Matrix<double, 2, Eigen::Dynamic>::Zero(2, n);
  if (out.u.d.size() == n) J.row(0) = out.u.d.transpose();
  if (out.v.d.size() == n) J.row(1) = out.v.d.transpose();
  return J;
}

// ---------------------------------------------------------------------------
// unprojection

namespace {

UnprojectionResult ray_from_normalized(double xn, double yn) {
  UnprojectionResult res;
  res.ray = Ray(xn, yn, 1.0).normalized();
  res.valid = true;
  return res;
}

}  // namespace

UnprojectionResult unproject(const CameraSpec& spec, const Pixel& m) {
  UnprojectionResult res;
  const Eigen::VectorXd& p = spec.params;
  switch (spec.kind) {
    case ModelKind::Pinhole:
      return ray_from_normalized((m.x() - p(2)) / p(0), (m.y() - p(3)) / p(1));
    case ModelKind::RadTan:
    case ModelKind::ThinPrism: {
      const double xd = (m.x() - p(2)) / p(0);
      const double yd = (m.y() - p(3)) / p(1);
      std::vector<double> pd = params_as_doubles(spec);
      auto dist = [&](auto x, auto y, auto& u, auto& v) {
        using S = std::decay_t<decltype(x)>;
        std::vector<S> ps(pd.begin(), pd.end());
        Pix2<S> px;
        // reuse the forward normalized-plane map with unit focal
        std::vector<S> unit = ps;
        unit[0] = S(1.0);
        unit[1] = S(1.0);
        unit[2] = S(0.0);
        unit[3] = S(0.0);
        if (!project_pinhole_family(spec.kind, unit, x, y, S(1.0), px)) {
          u = S(std::nan(""));
          v = S(std::nan(""));
          return;
        }
        u = px.u;
        v = px.v;
      };
      double xn = xd, yn = yd;
      if (!newton2d(dist, xd, yd, xn, yn)) return res;
      return ray_from_normalized(xn, yn);
    }
    case ModelKind::RadTanBackward: {
      const double xd = (m.x() - p(2)) / p(0);
      const double yd = (m.y() - p(3)) / p(1);
      std::vector<double> pd = params_as_doubles(spec);
      double xn, yn;
      radtan_backward_map(pd, xd, yd, xn, yn);
      return ray_from_normalized(xn, yn);
    }
    case ModelKind::Division: {
      const double xd = (m.x() - p(2)) / p(0);
      const double yd = (m.y() - p(3)) / p(1);
      const double denom = 1.0 + p(4) * (xd * xd + yd * yd);
      if (std::abs(denom) < kEps) return res;
      return ray_from_normalized(xd / denom, yd / denom);
    }
    case ModelKind::Rational: {
      const double xd = (m.x() - p(2)) / p(0);
      const double yd = (m.y() - p(3)) / p(1);
      const double r2 = xd * xd + yd * yd;
      const double num = 1.0 + r2 * (p(4) + r2 * (p(5) + r2 * p(6)));
      const double den = 1.0 + r2 * (p(7) + r2 * (p(8) + r2 * p(9)));
      if (std::abs(den) < kEps) return res;
      const double f = num / den;
      return ray_from_normalized(xd * f, yd * f);
    }
    case ModelKind::KB8: {
      const double mx = (m.x() - p(2)) / p(0);
      const double my = (m.y() - p(3)) / p(1);
      const double r = std::sqrt(mx * mx + my * my);
      if (r < 1e-14) {
        res.ray = Ray::UnitZ();
        res.valid = true;
        return res;
      }
      // scalar Newton on d(theta) = r, init theta = r
      const double k1 = p(4), k2 = p(5), k3 = p(6), k4 = p(7);
      double theta = std::min(r, spec.theta_max);
      bool ok = false;
      for (int it = 0; it < 20; ++it) {
        const double t2 = theta * theta;
        const double d =
            theta * (1 + t2 * (k1 + t2 * (k2 + t2 * (k3 + t2 * k4)))) - r;
        if (std::abs(d) < 1e-12) {
          ok = true;
          break;
        }
        const double dp =
            1 + t2 * (3 * k1 + t2 * (5 * k2 + t2 * (7 * k3 + t2 * 9 * k4)));
        if (dp <= 0) break;
        theta -= d / dp;
        if (theta < 0) theta = 1e-12;
      }
      if (!ok || theta > spec.theta_max * (1.0 + 1e-9)) return res;
      const double s = std::sin(theta) / r;
      res.ray = Ray(s * mx, s * my, std::cos(theta));
      res.valid = true;
      return res;
    }
    case ModelKind::Scaramuzza: {
      // p = [a0 a2 a3 a4 cx cy c d e]
      const double c = p(6), d = p(7), e = p(8);
      const double det = c - d * e;
      if (std::abs(det) < 1e-12) return res;
      const double du = m.x() - p(4);
      const double dv = m.y() - p(5);
      const double uh = (du - d * dv) / det;
      const double vh = (-e * du + c * dv) / det;
      const double rho = std::sqrt(uh * uh + vh * vh);
      const double wh =
          p(0) + rho * rho * (p(1) + rho * (p(2) + rho * p(3)));
      res.ray = Ray(uh, vh, wh).normalized();
      res.valid = true;
      return res;
    }
    case ModelKind::FOV: {
      const double w = p(4);
      const double xd = (m.x() - p(2)) / p(0);
      const double yd = (m.y() - p(3)) / p(1);
      if (w < 1e-8) return ray_from_normalized(xd, yd);
      const double rd = std::sqrt(xd * xd + yd * yd);
      const double tw = 2.0 * std::tan(w / 2.0);
      double s;
      if (rd < 1e-12) {
        s = w / tw;
      } else {
        s = std::sin(rd * w) / (rd * tw);
      }
      res.ray = Ray(xd * s, yd * s, std::cos(rd * w)).normalized();
      res.valid = true;
      return res;
    }
    case ModelKind::UCM: {
      const double xi = p(4);
      const double xd = (m.x() - p(2)) / p(0);
      const double yd = (m.y() - p(3)) / p(1);
      const double r2 = xd * xd + yd * yd;
      const double disc = 1.0 + (1.0 - xi * xi) * r2;
      if (disc < 0.0) return res;
      const double factor = (xi + std::sqrt(disc)) / (1.0 + r2);
      res.ray = Ray(factor * xd, factor * yd, factor - xi).normalized();
      res.valid = true;
      return res;
    }
    case ModelKind::UCMAlpha:
    case ModelKind::EUCM: {
      const double alpha = p(4);
      const double beta = spec.kind == ModelKind::EUCM ? p(5) : 1.0;
      const double mx = (m.x() - p(2)) / p(0);
      const double my = (m.y() - p(3)) / p(1);
      const double r2 = mx * mx + my * my;
      const double inner = 1.0 - (2.0 * alpha - 1.0) * beta * r2;
      if (inner < 0.0) return res;
      const double den = alpha * std::sqrt(inner) + 1.0 - alpha;
      if (std::abs(den) < 1e-15) return res;
      const double mz = (1.0 - beta * alpha * alpha * r2) / den;
      res.ray = Ray(mx, my, mz).normalized();
      res.valid = true;
      return res;
    }
    case ModelKind::DS: {
      const double xi = p(4), alpha = p(5);
      const double mx = (m.x() - p(2)) / p(0);
      const double my = (m.y() - p(3)) / p(1);
      const double r2 = mx * mx + my * my;
      const double inner = 1.0 - (2.0 * alpha - 1.0) * r2;
      if (inner < 0.0) return res;
      const double den = alpha * std::sqrt(inner) + 1.0 - alpha;
      if (std::abs(den) < 1e-15) return res;
      const double mz = (1.0 - alpha * alpha * r2) / den;
      const double disc = mz * mz + (1.0 - xi * xi) * r2;
      if (disc < 0.0) return res;
      const double factor = (mz * xi + std::sqrt(disc)) / (mz * mz + r2);
      res.ray = Ray(factor * mx, factor * my, factor * mz - xi).normalized();
      res.valid = true;
      return res;
    }
    case ModelKind::Mei: {
      const double xi = p(4), s = p(10);
      const double yd = (m.y() - p(3)) / p(1);
      const double xd = (m.x() - p(2)) / p(0) - s * yd;
      // undistort by fixed point then one Newton polish
      std::vector<double> pd = params_as_doubles(spec);
      auto dist = [&pd](auto x, auto y, auto& u, auto& v) {
        using S = std::decay_t<decltype(x)>;
        const S r2 = x * x + y * y;
        const S dd = S(1.0) + r2 * (S(pd[5]) + r2 * (S(pd[6]) + r2 * S(pd[7])));
        u = x * dd + S(2.0 * pd[8]) * x * y + S(pd[9]) * (r2 + S(2.0) * x * x);
        v = y * dd + S(pd[8]) * (r2 + S(2.0) * y * y) + S(2.0 * pd[9]) * x * y;
      };
      double xn = xd, yn = yd;
      for (int it = 0; it < 10; ++it) {
        double u, v;
        dist(xn, yn, u, v);
        xn -= u - xd;
        yn -= v - yd;
      }
      if (!newton2d(dist, xd, yd, xn, yn)) return res;
      const double r2 = xn * xn + yn * yn;
      const double disc = 1.0 + (1.0 - xi * xi) * r2;
      if (disc < 0.0) return res;
      const double factor = (xi + std::sqrt(disc)) / (1.0 + r2);
      res.ray = Ray(factor * xn, factor * yn, factor - xi).normalized();
      res.valid = true;
      return res;
    }
  }
  return res;
}

CameraSpec ucm_to_alpha(const CameraSpec& ucm) {
  if (ucm.kind != ModelKind::UCM)
    throw std::invalid_argument("ucm_to_alpha expects a UCM spec");
  const double xi = ucm.params(4);
  if (xi < 0.0) throw std::domain_error("ucm_to_alpha requires xi >= 0");
  CameraSpec out = ucm;
  out.kind = ModelKind::UCMAlpha;
  out.params(0) = ucm.params(0) / (1.0 + xi);
  out.params(1) = ucm.params(1) / (1.0 + xi);
  out.params(4) = xi / (1.0 + xi);
  return out;
}

CameraSpec alpha_to_ucm(const CameraSpec& ucm_alpha) {
  if (ucm_alpha.kind != ModelKind::UCMAlpha)
    throw std::invalid_argument("alpha_to_ucm expects a UCMAlpha spec");
  const double alpha = ucm_alpha.params(4);
  if (alpha >= 1.0)
    throw std::domain_error("alpha_to_ucm undefined at alpha = 1");
  const double xi = alpha / (1.0 - alpha);
  CameraSpec out = ucm_alpha;
  out.kind = ModelKind::UCM;
  out.params(0) = ucm_alpha.params(0) * (1.0 + xi);
  out.params(1) = ucm_alpha.params(1) * (1.0 + xi);
  out.params(4) = xi;
  return out;
}

double comparable_focal(const CameraSpec& spec, int axis) {
  switch (spec.kind) {
    case ModelKind::Scaramuzza:
      return std::abs(spec.params(0));
    case ModelKind::UCM:
    case ModelKind::Mei:
      return spec.params(axis) / (1.0 + spec.params(4));
    default:
      return spec.params(axis);
  }
}

}  // namespace wacal
