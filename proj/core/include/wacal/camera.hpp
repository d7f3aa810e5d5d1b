#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>

#include "wacal/geometry.hpp"

namespace wacal {

enum class ModelKind {
  Pinhole,
  RadTan,
  RadTanBackward,
  Division,
  Rational,
  ThinPrism,
  KB8,
  Scaramuzza,
  FOV,
  UCM,
  UCMAlpha,
  DS,
  EUCM,
  Mei,
};

std::string to_string(ModelKind kind);
std::optional<ModelKind> model_kind_from_string(const std::string& name);

/// Accepted parameter vector lengths. Rational is fixed at 10
/// ([fx fy cx cy k1..k3 numerator, k1..k3 denominator]); ThinPrism accepts
/// 9 (s1 s2) or 11 (s1..s4, quartic prism terms).
bool valid_param_count(ModelKind kind, Eigen::Index n);

/// Tagged model kind + parameter vector + image size; the single currency
/// for all projection math. Parameter layout order per kind is the external
/// contract:
///   Pinhole:        [fx fy cx cy]
///   RadTan:         [fx fy cx cy k1 k2 p1 p2]
///   RadTanBackward: same layout, distortion applied pixel-side
///   Division:       [fx fy cx cy k1]
///   Rational:       [fx fy cx cy k1n k2n k3n k1d k2d k3d]
///   ThinPrism:      [fx fy cx cy k1 p1 p2 s1 s2 (s3 s4)]
///   KB8:            [fx fy cx cy k1 k2 k3 k4]
///   Scaramuzza:     [a0 a2 a3 a4 cx cy c d e]
///   FOV:            [fx fy cx cy w]
///   UCM:            [gx gy cx cy xi]
///   UCMAlpha:       [fx fy cx cy alpha]
///   DS:             [fx fy cx cy xi alpha]
///   EUCM:           [fx fy cx cy alpha beta]
///   Mei:            [gx gy cx cy xi k1 k2 k3 p1 p2 s]
struct CameraSpec {
  ModelKind kind = ModelKind::Pinhole;
  Eigen::VectorXd params;
  int width = 0;
  int height = 0;
  /// Maximum incidence angle for KB8 validity (radians).
  double theta_max = M_PI;
};

struct ProjectionResult {
  Pixel pixel = Pixel::Zero();
  /// Point inside the model's projectable region, independent of image
  /// bounds. When false the pixel must not be consumed.
  bool valid = false;
};

struct UnprojectionResult {
  Ray ray = Ray::UnitZ();
  bool valid = false;
};

/// Checks parameter-domain constraints: positive focal entries (a0 != 0 for
/// Scaramuzza), EUCM alpha in [0,1] and beta > 0, DS alpha in (0,1] and
/// xi in (-1,1), FOV w >= 0, KB8 d(theta) strictly increasing on
/// [0, theta_max]. Throws std::invalid_argument on length mismatch.
bool validate_params(ModelKind kind, const Eigen::VectorXd& params,
                     double theta_max = M_PI);

/// Forward projection, camera-frame point -> pixel.
ProjectionResult project(const CameraSpec& spec, const Point3& x);

/// Backward projection, pixel -> unit ray.
UnprojectionResult unproject(const CameraSpec& spec, const Pixel& m);

/// d(pixel)/d(point) at a validly projecting point.
/// Throws std::domain_error if the point does not project.
Eigen::Matrix<double, 2, 3> jacobian_point(const CameraSpec& spec,
                                           const Point3& x);

/// d(pixel)/d(params), columns in the declared layout order.
Eigen::Matrix<double, 2, Eigen::Dynamic> jacobian_params(
    const CameraSpec& spec, const Point3& x);

/// UCM (gamma, xi) -> UCMAlpha (f, alpha): alpha = xi/(1+xi), f = gamma/(1+xi).
/// Requires xi >= 0.
CameraSpec ucm_to_alpha(const CameraSpec& ucm);

/// Inverse direction; throws std::domain_error at alpha = 1.
CameraSpec alpha_to_ucm(const CameraSpec& ucm_alpha);

/// Number of intrinsic parameters to optimize (= spec.params.size()).
inline Eigen::Index param_count(const CameraSpec& spec) {
  return spec.params.size();
}

/// Focal-comparable value for cross-model focal comparisons
/// (Scaramuzza a0, Mei gamma/(1+xi), fx otherwise). axis 0 = x, 1 = y.
double comparable_focal(const CameraSpec& spec, int axis);

}  // namespace wacal
