#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace wacal {

using Point3 = Eigen::Vector3d;
using Pixel = Eigen::Vector2d;
using Ray = Eigen::Vector3d;  // unit norm
using Vector6d = Eigen::Matrix<double, 6, 1>;

/// Rodrigues exponential, axis-angle vector -> rotation matrix.
Eigen::Matrix3d exp_so3(const Eigen::Vector3d& w);

/// Inverse of exp_so3 for rotation angles < pi.
Eigen::Vector3d log_so3(const Eigen::Matrix3d& R);

/// Nearest rotation matrix in the Frobenius sense (SVD projection).
Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& M);

/// Rigid transform target frame -> camera frame.
/// The optimizer perturbs poses left-multiplicatively: see retract().
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Point3 apply(const Point3& x) const { return rotation * x + translation; }

  Pose inverse() const {
    return {rotation.transpose(), -(rotation.transpose() * translation)};
  }

  /// this ∘ other (apply other first).
  Pose compose(const Pose& other) const {
    return {rotation * other.rotation,
            rotation * other.translation + translation};
  }

  /// Left-composes the increment {exp(delta.head(3)), delta.tail(3)}.
  Pose retract(const Vector6d& delta) const {
    const Eigen::Matrix3d dR = exp_so3(delta.head<3>());
    return {dR * rotation, dR * translation + delta.tail<3>()};
  }

  /// Recovers delta from retract: log(q ∘ p⁻¹) for q = p.retract(delta).
  static Vector6d local(const Pose& p, const Pose& q) {
    const Pose d = q.compose(p.inverse());
    Vector6d out;
    out.head<3>() = log_so3(d.rotation);
    out.tail<3>() = d.translation;
    return out;
  }

  /// Project rotation back onto SO(3); bounds drift after long retract chains.
  void orthonormalize() { rotation = nearest_rotation(rotation); }
};

}  // namespace wacal
