#include "wacal/geometry.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace wacal {

Eigen::Matrix3d exp_so3(const Eigen::Vector3d& w) {
  const double theta = w.norm();
  Eigen::Matrix3d K;
  K << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
  if (theta < 1e-8) {
    // second-order series, accurate to ~1e-16 at this angle
    return Eigen::Matrix3d::Identity() + K + 0.5 * K * K;
  }
  const double a = std::sin(theta) / theta;
  const double b = (1.0 - std::cos(theta)) / (theta * theta);
  return Eigen::Matrix3d::Identity() + a * K + b * K * K;
}

Eigen::Vector3d log_so3(const Eigen::Matrix3d& R) {
  const double cos_theta =
      std::clamp((R.trace() - 1.0) * 0.5, -1.0, 1.0);
  const double theta = std::acos(cos_theta);
  Eigen::Vector3d axis(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0),
                       R(1, 0) - R(0, 1));
  if (theta < 1e-8) {
    return 0.5 * axis;
  }
  if (theta > M_PI - 1e-6) {
    // near pi the off-diagonal difference vanishes; use the symmetric part
    Eigen::Matrix3d S = 0.5 * (R + Eigen::Matrix3d::Identity());
    Eigen::Vector3d v;
    int k;
    S.diagonal().maxCoeff(&k);
    v = S.col(k) / std::sqrt(S(k, k));
    v.normalize();
    // fix sign using the skew part
    if (axis.dot(v) < 0) v = -v;
    return theta * v;
  }
  return (theta / (2.0 * std::sin(theta))) * axis;
}

Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& M) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d R = svd.matrixU() * svd.matrixV().transpose();
  if (R.determinant() < 0) {
    Eigen::Matrix3d D = Eigen::Matrix3d::Identity();
    D(2, 2) = -1;
    R = svd.matrixU() * D * svd.matrixV().transpose();
  }
  return R;
}

}  // namespace wacal
