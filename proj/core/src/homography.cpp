#include <Eigen/Dense>
#include <stdexcept>

#include "wacal/calibrate.hpp"

namespace wacal {

Eigen::Matrix3d estimate_homography(
    const std::vector<std::pair<Point3, Pixel>>& correspondences) {
  const int n = static_cast<int>(correspondences.size());
  if (n < 4)
    throw std::invalid_argument("homography needs >= 4 correspondences");

  // Hartley normalization on both sides
  Eigen::Vector2d mean_p = Eigen::Vector2d::Zero();
  Eigen::Vector2d mean_q = Eigen::Vector2d::Zero();
  for (const auto& [P, q] : correspondences) {
    mean_p += Eigen::Vector2d(P.x(), P.y());
    mean_q += q;
  }
  mean_p /= n;
  mean_q /= n;
  double scale_p = 0, scale_q = 0;
  for (const auto& [P, q] : correspondences) {
    scale_p += (Eigen::Vector2d(P.x(), P.y()) - mean_p).norm();
    scale_q += (q - mean_q).norm();
  }
  scale_p /= n;
  scale_q /= n;
  if (scale_p < 1e-12 || scale_q < 1e-12)
    throw std::runtime_error("homography: degenerate (coincident) points");
  const double sp = std::sqrt(2.0) / scale_p;
  const double sq = std::sqrt(2.0) / scale_q;
  Eigen::Matrix3d Tp = Eigen::Matrix3d::Identity();
  Tp(0, 0) = sp; Tp(1, 1) = sp;
  Tp(0, 2) = -sp * mean_p.x(); Tp(1, 2) = -sp * mean_p.y();
  Eigen::Matrix3d Tq = Eigen::Matrix3d::Identity();
  Tq(0, 0) = sq; Tq(1, 1) = sq;
  Tq(0, 2) = -sq * mean_q.x(); Tq(1, 2) = -sq * mean_q.y();

  Eigen::MatrixXd A(2 * n, 9);
  for (int i = 0; i < n; ++i) {
    const auto& [P, q] = correspondences[i];
    const Eigen::Vector3d x = Tp * Eigen::Vector3d(P.x(), P.y(), 1.0);
    const Eigen::Vector3d u = Tq * Eigen::Vector3d(q.x(), q.y(), 1.0);
    A.row(2 * i) << -x.x(), -x.y(), -1, 0, 0, 0, u.x() * x.x(), u.x() * x.y(),
        u.x();
    A.row(2 * i + 1) << 0, 0, 0, -x.x(), -x.y(), -1, u.y() * x.x(),
        u.y() * x.y(), u.y();
  }
  // FullV: with exactly 4 points A is 8x9 and the null vector lives in the
  // 9th right-singular column, which ThinV would not compute.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // rank deficiency beyond the expected one-dimensional null space
  if (sv.size() < 8 || sv(7) < 1e-9 * sv(0))
    throw std::runtime_error("homography: degenerate configuration");
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d Hn;
  Hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  Eigen::Matrix3d H = Tq.inverse() * Hn * Tp;
  if (std::abs(H(2, 2)) > 1e-12) H /= H(2, 2);
  return H;
}

CameraSpec init_pinhole_intrinsics(
    const std::vector<Eigen::Matrix3d>& homographies, int width, int height) {
  const int n = static_cast<int>(homographies.size());
  if (n < 3)
    throw std::invalid_argument(
        "pinhole initialization needs >= 3 homographies");

  auto v_ij = [](const Eigen::Matrix3d& H, int i, int j) {
    Eigen::Matrix<double, 6, 1> v;
    v << H(0, i) * H(0, j), H(0, i) * H(1, j) + H(1, i) * H(0, j),
        H(1, i) * H(1, j), H(2, i) * H(0, j) + H(0, i) * H(2, j),
        H(2, i) * H(1, j) + H(1, i) * H(2, j), H(2, i) * H(2, j);
    return v;
  };

  Eigen::MatrixXd V(2 * n, 6);
  for (int k = 0; k < n; ++k) {
    V.row(2 * k) = v_ij(homographies[k], 0, 1).transpose();
    V.row(2 * k + 1) =
        (v_ij(homographies[k], 0, 0) - v_ij(homographies[k], 1, 1)).transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(V, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // A healthy problem has exactly one (near-)zero singular value, the
  // b-vector direction; condition the five constrained directions only.
  if (sv(0) / std::max(sv(4), 1e-300) > 1e12)
    throw std::runtime_error(
        "pinhole initialization: ill-conditioned constraint matrix "
        "(parallel target planes?)");
  const Eigen::VectorXd b = svd.matrixV().col(5);
  const double B11 = b(0), B12 = b(1), B22 = b(2), B13 = b(3), B23 = b(4),
               B33 = b(5);

  const double den = B11 * B22 - B12 * B12;
  if (std::abs(den) < 1e-300 || std::abs(B11) < 1e-300)
    throw std::runtime_error("pinhole initialization: singular conic");
  const double cy = (B12 * B13 - B11 * B23) / den;
  const double lambda = B33 - (B13 * B13 + cy * (B12 * B13 - B11 * B23)) / B11;
  const double fx2 = lambda / B11;
  const double fy2 = lambda * B11 / den;
  if (fx2 <= 0 || fy2 <= 0)
    throw std::runtime_error("pinhole initialization: negative focal squared");
  const double fx = std::sqrt(fx2);
  const double fy = std::sqrt(fy2);
  const double skew = -B12 * fx2 * fy / lambda;
  const double cx = skew * cy / fy - B13 * fx2 / lambda;

  CameraSpec spec;
  spec.kind = ModelKind::Pinhole;
  spec.params = Eigen::Vector4d(fx, fy, cx, cy);
  spec.width = width;
  spec.height = height;
  return spec;
}

Pose init_pose_from_homography(const Eigen::Matrix3d& H,
                               const Point3& target_center) {
  const double norm1 = H.col(0).norm();
  const double norm2 = H.col(1).norm();
  if (norm1 < 1e-12 || norm2 < 1e-12)
    throw std::runtime_error("pose from homography: degenerate columns");
  const double lambda = 2.0 / (norm1 + norm2);

  for (const double sign : {1.0, -1.0}) {
    const Eigen::Vector3d r1 = sign * lambda * H.col(0);
    const Eigen::Vector3d r2 = sign * lambda * H.col(1);
    const Eigen::Vector3d r3 = r1.cross(r2);
    Eigen::Matrix3d R;
    R.col(0) = r1;
    R.col(1) = r2;
    R.col(2) = r3;
    Pose pose{nearest_rotation(R), sign * lambda * H.col(2)};
    if (pose.apply(target_center).z() > 0.0) return pose;
  }
  throw std::runtime_error(
      "pose from homography: target behind camera for both signs");
}

}  // namespace wacal
