#pragma once

#include <Eigen/Core>
#include <vector>

#include "wacal/camera.hpp"
#include "wacal/observations.hpp"
#include "wacal/target.hpp"

namespace wacal {

enum class LossKind { None, Huber, Cauchy };

struct RobustLoss {
  LossKind kind = LossKind::Huber;
  double scale = 1.0;  // pixels

  /// rho(s) for s = squared residual norm.
  double cost(double s) const;
  /// IRLS weight rho'(s).
  double weight(double s) const;
};

struct CalibConfig {
  ModelKind model_kind = ModelKind::Pinhole;
  RobustLoss loss{LossKind::Huber, 1.0};
  double trim_threshold = 2.0;  // pixels
  int trim_rounds = 2;
  int max_lm_iterations = 100;
  double lm_tolerance = 1e-10;
};

struct CalibReport {
  CameraSpec spec;
  std::vector<Pose> poses;          // one per retained frame
  std::vector<int> frame_ids;       // observation frame ids, same order
  double rms = 0.0;                 // pixels, over final inliers
  Eigen::VectorXd param_std;        // per-parameter std. dev.
  bool param_std_available = false;
  double condition_number = 0.0;    // intrinsic information block
  int inliers_used = 0;
  int trimmed = 0;
  bool converged = false;
  int iterations = 0;
  std::vector<double> cost_history;  // robust cost per accepted step
};

/// Normalized DLT homography from plane (z = 0) to pixels, h33 scaled to 1
/// when nonzero. Throws std::invalid_argument for < 4 points and
/// std::runtime_error for degenerate configurations.
Eigen::Matrix3d estimate_homography(
    const std::vector<std::pair<Point3, Pixel>>& correspondences);

/// Zhang-style closed-form pinhole intrinsics from >= 3 homographies of
/// distinct orientations. Throws std::runtime_error when the constraint
/// system is ill-conditioned (near-parallel planes).
CameraSpec init_pinhole_intrinsics(
    const std::vector<Eigen::Matrix3d>& homographies, int width, int height);

/// Coarse initialization for distortion-bearing wide-angle kinds:
/// principal point at image center, neutral distortion, focal from a 1D
/// grid search minimizing the median algebraic homography residual in
/// undistorted coordinates.
CameraSpec init_wideangle_intrinsics(const ObservationSet& obs,
                                     const TargetLayout& target,
                                     ModelKind kind, int width, int height);

/// Pose from a homography expressed in normalized (undistorted, unit-focal)
/// coordinates. The sign is chosen so the target center has positive depth.
Pose init_pose_from_homography(const Eigen::Matrix3d& H,
                               const Point3& target_center);

struct InitResult {
  CameraSpec spec;
  ObservationSet used;       // frames the initializer could handle
  std::vector<Pose> poses;   // aligned with used.frames
};

/// Full standard initialization path: intrinsics plus per-frame poses for
/// any supported kind. Frames with < 4 corners are excluded.
InitResult initialize(const ObservationSet& obs, const TargetLayout& target,
                      ModelKind kind, int width, int height);

/// Joint Levenberg-Marquardt refinement of intrinsics and per-frame poses.
CalibReport refine(const ObservationSet& obs, const TargetLayout& target,
                   const CameraSpec& init_spec,
                   const std::vector<Pose>& init_poses,
                   const CalibConfig& config);

/// Removes corners with residual norm above
/// max(trim_threshold, 3 * 1.4826 * MAD) and re-runs refine, up to
/// config.trim_rounds times. Returns the surviving observations and the
/// final report.
std::pair<ObservationSet, CalibReport> trim_outliers(const CalibReport& report,
                                                     const ObservationSet& obs,
                                                     const TargetLayout& target,
                                                     const CalibConfig& config);

/// RMS reprojection error over corners selected by inlier_mask (empty mask =
/// all corners). Throws std::runtime_error on an empty inlier set.
double compute_rms(const CameraSpec& spec, const std::vector<Pose>& poses,
                   const ObservationSet& obs, const TargetLayout& target,
                   const std::vector<std::vector<bool>>& inlier_mask = {});

/// Intrinsic-parameter std. dev. from the robustly weighted information
/// matrix with poses marginalized by Schur complement. Fills param_std,
/// param_std_available, and condition_number on the report.
void compute_covariance(CalibReport& report, const ObservationSet& obs,
                        const TargetLayout& target);

/// Convenience pipeline: initialize, refine, trim, covariance.
CalibReport calibrate(const ObservationSet& obs, const TargetLayout& target,
                      int width, int height, const CalibConfig& config);

}  // namespace wacal
