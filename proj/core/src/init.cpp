#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "wacal/calibrate.hpp"

namespace wacal {
namespace {

bool is_pinhole_family(ModelKind kind) {
  switch (kind) {
    case ModelKind::Pinhole:
    case ModelKind::RadTan:
    case ModelKind::RadTanBackward:
    case ModelKind::Division:
    case ModelKind::Rational:
    case ModelKind::ThinPrism:
      return true;
    default:
      return false;
  }
}

/// Neutral spec for a wide-angle kind at focal guess f.
CameraSpec neutral_spec(ModelKind kind, double f, double cx, double cy,
                        int width, int height) {
  CameraSpec spec;
  spec.kind = kind;
  spec.width = width;
  spec.height = height;
  switch (kind) {
    case ModelKind::KB8:
      spec.params = (Eigen::VectorXd(8) << f, f, cx, cy, 0, 0, 0, 0).finished();
      break;
    case ModelKind::Scaramuzza:
      spec.params =
          (Eigen::VectorXd(9) << f, 0, 0, 0, cx, cy, 1, 0, 0).finished();
      break;
    case ModelKind::FOV:
      spec.params = (Eigen::VectorXd(5) << f, f, cx, cy, 0.5).finished();
      break;
    case ModelKind::UCM:
      // alpha = 0.5 corresponds to xi = 1, gamma = f (1 + xi)
      spec.params =
          (Eigen::VectorXd(5) << 2 * f, 2 * f, cx, cy, 1.0).finished();
      break;
    case ModelKind::UCMAlpha:
      spec.params = (Eigen::VectorXd(5) << f, f, cx, cy, 0.5).finished();
      break;
    case ModelKind::DS:
      spec.params = (Eigen::VectorXd(6) << f, f, cx, cy, 0.0, 0.5).finished();
      break;
    case ModelKind::EUCM:
      spec.params = (Eigen::VectorXd(6) << f, f, cx, cy, 0.5, 1.0).finished();
      break;
    case ModelKind::Mei:
      spec.params = (Eigen::VectorXd(11) << 2 * f, 2 * f, cx, cy, 1.0, 0, 0, 0,
                     0, 0, 0)
                        .finished();
      break;
    default:
      throw std::invalid_argument("neutral_spec: not a wide-angle kind");
  }
  return spec;
}

struct FrameNormalized {
  std::vector<std::pair<Point3, Pixel>> pairs;  // board point -> normalized
};

/// Unprojects a frame's corners with the candidate spec onto the z = 1 plane.
FrameNormalized normalize_frame(const CameraSpec& spec, const Frame& frame,
                                const TargetLayout& target) {
  FrameNormalized out;
  for (const auto& [id, pix] : frame.corners) {
    const auto un = unproject(spec, pix);
    if (!un.valid || un.ray.z() < 0.05) continue;
    out.pairs.emplace_back(target.point(id),
                           Pixel(un.ray.x() / un.ray.z(),
                                 un.ray.y() / un.ray.z()));
  }
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::infinity();
  const size_t k = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + k, v.end());
  double m = v[k];
  if (v.size() % 2 == 0) {
    std::nth_element(v.begin(), v.begin() + k - 1, v.end());
    m = 0.5 * (m + v[k - 1]);
  }
  return m;
}

double candidate_score(const CameraSpec& spec, const ObservationSet& obs,
                       const TargetLayout& target) {
  std::vector<double> residuals;
  for (const auto& frame : obs.frames) {
    if (frame.corners.size() < 4) continue;
    const FrameNormalized fn = normalize_frame(spec, frame, target);
    if (fn.pairs.size() < 4) continue;
    Eigen::Matrix3d H;
    try {
      H = estimate_homography(fn.pairs);
    } catch (const std::exception&) {
      continue;
    }
    for (const auto& [P, m] : fn.pairs) {
      const Eigen::Vector3d h = H * Eigen::Vector3d(P.x(), P.y(), 1.0);
      if (std::abs(h.z()) < 1e-12) continue;
      residuals.push_back((h.hnormalized() - m).norm());
    }
  }
  // Normalized-plane residuals scale like 1/f, which would bias the focal
  // grid search toward large candidates; rescale to pixel-equivalent units.
  return comparable_focal(spec, 0) * median(residuals);
}

}  // namespace

CameraSpec init_wideangle_intrinsics(const ObservationSet& obs,
                                     const TargetLayout& target,
                                     ModelKind kind, int width, int height) {
  int usable = 0;
  for (const auto& f : obs.frames)
    if (f.corners.size() >= 4) ++usable;
  if (usable < 5)
    throw std::runtime_error(
        "wide-angle initialization needs >= 5 usable frames");

  const double cx = width / 2.0;
  const double cy = height / 2.0;
  const double half_diag = std::max(width, height) / 2.0;
  double best_f = -1.0;
  double best_score = std::numeric_limits<double>::infinity();
  constexpr int kSteps = 57;
  for (int i = 0; i <= kSteps; ++i) {
    const double f = (0.1 + (1.5 - 0.1) * i / kSteps) * half_diag;
    const CameraSpec spec = neutral_spec(kind, f, cx, cy, width, height);
    const double score = candidate_score(spec, obs, target);
    if (score < best_score) {
      best_score = score;
      best_f = f;
    }
  }
  if (!(best_f > 0) || !std::isfinite(best_score))
    throw std::runtime_error(
        "wide-angle initialization: no focal candidate achieved a finite "
        "residual");
  return neutral_spec(kind, best_f, cx, cy, width, height);
}

InitResult initialize(const ObservationSet& obs, const TargetLayout& target,
                      ModelKind kind, int width, int height) {
  InitResult result;
  ObservationSet usable;
  for (const auto& f : obs.frames)
    if (f.corners.size() >= 4) usable.frames.push_back(f);
  if (usable.frames.empty())
    throw std::runtime_error("initialize: no frame has >= 4 corners");

  if (is_pinhole_family(kind)) {
    std::vector<Eigen::Matrix3d> homographies;
    std::vector<const Frame*> hframes;
    for (const auto& frame : usable.frames) {
      std::vector<std::pair<Point3, Pixel>> pairs;
      for (const auto& [id, pix] : frame.corners)
        pairs.emplace_back(target.point(id), pix);
      try {
        homographies.push_back(estimate_homography(pairs));
        hframes.push_back(&frame);
      } catch (const std::exception&) {
      }
    }
    CameraSpec pin = init_pinhole_intrinsics(homographies, width, height);

    CameraSpec spec;
    spec.kind = kind;
    spec.width = width;
    spec.height = height;
    const int n = kind == ModelKind::Pinhole      ? 4
                  : kind == ModelKind::Division   ? 5
                  : kind == ModelKind::Rational   ? 10
                  : kind == ModelKind::ThinPrism  ? 9
                                                  : 8;
    spec.params = Eigen::VectorXd::Zero(n);
    spec.params.head<4>() = pin.params;

    Eigen::Matrix3d K = Eigen::Matrix3d::Identity();
    K(0, 0) = pin.params(0);
    K(1, 1) = pin.params(1);
    K(0, 2) = pin.params(2);
    K(1, 2) = pin.params(3);
    const Eigen::Matrix3d Kinv = K.inverse();
    const Point3 center = target.center();
    for (size_t i = 0; i < homographies.size(); ++i) {
      try {
        result.poses.push_back(
            init_pose_from_homography(Kinv * homographies[i], center));
        result.used.frames.push_back(*hframes[i]);
      } catch (const std::exception&) {
      }
    }
    result.spec = spec;
  } else {
    CameraSpec spec =
        init_wideangle_intrinsics(usable, target, kind, width, height);
    const Point3 center = target.center();
    for (const auto& frame : usable.frames) {
      const FrameNormalized fn = normalize_frame(spec, frame, target);
      if (fn.pairs.size() < 4) continue;
      try {
        const Eigen::Matrix3d H = estimate_homography(fn.pairs);
        result.poses.push_back(init_pose_from_homography(H, center));
        result.used.frames.push_back(frame);
      } catch (const std::exception&) {
      }
    }
    result.spec = spec;
  }
  if (result.used.frames.size() < 3)
    throw std::runtime_error("initialize: fewer than 3 frames usable");
  return result;
}

}  // namespace wacal
