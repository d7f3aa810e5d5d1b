#include "wacal/simulate.hpp"

#include <cmath>
#include <stdexcept>

namespace wacal {
namespace {

bool in_image(const CameraSpec& spec, const Pixel& p) {
  return p.x() >= 0.0 && p.x() < spec.width && p.y() >= 0.0 &&
         p.y() < spec.height;
}

double valid_fraction(const CameraSpec& spec, const TargetLayout& target,
                      const Pose& pose) {
  int ok = 0;
  for (const auto& [id, pt] : target.points) {
    const auto pr = project(spec, pose.apply(pt));
    if (pr.valid && in_image(spec, pr.pixel)) ++ok;
  }
  return static_cast<double>(ok) / target.points.size();
}

}  // namespace

std::vector<Pose> sample_poses(const CameraSpec& spec,
                               const TargetLayout& target,
                               const SimConfig& config, Rng& rng) {
  const auto& ps = config.pose_sampler;
  const Point3 center = target.center();
  const double max_tilt = ps.max_tilt_deg * M_PI / 180.0;

  std::vector<Pose> poses;
  int rejections = 0;
  while (static_cast<int>(poses.size()) < config.frames) {
    const double dist = rng.uniform(ps.distance_min, ps.distance_max);
    const double tilt = rng.uniform(0.0, max_tilt);
    const double azimuth = rng.uniform(0.0, 2.0 * M_PI);
    const int look_idx = rng.uniform_int(static_cast<int>(target.points.size()));
    const double roll = rng.uniform(0.0, 2.0 * M_PI);

    // camera center on a cone around the board normal (+z)
    const Point3 cam(center.x() + dist * std::sin(tilt) * std::cos(azimuth),
                     center.y() + dist * std::sin(tilt) * std::sin(azimuth),
                     center.z() + dist * std::cos(tilt));
    const Point3 look = target.points[look_idx].second;
    Eigen::Vector3d zc = (look - cam).normalized();
    Eigen::Vector3d up = std::abs(zc.z()) > 0.99 ? Eigen::Vector3d::UnitY()
                                                 : Eigen::Vector3d::UnitZ();
    Eigen::Vector3d xc = up.cross(zc).normalized();
    Eigen::Vector3d yc = zc.cross(xc);
    // apply roll about the optical axis
    const Eigen::Vector3d xr = std::cos(roll) * xc + std::sin(roll) * yc;
    const Eigen::Vector3d yr = -std::sin(roll) * xc + std::cos(roll) * yc;

    Pose pose;
    pose.rotation.row(0) = xr.transpose();
    pose.rotation.row(1) = yr.transpose();
    pose.rotation.row(2) = zc.transpose();
    pose.translation = -(pose.rotation * cam);

    if (valid_fraction(spec, target, pose) >= ps.in_image_fraction) {
      poses.push_back(pose);
      rejections = 0;
    } else if (++rejections >= 1000) {
      throw std::runtime_error(
          "sample_poses: 1000 consecutive rejections (infeasible sampler "
          "config)");
    }
  }
  return poses;
}

SimResult synthesize_observations(const CameraSpec& spec,
                                  const TargetLayout& target,
                                  const std::vector<Pose>& poses,
                                  const SimConfig& config, Rng& rng) {
  SimResult result;
  result.truth_spec = spec;
  for (size_t i = 0; i < poses.size(); ++i) {
    Frame frame;
    frame.frame_id = static_cast<int>(i);
    for (const auto& [id, pt] : target.points) {
      const auto pr = project(spec, poses[i].apply(pt));
      if (!pr.valid || !in_image(spec, pr.pixel)) continue;
      Pixel noisy = pr.pixel;
      if (config.noise_sigma > 0.0) {
        noisy.x() += config.noise_sigma * rng.normal();
        noisy.y() += config.noise_sigma * rng.normal();
      }
      frame.corners.emplace_back(id, noisy);
    }
    if (frame.corners.size() < 4) {
      if (!config.drop_invalid)
        throw std::runtime_error("synthesize_observations: frame " +
                                 std::to_string(i) + " retains < 4 corners");
      continue;
    }
    result.observations.frames.push_back(std::move(frame));
    result.truth_poses.push_back(poses[i]);
  }
  return result;
}

SimResult simulate(const CameraSpec& spec, const TargetLayout& target,
                   const SimConfig& config) {
  if (config.noise_sigma < 0.0 || config.frames < 3)
    throw std::invalid_argument("simulate: invalid SimConfig");
  Rng rng(config.seed);
  const auto poses = sample_poses(spec, target, config, rng);
  return synthesize_observations(spec, target, poses, config, rng);
}

}  // namespace wacal
