#pragma once

#include <vector>

#include "wacal/camera.hpp"
#include "wacal/observations.hpp"
#include "wacal/rng.hpp"
#include "wacal/target.hpp"

namespace wacal {

struct PoseSampler {
  double distance_min = 0.4;   // meters to target center
  double distance_max = 1.2;
  double max_tilt_deg = 45.0;  // camera offset from the board normal
  double in_image_fraction = 0.6;
};

struct SimConfig {
  double noise_sigma = 0.7;  // pixels per axis
  int frames = 40;
  std::uint64_t seed = 0;
  PoseSampler pose_sampler;
  bool drop_invalid = true;
};

struct SimResult {
  ObservationSet observations;
  CameraSpec truth_spec;
  std::vector<Pose> truth_poses;  // aligned with observations.frames
  std::string generator_id = Rng::kGeneratorId;
};

/// Samples target->camera poses by rejection: target center at uniform
/// distance, camera axis toward a uniformly chosen target point, tilt
/// bounded, roll uniform; a pose is accepted when at least
/// in_image_fraction of the target points project validly inside the image.
/// Deterministic given the seed. Throws std::runtime_error after 1000
/// consecutive rejections.
std::vector<Pose> sample_poses(const CameraSpec& spec,
                               const TargetLayout& target,
                               const SimConfig& config, Rng& rng);

/// Projects all target points under each pose, keeps valid in-image
/// projections, and adds i.i.d. Gaussian pixel noise.
SimResult synthesize_observations(const CameraSpec& spec,
                                  const TargetLayout& target,
                                  const std::vector<Pose>& poses,
                                  const SimConfig& config, Rng& rng);

/// sample_poses + synthesize_observations with a fresh generator at
/// config.seed.
SimResult simulate(const CameraSpec& spec, const TargetLayout& target,
                   const SimConfig& config);

}  // namespace wacal
