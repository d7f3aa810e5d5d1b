#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "wacal/calibrate.hpp"

namespace wacal {

double RobustLoss::cost(double s) const {
  switch (kind) {
    case LossKind::None:
      return s;
    case LossKind::Huber: {
      const double a2 = scale * scale;
      if (s <= a2) return s;
      return 2.0 * scale * std::sqrt(s) - a2;
    }
    case LossKind::Cauchy: {
      const double a2 = scale * scale;
      return a2 * std::log1p(s / a2);
    }
  }
  return s;
}

double RobustLoss::weight(double s) const {
  switch (kind) {
    case LossKind::None:
      return 1.0;
    case LossKind::Huber: {
      const double a2 = scale * scale;
      if (s <= a2) return 1.0;
      return scale / std::sqrt(s);
    }
    case LossKind::Cauchy: {
      const double a2 = scale * scale;
      return 1.0 / (1.0 + s / a2);
    }
  }
  return 1.0;
}

namespace {

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d S;
  S << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return S;
}

/// Per-kind box constraints applied after each LM step.
void clamp_params(CameraSpec& spec) {
  Eigen::VectorXd& p = spec.params;
  auto clamp = [&](int i, double lo, double hi) {
    p(i) = std::clamp(p(i), lo, hi);
  };
  if (spec.kind != ModelKind::Scaramuzza) {
    p(0) = std::max(p(0), 1e-6);
    p(1) = std::max(p(1), 1e-6);
  }
  switch (spec.kind) {
    case ModelKind::EUCM:
      clamp(4, 0.0, 1.0);
      clamp(5, 1e-3, 1e3);
      break;
    case ModelKind::DS:
      clamp(4, -1.0 + 1e-6, 1.0 - 1e-6);
      clamp(5, 1e-6, 1.0);
      break;
    case ModelKind::UCMAlpha:
      clamp(4, 0.0, 1.0);
      break;
    case ModelKind::UCM:
    case ModelKind::Mei:
      clamp(4, 0.0, 50.0);
      break;
    case ModelKind::FOV:
      clamp(4, 0.0, M_PI);
      break;
    default:
      break;
  }
}

struct Problem {
  const ObservationSet& obs;
  const TargetLayout& target;
  const RobustLoss& loss;

  /// Robust cost at (spec, poses). Counts corners with valid projections.
  double cost(const CameraSpec& spec, const std::vector<Pose>& poses,
              int* valid_corners = nullptr) const {
    double total = 0.0;
    int used = 0;
    for (size_t i = 0; i < obs.frames.size(); ++i) {
      for (const auto& [id, meas] : obs.frames[i].corners) {
        const Point3 y = poses[i].apply(target.point(id));
        const auto pr = project(spec, y);
        if (!pr.valid) continue;
        const double s = (pr.pixel - meas).squaredNorm();
        total += loss.cost(s);
        ++used;
      }
    }
    if (valid_corners) *valid_corners = used;
    return total;
  }
};

struct NormalEquations {
  Eigen::MatrixXd Hpp;
  Eigen::VectorXd gp;
  std::vector<Eigen::Matrix<double, 6, 6>> Hff;
  std::vector<Eigen::Matrix<double, 6, 1>> gf;
  std::vector<Eigen::MatrixXd> Hpf;  // P x 6 per frame
};

void build_normal_equations(const Problem& prob, const CameraSpec& spec,
                            const std::vector<Pose>& poses,
                            NormalEquations& ne) {
  const int P = static_cast<int>(spec.params.size());
  const size_t F = poses.size();
  ne.Hpp = Eigen::MatrixXd::Zero(P, P);
  ne.gp = Eigen::VectorXd::Zero(P);
  ne.Hff.assign(F, Eigen::Matrix<double, 6, 6>::Zero());
  ne.gf.assign(F, Eigen::Matrix<double, 6, 1>::Zero());
  ne.Hpf.assign(F, Eigen::MatrixXd::Zero(P, 6));

  for (size_t i = 0; i < F; ++i) {
    for (const auto& [id, meas] : prob.obs.frames[i].corners) {
      const Point3 y = poses[i].apply(prob.target.point(id));
      const auto pr = project(spec, y);
      if (!pr.valid) continue;
      const Eigen::Vector2d r = pr.pixel - meas;
      const double w = prob.loss.weight(r.squaredNorm());

      const Eigen::Matrix<double, 2, 3> Jpt = jacobian_point(spec, y);
      const auto Jin = jacobian_params(spec, y);
      Eigen::Matrix<double, 2, 6> Jps;
      Jps.leftCols<3>() = -Jpt * skew(y);
      Jps.rightCols<3>() = Jpt;

      ne.Hpp.noalias() += w * Jin.transpose() * Jin;
      ne.gp.noalias() += w * Jin.transpose() * r;
      ne.Hff[i].noalias() += w * Jps.transpose() * Jps;
      ne.gf[i].noalias() += w * Jps.transpose() * r;
      ne.Hpf[i].noalias() += w * Jin.transpose() * Jps;
    }
  }
}

}  // namespace

CalibReport refine(const ObservationSet& obs_in, const TargetLayout& target,
                   const CameraSpec& init_spec,
                   const std::vector<Pose>& init_poses,
                   const CalibConfig& config) {
  if (obs_in.frames.size() != init_poses.size())
    throw std::invalid_argument("refine: one pose per frame required");

  // drop frames whose points all fail to project at the initial estimate
  ObservationSet obs;
  std::vector<Pose> poses;
  std::vector<int> frame_ids;
  for (size_t i = 0; i < obs_in.frames.size(); ++i) {
    const auto& frame = obs_in.frames[i];
    if (frame.corners.size() < 4) continue;
    int valid = 0;
    for (const auto& [id, meas] : frame.corners) {
      if (project(init_spec, init_poses[i].apply(target.point(id))).valid)
        ++valid;
    }
    if (valid < 4) continue;  // too few valid projections under the init
    obs.frames.push_back(frame);
    poses.push_back(init_poses[i]);
    frame_ids.push_back(frame.frame_id);
  }
  if (obs.frames.empty()) throw std::runtime_error("refine: no usable frames");

  CameraSpec spec = init_spec;
  const int P = static_cast<int>(spec.params.size());
  const size_t F = poses.size();
  const Problem prob{obs, target, config.loss};

  CalibReport report;
  report.frame_ids = frame_ids;

  double lambda = 1e-4;
  int valid_corners = 0;
  double cost = prob.cost(spec, poses, &valid_corners);
  report.cost_history.push_back(cost);

  NormalEquations ne;
  bool need_rebuild = true;
  int iterations = 0;
  bool converged = false;
  int retract_count = 0;

  while (iterations < config.max_lm_iterations) {
    ++iterations;
    if (need_rebuild) {
      build_normal_equations(prob, spec, poses, ne);
      need_rebuild = false;
    }

    // damped blocks
    Eigen::MatrixXd A = ne.Hpp;
    for (int k = 0; k < P; ++k)
      A(k, k) += lambda * std::max(ne.Hpp(k, k), 1e-12);
    std::vector<Eigen::Matrix<double, 6, 6>> Cinv(F);
    bool singular = false;
    for (size_t i = 0; i < F; ++i) {
      Eigen::Matrix<double, 6, 6> C = ne.Hff[i];
      for (int k = 0; k < 6; ++k)
        C(k, k) += lambda * std::max(ne.Hff[i](k, k), 1e-12);
      const auto ldlt = C.ldlt();
      if (ldlt.info() != Eigen::Success) {
        singular = true;
        break;
      }
      Cinv[i] = ldlt.solve(Eigen::Matrix<double, 6, 6>::Identity());
    }
    if (singular) {
      lambda *= 2.0;
      continue;
    }

    // Schur complement onto the intrinsic block
    Eigen::MatrixXd S = A;
    Eigen::VectorXd rhs = -ne.gp;
    for (size_t i = 0; i < F; ++i) {
      S.noalias() -= ne.Hpf[i] * Cinv[i] * ne.Hpf[i].transpose();
      rhs.noalias() += ne.Hpf[i] * (Cinv[i] * ne.gf[i]);
    }
    const Eigen::VectorXd dp = S.ldlt().solve(rhs);

    CameraSpec cand_spec = spec;
    cand_spec.params += dp;
    clamp_params(cand_spec);
    std::vector<Pose> cand_poses = poses;
    for (size_t i = 0; i < F; ++i) {
      const Eigen::Matrix<double, 6, 1> df =
          Cinv[i] * (-ne.gf[i] - ne.Hpf[i].transpose() * dp);
      cand_poses[i] = poses[i].retract(df);
    }
    if (++retract_count % 50 == 0)
      for (auto& pose : cand_poses) pose.orthonormalize();

    const double cand_cost = prob.cost(cand_spec, cand_poses);
    if (std::isfinite(cand_cost) && cand_cost <= cost) {
      const double decrease = cost - cand_cost;
      spec = std::move(cand_spec);
      poses = std::move(cand_poses);
      cost = cand_cost;
      report.cost_history.push_back(cost);
      lambda = std::max(lambda / 3.0, 1e-12);
      need_rebuild = true;
      if (decrease < config.lm_tolerance * std::max(cost, 1e-300)) {
        converged = true;
        break;
      }
    } else {
      lambda *= 2.0;
      if (lambda > 1e12) break;
    }
  }

  report.spec = spec;
  report.poses = poses;
  report.converged = converged;
  report.iterations = iterations;
  cost = prob.cost(spec, poses, &valid_corners);
  report.inliers_used = valid_corners;
  report.rms = compute_rms(spec, poses, obs, target);
  compute_covariance(report, obs, target);
  return report;
}

double compute_rms(const CameraSpec& spec, const std::vector<Pose>& poses,
                   const ObservationSet& obs, const TargetLayout& target,
                   const std::vector<std::vector<bool>>& inlier_mask) {
  double sum = 0.0;
  size_t n = 0;
  for (size_t i = 0; i < obs.frames.size(); ++i) {
    const auto& corners = obs.frames[i].corners;
    for (size_t j = 0; j < corners.size(); ++j) {
      if (!inlier_mask.empty() && !inlier_mask[i][j]) continue;
      const auto pr = project(spec, poses[i].apply(target.point(corners[j].first)));
      if (!pr.valid) continue;
      sum += (pr.pixel - corners[j].second).squaredNorm();
      ++n;
    }
  }
  if (n == 0) throw std::runtime_error("compute_rms: empty inlier set");
  return std::sqrt(sum / n);
}

void compute_covariance(CalibReport& report, const ObservationSet& obs,
                        const TargetLayout& target) {
  const int P = static_cast<int>(report.spec.params.size());
  const size_t F = report.poses.size();
  report.param_std = Eigen::VectorXd::Zero(P);
  report.param_std_available = false;
  report.condition_number = std::numeric_limits<double>::infinity();
  if (obs.frames.size() != F) return;

  RobustLoss loss{LossKind::None, 1.0};  // weights folded in below
  const Problem prob{obs, target, loss};
  NormalEquations ne;
  build_normal_equations(prob, report.spec, report.poses, ne);

  // robust residual variance
  double wsum = 0.0;
  long n = 0;
  for (size_t i = 0; i < F; ++i) {
    for (const auto& [id, meas] : obs.frames[i].corners) {
      const auto pr =
          project(report.spec, report.poses[i].apply(target.point(id)));
      if (!pr.valid) continue;
      wsum += (pr.pixel - meas).squaredNorm();
      ++n;
    }
  }
  const long dof = 2 * n - (P + 6 * static_cast<long>(F));
  const double sigma2 = dof > 0 ? wsum / dof : 0.0;

  Eigen::MatrixXd S = ne.Hpp;
  for (size_t i = 0; i < F; ++i) {
    const auto ldlt = ne.Hff[i].ldlt();
    if (ldlt.info() != Eigen::Success) return;
    S.noalias() -= ne.Hpf[i] * ldlt.solve(ne.Hpf[i].transpose());
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success) return;
  const Eigen::VectorXd ev = es.eigenvalues();
  const double ev_max = ev.maxCoeff();
  const double ev_min = ev.minCoeff();
  if (ev_min <= 0.0 || ev_max <= 0.0) {
    report.condition_number = std::numeric_limits<double>::infinity();
    return;
  }
  report.condition_number = ev_max / ev_min;

  const Eigen::MatrixXd Sinv = S.inverse();
  for (int k = 0; k < P; ++k)
    report.param_std(k) = std::sqrt(std::max(0.0, sigma2 * Sinv(k, k)));
  report.param_std_available = true;
}

std::pair<ObservationSet, CalibReport> trim_outliers(
    const CalibReport& report_in, const ObservationSet& obs_in,
    const TargetLayout& target, const CalibConfig& config) {
  ObservationSet obs = obs_in;
  CalibReport report = report_in;
  int trimmed_total = report_in.trimmed;

  for (int round = 0; round < config.trim_rounds; ++round) {
    // map frame ids to pose indices
    std::vector<double> norms;
    std::vector<std::vector<double>> per_frame_norms(report.poses.size());
    ObservationSet matched;
    for (size_t i = 0; i < report.frame_ids.size(); ++i) {
      for (auto& frame : obs.frames) {
        if (frame.frame_id == report.frame_ids[i]) {
          matched.frames.push_back(frame);
          break;
        }
      }
    }
    if (matched.frames.size() != report.poses.size())
      throw std::runtime_error("trim_outliers: observation/report mismatch");

    for (size_t i = 0; i < matched.frames.size(); ++i) {
      for (const auto& [id, meas] : matched.frames[i].corners) {
        const auto pr =
            project(report.spec, report.poses[i].apply(target.point(id)));
        const double rn = pr.valid
                              ? (pr.pixel - meas).norm()
                              : std::numeric_limits<double>::infinity();
        per_frame_norms[i].push_back(rn);
        if (std::isfinite(rn)) norms.push_back(rn);
      }
    }
    if (norms.empty()) break;

    std::vector<double> sorted = norms;
    std::sort(sorted.begin(), sorted.end());
    const double med = sorted[sorted.size() / 2];
    std::vector<double> dev;
    dev.reserve(sorted.size());
    for (double v : sorted) dev.push_back(std::abs(v - med));
    std::sort(dev.begin(), dev.end());
    const double mad = dev[dev.size() / 2];
    const double threshold =
        std::max(config.trim_threshold, 3.0 * 1.4826 * mad);

    ObservationSet kept;
    int trimmed = 0;
    for (size_t i = 0; i < matched.frames.size(); ++i) {
      Frame f;
      f.frame_id = matched.frames[i].frame_id;
      for (size_t j = 0; j < matched.frames[i].corners.size(); ++j) {
        if (per_frame_norms[i][j] <= threshold)
          f.corners.push_back(matched.frames[i].corners[j]);
        else
          ++trimmed;
      }
      if (f.corners.size() >= 4) {
        kept.frames.push_back(f);
      } else {
        trimmed += static_cast<int>(f.corners.size());
      }
    }
    if (kept.frames.size() < 3)
      throw std::runtime_error("trim_outliers: fewer than 3 frames remain");

    obs = kept;
    if (trimmed == 0) break;
    trimmed_total += trimmed;

    std::vector<Pose> poses;
    for (const auto& frame : obs.frames) {
      for (size_t i = 0; i < report.frame_ids.size(); ++i) {
        if (report.frame_ids[i] == frame.frame_id) {
          poses.push_back(report.poses[i]);
          break;
        }
      }
    }
    report = refine(obs, target, report.spec, poses, config);
  }
  report.trimmed = trimmed_total;
  return {obs, report};
}

CalibReport calibrate(const ObservationSet& obs, const TargetLayout& target,
                      int width, int height, const CalibConfig& config) {
  const InitResult init = initialize(obs, target, config.model_kind, width, height);
  CalibReport report = refine(init.used, target, init.spec, init.poses, config);
  auto [kept, final_report] = trim_outliers(report, init.used, target, config);
  return final_report;
}

}  // namespace wacal
