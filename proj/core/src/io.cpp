#include "wacal/io.hpp"

#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace wacal {

json spec_to_json(const CameraSpec& spec) {
  json j;
  j["kind"] = to_string(spec.kind);
  j["params"] = std::vector<double>(spec.params.data(),
                                    spec.params.data() + spec.params.size());
  j["width"] = spec.width;
  j["height"] = spec.height;
  if (spec.theta_max != M_PI) j["theta_max"] = spec.theta_max;
  return j;
}

CameraSpec spec_from_json(const json& j) {
  CameraSpec spec;
  const auto kind = model_kind_from_string(j.at("kind").get<std::string>());
  if (!kind)
    throw std::runtime_error("unknown camera model kind: " +
                             j.at("kind").get<std::string>());
  spec.kind = *kind;
  const auto params = j.at("params").get<std::vector<double>>();
  spec.params = Eigen::Map<const Eigen::VectorXd>(params.data(),
                                                  params.size());
  spec.width = j.at("width").get<int>();
  spec.height = j.at("height").get<int>();
  if (j.contains("theta_max")) spec.theta_max = j["theta_max"].get<double>();
  if (!valid_param_count(spec.kind, spec.params.size()))
    throw std::runtime_error("parameter count does not match model kind " +
                             to_string(spec.kind));
  return spec;
}

json target_to_json(const TargetLayout& target) {
  json j;
  j["kind"] = to_string(target.kind);
  j["rows"] = target.rows;
  j["cols"] = target.cols;
  j["spacing_m"] = target.spacing;
  if (target.kind == TargetKind::AprilGrid) j["tag_ratio"] = target.tag_ratio;
  return j;
}

TargetLayout target_from_json(const json& j) {
  const auto kind = target_kind_from_string(j.at("kind").get<std::string>());
  if (!kind)
    throw std::runtime_error("unknown target kind: " +
                             j.at("kind").get<std::string>());
  return make_target(*kind, j.at("rows").get<int>(), j.at("cols").get<int>(),
                     j.at("spacing_m").get<double>(),
                     j.value("tag_ratio", 0.0));
}

json layout_points_json(const TargetLayout& target) {
  json j = target_to_json(target);
  json pts = json::array();
  for (const auto& [id, p] : target.points)
    pts.push_back({id, p.x(), p.y(), p.z()});
  j["points"] = pts;
  return j;
}

json pose_to_json(const Pose& pose) {
  json j = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) j.push_back(pose.rotation(r, c));
  for (int k = 0; k < 3; ++k) j.push_back(pose.translation(k));
  return j;
}

Pose pose_from_json(const json& j) {
  if (!j.is_array() || j.size() != 12)
    throw std::runtime_error("pose must be an array of 12 numbers");
  Pose pose;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      pose.rotation(r, c) = j[3 * r + c].get<double>();
  for (int k = 0; k < 3; ++k) pose.translation(k) = j[9 + k].get<double>();
  return pose;
}

void write_observations(std::ostream& out, const ObservationSet& obs) {
  for (const auto& frame : obs.frames) {
    json corners = json::array();
    for (const auto& [id, pix] : frame.corners)
      corners.push_back({id, pix.x(), pix.y()});
    json j;
    j["frame"] = frame.frame_id;
    j["corners"] = corners;
    out << j.dump() << '\n';
  }
}

ObservationSet read_observations(std::istream& in) {
  ObservationSet obs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
      Frame frame;
      frame.frame_id = j.at("frame").get<int>();
      for (const auto& c : j.at("corners")) {
        if (!c.is_array() || c.size() != 3) throw std::runtime_error("corner");
        frame.corners.emplace_back(c[0].get<int>(),
                                   Pixel(c[1].get<double>(),
                                         c[2].get<double>()));
      }
      obs.frames.push_back(std::move(frame));
    } catch (const std::exception& e) {
      throw std::runtime_error("malformed observation line " +
                               std::to_string(line_no) + ": " + e.what());
    }
  }
  return obs;
}

json truth_to_json(const SimResult& sim) {
  json j;
  j["spec"] = spec_to_json(sim.truth_spec);
  json poses = json::array();
  for (const auto& pose : sim.truth_poses) poses.push_back(pose_to_json(pose));
  j["poses"] = poses;
  j["generator"] = sim.generator_id;
  return j;
}

std::string loss_kind_to_string(LossKind kind) {
  switch (kind) {
    case LossKind::None: return "none";
    case LossKind::Huber: return "huber";
    case LossKind::Cauchy: return "cauchy";
  }
  return "none";
}

std::optional<LossKind> loss_kind_from_string(const std::string& name) {
  if (name == "none") return LossKind::None;
  if (name == "huber") return LossKind::Huber;
  if (name == "cauchy") return LossKind::Cauchy;
  return std::nullopt;
}

json report_to_json(const CalibReport& report, const CalibConfig& config) {
  json j;
  j["config"] = {
      {"model", to_string(config.model_kind)},
      {"loss", loss_kind_to_string(config.loss.kind)},
      {"loss_scale", config.loss.scale},
      {"trim_threshold", config.trim_threshold},
      {"trim_rounds", config.trim_rounds},
      {"max_lm_iterations", config.max_lm_iterations},
      {"lm_tolerance", config.lm_tolerance},
  };
  j["spec"] = spec_to_json(report.spec);
  j["rms"] = report.rms;
  j["param_std"] =
      report.param_std_available
          ? json(std::vector<double>(
                report.param_std.data(),
                report.param_std.data() + report.param_std.size()))
          : json(nullptr);
  j["condition_number"] = std::isfinite(report.condition_number)
                              ? json(report.condition_number)
                              : json(nullptr);
  json poses = json::array();
  for (const auto& pose : report.poses) poses.push_back(pose_to_json(pose));
  j["poses"] = poses;
  j["frame_ids"] = report.frame_ids;
  j["inliers_used"] = report.inliers_used;
  j["trimmed"] = report.trimmed;
  j["converged"] = report.converged;
  j["iterations"] = report.iterations;
  return j;
}

CalibReport report_from_json(const json& j) {
  CalibReport report;
  report.spec = spec_from_json(j.at("spec"));
  report.rms = j.at("rms").get<double>();
  if (!j.at("param_std").is_null()) {
    const auto v = j["param_std"].get<std::vector<double>>();
    report.param_std = Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
    report.param_std_available = true;
  }
  report.condition_number =
      j.at("condition_number").is_null()
          ? std::numeric_limits<double>::infinity()
          : j["condition_number"].get<double>();
  for (const auto& pj : j.at("poses")) report.poses.push_back(pose_from_json(pj));
  report.frame_ids = j.at("frame_ids").get<std::vector<int>>();
  report.inliers_used = j.at("inliers_used").get<int>();
  report.trimmed = j.at("trimmed").get<int>();
  report.converged = j.at("converged").get<bool>();
  report.iterations = j.at("iterations").get<int>();
  return report;
}

CalibConfig config_from_json(const json& j) {
  CalibConfig config;
  if (j.contains("model")) {
    const auto kind = model_kind_from_string(j["model"].get<std::string>());
    if (!kind) throw std::runtime_error("unknown model in config");
    config.model_kind = *kind;
  }
  if (j.contains("loss")) {
    const auto kind = loss_kind_from_string(j["loss"].get<std::string>());
    if (!kind) throw std::runtime_error("unknown loss in config");
    config.loss.kind = *kind;
  }
  config.loss.scale = j.value("loss_scale", config.loss.scale);
  config.trim_threshold = j.value("trim_threshold", config.trim_threshold);
  config.trim_rounds = j.value("trim_rounds", config.trim_rounds);
  config.max_lm_iterations =
      j.value("max_lm_iterations", config.max_lm_iterations);
  config.lm_tolerance = j.value("lm_tolerance", config.lm_tolerance);
  return config;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  json j;
  in >> j;
  return j;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace wacal
