#pragma once

#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "wacal/calibrate.hpp"
#include "wacal/observations.hpp"
#include "wacal/simulate.hpp"
#include "wacal/target.hpp"

namespace wacal {

using json = nlohmann::json;

// CameraSpec: {"kind", "params", "width", "height", ("theta_max")}
json spec_to_json(const CameraSpec& spec);
CameraSpec spec_from_json(const json& j);

// Target config: {"kind", "rows", "cols", "spacing_m", ("tag_ratio")}
json target_to_json(const TargetLayout& target);
TargetLayout target_from_json(const json& j);

// Layout export: {"points": [[id, x, y, z], ...]} plus the config fields.
json layout_points_json(const TargetLayout& target);

// Pose: 12 numbers, row-major rotation then translation.
json pose_to_json(const Pose& pose);
Pose pose_from_json(const json& j);

// Observations: JSON Lines, one frame per line:
// {"frame": int, "corners": [[id, u, v], ...]}
void write_observations(std::ostream& out, const ObservationSet& obs);
/// Throws std::runtime_error naming the 1-based line number on a malformed
/// line.
ObservationSet read_observations(std::istream& in);

// Truth record: {"spec": ..., "poses": [...], "generator": id}
json truth_to_json(const SimResult& sim);

json report_to_json(const CalibReport& report, const CalibConfig& config);
CalibReport report_from_json(const json& j);
CalibConfig config_from_json(const json& j);

// file helpers
json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

std::string loss_kind_to_string(LossKind kind);
std::optional<LossKind> loss_kind_from_string(const std::string& name);

}  // namespace wacal
