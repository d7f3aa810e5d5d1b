#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wacal/geometry.hpp"

namespace wacal {

enum class TargetKind { Checkerboard, AprilGrid, CircleGridSym, CircleGridAsym };

std::string to_string(TargetKind kind);
std::optional<TargetKind> target_kind_from_string(const std::string& name);

/// ID-indexed set of coplanar board points (z = 0), ids dense 0..N-1.
struct TargetLayout {
  TargetKind kind = TargetKind::Checkerboard;
  int rows = 0;
  int cols = 0;
  double spacing = 0.0;   // meters
  double tag_ratio = 0.0; // AprilGrid only: gap/tag-side ratio
  std::vector<std::pair<int, Point3>> points;

  Point3 center() const;
  const Point3& point(int id) const { return points.at(id).second; }
};

/// Board point layouts:
///  - Checkerboard: (rows-1)(cols-1) interior corners on a spacing grid.
///  - AprilGrid: 4*rows*cols tag corners; tag (r,c) is a square of side
///    `spacing` at origin (c*spacing*(1+tag_ratio), r*spacing*(1+tag_ratio)),
///    corners ordered BL,BR,TR,TL, id = 4*(r*cols+c)+corner.
///  - CircleGridSym: rows*cols centers on a spacing grid.
///  - CircleGridAsym: rows*cols centers, odd rows offset by spacing/2,
///    row pitch spacing/2.
/// Throws std::invalid_argument on invalid dimensions.
TargetLayout make_target(TargetKind kind, int rows, int cols, double spacing,
                         double tag_ratio = 0.0);

}  // namespace wacal
