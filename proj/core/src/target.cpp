#include "wacal/target.hpp"

#include <stdexcept>

namespace wacal {

std::string to_string(TargetKind kind) {
  switch (kind) {
    case TargetKind::Checkerboard: return "checkerboard";
    case TargetKind::AprilGrid: return "aprilgrid";
    case TargetKind::CircleGridSym: return "circlegrid_sym";
    case TargetKind::CircleGridAsym: return "circlegrid_asym";
  }
  return "unknown";
}

std::optional<TargetKind> target_kind_from_string(const std::string& name) {
  if (name == "checkerboard") return TargetKind::Checkerboard;
  if (name == "aprilgrid") return TargetKind::AprilGrid;
  if (name == "circlegrid_sym") return TargetKind::CircleGridSym;
  if (name == "circlegrid_asym") return TargetKind::CircleGridAsym;
  return std::nullopt;
}

Point3 TargetLayout::center() const {
  Point3 c = Point3::Zero();
  for (const auto& [id, p] : points) c += p;
  return points.empty() ? c : Point3(c / points.size());
}

TargetLayout make_target(TargetKind kind, int rows, int cols, double spacing,
                         double tag_ratio) {
  if (rows < 2 || cols < 2)
    throw std::invalid_argument("target requires rows >= 2 and cols >= 2");
  if (spacing <= 0.0)
    throw std::invalid_argument("target spacing must be positive");
  if (kind == TargetKind::AprilGrid &&
      (tag_ratio <= 0.0 || tag_ratio >= 1.0))
    throw std::invalid_argument("AprilGrid requires 0 < tag_ratio < 1");

  TargetLayout t;
  t.kind = kind;
  t.rows = rows;
  t.cols = cols;
  t.spacing = spacing;
  t.tag_ratio = kind == TargetKind::AprilGrid ? tag_ratio : 0.0;

  switch (kind) {
    case TargetKind::Checkerboard:
      for (int r = 0; r < rows - 1; ++r)
        for (int c = 0; c < cols - 1; ++c)
          t.points.emplace_back(r * (cols - 1) + c,
                                Point3(c * spacing, r * spacing, 0.0));
      break;
    case TargetKind::AprilGrid: {
      const double pitch = spacing * (1.0 + tag_ratio);
      const double corner[4][2] = {
          {0.0, 0.0}, {spacing, 0.0}, {spacing, spacing}, {0.0, spacing}};
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
          for (int k = 0; k < 4; ++k)
            t.points.emplace_back(
                4 * (r * cols + c) + k,
                Point3(c * pitch + corner[k][0], r * pitch + corner[k][1],
                       0.0));
      break;
    }
    case TargetKind::CircleGridSym:
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
          t.points.emplace_back(r * cols + c,
                                Point3(c * spacing, r * spacing, 0.0));
      break;
    case TargetKind::CircleGridAsym:
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
          t.points.emplace_back(
              r * cols + c,
              Point3(c * spacing + (r % 2) * spacing / 2.0,
                     r * spacing / 2.0, 0.0));
      break;
  }
  return t;
}

}  // namespace wacal
