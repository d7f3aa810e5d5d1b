#pragma once

#include <vector>

#include "wacal/geometry.hpp"

namespace wacal {

struct Frame {
  int frame_id = 0;
  std::vector<std::pair<int, Pixel>> corners;  // (point id, measurement)
};

struct ObservationSet {
  std::vector<Frame> frames;

  std::size_t total_corners() const {
    std::size_t n = 0;
    for (const auto& f : frames) n += f.corners.size();
    return n;
  }
};

}  // namespace wacal
