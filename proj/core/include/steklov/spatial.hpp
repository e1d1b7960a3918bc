#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "steklov/geometry.hpp"

namespace steklov {

/// Uniform bucket grid over a set of segments, used for nearest-distance queries.
/// Each segment is registered in every cell its bounding box overlaps.
class SegmentGrid {
 public:
  using Segment = std::pair<Vec2, Vec2>;

  explicit SegmentGrid(std::vector<Segment> segments);

  /// Exact distance from p to the nearest registered segment.
  double nearest_distance(Vec2 p) const;

  std::size_t size() const { return segments_.size(); }

 private:
  std::vector<Segment> segments_;
  Vec2 origin_{};
  double cell_ = 1.0;
  int nx_ = 1;
  int ny_ = 1;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> items_;
};

}  // namespace steklov
