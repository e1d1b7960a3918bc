#include "steklov/spatial.hpp"

#include <algorithm>
#include <limits>

namespace steklov {

SegmentGrid::SegmentGrid(std::vector<Segment> segments) : segments_(std::move(segments)) {
  if (segments_.empty()) return;
  double xmin = std::numeric_limits<double>::infinity(), ymin = xmin;
  double xmax = -xmin, ymax = -xmin;
  double total_len = 0.0;
  for (const auto& [a, b] : segments_) {
    xmin = std::min({xmin, a.x, b.x});
    xmax = std::max({xmax, a.x, b.x});
    ymin = std::min({ymin, a.y, b.y});
    ymax = std::max({ymax, a.y, b.y});
    total_len += norm(b - a);
  }
  const double w = std::max(xmax - xmin, 1e-300);
  const double h = std::max(ymax - ymin, 1e-300);
  const double n = static_cast<double>(segments_.size());
  // Aim for O(1) segments per cell, never finer than the mean segment length.
  double cell = std::max(std::sqrt(w * h / n), total_len / n);
  if (!(cell > 0.0)) cell = std::max(w, h);
  cell_ = cell;
  origin_ = {xmin, ymin};
  nx_ = std::clamp(static_cast<int>(std::ceil(w / cell_)), 1, 1 << 14);
  ny_ = std::clamp(static_cast<int>(std::ceil(h / cell_)), 1, 1 << 14);

  auto cell_range = [&](const Segment& s, int& i0, int& i1, int& j0, int& j1) {
    auto ci = [&](double x) { return std::clamp(static_cast<int>(std::floor((x - origin_.x) / cell_)), 0, nx_ - 1); };
    auto cj = [&](double y) { return std::clamp(static_cast<int>(std::floor((y - origin_.y) / cell_)), 0, ny_ - 1); };
    i0 = ci(std::min(s.first.x, s.second.x));
    i1 = ci(std::max(s.first.x, s.second.x));
    j0 = cj(std::min(s.first.y, s.second.y));
    j1 = cj(std::max(s.first.y, s.second.y));
  };

  const std::size_t ncells = static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_);
  offsets_.assign(ncells + 1, 0);
  for (const auto& s : segments_) {
    int i0, i1, j0, j1;
    cell_range(s, i0, i1, j0, j1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) ++offsets_[static_cast<std::size_t>(j) * nx_ + i + 1];
  }
  for (std::size_t c = 0; c < ncells; ++c) offsets_[c + 1] += offsets_[c];
  items_.resize(offsets_.back());
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t k = 0; k < segments_.size(); ++k) {
    int i0, i1, j0, j1;
    cell_range(segments_[k], i0, i1, j0, j1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) items_[fill[static_cast<std::size_t>(j) * nx_ + i]++] = k;
  }
}

double SegmentGrid::nearest_distance(Vec2 p) const {
  double best = std::numeric_limits<double>::infinity();
  if (segments_.empty()) return best;
  const double fx = (p.x - origin_.x) / cell_;
  const double fy = (p.y - origin_.y) / cell_;
  const int pi = std::clamp(static_cast<int>(std::floor(fx)), 0, nx_ - 1);
  const int pj = std::clamp(static_cast<int>(std::floor(fy)), 0, ny_ - 1);
  // Distance from p to the grid's bounding box; rings are measured from the clamped cell.
  const double outside = std::hypot(std::max({0.0, -fx, fx - nx_}), std::max({0.0, -fy, fy - ny_})) * cell_;
  const int max_ring = std::max({pi, nx_ - 1 - pi, pj, ny_ - 1 - pj});

  auto scan = [&](int i, int j) {
    if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return;
    const std::size_t c = static_cast<std::size_t>(j) * nx_ + i;
    for (std::size_t k = offsets_[c]; k < offsets_[c + 1]; ++k) {
      const auto& [a, b] = segments_[items_[k]];
      best = std::min(best, point_segment_distance(p, a, b));
    }
  };
  for (int ring = 0; ring <= max_ring; ++ring) {
    if (ring == 0) {
      scan(pi, pj);
    } else {
      for (int i = pi - ring; i <= pi + ring; ++i) {
        scan(i, pj - ring);
        scan(i, pj + ring);
      }
      for (int j = pj - ring + 1; j <= pj + ring - 1; ++j) {
        scan(pi - ring, j);
        scan(pi + ring, j);
      }
    }
    // Anything not yet scanned lies at least `ring` whole cells away from p's cell.
    const double bound = std::max(0.0, ring * cell_ - outside);
    if (best <= bound) break;
  }
  return best;
}

}  // namespace steklov
