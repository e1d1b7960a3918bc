#include "steklov/geometry.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "steklov/errors.hpp"
#include "steklov/spatial.hpp"

namespace steklov {

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return norm(p - a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return norm(p - (a + t * ab));
}

void PrefractalSpec::validate() const {
  if (generation > kMaxGeneration) {
    std::ostringstream os;
    os << "prefractal generation " << generation << " exceeds the supported maximum "
       << kMaxGeneration << " (8^g segments)";
    throw CapacityError(os.str());
  }
  if (generation < 0) throw ArgumentError("prefractal generation must be >= 0");
  if (!(base_length > 0.0) || !std::isfinite(base_length)) {
    throw ArgumentError("base_length must be positive and finite");
  }
  const bool axis = (std::abs(direction.x) == 1.0 && direction.y == 0.0) ||
                    (direction.x == 0.0 && std::abs(direction.y) == 1.0);
  if (!axis) throw ArgumentError("direction must be an axis-aligned unit vector");
}

double PrefractalSpec::segment_length() const {
  return std::ldexp(base_length, -2 * generation);
}

std::size_t PrefractalSpec::segment_count() const {
  return std::size_t{1} << (3 * generation);
}

std::size_t PolyChain::segment_count() const {
  if (vertices.size() < 2) return 0;
  return closed ? vertices.size() : vertices.size() - 1;
}

std::pair<Vec2, Vec2> PolyChain::segment(std::size_t i) const {
  return {vertices[i], vertices[(i + 1) % vertices.size()]};
}

double PolyChain::length() const {
  double total = 0.0;
  for (std::size_t i = 0; i < segment_count(); ++i) {
    auto [a, b] = segment(i);
    total += norm(b - a);
  }
  return total;
}

double shoelace_area(std::span<const Vec2> v) {
  const std::size_t n = v.size();
  if (n < 3) return 0.0;
  // Shift to the first vertex to limit cancellation.
  const Vec2 o = v[0];
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) twice += cross(v[i] - o, v[(i + 1) % n] - o);
  return 0.5 * twice;
}

namespace {

struct IPoint {
  std::int64_t i;
  std::int64_t j;
};

// Depth-first expansion in integer units of the finest segment length; the frame is
// (direction, rot90(direction)).
void expand_minkowski(IPoint start, IPoint step, int level, std::vector<IPoint>& out) {
  if (level == 0) {
    out.push_back({start.i + step.i, start.j + step.j});
    return;
  }
  const IPoint e{step.i / 4, step.j / 4};
  const IPoint n{-e.j, e.i};
  const IPoint moves[8] = {e, n, e, {-n.i, -n.j}, {-n.i, -n.j}, e, n, e};
  IPoint p = start;
  for (const IPoint& m : moves) {
    expand_minkowski(p, m, level - 1, out);
    p = {p.i + m.i, p.j + m.j};
  }
}

}  // namespace

PolyChain generate_minkowski(const PrefractalSpec& spec) {
  spec.validate();
  const int g = spec.generation;
  const std::int64_t units = std::int64_t{1} << (2 * g);
  std::vector<IPoint> pts;
  pts.reserve(spec.segment_count() + 1);
  pts.push_back({0, 0});
  expand_minkowski({0, 0}, {units, 0}, g, pts);

  const double ell = spec.segment_length();
  const Vec2 d = spec.direction;
  const Vec2 n = rot90(d);
  PolyChain chain;
  chain.closed = false;
  chain.vertices.reserve(pts.size());
  for (const IPoint& p : pts) {
    const double a = ell * static_cast<double>(p.i);
    const double b = ell * static_cast<double>(p.j);
    chain.vertices.push_back({spec.anchor.x + a * d.x + b * n.x, spec.anchor.y + a * d.y + b * n.y});
  }
  // The endpoint is exactly anchor + L * direction in integer arithmetic.
  chain.vertices.back() = spec.anchor + spec.base_length * d;
  return chain;
}

DomainPolygon build_domain(const PrefractalSpec& spec) {
  PolyChain chain = generate_minkowski(spec);
  const Vec2 n = rot90(spec.direction);
  const double L = spec.base_length;

  DomainPolygon poly;
  poly.vertices = std::move(chain.vertices);
  poly.fractal_first = 0;
  poly.fractal_last = poly.vertices.size() - 1;
  const Vec2 end = poly.vertices.back();
  poly.vertices.push_back(end + L * n);
  poly.vertices.push_back(spec.anchor + L * n);
  poly.area = shoelace_area(poly.vertices);
  poly.grid_origin = spec.anchor;
  poly.grid_pitch = spec.segment_length();
  poly.generation = spec.generation;
  poly.base_length = L;
  if (std::abs(poly.area - L * L) > 1e-10 * L * L) {
    throw GeometryError("prefractal domain area differs from base_length^2");
  }
  return poly;
}

bool is_simple_rectilinear(const DomainPolygon& polygon) {
  const auto& v = polygon.vertices;
  const double h = polygon.grid_pitch;
  if (v.size() < 4 || !(h > 0.0)) return false;
  auto to_grid = [&](Vec2 p, std::int64_t& i, std::int64_t& j) {
    const double fi = (p.x - polygon.grid_origin.x) / h;
    const double fj = (p.y - polygon.grid_origin.y) / h;
    i = std::llround(fi);
    j = std::llround(fj);
    return std::abs(fi - static_cast<double>(i)) < 1e-9 && std::abs(fj - static_cast<double>(j)) < 1e-9;
  };
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(v.size() * 2);
  auto key = [](std::int64_t i, std::int64_t j) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32) |
           static_cast<std::uint32_t>(j);
  };
  for (std::size_t e = 0; e < v.size(); ++e) {
    std::int64_t i0, j0, i1, j1;
    if (!to_grid(v[e], i0, j0) || !to_grid(v[(e + 1) % v.size()], i1, j1)) return false;
    if (i0 != i1 && j0 != j1) return false;
    if (i0 == i1 && j0 == j1) return false;
    const std::int64_t steps = std::max(std::abs(i1 - i0), std::abs(j1 - j0));
    const std::int64_t di = (i1 - i0) / steps;
    const std::int64_t dj = (j1 - j0) / steps;
    for (std::int64_t s = 0; s < steps; ++s) {
      if (!seen.insert(key(i0 + s * di, j0 + s * dj)).second) return false;
    }
  }
  return true;
}

namespace {

std::vector<SegmentGrid::Segment> segments_of(const PolyChain& c) {
  std::vector<SegmentGrid::Segment> segs;
  if (c.vertices.size() == 1) {
    segs.push_back({c.vertices[0], c.vertices[0]});
    return segs;
  }
  segs.reserve(c.segment_count());
  for (std::size_t i = 0; i < c.segment_count(); ++i) segs.push_back(c.segment(i));
  return segs;
}

double directed_hausdorff(const PolyChain& from, const SegmentGrid& to, double spacing) {
  double worst = 0.0;
  auto visit = [&](Vec2 p) { worst = std::max(worst, to.nearest_distance(p)); };
  if (from.vertices.size() == 1) {
    visit(from.vertices[0]);
    return worst;
  }
  for (std::size_t s = 0; s < from.segment_count(); ++s) {
    auto [a, b] = from.segment(s);
    const double len = norm(b - a);
    const auto pieces = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / spacing)));
    for (std::size_t k = 0; k < pieces; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(pieces);
      visit(a + t * (b - a));
    }
  }
  if (!from.closed) visit(from.vertices.back());
  return worst;
}

}  // namespace

double hausdorff_distance(const PolyChain& a, const PolyChain& b, double sample_spacing) {
  if (a.vertices.empty() || b.vertices.empty()) {
    throw ArgumentError("hausdorff_distance: both chains must be nonempty");
  }
  if (!(sample_spacing > 0.0)) throw ArgumentError("hausdorff_distance: sample_spacing must be > 0");
  const SegmentGrid grid_a(segments_of(a));
  const SegmentGrid grid_b(segments_of(b));
  return std::max(directed_hausdorff(a, grid_b, sample_spacing),
                  directed_hausdorff(b, grid_a, sample_spacing));
}

namespace {

struct Raster {
  double x0, y0, px, py;
  int n;
};

// Per-row x-coordinates where the polygon boundary crosses the row's centre line.
std::vector<std::vector<double>> row_crossings(const DomainPolygon& poly, const Raster& r) {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(r.n));
  const auto& v = poly.vertices;
  for (std::size_t e = 0; e < v.size(); ++e) {
    const Vec2 a = v[e];
    const Vec2 b = v[(e + 1) % v.size()];
    if (a.y == b.y) continue;
    const double ylo = std::min(a.y, b.y);
    const double yhi = std::max(a.y, b.y);
    // Half-open [ylo, yhi) so shared vertices are counted once.
    int jlo = static_cast<int>(std::ceil((ylo - r.y0) / r.py - 0.5));
    int jhi = static_cast<int>(std::ceil((yhi - r.y0) / r.py - 0.5)) - 1;
    jlo = std::max(jlo, 0);
    jhi = std::min(jhi, r.n - 1);
    for (int j = jlo; j <= jhi; ++j) {
      const double yc = r.y0 + (j + 0.5) * r.py;
      const double x = a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y);
      rows[static_cast<std::size_t>(j)].push_back(x);
    }
  }
  for (auto& row : rows) std::sort(row.begin(), row.end());
  return rows;
}

// Number of cell centres x0 + (i + 1/2) px, 0 <= i < n, inside [lo, hi).
long long centres_in(const Raster& r, double lo, double hi) {
  auto first_at_or_after = [&](double x) {
    const double f = std::ceil((x - r.x0) / r.px - 0.5);
    return static_cast<long long>(std::clamp(f, 0.0, static_cast<double>(r.n)));
  };
  return std::max(0LL, first_at_or_after(hi) - first_at_or_after(lo));
}

}  // namespace

double symmetric_difference_area(const DomainPolygon& p, const DomainPolygon& q, int grid_n) {
  if (grid_n < 64) throw ArgumentError("symmetric_difference_area: grid_n must be >= 64");
  double xmin = std::numeric_limits<double>::infinity(), ymin = xmin;
  double xmax = -xmin, ymax = -xmin;
  for (const auto* poly : {&p, &q}) {
    for (const Vec2& v : poly->vertices) {
      xmin = std::min(xmin, v.x);
      xmax = std::max(xmax, v.x);
      ymin = std::min(ymin, v.y);
      ymax = std::max(ymax, v.y);
    }
  }
  const Raster r{xmin, ymin, (xmax - xmin) / grid_n, (ymax - ymin) / grid_n, grid_n};
  if (!(r.px > 0.0) || !(r.py > 0.0)) return 0.0;
  const auto rows_p = row_crossings(p, r);
  const auto rows_q = row_crossings(q, r);

  long long count = 0;
  std::vector<std::pair<double, int>> events;
  for (int j = 0; j < grid_n; ++j) {
    events.clear();
    for (double x : rows_p[static_cast<std::size_t>(j)]) events.push_back({x, 0});
    for (double x : rows_q[static_cast<std::size_t>(j)]) events.push_back({x, 1});
    std::sort(events.begin(), events.end());
    bool in_p = false, in_q = false;
    for (std::size_t k = 0; k + 1 < events.size(); ++k) {
      (events[k].second == 0 ? in_p : in_q) ^= true;
      if (in_p != in_q) count += centres_in(r, events[k].first, events[k + 1].first);
    }
  }
  return static_cast<double>(count) * r.px * r.py;
}

namespace {

// Cells of a pitch-eps grid anchored at `origin` touched by the segment [a, b]
// (Amanatides-Woo traversal, floor convention on grid lines).
template <typename Visit>
void traverse_cells(Vec2 a, Vec2 b, Vec2 origin, double eps, Visit&& visit) {
  const double ax = (a.x - origin.x) / eps, ay = (a.y - origin.y) / eps;
  const double bx = (b.x - origin.x) / eps, by = (b.y - origin.y) / eps;
  auto ix = static_cast<long long>(std::floor(ax));
  auto iy = static_cast<long long>(std::floor(ay));
  const auto ex = static_cast<long long>(std::floor(bx));
  const auto ey = static_cast<long long>(std::floor(by));
  const double dx = bx - ax, dy = by - ay;
  const int sx = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
  const int sy = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
  const double inf = std::numeric_limits<double>::infinity();
  double tmax_x = sx > 0 ? (static_cast<double>(ix + 1) - ax) / dx
                         : (sx < 0 ? (ax - static_cast<double>(ix)) / -dx : inf);
  double tmax_y = sy > 0 ? (static_cast<double>(iy + 1) - ay) / dy
                         : (sy < 0 ? (ay - static_cast<double>(iy)) / -dy : inf);
  const double tdx = sx != 0 ? 1.0 / std::abs(dx) : inf;
  const double tdy = sy != 0 ? 1.0 / std::abs(dy) : inf;
  std::size_t guard = static_cast<std::size_t>(std::abs(ex - ix) + std::abs(ey - iy)) + 4;
  while (guard-- > 0) {
    visit(ix, iy);
    if (ix == ex && iy == ey) break;
    if (tmax_x < tmax_y) {
      if (tmax_x > 1.0) break;
      ix += sx;
      tmax_x += tdx;
    } else {
      if (tmax_y > 1.0) break;
      iy += sy;
      tmax_y += tdy;
    }
  }
}

}  // namespace

BoxCountResult box_counting_dimension(const PolyChain& chain, std::span<const double> scales) {
  std::vector<double> eps;
  for (double s : scales) {
    if (!(s > 0.0) || !std::isfinite(s)) throw ArgumentError("box counting scales must be positive");
    eps.push_back(s);
  }
  std::sort(eps.begin(), eps.end());
  eps.erase(std::unique(eps.begin(), eps.end()), eps.end());
  if (eps.size() < 2) throw ArgumentError("box counting needs at least two distinct scales");
  if (chain.vertices.empty()) throw ArgumentError("box counting on an empty chain");

  Vec2 origin{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  for (const Vec2& v : chain.vertices) {
    origin.x = std::min(origin.x, v.x);
    origin.y = std::min(origin.y, v.y);
  }

  BoxCountResult out;
  std::vector<double> xs, ys;
  for (double e : eps) {
    std::unordered_set<std::uint64_t> boxes;
    auto mark = [&](long long i, long long j) {
      boxes.insert((static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32) |
                   static_cast<std::uint32_t>(j));
    };
    if (chain.segment_count() == 0) {
      traverse_cells(chain.vertices[0], chain.vertices[0], origin, e, mark);
    }
    for (std::size_t s = 0; s < chain.segment_count(); ++s) {
      auto [a, b] = chain.segment(s);
      traverse_cells(a, b, origin, e, mark);
    }
    out.scales.push_back(e);
    out.counts.push_back(boxes.size());
    xs.push_back(std::log(1.0 / e));
    ys.push_back(std::log(static_cast<double>(boxes.size())));
  }
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  out.dimension = sxy / sxx;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (my + out.dimension * (xs[i] - mx));
    ss += r * r;
  }
  out.fit_residual = std::sqrt(ss / n);
  return out;
}

}  // namespace steklov
