#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace steklov {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Vec2 a, Vec2 b) = default;
};

inline constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
/// Counter-clockwise rotation by 90 degrees.
inline constexpr Vec2 rot90(Vec2 a) { return {-a.y, a.x}; }

/// Distance from p to the closed segment [a, b].
double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);

enum class FractalFamily { kMinkowski };

inline constexpr int kMaxGeneration = 8;

struct PrefractalSpec {
  FractalFamily family = FractalFamily::kMinkowski;
  int generation = 0;
  double base_length = 1.0;
  Vec2 anchor{0.0, 0.0};
  Vec2 direction{1.0, 0.0};

  /// Throws CapacityError for generation > kMaxGeneration, ArgumentError otherwise.
  void validate() const;
  /// Length of one elementary segment, base_length * 4^-g.
  double segment_length() const;
  /// Number of elementary segments, 8^g.
  std::size_t segment_count() const;
};

/// Ordered vertex list; a closed chain has an implicit segment from back() to front().
struct PolyChain {
  std::vector<Vec2> vertices;
  bool closed = false;

  std::size_t segment_count() const;
  std::pair<Vec2, Vec2> segment(std::size_t i) const;
  double length() const;
};

/// Counter-clockwise simple polygon. For prefractal domains the vertices
/// [fractal_first, fractal_last] are the prefractal chain.
struct DomainPolygon {
  std::vector<Vec2> vertices;
  double area = 0.0;
  std::size_t fractal_first = 0;
  std::size_t fractal_last = 0;
  /// Grid on which every vertex lies: origin + pitch * (i, j).
  Vec2 grid_origin{0.0, 0.0};
  double grid_pitch = 0.0;
  int generation = 0;
  double base_length = 1.0;

  std::size_t edge_count() const { return vertices.size(); }
  /// Edge i runs from vertices[i] to vertices[(i + 1) % n].
  bool edge_is_fractal(std::size_t i) const { return i >= fractal_first && i < fractal_last; }
  PolyChain boundary() const { return {vertices, true}; }
};

/// Signed shoelace area (positive for counter-clockwise order).
double shoelace_area(std::span<const Vec2> vertices);

/// Minkowski prefractal of the given generation: 8^g axis-aligned segments of length
/// base_length * 4^-g running from anchor to anchor + base_length * direction.
PolyChain generate_minkowski(const PrefractalSpec& spec);

/// Square of side base_length whose first side (the one along `direction`) is replaced
/// by the prefractal chain; the square lies to the left of `direction`.
DomainPolygon build_domain(const PrefractalSpec& spec);

/// True when the rectilinear polygon visits every node of its pitch grid at most once.
bool is_simple_rectilinear(const DomainPolygon& polygon);

/// Symmetric Hausdorff distance. Points are sampled every <= sample_spacing along each
/// chain (vertices always included) and projected exactly onto the other chain.
double hausdorff_distance(const PolyChain& a, const PolyChain& b, double sample_spacing);

/// Area of (P \ Q) u (Q \ P) from cell-centre rasterization on a grid_n x grid_n grid
/// spanning the joint bounding box.
double symmetric_difference_area(const DomainPolygon& p, const DomainPolygon& q, int grid_n);

struct BoxCountResult {
  double dimension = 0.0;
  double fit_residual = 0.0;
  std::vector<double> scales;
  std::vector<std::size_t> counts;
};

/// Least-squares slope of log N(eps) against log(1/eps), where N counts the boxes of a
/// grid anchored at the chain's bounding-box corner that the chain passes through.
BoxCountResult box_counting_dimension(const PolyChain& chain, std::span<const double> scales);

}  // namespace steklov
