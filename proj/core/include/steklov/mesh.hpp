#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "steklov/geometry.hpp"

namespace steklov {

enum class BoundaryTag : std::uint8_t { kFractal = 0, kLateral = 1, kTop = 2 };

std::string_view to_string(BoundaryTag tag);
/// Throws ArgumentError for unknown names.
BoundaryTag boundary_tag_from_string(std::string_view name);

/// Small set of boundary tags (bitmask).
class TagSet {
 public:
  constexpr TagSet() = default;
  constexpr TagSet(std::initializer_list<BoundaryTag> tags) {
    for (BoundaryTag t : tags) bits_ |= mask(t);
  }
  static constexpr TagSet all() { return {BoundaryTag::kFractal, BoundaryTag::kLateral, BoundaryTag::kTop}; }

  constexpr bool contains(BoundaryTag t) const { return (bits_ & mask(t)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr void insert(BoundaryTag t) { bits_ |= mask(t); }
  constexpr bool operator==(const TagSet&) const = default;

 private:
  static constexpr std::uint8_t mask(BoundaryTag t) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(t)); }
  std::uint8_t bits_ = 0;
};

struct BoundaryEdge {
  std::array<int, 2> v{};  // oriented with the domain on the left
  BoundaryTag tag = BoundaryTag::kLateral;
};

/// Conforming P1 triangulation; boundary edges are stored as one closed loop in order.
struct TriMesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary_edges;
  double h = 0.0;

  std::size_t vertex_count() const { return vertices.size(); }
  double triangle_area(std::size_t t) const;
  double area() const;
  /// Number of distinct edges (interior and boundary).
  std::size_t edge_count() const;
};

struct DofMap {
  std::vector<int> interior;
  std::vector<int> boundary;
  std::vector<int> robin;  // subset of `boundary` on edges tagged in the Gamma tag set
  std::vector<int> boundary_position;  // vertex -> index into `boundary`, or -1
};

/// Structured triangulation of a rectilinear polygon whose vertices lie on its grid:
/// pitch grid_pitch * 2^-r, cells classified by their centre, each inside cell split
/// along its SW-NE diagonal. Vertices are numbered row-major.
TriMesh mesh_polyomino(const DomainPolygon& domain, int refinement);

/// Boundary-only mesh of a polygon: its vertices and tagged edges, no triangles. Enough
/// for boundary measures, which never look at the interior.
TriMesh boundary_skeleton(const DomainPolygon& domain);

/// Uniform red refinement: every triangle split into four through its edge midpoints.
/// Old vertices keep their indices; midpoints are appended.
TriMesh refine(const TriMesh& mesh);

DofMap extract_dofmap(const TriMesh& mesh, TagSet gamma_tags);

/// Ring triangulation of the regular polygon with `sides` vertices inscribed in the circle
/// of the given radius. `rings` concentric layers (0 picks a near-isotropic count).
/// Boundary edges are tagged kLateral.
TriMesh mesh_disk(int sides, int rings = 0, double radius = 1.0);

/// Structural checks: positive triangle areas, one closed boundary loop, every boundary
/// edge owned by exactly one triangle. Throws GeometryError on the first violation.
void validate_mesh(const TriMesh& mesh);

}  // namespace steklov
