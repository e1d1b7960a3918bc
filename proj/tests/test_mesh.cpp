#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "steklov/errors.hpp"
#include "steklov/geometry.hpp"
#include "steklov/io.hpp"
#include "steklov/mesh.hpp"

using namespace steklov;

namespace {

DomainPolygon domain(int g, double length = 1.0) {
  PrefractalSpec s;
  s.generation = g;
  s.base_length = length;
  return build_domain(s);
}

double boundary_length(const TriMesh& m, TagSet tags = TagSet::all()) {
  double len = 0.0;
  for (const auto& e : m.boundary_edges) {
    if (tags.contains(e.tag)) len += norm(m.vertices[static_cast<std::size_t>(e.v[1])] - m.vertices[static_cast<std::size_t>(e.v[0])]);
  }
  return len;
}

}  // namespace

TEST(Polyomino, UnitSquareCounts) {
  for (int r = 0; r <= 5; ++r) {
    const TriMesh m = mesh_polyomino(domain(0), r);
    const std::size_t n = (1u << r) + 1;
    EXPECT_EQ(m.vertex_count(), n * n);
    EXPECT_EQ(m.triangles.size(), 2 * (n - 1) * (n - 1));
    EXPECT_EQ(m.boundary_edges.size(), 4 * (n - 1));
    EXPECT_NEAR(m.h, std::ldexp(1.0, -r), 1e-15);
    // Euler: V - E + F = 1 for a disk.
    EXPECT_EQ(static_cast<long>(m.vertex_count()) - static_cast<long>(m.edge_count()) + static_cast<long>(m.triangles.size()), 1);
    validate_mesh(m);
  }
}

TEST(Polyomino, PrefractalAreaAndPerimeter) {
  for (int g = 0; g <= 3; ++g) {
    for (int r = 0; r <= 2; ++r) {
      const TriMesh m = mesh_polyomino(domain(g, 2.0), r);
      validate_mesh(m);
      EXPECT_NEAR(m.area(), 4.0, 1e-10);
      EXPECT_NEAR(boundary_length(m), 2.0 * (3.0 + std::pow(2.0, g)), 1e-10);
      EXPECT_NEAR(boundary_length(m, {BoundaryTag::kFractal}), 2.0 * std::pow(2.0, g), 1e-10);
      EXPECT_NEAR(boundary_length(m, {BoundaryTag::kTop}), 2.0, 1e-10);
      EXPECT_NEAR(boundary_length(m, {BoundaryTag::kLateral}), 4.0, 1e-10);
    }
  }
}

TEST(Polyomino, BoundaryLoopIsOrientedCounterClockwise) {
  const TriMesh m = mesh_polyomino(domain(2), 1);
  // Consecutive edges chain head to tail and the enclosed signed area is positive.
  double twice_area = 0.0;
  for (std::size_t i = 0; i < m.boundary_edges.size(); ++i) {
    const auto& e = m.boundary_edges[i];
    const auto& next = m.boundary_edges[(i + 1) % m.boundary_edges.size()];
    EXPECT_EQ(e.v[1], next.v[0]);
    twice_area += cross(m.vertices[static_cast<std::size_t>(e.v[0])], m.vertices[static_cast<std::size_t>(e.v[1])]);
  }
  EXPECT_NEAR(0.5 * twice_area, 1.0, 1e-12);
}

TEST(Refine, QuadruplesTriangles) {
  const TriMesh m = mesh_polyomino(domain(1), 1);
  const TriMesh f = refine(m);
  validate_mesh(f);
  EXPECT_EQ(f.triangles.size(), 4 * m.triangles.size());
  EXPECT_EQ(f.vertex_count(), m.vertex_count() + m.edge_count());
  EXPECT_EQ(f.boundary_edges.size(), 2 * m.boundary_edges.size());
  EXPECT_NEAR(f.area(), m.area(), 1e-12);
  EXPECT_NEAR(f.h, 0.5 * m.h, 1e-15);
  for (std::size_t i = 0; i < m.vertex_count(); ++i) EXPECT_EQ(f.vertices[i], m.vertices[i]);
  EXPECT_NEAR(boundary_length(f, {BoundaryTag::kFractal}), boundary_length(m, {BoundaryTag::kFractal}), 1e-12);
}

TEST(Refine, MatchesFinerStructuredMesh) {
  const TriMesh a = refine(mesh_polyomino(domain(0), 2));
  const TriMesh b = mesh_polyomino(domain(0), 3);
  EXPECT_EQ(a.vertex_count(), b.vertex_count());
  EXPECT_EQ(a.triangles.size(), b.triangles.size());
}

TEST(DofMap, PartitionsVertices) {
  const TriMesh m = mesh_polyomino(domain(2), 1);
  const DofMap d = extract_dofmap(m, {BoundaryTag::kFractal});
  EXPECT_EQ(d.interior.size() + d.boundary.size(), m.vertex_count());
  std::set<int> all(d.interior.begin(), d.interior.end());
  all.insert(d.boundary.begin(), d.boundary.end());
  EXPECT_EQ(all.size(), m.vertex_count());
  EXPECT_TRUE(std::is_sorted(d.boundary.begin(), d.boundary.end()));
  EXPECT_TRUE(std::is_sorted(d.robin.begin(), d.robin.end()));
  // Gamma = fractal side: its 64 segments have 65 distinct vertices at r = 1 plus the 64 midpoints.
  EXPECT_EQ(d.robin.size(), 129u);
  for (int v : d.robin) EXPECT_GE(d.boundary_position[static_cast<std::size_t>(v)], 0);
  for (int v : d.interior) EXPECT_EQ(d.boundary_position[static_cast<std::size_t>(v)], -1);
  const DofMap full = extract_dofmap(m, TagSet::all());
  EXPECT_EQ(full.robin, full.boundary);
}

TEST(Disk, AreaAndPerimeterOfInscribedPolygon) {
  for (int n : {16, 64, 256}) {
    const TriMesh m = mesh_disk(n);
    validate_mesh(m);
    EXPECT_NEAR(m.area(), 0.5 * n * std::sin(2.0 * std::numbers::pi / n), 1e-10);
    EXPECT_NEAR(boundary_length(m), 2.0 * n * std::sin(std::numbers::pi / n), 1e-10);
    EXPECT_EQ(m.boundary_edges.size(), static_cast<std::size_t>(n));
  }
  const TriMesh r2 = mesh_disk(32, 4, 2.0);
  EXPECT_NEAR(r2.area(), 4.0 * 0.5 * 32 * std::sin(2.0 * std::numbers::pi / 32), 1e-10);
  EXPECT_THROW(mesh_disk(2), ArgumentError);
}

TEST(Skeleton, CarriesTaggedBoundaryOnly) {
  const DomainPolygon d = domain(2);
  const TriMesh s = boundary_skeleton(d);
  EXPECT_TRUE(s.triangles.empty());
  EXPECT_EQ(s.boundary_edges.size(), d.edge_count());
  EXPECT_NEAR(boundary_length(s, {BoundaryTag::kFractal}), 4.0, 1e-12);
  EXPECT_NEAR(boundary_length(s, {BoundaryTag::kTop}), 1.0, 1e-12);
}

TEST(Validate, RejectsInvertedTriangle) {
  TriMesh m = mesh_polyomino(domain(0), 1);
  std::swap(m.triangles[0][1], m.triangles[0][2]);
  EXPECT_THROW(validate_mesh(m), GeometryError);
}

TEST(Validate, RejectsOffGridPolygon) {
  DomainPolygon d = domain(0);
  d.vertices[1].x = 0.7;
  EXPECT_THROW(mesh_polyomino(d, 1), GeometryError);
}

TEST(MeshIo, JsonRoundTrip) {
  const TriMesh m = mesh_polyomino(domain(1), 1);
  const TriMesh b = io::mesh_from_json(nlohmann::json::parse(io::to_json(m).dump()));
  EXPECT_EQ(b.vertices, m.vertices);
  EXPECT_EQ(b.triangles, m.triangles);
  ASSERT_EQ(b.boundary_edges.size(), m.boundary_edges.size());
  for (std::size_t i = 0; i < b.boundary_edges.size(); ++i) {
    EXPECT_EQ(b.boundary_edges[i].v, m.boundary_edges[i].v);
    EXPECT_EQ(b.boundary_edges[i].tag, m.boundary_edges[i].tag);
  }
}

TEST(MeshIo, VtkAndPgmLayout) {
  const TriMesh m = mesh_polyomino(domain(0), 1);
  std::vector<double> f(m.vertex_count(), 1.5);
  const io::PointField fields[] = {{"f", f}};
  std::ostringstream vtk;
  io::write_vtk(vtk, m, "title", fields);
  const std::string s = vtk.str();
  EXPECT_EQ(s.rfind("# vtk DataFile Version 3.0\ntitle\nASCII\nDATASET UNSTRUCTURED_GRID\n", 0), 0u);
  EXPECT_NE(s.find("POINTS 9 double"), std::string::npos);
  EXPECT_NE(s.find("CELLS 8 32"), std::string::npos);
  EXPECT_NE(s.find("SCALARS f double 1"), std::string::npos);

  std::ostringstream pgm;
  const std::vector<unsigned char> px{0, 128, 255, 7, 8, 9};
  io::write_pgm(pgm, 3, 2, px, "c");
  EXPECT_EQ(pgm.str(), std::string("P5\n# c\n3 2\n255\n") + std::string(px.begin(), px.end()));
  EXPECT_THROW(io::write_pgm(pgm, 4, 2, px), ArgumentError);
}
