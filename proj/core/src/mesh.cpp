#include "steklov/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "steklov/errors.hpp"

namespace steklov {

std::string_view to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::kFractal: return "fractal";
    case BoundaryTag::kLateral: return "lateral";
    case BoundaryTag::kTop: return "top";
  }
  return "unknown";
}

BoundaryTag boundary_tag_from_string(std::string_view name) {
  if (name == "fractal") return BoundaryTag::kFractal;
  if (name == "lateral") return BoundaryTag::kLateral;
  if (name == "top") return BoundaryTag::kTop;
  throw ArgumentError("unknown boundary tag '" + std::string(name) + "'");
}

double TriMesh::triangle_area(std::size_t t) const {
  const auto& tri = triangles[t];
  const Vec2 a = vertices[static_cast<std::size_t>(tri[0])];
  return 0.5 * cross(vertices[static_cast<std::size_t>(tri[1])] - a, vertices[static_cast<std::size_t>(tri[2])] - a);
}

double TriMesh::area() const {
  double total = 0.0;
  for (std::size_t t = 0; t < triangles.size(); ++t) total += triangle_area(t);
  return total;
}

namespace {

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint32_t>(std::min(a, b));
  const auto hi = static_cast<std::uint32_t>(std::max(a, b));
  return (static_cast<std::uint64_t>(lo) << 32) | hi;
}

std::uint64_t node_key(std::int64_t i, std::int64_t j, int orientation) {
  // 31 bits per coordinate (offset to stay non-negative) plus the orientation bit.
  const auto ui = static_cast<std::uint64_t>(i + (std::int64_t{1} << 30)) & 0x7fffffffULL;
  const auto uj = static_cast<std::uint64_t>(j + (std::int64_t{1} << 30)) & 0x7fffffffULL;
  return (ui << 32) | (uj << 1) | static_cast<std::uint64_t>(orientation);
}

}  // namespace

std::size_t TriMesh::edge_count() const {
  std::unordered_map<std::uint64_t, int> edges;
  edges.reserve(triangles.size() * 2);
  for (const auto& t : triangles) {
    for (int k = 0; k < 3; ++k) edges.emplace(edge_key(t[k], t[(k + 1) % 3]), 0);
  }
  return edges.size();
}

namespace {

// Orders boundary edges into a single loop starting at `start_vertex` (or the first edge).
void order_boundary_loop(std::vector<BoundaryEdge>& edges, int start_vertex) {
  if (edges.empty()) return;
  std::unordered_map<int, std::size_t> outgoing;
  outgoing.reserve(edges.size() * 2);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (!outgoing.emplace(edges[e].v[0], e).second) {
      throw GeometryError("boundary vertex with two outgoing edges (polygon touches itself)");
    }
  }
  auto it = outgoing.find(start_vertex);
  std::size_t cur = it != outgoing.end() ? it->second : 0;
  std::vector<BoundaryEdge> loop;
  loop.reserve(edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    loop.push_back(edges[cur]);
    auto next = outgoing.find(edges[cur].v[1]);
    if (next == outgoing.end()) throw GeometryError("boundary edges do not close");
    cur = next->second;
  }
  if (loop.front().v[0] != loop.back().v[1]) throw GeometryError("boundary is not a single closed loop");
  edges = std::move(loop);
}

}  // namespace

TriMesh mesh_polyomino(const DomainPolygon& domain, int refinement) {
  if (refinement < 0) throw ArgumentError("refinement must be >= 0");
  if (refinement > 8) throw CapacityError("refinement level exceeds the supported maximum 8");
  if (!(domain.grid_pitch > 0.0)) throw GeometryError("polygon carries no grid pitch");
  if (!is_simple_rectilinear(domain)) {
    throw GeometryError("polygon is not a simple axis-aligned polygon on its grid");
  }
  if (shoelace_area(domain.vertices) <= 0.0) throw GeometryError("polygon must be counter-clockwise");

  const int scale = 1 << refinement;
  const double h = domain.grid_pitch / scale;
  const Vec2 o = domain.grid_origin;
  const std::size_t nv = domain.vertices.size();

  std::vector<std::int64_t> vi(nv), vj(nv);
  for (std::size_t k = 0; k < nv; ++k) {
    vi[k] = std::llround((domain.vertices[k].x - o.x) / domain.grid_pitch) * scale;
    vj[k] = std::llround((domain.vertices[k].y - o.y) / domain.grid_pitch) * scale;
  }
  const std::int64_t imin = *std::min_element(vi.begin(), vi.end());
  const std::int64_t imax = *std::max_element(vi.begin(), vi.end());
  const std::int64_t jmin = *std::min_element(vj.begin(), vj.end());
  const std::int64_t jmax = *std::max_element(vj.begin(), vj.end());
  const std::int64_t W = imax - imin;
  const std::int64_t H = jmax - jmin;
  if (W * H > (std::int64_t{1} << 26)) throw CapacityError("mesh would exceed 2^26 grid cells");

  // Row crossings of vertical polygon edges at cell-centre height; map unit boundary
  // segments back to the polygon edge that owns them.
  std::vector<std::vector<std::int64_t>> rows(static_cast<std::size_t>(H));
  std::unordered_map<std::uint64_t, std::size_t> owner;
  for (std::size_t e = 0; e < nv; ++e) {
    const std::size_t f = (e + 1) % nv;
    const std::int64_t i0 = vi[e] - imin, j0 = vj[e] - jmin;
    const std::int64_t i1 = vi[f] - imin, j1 = vj[f] - jmin;
    if (i0 == i1) {
      for (std::int64_t j = std::min(j0, j1); j < std::max(j0, j1); ++j) {
        rows[static_cast<std::size_t>(j)].push_back(i0);
        owner.emplace(node_key(i0, j, 1), e);
      }
    } else {
      for (std::int64_t i = std::min(i0, i1); i < std::max(i0, i1); ++i) owner.emplace(node_key(i, j0, 0), e);
    }
  }

  std::vector<std::uint8_t> inside(static_cast<std::size_t>(W * H), 0);
  auto cell = [&](std::int64_t i, std::int64_t j) -> bool {
    if (i < 0 || j < 0 || i >= W || j >= H) return false;
    return inside[static_cast<std::size_t>(j * W + i)] != 0;
  };
  for (std::int64_t j = 0; j < H; ++j) {
    auto& xs = rows[static_cast<std::size_t>(j)];
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      for (std::int64_t i = xs[k]; i < xs[k + 1]; ++i) inside[static_cast<std::size_t>(j * W + i)] = 1;
    }
  }

  TriMesh mesh;
  mesh.h = h;
  std::vector<int> node(static_cast<std::size_t>((W + 1) * (H + 1)), -1);
  auto node_at = [&](std::int64_t i, std::int64_t j) -> int& {
    return node[static_cast<std::size_t>(j * (W + 1) + i)];
  };
  for (std::int64_t j = 0; j <= H; ++j) {
    for (std::int64_t i = 0; i <= W; ++i) {
      if (cell(i, j) || cell(i - 1, j) || cell(i, j - 1) || cell(i - 1, j - 1)) {
        node_at(i, j) = static_cast<int>(mesh.vertices.size());
        mesh.vertices.push_back({o.x + static_cast<double>(i + imin) * h, o.y + static_cast<double>(j + jmin) * h});
      }
    }
  }

  std::size_t unit_boundary_edges = 0;
  for (std::int64_t j = 0; j < H; ++j) {
    for (std::int64_t i = 0; i < W; ++i) {
      if (!cell(i, j)) continue;
      const int sw = node_at(i, j), se = node_at(i + 1, j);
      const int ne = node_at(i + 1, j + 1), nw = node_at(i, j + 1);
      mesh.triangles.push_back({sw, se, ne});
      mesh.triangles.push_back({sw, ne, nw});

      auto add = [&](int a, int b, std::uint64_t key) {
        auto it = owner.find(key);
        if (it == owner.end()) throw GeometryError("cell boundary does not lie on the polygon");
        const std::size_t e = it->second;
        BoundaryTag tag;
        if (domain.edge_is_fractal(e)) {
          tag = BoundaryTag::kFractal;
        } else {
          const Vec2 d = domain.vertices[(e + 1) % nv] - domain.vertices[e];
          tag = std::abs(d.x) > std::abs(d.y) ? BoundaryTag::kTop : BoundaryTag::kLateral;
        }
        mesh.boundary_edges.push_back({{a, b}, tag});
        ++unit_boundary_edges;
      };
      if (!cell(i, j - 1)) add(sw, se, node_key(i, j, 0));
      if (!cell(i + 1, j)) add(se, ne, node_key(i + 1, j, 1));
      if (!cell(i, j + 1)) add(ne, nw, node_key(i, j + 1, 0));
      if (!cell(i - 1, j)) add(nw, sw, node_key(i, j, 1));
    }
  }
  if (unit_boundary_edges != owner.size()) {
    throw GeometryError("polygon boundary and cell boundary disagree");
  }
  order_boundary_loop(mesh.boundary_edges, node_at(vi[0] - imin, vj[0] - jmin));
  return mesh;
}

TriMesh boundary_skeleton(const DomainPolygon& domain) {
  const std::size_t nv = domain.vertices.size();
  if (nv < 3) throw GeometryError("boundary_skeleton: polygon needs at least three vertices");
  TriMesh mesh;
  mesh.vertices = domain.vertices;
  for (std::size_t e = 0; e < nv; ++e) {
    BoundaryTag tag;
    if (domain.edge_is_fractal(e)) {
      tag = BoundaryTag::kFractal;
    } else {
      const Vec2 d = domain.vertices[(e + 1) % nv] - domain.vertices[e];
      tag = std::abs(d.x) > std::abs(d.y) ? BoundaryTag::kTop : BoundaryTag::kLateral;
    }
    mesh.boundary_edges.push_back({{static_cast<int>(e), static_cast<int>((e + 1) % nv)}, tag});
    mesh.h = std::max(mesh.h, norm(domain.vertices[(e + 1) % nv] - domain.vertices[e]));
  }
  return mesh;
}

TriMesh refine(const TriMesh& mesh) {
  TriMesh out;
  out.h = 0.5 * mesh.h;
  out.vertices = mesh.vertices;
  std::unordered_map<std::uint64_t, int> midpoint;
  midpoint.reserve(mesh.triangles.size() * 2);
  auto mid = [&](int a, int b) {
    auto [it, fresh] = midpoint.emplace(edge_key(a, b), static_cast<int>(out.vertices.size()));
    if (fresh) {
      const Vec2 pa = mesh.vertices[static_cast<std::size_t>(a)];
      const Vec2 pb = mesh.vertices[static_cast<std::size_t>(b)];
      out.vertices.push_back(0.5 * (pa + pb));
    }
    return it->second;
  };
  out.triangles.reserve(mesh.triangles.size() * 4);
  for (const auto& t : mesh.triangles) {
    const int ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
    out.triangles.push_back({t[0], ab, ca});
    out.triangles.push_back({ab, t[1], bc});
    out.triangles.push_back({ca, bc, t[2]});
    out.triangles.push_back({ab, bc, ca});
  }
  out.boundary_edges.reserve(mesh.boundary_edges.size() * 2);
  for (const auto& e : mesh.boundary_edges) {
    auto it = midpoint.find(edge_key(e.v[0], e.v[1]));
    if (it == midpoint.end()) throw GeometryError("boundary edge not owned by any triangle");
    out.boundary_edges.push_back({{e.v[0], it->second}, e.tag});
    out.boundary_edges.push_back({{it->second, e.v[1]}, e.tag});
  }
  return out;
}

DofMap extract_dofmap(const TriMesh& mesh, TagSet gamma_tags) {
  const std::size_t n = mesh.vertex_count();
  std::vector<std::uint8_t> on_boundary(n, 0), on_gamma(n, 0);
  for (const auto& e : mesh.boundary_edges) {
    for (int v : e.v) {
      on_boundary[static_cast<std::size_t>(v)] = 1;
      if (gamma_tags.contains(e.tag)) on_gamma[static_cast<std::size_t>(v)] = 1;
    }
  }
  DofMap dm;
  dm.boundary_position.assign(n, -1);
  for (std::size_t v = 0; v < n; ++v) {
    if (on_boundary[v]) {
      dm.boundary_position[v] = static_cast<int>(dm.boundary.size());
      dm.boundary.push_back(static_cast<int>(v));
    } else {
      dm.interior.push_back(static_cast<int>(v));
    }
    if (on_gamma[v]) dm.robin.push_back(static_cast<int>(v));
  }
  return dm;
}

TriMesh mesh_disk(int sides, int rings, double radius) {
  if (sides < 3) throw ArgumentError("mesh_disk: need at least 3 sides");
  if (!(radius > 0.0)) throw ArgumentError("mesh_disk: radius must be positive");
  if (rings <= 0) rings = std::max(1, static_cast<int>(std::lround(sides / (2.0 * std::numbers::pi))));

  TriMesh mesh;
  mesh.vertices.push_back({0.0, 0.0});
  std::vector<int> first(static_cast<std::size_t>(rings) + 1, 0), count(static_cast<std::size_t>(rings) + 1, 1);
  for (int k = 1; k <= rings; ++k) {
    const int m = k == rings ? sides : std::max(3, static_cast<int>(std::lround(static_cast<double>(sides) * k / rings)));
    first[static_cast<std::size_t>(k)] = static_cast<int>(mesh.vertices.size());
    count[static_cast<std::size_t>(k)] = m;
    const double rho = radius * static_cast<double>(k) / rings;
    for (int i = 0; i < m; ++i) {
      const double th = 2.0 * std::numbers::pi * i / m;
      mesh.vertices.push_back({rho * std::cos(th), rho * std::sin(th)});
    }
  }
  for (int i = 0; i < count[1]; ++i) {
    mesh.triangles.push_back({0, first[1] + i, first[1] + (i + 1) % count[1]});
  }
  for (int k = 2; k <= rings; ++k) {
    const int ma = count[static_cast<std::size_t>(k) - 1], mb = count[static_cast<std::size_t>(k)];
    const int fa = first[static_cast<std::size_t>(k) - 1], fb = first[static_cast<std::size_t>(k)];
    int i = 0, j = 0;
    while (i < ma || j < mb) {
      // Compare the next angles as exact fractions (i+1)/ma vs (j+1)/mb.
      const bool advance_outer =
          j < mb && (i == ma || static_cast<long long>(j + 1) * ma <= static_cast<long long>(i + 1) * mb);
      if (advance_outer) {
        mesh.triangles.push_back({fa + i % ma, fb + j % mb, fb + (j + 1) % mb});
        ++j;
      } else {
        mesh.triangles.push_back({fa + i % ma, fb + j % mb, fa + (i + 1) % ma});
        ++i;
      }
    }
  }
  const int fr = first[static_cast<std::size_t>(rings)];
  for (int i = 0; i < sides; ++i) {
    mesh.boundary_edges.push_back({{fr + i, fr + (i + 1) % sides}, BoundaryTag::kLateral});
  }
  mesh.h = radius * std::max(1.0 / rings, 2.0 * std::sin(std::numbers::pi / sides));
  return mesh;
}

void validate_mesh(const TriMesh& mesh) {
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    for (int v : mesh.triangles[t]) {
      if (v < 0 || static_cast<std::size_t>(v) >= mesh.vertex_count()) throw GeometryError("triangle index out of range");
    }
    if (!(mesh.triangle_area(t) > 0.0)) {
      std::ostringstream os;
      os << "triangle " << t << " has non-positive signed area";
      throw GeometryError(os.str());
    }
  }
  // Directed edge multiplicities: interior edges appear once in each direction.
  std::unordered_map<std::uint64_t, int> directed;
  directed.reserve(mesh.triangles.size() * 3);
  auto dkey = [](int a, int b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
  };
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      if (++directed[dkey(t[k], t[(k + 1) % 3])] > 1) throw GeometryError("duplicate directed edge");
    }
  }
  std::size_t expected_boundary = 0;
  for (const auto& [key, n] : directed) {
    const int a = static_cast<int>(key >> 32), b = static_cast<int>(key & 0xffffffffULL);
    if (!directed.contains(dkey(b, a))) ++expected_boundary;
  }
  if (expected_boundary != mesh.boundary_edges.size()) throw GeometryError("boundary edge count mismatch");
  for (std::size_t e = 0; e < mesh.boundary_edges.size(); ++e) {
    const auto& be = mesh.boundary_edges[e];
    if (!directed.contains(dkey(be.v[0], be.v[1])) || directed.contains(dkey(be.v[1], be.v[0]))) {
      throw GeometryError("boundary edge is not owned by exactly one triangle");
    }
    const auto& next = mesh.boundary_edges[(e + 1) % mesh.boundary_edges.size()];
    if (be.v[1] != next.v[0]) throw GeometryError("boundary edges are not a single ordered loop");
  }
}

}  // namespace steklov
