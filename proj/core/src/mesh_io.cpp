#include <iomanip>
#include <ostream>

#include "steklov/errors.hpp"
#include "steklov/io.hpp"

namespace steklov::io {

using nlohmann::json;

json to_json(const TriMesh& mesh) {
  json verts = json::array(), tris = json::array(), bnd = json::array();
  for (const Vec2& p : mesh.vertices) verts.push_back({p.x, p.y});
  for (const auto& t : mesh.triangles) tris.push_back({t[0], t[1], t[2]});
  for (const auto& e : mesh.boundary_edges) bnd.push_back({e.v[0], e.v[1], std::string(to_string(e.tag))});
  return {{"version", kFormatVersion}, {"vertices", verts}, {"triangles", tris}, {"boundary", bnd}, {"h", mesh.h}};
}

TriMesh mesh_from_json(const json& doc) {
  if (!doc.is_object() || doc.value("version", 0) != kFormatVersion) {
    throw ArgumentError("unsupported or missing mesh document version");
  }
  TriMesh mesh;
  for (const auto& p : doc.at("vertices")) mesh.vertices.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  for (const auto& t : doc.at("triangles")) mesh.triangles.push_back({t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>()});
  for (const auto& e : doc.at("boundary")) {
    mesh.boundary_edges.push_back({{e.at(0).get<int>(), e.at(1).get<int>()}, boundary_tag_from_string(e.at(2).get<std::string>())});
  }
  mesh.h = doc.at("h").get<double>();
  validate_mesh(mesh);
  return mesh;
}

void write_vtk(std::ostream& os, const TriMesh& mesh, std::string_view title, std::span<const PointField> fields) {
  const std::size_t nv = mesh.vertex_count();
  const std::size_t nt = mesh.triangles.size();
  os << "# vtk DataFile Version 3.0\n";
  // The title line is limited to 256 characters by the format.
  os << title.substr(0, 255) << "\n";
  os << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << std::setprecision(17);
  os << "POINTS " << nv << " double\n";
  for (const Vec2& p : mesh.vertices) os << p.x << ' ' << p.y << " 0\n";
  os << "CELLS " << nt << ' ' << 4 * nt << '\n';
  for (const auto& t : mesh.triangles) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  os << "CELL_TYPES " << nt << '\n';
  for (std::size_t t = 0; t < nt; ++t) os << "5\n";
  if (!fields.empty()) {
    os << "POINT_DATA " << nv << '\n';
    for (const auto& f : fields) {
      if (f.values.size() != nv) throw ArgumentError("VTK field '" + f.name + "' has wrong length");
      os << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
      for (double v : f.values) os << v << '\n';
    }
  }
}

void write_pgm(std::ostream& os, int width, int height, std::span<const unsigned char> pixels, std::string_view comment) {
  if (width <= 0 || height <= 0 || pixels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw ArgumentError("write_pgm: pixel buffer does not match dimensions");
  }
  os << "P5\n";
  if (!comment.empty()) os << "# " << comment << '\n';
  os << width << ' ' << height << "\n255\n";
  os.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

}  // namespace steklov::io
