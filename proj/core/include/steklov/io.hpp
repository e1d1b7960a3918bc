#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "steklov/geometry.hpp"
#include "steklov/mesh.hpp"

namespace steklov::io {

inline constexpr int kFormatVersion = 1;

// Versioned geometry documents:
// {"version":1,"kind":"polychain"|"polygon","vertices":[[x,y],...],"closed":bool,"meta":{...}}
nlohmann::json to_json(const PolyChain& chain, const nlohmann::json& meta = nlohmann::json::object());
nlohmann::json to_json(const DomainPolygon& polygon, const nlohmann::json& meta = nlohmann::json::object());
PolyChain chain_from_json(const nlohmann::json& doc);
DomainPolygon polygon_from_json(const nlohmann::json& doc);

// {"version":1,"vertices":[[x,y],...],"triangles":[[i,j,k],...],"boundary":[[i,j,"tag"],...],"h":h}
nlohmann::json to_json(const TriMesh& mesh);
TriMesh mesh_from_json(const nlohmann::json& doc);

struct PointField {
  std::string name;
  std::span<const double> values;
};

/// VTK legacy ASCII unstructured grid (triangles, cell type 5) with optional point scalars.
void write_vtk(std::ostream& os, const TriMesh& mesh, std::string_view title,
               std::span<const PointField> fields = {});

/// 8-bit binary PGM (P5). Values are clamped to [0, 255]; `comment` goes into the header.
void write_pgm(std::ostream& os, int width, int height, std::span<const unsigned char> pixels,
               std::string_view comment = {});

/// Reads and parses a JSON document; throws ArgumentError when the file cannot be read.
nlohmann::json read_json_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view contents);

}  // namespace steklov::io
