#include <fstream>
#include <sstream>

#include "steklov/errors.hpp"
#include "steklov/io.hpp"

namespace steklov::io {

using nlohmann::json;

namespace {

json vertices_to_json(const std::vector<Vec2>& v) {
  json arr = json::array();
  for (const Vec2& p : v) arr.push_back({p.x, p.y});
  return arr;
}

std::vector<Vec2> vertices_from_json(const json& arr) {
  if (!arr.is_array()) throw ArgumentError("geometry document: 'vertices' must be an array");
  std::vector<Vec2> out;
  out.reserve(arr.size());
  for (const auto& p : arr) {
    if (!p.is_array() || p.size() != 2) throw ArgumentError("geometry document: vertex must be [x, y]");
    out.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return out;
}

void check_header(const json& doc, std::string_view kind) {
  if (!doc.is_object() || doc.value("version", 0) != kFormatVersion) {
    throw ArgumentError("unsupported or missing document version");
  }
  if (doc.value("kind", std::string{}) != kind) {
    throw ArgumentError("expected a '" + std::string(kind) + "' document");
  }
}

}  // namespace

json to_json(const PolyChain& chain, const json& meta) {
  return {{"version", kFormatVersion},
          {"kind", "polychain"},
          {"vertices", vertices_to_json(chain.vertices)},
          {"closed", chain.closed},
          {"meta", meta}};
}

json to_json(const DomainPolygon& polygon, const json& meta) {
  json m = meta;
  m["area"] = polygon.area;
  m["fractal_side_range"] = {polygon.fractal_first, polygon.fractal_last};
  m["grid_origin"] = {polygon.grid_origin.x, polygon.grid_origin.y};
  m["grid_pitch"] = polygon.grid_pitch;
  m["generation"] = polygon.generation;
  m["base_length"] = polygon.base_length;
  return {{"version", kFormatVersion},
          {"kind", "polygon"},
          {"vertices", vertices_to_json(polygon.vertices)},
          {"closed", true},
          {"meta", m}};
}

PolyChain chain_from_json(const json& doc) {
  check_header(doc, "polychain");
  return {vertices_from_json(doc.at("vertices")), doc.value("closed", false)};
}

DomainPolygon polygon_from_json(const json& doc) {
  check_header(doc, "polygon");
  DomainPolygon p;
  p.vertices = vertices_from_json(doc.at("vertices"));
  p.area = shoelace_area(p.vertices);
  const json meta = doc.value("meta", json::object());
  if (meta.contains("fractal_side_range")) {
    p.fractal_first = meta["fractal_side_range"][0].get<std::size_t>();
    p.fractal_last = meta["fractal_side_range"][1].get<std::size_t>();
  }
  if (meta.contains("grid_origin")) p.grid_origin = {meta["grid_origin"][0].get<double>(), meta["grid_origin"][1].get<double>()};
  p.grid_pitch = meta.value("grid_pitch", 0.0);
  p.generation = meta.value("generation", 0);
  p.base_length = meta.value("base_length", 1.0);
  return p;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ArgumentError("malformed JSON in '" + path + "': " + e.what());
  }
}

void write_text_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write '" + path + "'");
  out << contents;
}

}  // namespace steklov::io
