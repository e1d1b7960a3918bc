#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "commands.hpp"
#include "steklov/errors.hpp"
#include "steklov/io.hpp"
#include "steklov_cli/cli.hpp"

namespace steklov::cli {

const char* tool_version() { return STEKLOV_LAB_VERSION; }

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const nlohmann::json& config) {
  // nlohmann::json objects keep keys sorted, so dump() is already canonical.
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(config.dump())));
  return buf;
}

RunRecord::RunRecord(std::string command, nlohmann::json config, const Common& common)
    : command_(std::move(command)), config_(std::move(config)), deterministic_(common.deterministic) {
  config_["command"] = command_;
  config_["seed"] = common.seed;
  config_["tool_version"] = tool_version();
  hash_ = config_hash(config_);
}

void RunRecord::add_output(const std::filesystem::path& path) { outputs_.push_back(path.filename().string()); }
void RunRecord::set_residual(const std::string& name, double value) { residuals_[name] = value; }
void RunRecord::set_timing(const std::string& name, double seconds) { timings_[name] = seconds; }
void RunRecord::set_note(const std::string& name, nlohmann::json value) { notes_[name] = std::move(value); }

nlohmann::json RunRecord::to_json() const {
  nlohmann::json j = {{"version", 1},
                      {"tool", "steklov_lab"},
                      {"tool_version", tool_version()},
                      {"command", command_},
                      {"config_hash", hash_},
                      {"config", config_},
                      {"outputs", outputs_},
                      {"residuals", residuals_},
                      {"notes", notes_},
                      {"deterministic", deterministic_}};
  if (!deterministic_) j["timings"] = timings_;
  return j;
}

void RunRecord::write(const std::filesystem::path& path) const { io::write_text_file(path.string(), to_json().dump(2) + "\n"); }

std::vector<unsigned char> modulus_heatmap(const MeshLocator& locator, const Field& phi, int width, int height) {
  if (width <= 0 || height <= 0) throw ArgumentError("modulus_heatmap: image size must be positive");
  const TriMesh& mesh = locator.mesh();
  if (static_cast<std::size_t>(phi.size()) != mesh.vertex_count()) {
    throw ArgumentError("modulus_heatmap: field does not match the mesh");
  }
  Vec2 lo = mesh.vertices.front(), hi = lo;
  for (const Vec2& p : mesh.vertices) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  const double peak = phi.cwiseAbs().maxCoeff();
  std::vector<unsigned char> px(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
  if (peak == 0.0) return px;
  const double dx = (hi.x - lo.x) / width, dy = (hi.y - lo.y) / height;
  for (int j = 0; j < height; ++j) {
    for (int i = 0; i < width; ++i) {
      const Vec2 p{lo.x + (i + 0.5) * dx, hi.y - (j + 0.5) * dy};
      const auto v = locator.interpolate(phi, p);
      if (!v) continue;
      const double level = std::clamp(std::abs(*v) / peak, 0.0, 1.0);
      px[static_cast<std::size_t>(j) * static_cast<std::size_t>(width) + static_cast<std::size_t>(i)] =
          static_cast<unsigned char>(std::lround(255.0 * level));
    }
  }
  return px;
}

std::vector<int> parse_int_list(const std::string& text) {
  auto to_int = [&](const std::string& t) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(t, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != t.size()) throw ArgumentError("not an integer list: '" + text + "'");
    return v;
  };
  std::vector<int> out;
  if (const auto colon = text.find(':'); colon != std::string::npos) {
    const int a = to_int(text.substr(0, colon)), b = to_int(text.substr(colon + 1));
    if (b < a) throw ArgumentError("empty range '" + text + "'");
    for (int g = a; g <= b; ++g) out.push_back(g);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_int(item));
  if (out.empty()) throw ArgumentError("empty integer list");
  return out;
}

double parse_number(const std::string& text) {
  auto to_double = [&](const std::string& t) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(t, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != t.size()) throw ArgumentError("not a number: '" + text + "'");
    return v;
  };
  if (const auto slash = text.find('/'); slash != std::string::npos) {
    const double den = to_double(text.substr(slash + 1));
    if (den == 0.0) throw ArgumentError("zero denominator in '" + text + "'");
    return to_double(text.substr(0, slash)) / den;
  }
  return to_double(text);
}

TagSet parse_tags(const std::string& text) {
  if (text == "all") return TagSet::all();
  TagSet tags;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) tags.insert(boundary_tag_from_string(item));
  if (tags.empty()) throw ArgumentError("empty boundary tag list");
  return tags;
}

}  // namespace steklov::cli
