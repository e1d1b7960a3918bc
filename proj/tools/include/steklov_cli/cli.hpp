#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "steklov/analysis.hpp"
#include "steklov/sparse.hpp"

namespace steklov::cli {

/// Parses the command line and runs one subcommand. Returns the process exit code
/// (0 ok, 2 usage, 3 spectral exclusion, 4 numerical failure).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

const char* tool_version();

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);
/// Hash of the canonical serialization (sorted keys, compact) as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

/// Run settings shared by every command.
struct Common {
  std::filesystem::path out_dir = ".";
  int threads = 0;  // 0: keep the environment/default setting
  bool deterministic = false;
  std::uint64_t seed = 0x5eed5eedULL;
  bool seed_given = false;
};

/// Provenance document written next to every command's outputs.
class RunRecord {
 public:
  RunRecord(std::string command, nlohmann::json config, const Common& common);

  const std::string& hash() const { return hash_; }
  void add_output(const std::filesystem::path& path);
  void set_residual(const std::string& name, double value);
  void set_timing(const std::string& name, double seconds);
  void set_note(const std::string& name, nlohmann::json value);
  nlohmann::json to_json() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::string command_;
  nlohmann::json config_;
  bool deterministic_;
  std::string hash_;
  std::vector<std::string> outputs_;
  nlohmann::json residuals_ = nlohmann::json::object();
  nlohmann::json timings_ = nlohmann::json::object();
  nlohmann::json notes_ = nlohmann::json::object();
};

/// |phi| rasterized on a width x height grid over the mesh bounding box (row 0 at the
/// top), linearly mapped to 0..255 with the maximum at 255; points outside the mesh are 0.
std::vector<unsigned char> modulus_heatmap(const MeshLocator& locator, const Field& phi, int width, int height);

/// "a:b" (inclusive range) or comma-separated integers.
std::vector<int> parse_int_list(const std::string& text);

}  // namespace steklov::cli
