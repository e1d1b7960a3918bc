#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "steklov/analysis.hpp"
#include "steklov/fem.hpp"
#include "steklov/measure.hpp"
#include "steklov/spectral.hpp"

namespace steklov {

struct ConvergenceConfig {
  std::vector<int> generations{1, 2, 3, 4};
  double alpha = 0.1;
  MeasureKind measure = MeasureKind::kSelfSimilar;
  /// Gamma for the arclength measure; the self-similar measure always lives on the fractal side.
  TagSet gamma = TagSet::all();
  double target_h = 1.0 / 128.0;
  int eig_count = 30;
  double base_length = 1.0;
  int mac_resolution = 128;
  double spectral_cutoff = 20.0;
  int symdiff_grid = 4096;
  std::size_t max_vertices = 300000;
  std::uint64_t seed = 0x5eed5eedULL;
  /// Localization thresholds: PR <= median / factor, and the centroid of phi^2 within
  /// adjacency * base_length of the fractal side.
  double localization_factor = 2.0;
  double adjacency = 0.25;
};

nlohmann::json to_json(const ConvergenceConfig& c);
ConvergenceConfig convergence_config_from_json(const nlohmann::json& doc);

struct LocalizedMode {
  int index = 0;
  double eigenvalue = 0.0;
  double participation_ratio = 0.0;
  double fractal_gap = 0.0;  // distance from the phi^2 centroid to the fractal side
};

struct GenerationResult {
  int generation = 0;
  int refinement = 0;
  double h = 0.0;
  std::size_t vertices = 0;
  std::shared_ptr<const OperatorSet> ops;
  Spectrum spectrum;
  LocalizationReport localization;
  std::vector<double> fractal_gaps;    // per mode, centroid distance to the fractal side
  std::vector<LocalizedMode> localized;
  std::array<double, kTestFamilySize> moments{};  // self-similar measure, total mass 1
  std::vector<std::string> warnings;
  double seconds = 0.0;
};

struct PairResult {
  int generation_a = 0;
  int generation_b = 0;
  MacResult mac;
  double spectral_hausdorff = 0.0;
  double boundary_hausdorff = 0.0;
  double symmetric_difference = 0.0;
  /// Best MAC among pairs of localized modes (a, b), or -1 when either side has none.
  ModeMatch best_localized{-1, -1, -1.0};
  std::array<double, kTestFamilySize> moment_difference{};
};

struct ConvergenceReport {
  ConvergenceConfig config;
  std::vector<GenerationResult> generations;
  std::vector<PairResult> pairs;
  std::vector<std::string> warnings;
};

/// Refinement level giving mesh size <= target_h on the generation-g grid, downgraded
/// (with a warning) while the estimated vertex count exceeds max_vertices.
int refinement_for(int generation, double base_length, double target_h, std::size_t max_vertices,
                   std::string* warning = nullptr);

/// Per-generation pipeline: mesh, measure, Robin spectrum, localization, moments.
GenerationResult run_generation(const ConvergenceConfig& config, int generation);

ConvergenceReport convergence_study(const ConvergenceConfig& config);

/// Single scale c minimizing sum_i (c * computed_i / reference_i - 1)^2, with the
/// resulting relative errors c * computed_i / reference_i - 1.
struct ScaleFit {
  double scale = 0.0;
  std::vector<double> relative_errors;
  double max_abs_error = 0.0;
};
ScaleFit fit_global_scale(std::span<const double> computed, std::span<const double> reference);

/// include_timings = false gives byte-stable output for a fixed config.
nlohmann::json to_json(const ConvergenceReport& report, bool include_timings);

}  // namespace steklov
