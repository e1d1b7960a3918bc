#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "steklov/geometry.hpp"
#include "steklov/mesh.hpp"

namespace steklov {

enum class MeasureKind { kArclength, kSelfSimilar };

std::string_view to_string(MeasureKind kind);
MeasureKind measure_kind_from_string(std::string_view name);

/// One Gamma-tagged mesh edge carrying mass `weight`, spread uniformly along the edge.
struct WeightedEdge {
  int a = 0;
  int b = 0;
  Vec2 pa{};
  Vec2 pb{};
  double weight = 0.0;
};

/// Finite Borel measure on Gamma, piecewise uniform on mesh edges.
struct BoundaryMeasure {
  MeasureKind kind = MeasureKind::kArclength;
  std::vector<WeightedEdge> edges;
  double total_mass = 0.0;
  double d = 1.0;                  // regularity exponent
  std::optional<double> c_d;       // set once certified by check_upper_regularity
  TagSet gamma;
  std::size_t vertex_count = 0;    // size of the owning mesh
};

/// Each Gamma edge weighted by its Euclidean length; d = 1.
BoundaryMeasure arclength_measure(const TriMesh& mesh, TagSet gamma_tags);

/// Normalized self-similar measure on the generation-g prefractal side: every one of the
/// 8^g elementary segments carries total * 8^-g, split over the mesh edges covering it in
/// proportion to length; d = log 8 / log 4 = 3/2.
BoundaryMeasure selfsimilar_measure(const PrefractalSpec& spec, const TriMesh& mesh, double total);

/// Exact mu(B_r(x)) by segment-disk intersection (brute force over all edges).
double ball_mass(const BoundaryMeasure& m, Vec2 center, double r);

struct RegularityReport {
  double d = 0.0;
  double c_d = 0.0;
  Vec2 worst_center{};
  double worst_radius = 0.0;
  std::vector<double> radii;
  std::vector<double> max_ratio_per_radius;  // max_x mu(B_r(x)) / r^d for each radius
  double growth = 0.0;                       // ratio at the smallest radius / at the largest
  bool irregular = false;                    // growth > 10 across the radius range
  bool outside_trace_regime = false;         // d == 2 (trace theory needs d < 2)
  std::size_t centers = 0;
};

/// Sampling of ball centres on supp mu: all edge vertices and midpoints, every
/// `stride`-th edge.
struct CenterSampling {
  std::size_t stride = 1;
};

/// Estimates the constant of mu(B_r(x)) <= c_d r^d over the given radii and centres.
RegularityReport check_upper_regularity(const BoundaryMeasure& m, double d, std::span<const double> radii,
                                        CenterSampling centers = {});

/// Trapezoidal edge rule: sum_e w_e (v_a + v_b) / 2. `trace_values` is vertex-indexed.
double boundary_integral(const BoundaryMeasure& m, std::span<const double> trace_values);

/// H^1 capacity of a node set on a truncated box: min u^T (K + M) u over P1 fields with
/// u = 1 on the target nodes and u = 0 on the box boundary. Truncation restricts the
/// admissible functions, so the value is an upper bound that decreases as the box grows.
double capacity_estimate(const TriMesh& box_mesh, std::span<const int> target_nodes);

nlohmann::json to_json(const BoundaryMeasure& m);
nlohmann::json to_json(const RegularityReport& r);

}  // namespace steklov
