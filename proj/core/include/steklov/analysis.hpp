#pragma once

#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "steklov/fem.hpp"
#include "steklov/geometry.hpp"
#include "steklov/measure.hpp"
#include "steklov/mesh.hpp"
#include "steklov/spectral.hpp"

namespace steklov {

/// (phi^T M phi)^2 / (|Omega| int phi^4), with int phi^4 integrated exactly for the P1
/// interpolant. 1 for constants, small for localized fields. Throws on a zero field.
double participation_ratio(const Field& phi, const TriMesh& mesh, const SparseSym& mass);
double participation_ratio(const Field& phi, const OperatorSet& ops);

struct ModeLocalization {
  double participation_ratio = 0.0;
  double support_fraction = 0.0;  // area fraction where |phi| >= max|phi| / 2
  Vec2 centroid{};                // of the density phi^2
  Vec2 box_min{};                 // bounding box of the half-max region
  Vec2 box_max{};
};

struct LocalizationReport {
  std::vector<ModeLocalization> modes;
  double median_pr = 0.0;
};

ModeLocalization localize(const Field& phi, const OperatorSet& ops);
LocalizationReport localization(const Spectrum& spectrum, const OperatorSet& ops);

/// Point location in a triangle mesh through a uniform bucket grid.
class MeshLocator {
 public:
  explicit MeshLocator(std::shared_ptr<const TriMesh> mesh);

  struct Hit {
    int triangle = -1;
    std::array<double, 3> bary{};
  };
  std::optional<Hit> locate(Vec2 p) const;
  /// P1 interpolation of a vertex-indexed field; nullopt outside the mesh.
  std::optional<double> interpolate(const Field& f, Vec2 p) const;
  const TriMesh& mesh() const { return *mesh_; }

 private:
  std::shared_ptr<const TriMesh> mesh_;
  Vec2 lo_{}, hi_{};
  double cell_ = 1.0;
  int nx_ = 1, ny_ = 1;
  std::vector<int> offsets_;
  std::vector<int> items_;
};

struct ModeMatch {
  int a = 0;
  int b = 0;
  double mac = 0.0;
};

struct MacResult {
  Eigen::MatrixXd mac;            // rows: modes of a, cols: modes of b
  std::vector<ModeMatch> matches; // greedy one-to-one, descending MAC
  std::size_t sample_points = 0;
};

/// Samples both eigenvector sets on a resolution x resolution cell-centre grid over the
/// intersection of the two meshes' bounding boxes, keeping points inside both meshes, and
/// forms MAC(i, j) = <a_i, b_j>^2 / (|a_i|^2 |b_j|^2). Throws when no point is shared.
MacResult match_modes(const MeshLocator& a, const Eigen::MatrixXd& modes_a, const MeshLocator& b,
                      const Eigen::MatrixXd& modes_b, int resolution);

/// Hausdorff distance between {x in a : x <= cutoff} and {x in b : x <= cutoff}.
double spectral_hausdorff(std::span<const double> a, std::span<const double> b, double cutoff);

/// Smooth test family for the trace-convergence check: 1, x, y, x^2, xy, y^2.
inline constexpr int kTestFamilySize = 6;
const char* test_function_name(int i);
double test_function(int i, Vec2 p);

/// int v dmu for a piecewise-uniform measure, exact for polynomials up to degree 3
/// (Simpson's rule on every edge).
double measure_moment(const BoundaryMeasure& m, int test_index);

/// Same integrals for the self-similar measure of total mass `total` on the generation-g
/// chain, computed from the chain segments directly (no mesh).
std::array<double, kTestFamilySize> chain_moments(const PrefractalSpec& spec, double total);

}  // namespace steklov
