#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "steklov/errors.hpp"
#include "steklov/geometry.hpp"
#include "steklov/measure.hpp"
#include "steklov/mesh.hpp"

using namespace steklov;

namespace {

PrefractalSpec spec(int g) {
  PrefractalSpec s;
  s.generation = g;
  return s;
}

// Mass of a ball by sampling every edge at many points (midpoint rule on the edge).
double sampled_ball_mass(const BoundaryMeasure& m, Vec2 c, double r, int samples) {
  double mass = 0.0;
  for (const auto& e : m.edges) {
    for (int i = 0; i < samples; ++i) {
      const Vec2 p = e.pa + ((i + 0.5) / samples) * (e.pb - e.pa);
      if (norm(p - c) <= r) mass += e.weight / samples;
    }
  }
  return mass;
}

}  // namespace

TEST(Arclength, WeightsAreEdgeLengths) {
  const TriMesh m = mesh_polyomino(build_domain(spec(2)), 1);
  const BoundaryMeasure mu = arclength_measure(m, {BoundaryTag::kFractal});
  EXPECT_EQ(mu.kind, MeasureKind::kArclength);
  EXPECT_DOUBLE_EQ(mu.d, 1.0);
  EXPECT_NEAR(mu.total_mass, 4.0, 1e-12);
  for (const auto& e : mu.edges) EXPECT_NEAR(e.weight, norm(e.pb - e.pa), 1e-15);
  EXPECT_NEAR(arclength_measure(m, TagSet::all()).total_mass, 7.0, 1e-12);
}

TEST(SelfSimilar, EqualMassPerSegment) {
  for (int g = 0; g <= 3; ++g) {
    for (int r = 0; r <= 2; ++r) {
      const PrefractalSpec s = spec(g);
      const TriMesh m = mesh_polyomino(build_domain(s), r);
      const BoundaryMeasure mu = selfsimilar_measure(s, m, 2.0);
      EXPECT_NEAR(mu.total_mass, 2.0, 1e-12);
      EXPECT_NEAR(mu.d, 1.5, 1e-15);
      EXPECT_EQ(mu.edges.size(), static_cast<std::size_t>(std::pow(8, g)) << r);
      for (const auto& e : mu.edges) EXPECT_NEAR(e.weight, 2.0 * std::pow(8.0, -g) / std::pow(2.0, r), 1e-14);
    }
  }
}

TEST(SelfSimilar, RejectsMismatchedGeneration) {
  const TriMesh m = mesh_polyomino(build_domain(spec(2)), 0);
  EXPECT_THROW(selfsimilar_measure(spec(1), m, 1.0), ArgumentError);
  EXPECT_THROW(selfsimilar_measure(spec(2), m, 0.0), ArgumentError);
}

TEST(BallMass, AgreesWithSampling) {
  const PrefractalSpec s = spec(3);
  const BoundaryMeasure mu = selfsimilar_measure(s, boundary_skeleton(build_domain(s)), 1.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(-0.1, 1.1), uy(-0.3, 0.3), ur(0.01, 0.5);
  for (int i = 0; i < 40; ++i) {
    const Vec2 c{ux(rng), uy(rng)};
    const double r = ur(rng);
    // Sampling error is at most one sample weight per edge crossing the circle.
    EXPECT_NEAR(ball_mass(mu, c, r), sampled_ball_mass(mu, c, r, 400), 2e-4) << c.x << ',' << c.y << ',' << r;
  }
}

TEST(Regularity, StraightSideArclength) {
  const TriMesh m = boundary_skeleton(build_domain(spec(0)));
  const BoundaryMeasure mu = arclength_measure(m, {BoundaryTag::kFractal});
  const std::vector<double> radii{0.5, 0.25, 0.125, 0.0625};
  const RegularityReport rep = check_upper_regularity(mu, 1.0, radii);
  // A ball centred on the open segment holds 2r of length.
  EXPECT_NEAR(rep.c_d, 2.0, 1e-12);
  EXPECT_FALSE(rep.irregular);
  EXPECT_FALSE(rep.outside_trace_regime);
}

TEST(Regularity, MatchesBruteForceMaximum) {
  const PrefractalSpec s = spec(2);
  const BoundaryMeasure mu = selfsimilar_measure(s, boundary_skeleton(build_domain(s)), 1.0);
  const std::vector<double> radii{0.5, 0.25, 0.1, 0.0625};
  const RegularityReport rep = check_upper_regularity(mu, 1.5, radii);
  for (std::size_t k = 0; k < radii.size(); ++k) {
    double worst = 0.0;
    for (const auto& e : mu.edges) {
      for (Vec2 c : {e.pa, e.pb, 0.5 * (e.pa + e.pb)}) {
        worst = std::max(worst, ball_mass(mu, c, radii[k]) / std::pow(radii[k], 1.5));
      }
    }
    EXPECT_NEAR(rep.max_ratio_per_radius[k], worst, 1e-12) << radii[k];
  }
}

TEST(Regularity, WrongExponentIsFlagged) {
  // Length on a segment scales like r, so asking for d = 2 makes mu(B_r) / r^2 blow up.
  const TriMesh m = boundary_skeleton(build_domain(spec(0)));
  const BoundaryMeasure mu = arclength_measure(m, {BoundaryTag::kFractal});
  const std::vector<double> radii{1.0, 0.1, 0.01, 0.001};
  EXPECT_TRUE(check_upper_regularity(mu, 2.0, radii).irregular);
  EXPECT_TRUE(check_upper_regularity(mu, 2.0, radii).outside_trace_regime);
  EXPECT_THROW(check_upper_regularity(mu, 2.5, radii), ArgumentError);
  const std::vector<double> bad{1.5};
  EXPECT_THROW(check_upper_regularity(mu, 1.0, bad), ArgumentError);
}

TEST(BoundaryIntegral, Trapezoid) {
  const TriMesh m = mesh_polyomino(build_domain(spec(0)), 3);
  const BoundaryMeasure mu = arclength_measure(m, TagSet::all());
  std::vector<double> one(m.vertex_count(), 1.0), x(m.vertex_count());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = m.vertices[i].x;
  EXPECT_NEAR(boundary_integral(mu, one), 4.0, 1e-12);
  // int x ds over the unit square boundary = 1/2 + 1 + 1/2 + 0.
  EXPECT_NEAR(boundary_integral(mu, x), 2.0, 1e-12);
}

TEST(Capacity, DecreasesWithBoxSize) {
  // Target: the centre node of a box [-a, a]^2 at a fixed mesh size. The meshes are nested,
  // so a larger box admits more functions.
  double last = INFINITY;
  for (int half = 1; half <= 3; ++half) {
    DomainPolygon box;
    box.vertices = {{-1.0 * half, -1.0 * half}, {1.0 * half, -1.0 * half}, {1.0 * half, 1.0 * half}, {-1.0 * half, 1.0 * half}};
    box.area = 4.0 * half * half;
    box.grid_origin = {-1.0 * half, -1.0 * half};
    box.grid_pitch = 1.0;
    const TriMesh m = mesh_polyomino(box, 3);
    int centre = -1;
    for (std::size_t i = 0; i < m.vertex_count(); ++i) {
      if (norm(m.vertices[i]) < 1e-12) centre = static_cast<int>(i);
    }
    ASSERT_GE(centre, 0);
    const int targets[] = {centre};
    const double cap = capacity_estimate(m, targets);
    EXPECT_GT(cap, 0.0);
    EXPECT_LT(cap, last);
    last = cap;
  }
}

TEST(MeasureJson, Fields) {
  const TriMesh m = mesh_polyomino(build_domain(spec(0)), 1);
  const BoundaryMeasure mu = arclength_measure(m, TagSet::all());
  const nlohmann::json j = to_json(mu);
  EXPECT_EQ(j["kind"], "arclength");
  EXPECT_EQ(j["edges"].size(), mu.edges.size());
  EXPECT_EQ(measure_kind_from_string("selfsimilar"), MeasureKind::kSelfSimilar);
  EXPECT_THROW(measure_kind_from_string("hausdorff"), ArgumentError);
}
