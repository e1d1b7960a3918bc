#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "steklov/errors.hpp"
#include "steklov/fem.hpp"
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

OperatorSet square_ops(int r, TagSet gamma = TagSet::all()) {
  const TriMesh m = mesh_polyomino(build_domain(spec(0)), r);
  return assemble(m, arclength_measure(m, gamma));
}

OperatorSet prefractal_ops(int g, int r, TagSet gamma = TagSet::all()) {
  const TriMesh m = mesh_polyomino(build_domain(spec(g)), r);
  return assemble(m, arclength_measure(m, gamma));
}

Field nodal(const OperatorSet& ops, double (*f)(Vec2)) {
  Field v(ops.vertex_count());
  for (int i = 0; i < ops.vertex_count(); ++i) v[i] = f(ops.mesh->vertices[static_cast<std::size_t>(i)]);
  return v;
}

double fx(Vec2 p) { return p.x; }
double fy(Vec2 p) { return p.y; }
double one(Vec2) { return 1.0; }

// int x^2 dA over a polygon by Green's theorem: contour integral of x^3 / 3 dy.
double polygon_x2_integral(const std::vector<Vec2>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2 a = v[i], b = v[(i + 1) % v.size()];
    // x is linear along the edge: int x^3 dy = (b.y - a.y) (a^3 + a^2 b + a b^2 + b^3) / 4.
    s += (b.y - a.y) * (a.x * a.x * a.x + a.x * a.x * b.x + a.x * b.x * b.x + b.x * b.x * b.x) / 4.0 / 3.0;
  }
  return s;
}

}  // namespace

TEST(Assembly, ExactIntegralsOfLinearFields) {
  for (int g = 0; g <= 2; ++g) {
    const OperatorSet ops = prefractal_ops(g, 1);
    const Field u1 = nodal(ops, one), ux = nodal(ops, fx), uy = nodal(ops, fy);
    EXPECT_LT(ops.K.apply(u1).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(ops.M.bilinear(u1, u1), 1.0, 1e-12);
    EXPECT_NEAR(ops.K.bilinear(ux, ux), 1.0, 1e-12);
    EXPECT_NEAR(ops.K.bilinear(ux, uy), 0.0, 1e-12);
    EXPECT_NEAR(ops.M.bilinear(ux, ux), polygon_x2_integral(build_domain(spec(g)).vertices), 1e-12);
    EXPECT_NEAR(ops.B.bilinear(u1, u1), 3.0 + std::pow(2.0, g), 1e-12);
  }
}

TEST(Assembly, LumpedBoundaryMassKeepsRowSums) {
  const TriMesh m = mesh_polyomino(build_domain(spec(1)), 1);
  const BoundaryMeasure mu = selfsimilar_measure(spec(1), m, 1.0);
  const SparseSym b = assemble_boundary_mass(m, mu);
  const SparseSym bl = assemble_boundary_mass(m, mu, true);
  const Field u1 = Field::Ones(static_cast<Eigen::Index>(m.vertex_count()));
  EXPECT_LT((b.apply(u1) - bl.apply(u1)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(b.bilinear(u1, u1), 1.0, 1e-14);
}

TEST(Assembly, ElementQuadratureAgrees) {
  const OperatorSet ops = prefractal_ops(2, 1);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  Field u(ops.vertex_count()), v(ops.vertex_count());
  for (int i = 0; i < u.size(); ++i) {
    u[i] = n01(rng);
    v[i] = n01(rng);
  }
  const ElementForms f = element_forms(*ops.mesh, u, v);
  EXPECT_NEAR(f.stiffness, ops.K.bilinear(u, v), 1e-10 * std::abs(f.stiffness) + 1e-10);
  EXPECT_NEAR(f.mass, ops.M.bilinear(u, v), 1e-12 * u.norm() * v.norm());
}

TEST(Assembly, RejectsMeasureOffGamma) {
  const TriMesh m = mesh_polyomino(build_domain(spec(1)), 0);
  BoundaryMeasure mu = arclength_measure(m, TagSet::all());
  mu.edges.push_back({0, static_cast<int>(m.vertex_count()) - 1, {}, {}, 1.0});
  EXPECT_THROW(assemble(m, mu), ArgumentError);
}

TEST(Dirichlet, ReproducesLinearSolutions) {
  const OperatorSet ops = prefractal_ops(2, 2);
  const Field ux = nodal(ops, fx);
  const Field f = restrict_to_boundary(ops, ux);
  EXPECT_LT((solve_dirichlet(ops, 0.0, f) - ux).cwiseAbs().maxCoeff(), 1e-11);
  // -Laplace x + x = x.
  EXPECT_LT((solve_dirichlet(ops, 1.0, f, ux) - ux).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(Dirichlet, SpectralExclusionNamesTheEigenvalue) {
  const OperatorSet ops = square_ops(4);
  const Field f = Field::Ones(ops.boundary_count());
  try {
    solve_dirichlet(ops, -25.0, f);
    FAIL() << "expected SpectralExclusionError";
  } catch (const SpectralExclusionError& e) {
    EXPECT_EQ(e.shift(), -25.0);
    ASSERT_TRUE(e.offending_eigenvalue().has_value());
    // Nearest discrete Dirichlet eigenvalue to 25 is the lowest one, close to 2 pi^2.
    EXPECT_NEAR(*e.offending_eigenvalue(), 2.0 * std::numbers::pi * std::numbers::pi, 0.5);
  }
  EXPECT_THROW(solve_dirichlet(ops, 0.0, Field::Ones(3)), ArgumentError);
}

TEST(Robin, MatchesDenseSolve) {
  const OperatorSet ops = prefractal_ops(1, 1);
  const Eigen::MatrixXd k = Eigen::MatrixXd(ops.K.to_eigen_full()), m = Eigen::MatrixXd(ops.M.to_eigen_full()),
                        b = Eigen::MatrixXd(ops.B.to_eigen_full());
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Field h(ops.gamma_count());
  for (int i = 0; i < h.size(); ++i) h[i] = u(rng);
  for (auto [alpha, kk, s] : {std::tuple{0.1, 1.0, 0.0}, {1.0, 0.5, 2.0}, {0.0, 2.0, 10.0}, {0.3, -3.0, 1.0}}) {
    const Eigen::MatrixXcd a = (k + kk * m).cast<std::complex<double>>() + std::complex<double>(alpha, -s) * b.cast<std::complex<double>>();
    const ComplexField rhs = -(b * extend_from_gamma(ops, h)).cast<std::complex<double>>();
    const ComplexField ref = a.fullPivLu().solve(rhs);
    const ComplexField got = solve_robin(ops, alpha, kk, s, h);
    EXPECT_LT((got - ref).norm(), 1e-10 * ref.norm()) << alpha << ' ' << kk << ' ' << s;
    EXPECT_LT(robin_residual(ops, alpha, kk, s, h, got), 1e-10);
  }
  EXPECT_EQ(solve_robin(ops, 1.0, 1.0, 0.0, Field::Zero(ops.gamma_count())).norm(), 0.0);
}

TEST(Robin, PureNeumannAtZeroShiftIsExcluded) {
  const OperatorSet ops = square_ops(3);
  EXPECT_THROW(solve_robin(ops, 0.0, 0.0, 0.0, Field::Ones(ops.gamma_count())), SpectralExclusionError);
}

TEST(NormalDerivative, LinearFieldOnSquare) {
  const OperatorSet ops = square_ops(5);
  const Field ux = nodal(ops, fx);
  const NormalDerivative nd = normal_derivative(ops, ux, 0.0);
  // Green: g^T Tr v = int grad x . grad v, so g^T 1 = 0 and g^T Tr x = |Omega|.
  EXPECT_NEAR(nd.functional.sum(), 0.0, 1e-12);
  EXPECT_NEAR(nd.functional.dot(restrict_to_boundary(ops, ux)), 1.0, 1e-12);
  ASSERT_TRUE(nd.l2_rep.has_value());
  EXPECT_FALSE(nd.off_gamma_flagged);
  // Far from the corners the L^2 representative is the exact normal derivative +-1 / 0.
  for (std::size_t i = 0; i < ops.dofmap.robin.size(); ++i) {
    const Vec2 p = ops.mesh->vertices[static_cast<std::size_t>(ops.dofmap.robin[i])];
    if (std::abs(p.y - 0.5) < 1e-12 && std::abs(p.x - 1.0) < 1e-12) EXPECT_NEAR((*nd.l2_rep)[static_cast<Eigen::Index>(i)], 1.0, 1e-6);
    if (std::abs(p.y - 0.5) < 1e-12 && std::abs(p.x) < 1e-12) EXPECT_NEAR((*nd.l2_rep)[static_cast<Eigen::Index>(i)], -1.0, 1e-6);
    if (std::abs(p.x - 0.5) < 1e-12 && std::abs(p.y - 1.0) < 1e-12) EXPECT_NEAR((*nd.l2_rep)[static_cast<Eigen::Index>(i)], 0.0, 1e-6);
  }
}

TEST(NormalDerivative, RobinSolutionSatisfiesItsBoundaryCondition) {
  const OperatorSet ops = prefractal_ops(2, 1, {BoundaryTag::kFractal});
  Field h(ops.gamma_count());
  for (int i = 0; i < h.size(); ++i) h[i] = std::sin(3.0 * i);
  const double alpha = 0.7, k = 1.5;
  const Field u = solve_robin(ops, alpha, k, 0.0, h).real();
  const NormalDerivative nd = normal_derivative(ops, u, k);
  // Natural boundary condition off Gamma, and d_nu u = -h - alpha u on Gamma.
  EXPECT_FALSE(nd.off_gamma_flagged);
  EXPECT_LT(nd.off_gamma, 1e-10);
  ASSERT_TRUE(nd.l2_rep.has_value());
  const Field expected = -(h + alpha * restrict_to_gamma(ops, u));
  EXPECT_LT((*nd.l2_rep - expected).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(NormalDerivative, FlagsMassOffGamma) {
  const OperatorSet ops = square_ops(3, {BoundaryTag::kFractal});
  const NormalDerivative nd = normal_derivative(ops, nodal(ops, fx), 0.0);
  EXPECT_TRUE(nd.off_gamma_flagged);
  EXPECT_FALSE(nd.l2_rep.has_value());
}

TEST(GreensIdentity, HoldsForDiscreteSolutions) {
  const OperatorSet ops = prefractal_ops(1, 2);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n01;
  Field f(ops.boundary_count()), v(ops.vertex_count()), src(ops.vertex_count());
  for (int i = 0; i < f.size(); ++i) f[i] = n01(rng);
  for (int i = 0; i < v.size(); ++i) {
    v[i] = n01(rng);
    src[i] = n01(rng);
  }
  const Field u = solve_dirichlet(ops, 0.8, f, src);
  const GreenResidual r = greens_identity_residual(ops, u, v, 0.8, src);
  EXPECT_LT(r.assembled, 1e-10 * r.scale);
  EXPECT_LT(r.quadrature, 1e-10 * r.scale);
  // A field that does not solve the interior equations leaves a residual.
  const GreenResidual bad = greens_identity_residual(ops, v, v, 0.8, src);
  EXPECT_GT(bad.assembled, 1e-6 * bad.scale);
}

TEST(TraceNorm, HomogeneousAndSubadditive) {
  const OperatorSet ops = prefractal_ops(1, 1);
  Field f(ops.boundary_count()), g(ops.boundary_count());
  for (int i = 0; i < f.size(); ++i) {
    f[i] = std::cos(0.3 * i);
    g[i] = 1.0 / (1.0 + i);
  }
  const double nf = trace_norm(ops, f);
  EXPECT_NEAR(trace_norm(ops, -2.5 * f), 2.5 * nf, 1e-10 * nf);
  EXPECT_LE(trace_norm(ops, f + g), nf + trace_norm(ops, g) + 1e-12);
  EXPECT_EQ(trace_norm(ops, Field::Zero(ops.boundary_count())), 0.0);
}

TEST(Restriction, RoundTrip) {
  const OperatorSet ops = prefractal_ops(1, 1, {BoundaryTag::kFractal});
  const Field u = nodal(ops, fx);
  const Field back = extend_from_gamma(ops, restrict_to_gamma(ops, u));
  for (int v : ops.dofmap.robin) EXPECT_EQ(back[v], u[v]);
  EXPECT_EQ(back.size(), u.size());
  EXPECT_EQ(restrict_to_boundary(ops, extend_from_boundary(ops, Field::Ones(ops.boundary_count()))).sum(), ops.boundary_count());
}
