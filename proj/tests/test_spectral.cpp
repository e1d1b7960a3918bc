#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "steklov/errors.hpp"
#include "steklov/geometry.hpp"
#include "steklov/mesh.hpp"
#include "steklov/spectral.hpp"

using namespace steklov;

namespace {

OperatorSet ops_for(int g, int r, TagSet gamma = TagSet::all()) {
  PrefractalSpec s;
  s.generation = g;
  const TriMesh m = mesh_polyomino(build_domain(s), r);
  return assemble(m, arclength_measure(m, gamma));
}

Eigen::VectorXd dense_eigenvalues(const SparseSym& a, const SparseSym& w) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(a.to_eigen_full()),
                                                                Eigen::MatrixXd(w.to_eigen_full()), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

EigenOptions lanczos_only() {
  EigenOptions o;
  o.dense_threshold = 0;
  return o;
}

}  // namespace

TEST(Lanczos, MatchesDenseRobinSpectrum) {
  const OperatorSet ops = ops_for(1, 2);  // about 1000 dofs
  const double c[] = {1.0, 0.1};
  const SparseSym* m[] = {&ops.K, &ops.B};
  const SparseSym a = SparseSym::combine(c, m);
  const Eigen::VectorXd ref = dense_eigenvalues(a, ops.M);
  const Spectrum s = eigs_generalized(a, ops.M, 15, lanczos_only());
  ASSERT_EQ(s.size(), 15u);
  for (int i = 0; i < 15; ++i) EXPECT_NEAR(s.eigenvalues[static_cast<std::size_t>(i)], ref[i], 1e-9 * std::max(1.0, ref[i])) << i;
  for (double r : s.residual_norms) EXPECT_LE(r, 1e-10 * 1e3);
  // M-orthonormal eigenvectors.
  const Eigen::MatrixXd& v = *s.eigenvectors;
  const Eigen::MatrixXd gram = v.transpose() * (Eigen::MatrixXd(ops.M.to_eigen_full()) * v);
  EXPECT_LT((gram - Eigen::MatrixXd::Identity(15, 15)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Lanczos, NearestModeFindsInteriorEigenvalues) {
  const OperatorSet ops = ops_for(0, 4);
  const Eigen::VectorXd ref = dense_eigenvalues(ops.K, ops.M);
  EigenOptions o = lanczos_only();
  o.mode = EigenMode::kNearest;
  o.sigma = 200.0;
  const Spectrum s = eigs_generalized(ops.K, ops.M, 4, o);
  std::vector<double> want(ref.data(), ref.data() + ref.size());
  std::sort(want.begin(), want.end(), [](double x, double y) { return std::abs(x - 200.0) < std::abs(y - 200.0); });
  want.resize(4);
  std::sort(want.begin(), want.end());
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(s.eigenvalues[static_cast<std::size_t>(i)], want[static_cast<std::size_t>(i)], 1e-8 * 200.0);
}

TEST(Lanczos, SeedAndBlockIndependent) {
  const OperatorSet ops = ops_for(1, 1);
  EigenOptions a = lanczos_only(), b = lanczos_only();
  b.seed = 12345;
  b.block_size = 5;
  const Spectrum sa = robin_spectrum(ops, 0.1, 10, a), sb = robin_spectrum(ops, 0.1, 10, b);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_NEAR(sa.eigenvalues[i], sb.eigenvalues[i], 1e-9 * std::max(1.0, sa.eigenvalues[i]));
  const Spectrum again = robin_spectrum(ops, 0.1, 10, a);
  EXPECT_EQ(again.eigenvalues, sa.eigenvalues);
  EXPECT_EQ(*again.eigenvectors, *sa.eigenvectors);
}

TEST(Lanczos, SquareDirichletConvergesToAnalytic) {
  const std::vector<double> exact = oracle::square_dirichlet(6);
  double last_err = INFINITY;
  for (int r = 4; r <= 6; ++r) {
    const Spectrum s = dirichlet_spectrum(ops_for(0, r), 6);
    double err = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
      EXPECT_GT(s.eigenvalues[i], exact[i]);  // conforming Galerkin bounds from above
      err = std::max(err, (s.eigenvalues[i] - exact[i]) / exact[i]);
    }
    EXPECT_LT(err, last_err);
    last_err = err;
  }
  EXPECT_LT(last_err, 0.01);
}

TEST(Dirichlet, EigenvectorsVanishOnBoundary) {
  const OperatorSet ops = ops_for(1, 1);
  const Spectrum s = dirichlet_spectrum(ops, 5);
  for (int v : ops.dofmap.boundary) EXPECT_EQ(s.eigenvectors->row(v).cwiseAbs().maxCoeff(), 0.0);
  const Eigen::MatrixXd gram = s.eigenvectors->transpose() * (Eigen::MatrixXd(ops.M.to_eigen_full()) * *s.eigenvectors);
  EXPECT_LT((gram - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-9);
  const auto near = nearest_dirichlet_eigenvalue(ops, s.eigenvalues[2] + 1e-3);
  ASSERT_TRUE(near.has_value());
  EXPECT_NEAR(*near, s.eigenvalues[2], 1e-8 * s.eigenvalues[2]);
}

TEST(Neumann, KernelIsConstants) {
  const OperatorSet ops = ops_for(2, 1);
  const Spectrum s = robin_spectrum(ops, 0.0, 3, lanczos_only());
  EXPECT_LT(std::abs(s.eigenvalues[0]), 1e-8);
  EXPECT_GT(s.eigenvalues[1], 1.0);
  const Eigen::VectorXd v = s.eigenvectors->col(0);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(v.size());
  EXPECT_GT(std::abs(v.dot(one)) / (v.norm() * one.norm()), 1.0 - 1e-8);
}

TEST(Spectrum, ArgumentChecks) {
  const OperatorSet ops = ops_for(0, 2);
  EXPECT_THROW(eigs_generalized(ops.K, ops.M, -1), ArgumentError);
  EXPECT_TRUE(eigs_generalized(ops.K, ops.M, 0).eigenvalues.empty());
  EXPECT_THROW(eigs_generalized(ops.K, ops.M, ops.vertex_count() / 4 + 1), ArgumentError);
  EXPECT_THROW(eigs_generalized(ops.K, ops.K, 2), ArgumentError);  // singular W
}

TEST(Spectrum, CsvLayout) {
  Spectrum s;
  s.eigenvalues = {0.5, 1.25};
  s.residual_norms = {1e-12, 2e-12};
  std::ostringstream os;
  write_spectrum_csv(os, s, "a\nb");
  EXPECT_EQ(os.str(), "# a\n# b\nindex,eigenvalue,residual\n0,0.5,9.9999999999999998e-13\n1,1.25,2e-12\n");
}
