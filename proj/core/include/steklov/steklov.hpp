#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "steklov/factorization.hpp"
#include "steklov/fem.hpp"
#include "steklov/spectral.hpp"

namespace steklov {

/// Discrete Poincare-Steklov operator of -Delta + k. `S_full` is the Schur complement of
/// K + kM onto all boundary dofs; `S` is its further Schur complement onto the Gamma dofs
/// (natural conditions on the rest of the boundary), equal to S_full when Gamma is the
/// whole boundary.
struct SteklovOperator {
  double k = 0.0;
  std::shared_ptr<const OperatorSet> ops;
  std::vector<int> boundary;        // vertex ids, rows of S_full (dofmap.boundary order)
  std::vector<int> gamma;           // vertex ids, rows of S (dofmap.robin order)
  std::vector<bool> off_gamma;      // per row of S_full: vertex not on Gamma (flagged)
  Eigen::MatrixXd S_full;
  Eigen::MatrixXd S;
  Eigen::MatrixXd B_gamma;
  std::shared_ptr<const Eigen::LLT<Eigen::MatrixXd>> b_gamma_llt;
  std::shared_ptr<const SymmetricFactorization> interior;
  double raw_asymmetry = 0.0;       // ||S - S^T||_max / ||S||_max before symmetrization

  int gamma_count() const { return static_cast<int>(gamma.size()); }
};

struct SteklovOptions {
  /// When false, an indefinite (but nonsingular) interior block is accepted; used by the
  /// injectivity probe, which deliberately shifts below the Dirichlet spectrum.
  bool require_definite = true;
  /// build_steklov refuses boundaries with more dofs than this; use ImplicitSteklov instead.
  int max_dense_dofs = 10000;
};

/// Throws SpectralExclusionError when the interior block of K + kM is singular or, with
/// require_definite, not positive definite; CapacityError above options.max_dense_dofs.
SteklovOperator build_steklov(const OperatorSet& ops, double k, SteklovOptions options = {});
SteklovOperator build_steklov(std::shared_ptr<const OperatorSet> ops, double k, SteklovOptions options = {});

/// Pairs of S f = lambda B_Gamma f, ascending, B_Gamma-orthonormal eigenvectors (on Gamma
/// dofs). count <= 0 returns the whole spectrum.
Spectrum steklov_spectrum(const SteklovOperator& st, int count = 0);

/// psi = B_Gamma^-1 S f.
Field apply_dtn(const SteklovOperator& st, const Field& f);

/// Relative discrepancy between the Gamma trace of the complex Robin solve (alpha = 0) and
/// (i s B_Gamma - S)^-1 B_Gamma h.
double resolvent_check(const SteklovOperator& st, double s, const Field& h);

/// Route-B resolvent applied to h, for decay diagnostics.
ComplexField steklov_resolvent(const SteklovOperator& st, double s, const Field& h);

struct ProbeSample {
  double k = 0.0;
  double min_singular = 0.0;  // min |lambda(S, B_Gamma)|
  double s_norm = 0.0;        // spectral norm of S
};

struct InjectivityReport {
  int which = 0;
  double neumann_eigenvalue = 0.0;
  double k_star = 0.0;
  bool shifted = false;
  std::string warning;
  ProbeSample at_k_star;
  ProbeSample at_offset;
};

ProbeSample probe_at(const OperatorSet& ops, double k);

/// Sets k_star = -lambda_which of the Neumann pencil (K, M) (which is 1-based, <= 10) and
/// samples the Steklov operator at k_star and at k_star + offset.
InjectivityReport injectivity_probe(const OperatorSet& ops, int which, double offset = 0.5);

/// Matrix-free Steklov operator on the Gamma dofs. Every vertex off Gamma is eliminated, so
/// apply() gives the same S as build_steklov at the cost of one factorization up front and
/// a pair of triangular solves per application.
class ImplicitSteklov {
 public:
  ImplicitSteklov(std::shared_ptr<const OperatorSet> ops, double k, SteklovOptions options = {});

  double k() const { return k_; }
  int gamma_count() const { return static_cast<int>(gamma_.size()); }
  const std::vector<int>& gamma() const { return gamma_; }

  /// S f.
  Field apply(const Field& f) const;
  /// B_Gamma^-1 S f.
  Field apply_dtn(const Field& f) const;

 private:
  double k_ = 0.0;
  std::shared_ptr<const OperatorSet> ops_;
  std::vector<int> gamma_;
  SparseSym a_gg_;
  Eigen::SparseMatrix<double> a_eg_;
  Eigen::SparseMatrix<double> a_ge_;
  std::shared_ptr<const SymmetricFactorization> eliminated_;
  std::shared_ptr<const SymmetricFactorization> b_gamma_;
};

/// Matrix Market dump of S (symmetric).
void write_steklov_matrix(std::ostream& os, const SteklovOperator& st, std::string_view comment = {});

}  // namespace steklov
