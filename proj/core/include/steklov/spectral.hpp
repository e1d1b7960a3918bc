#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "steklov/fem.hpp"
#include "steklov/sparse.hpp"

namespace steklov {

enum class EigenMode { kSmallest, kNearest };

struct EigenOptions {
  EigenMode mode = EigenMode::kSmallest;
  double sigma = 0.0;           // target for kNearest
  double tolerance = 1e-10;     // Ritz residual tolerance, relative to max(1, |lambda|)
  int block_size = 3;           // catches eigenvalues of multiplicity <= block_size
  int max_restarts = 300;
  std::uint64_t seed = 0x5eed5eedULL;
  bool vectors = true;
  int dense_threshold = 400;    // problems up to this size use a dense solver
};

struct ProblemDescriptor {
  std::string bc;        // dirichlet | neumann | robin | steklov | generic
  double alpha = 0.0;
  double k = 0.0;
  std::string measure;   // arclength | selfsimilar | "" when not applicable
  std::string mesh_id;
};

/// Ascending eigenpairs of A x = lambda W x with W-orthonormal eigenvector columns.
struct Spectrum {
  std::vector<double> eigenvalues;
  std::optional<Eigen::MatrixXd> eigenvectors;
  std::vector<double> residual_norms;  // ||A x - lambda W x||_2 with ||x||_W = 1
  ProblemDescriptor problem;
  int restarts = 0;
  std::vector<double> residual_history;  // worst wanted Ritz residual after each restart

  std::size_t size() const { return eigenvalues.size(); }
};

/// Generalized symmetric eigenproblem by thick-restart block shift-invert Lanczos with
/// full W-reorthogonalization and a seeded start block. In kSmallest mode the result is
/// checked for completeness with the inertia of A - tau W.
Spectrum eigs_generalized(const SparseSym& a, const SparseSym& w, int count, const EigenOptions& options = {});

/// Pencil (K + alpha B, M) on all vertices; alpha = 0 gives the Neumann spectrum.
Spectrum robin_spectrum(const OperatorSet& ops, double alpha, int count, EigenOptions options = {});
/// Pencil (K_II, M_II) on interior vertices; eigenvectors are returned vertex-indexed
/// (zero on the boundary) and M-orthonormal.
Spectrum dirichlet_spectrum(const OperatorSet& ops, int count, EigenOptions options = {});

/// Interior Dirichlet eigenvalue nearest `target`, or nullopt when it cannot be computed.
/// Used to name the offending eigenvalue in spectral-exclusion diagnostics.
std::optional<double> nearest_dirichlet_eigenvalue(const OperatorSet& ops, double target);

/// CSV: "# <comment>" lines, then header index,eigenvalue,residual.
void write_spectrum_csv(std::ostream& os, const Spectrum& s, std::string_view comment = {});

}  // namespace steklov
