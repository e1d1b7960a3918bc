#pragma once

#include <complex>
#include <memory>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "steklov/sparse.hpp"

namespace steklov {

enum class FactorStatus { kOk, kNotPositiveDefinite, kSingular };

/// Sparse LDL^T of a symmetric matrix (AMD ordering, no pivoting) with iterative
/// refinement on solves. The inertia (count of negative pivots) is exposed, which by
/// Sylvester's law equals the number of negative eigenvalues of the factored matrix.
class SymmetricFactorization {
 public:
  SymmetricFactorization();
  explicit SymmetricFactorization(const SparseSym& a);
  ~SymmetricFactorization();
  SymmetricFactorization(SymmetricFactorization&&) noexcept;
  SymmetricFactorization& operator=(SymmetricFactorization&&) noexcept;

  FactorStatus status() const { return status_; }
  bool ok() const { return status_ != FactorStatus::kSingular; }
  bool positive_definite() const { return status_ == FactorStatus::kOk; }
  int negative_pivots() const { return negative_pivots_; }
  double min_abs_pivot_ratio() const { return min_pivot_ratio_; }
  int dimension() const { return n_; }

  /// Solves A x = b, refining until ||b - A x|| <= 1e-12 ||b|| or no further progress.
  Field solve(const Field& b) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  FactorStatus status_ = FactorStatus::kSingular;
  int negative_pivots_ = 0;
  double min_pivot_ratio_ = 0.0;
  int n_ = 0;
};

/// Sparse LU for complex symmetric (non-Hermitian) systems such as K + kM + (alpha - i s) B.
class ComplexFactorization {
 public:
  explicit ComplexFactorization(const Eigen::SparseMatrix<std::complex<double>>& a);
  ~ComplexFactorization();
  ComplexFactorization(ComplexFactorization&&) noexcept;
  ComplexFactorization& operator=(ComplexFactorization&&) noexcept;

  bool ok() const { return ok_; }
  ComplexField solve(const ComplexField& b) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  bool ok_ = false;
};

}  // namespace steklov
