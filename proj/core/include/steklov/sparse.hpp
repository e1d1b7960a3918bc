#pragma once

#include <complex>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace steklov {

using Field = Eigen::VectorXd;
using ComplexField = Eigen::VectorXcd;

struct Triplet {
  int row;
  int col;
  double value;
};

/// Symmetric sparse matrix in CSR form holding only the upper triangle (col >= row).
/// Products mirror the strictly upper part, so A == A^T holds exactly.
class SparseSym {
 public:
  SparseSym() = default;

  /// Duplicates are summed; entries below the diagonal are folded onto their mirror.
  static SparseSym from_triplets(int n, std::span<const Triplet> entries);
  /// sum_k coeffs[k] * mats[k]; patterns are merged.
  static SparseSym combine(std::span<const double> coeffs, std::span<const SparseSym* const> mats);

  int dimension() const { return n_; }
  std::size_t nonzeros() const { return values_.size(); }
  std::span<const int> row_offsets() const { return row_offsets_; }
  std::span<const int> col_indices() const { return cols_; }
  std::span<const double> values() const { return values_; }

  double entry(int i, int j) const;
  Field diagonal() const;
  double max_abs() const;

  Field apply(const Field& x) const;
  ComplexField apply(const ComplexField& x) const;
  /// x^T A y.
  double bilinear(const Field& x, const Field& y) const;

  /// Symmetric principal submatrix on `rows` (in the given order).
  SparseSym principal(std::span<const int> rows) const;
  /// Rectangular block A(rows, cols) in full (not triangular) storage.
  Eigen::SparseMatrix<double> block(std::span<const int> rows, std::span<const int> cols) const;

  /// Upper-triangular Eigen matrix (column-major), for Eigen's selfadjoint solvers.
  Eigen::SparseMatrix<double> to_eigen_upper() const;
  Eigen::SparseMatrix<double> to_eigen_full() const;

 private:
  int n_ = 0;
  std::vector<int> row_offsets_{0};
  std::vector<int> cols_;
  std::vector<double> values_;
};

/// Matrix Market coordinate format, symmetric, lower triangle written.
void write_matrix_market(std::ostream& os, const SparseSym& a, std::string_view comment = {});
void write_matrix_market(std::ostream& os, const Eigen::SparseMatrix<std::complex<double>>& a,
                         std::string_view comment = {});
/// Dense symmetric matrix in Matrix Market symmetric coordinate format (nonzeros only).
void write_matrix_market(std::ostream& os, const Eigen::MatrixXd& a, std::string_view comment = {});

}  // namespace steklov
