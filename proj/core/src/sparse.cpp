#include "steklov/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "steklov/errors.hpp"

namespace steklov {

SparseSym SparseSym::from_triplets(int n, std::span<const Triplet> entries) {
  if (n < 0) throw ArgumentError("SparseSym: negative dimension");
  std::vector<int> counts(static_cast<std::size_t>(n) + 1, 0);
  for (const Triplet& t : entries) {
    if (t.row < 0 || t.col < 0 || t.row >= n || t.col >= n) throw ArgumentError("SparseSym: triplet out of range");
    ++counts[static_cast<std::size_t>(std::min(t.row, t.col)) + 1];
  }
  for (int i = 0; i < n; ++i) counts[static_cast<std::size_t>(i) + 1] += counts[static_cast<std::size_t>(i)];
  std::vector<int> cols(entries.size());
  std::vector<double> vals(entries.size());
  std::vector<int> fill(counts.begin(), counts.end() - 1);
  for (const Triplet& t : entries) {
    const int r = std::min(t.row, t.col);
    const int pos = fill[static_cast<std::size_t>(r)]++;
    cols[static_cast<std::size_t>(pos)] = std::max(t.row, t.col);
    vals[static_cast<std::size_t>(pos)] = t.value;
  }

  SparseSym out;
  out.n_ = n;
  out.row_offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  out.cols_.reserve(entries.size());
  out.values_.reserve(entries.size());
  std::vector<std::pair<int, double>> row;
  for (int i = 0; i < n; ++i) {
    row.clear();
    for (int p = counts[static_cast<std::size_t>(i)]; p < counts[static_cast<std::size_t>(i) + 1]; ++p) {
      row.push_back({cols[static_cast<std::size_t>(p)], vals[static_cast<std::size_t>(p)]});
    }
    std::stable_sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (!out.cols_.empty() && k > 0 && row[k].first == row[k - 1].first) {
        out.values_.back() += row[k].second;
      } else {
        out.cols_.push_back(row[k].first);
        out.values_.push_back(row[k].second);
      }
    }
    out.row_offsets_[static_cast<std::size_t>(i) + 1] = static_cast<int>(out.cols_.size());
  }
  return out;
}

SparseSym SparseSym::combine(std::span<const double> coeffs, std::span<const SparseSym* const> mats) {
  if (coeffs.size() != mats.size() || mats.empty()) throw ArgumentError("SparseSym::combine: size mismatch");
  const int n = mats[0]->n_;
  std::vector<Triplet> all;
  for (std::size_t m = 0; m < mats.size(); ++m) {
    const SparseSym& a = *mats[m];
    if (a.n_ != n) throw ArgumentError("SparseSym::combine: dimension mismatch");
    if (coeffs[m] == 0.0) continue;
    for (int i = 0; i < n; ++i) {
      for (int p = a.row_offsets_[static_cast<std::size_t>(i)]; p < a.row_offsets_[static_cast<std::size_t>(i) + 1]; ++p) {
        all.push_back({i, a.cols_[static_cast<std::size_t>(p)], coeffs[m] * a.values_[static_cast<std::size_t>(p)]});
      }
    }
  }
  return from_triplets(n, all);
}

double SparseSym::entry(int i, int j) const {
  const int r = std::min(i, j), c = std::max(i, j);
  const auto begin = cols_.begin() + row_offsets_[static_cast<std::size_t>(r)];
  const auto end = cols_.begin() + row_offsets_[static_cast<std::size_t>(r) + 1];
  const auto it = std::lower_bound(begin, end, c);
  if (it == end || *it != c) return 0.0;
  return values_[static_cast<std::size_t>(it - cols_.begin())];
}

Field SparseSym::diagonal() const {
  Field d = Field::Zero(n_);
  for (int i = 0; i < n_; ++i) d[i] = entry(i, i);
  return d;
}

double SparseSym::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

namespace {

template <typename Vec>
Vec apply_impl(int n, const std::vector<int>& ro, const std::vector<int>& cols, const std::vector<double>& vals, const Vec& x) {
  if (x.size() != n) throw ArgumentError("SparseSym::apply: vector length mismatch");
  Vec y = Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    typename Vec::Scalar acc{0};
    for (int p = ro[static_cast<std::size_t>(i)]; p < ro[static_cast<std::size_t>(i) + 1]; ++p) {
      const int j = cols[static_cast<std::size_t>(p)];
      const double a = vals[static_cast<std::size_t>(p)];
      acc += a * x[j];
      if (j != i) y[j] += a * x[i];
    }
    y[i] += acc;
  }
  return y;
}

}  // namespace

Field SparseSym::apply(const Field& x) const { return apply_impl(n_, row_offsets_, cols_, values_, x); }

ComplexField SparseSym::apply(const ComplexField& x) const {
  return apply_impl(n_, row_offsets_, cols_, values_, x);
}

double SparseSym::bilinear(const Field& x, const Field& y) const { return x.dot(apply(y)); }

SparseSym SparseSym::principal(std::span<const int> rows) const {
  std::vector<int> pos(static_cast<std::size_t>(n_), -1);
  for (std::size_t k = 0; k < rows.size(); ++k) pos[static_cast<std::size_t>(rows[k])] = static_cast<int>(k);
  std::vector<Triplet> t;
  for (int i = 0; i < n_; ++i) {
    const int pi = pos[static_cast<std::size_t>(i)];
    if (pi < 0) continue;
    for (int p = row_offsets_[static_cast<std::size_t>(i)]; p < row_offsets_[static_cast<std::size_t>(i) + 1]; ++p) {
      const int pj = pos[static_cast<std::size_t>(cols_[static_cast<std::size_t>(p)])];
      if (pj >= 0) t.push_back({pi, pj, values_[static_cast<std::size_t>(p)]});
    }
  }
  return from_triplets(static_cast<int>(rows.size()), t);
}

Eigen::SparseMatrix<double> SparseSym::block(std::span<const int> rows, std::span<const int> cols) const {
  std::vector<int> rpos(static_cast<std::size_t>(n_), -1), cpos(static_cast<std::size_t>(n_), -1);
  for (std::size_t k = 0; k < rows.size(); ++k) rpos[static_cast<std::size_t>(rows[k])] = static_cast<int>(k);
  for (std::size_t k = 0; k < cols.size(); ++k) cpos[static_cast<std::size_t>(cols[k])] = static_cast<int>(k);
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < n_; ++i) {
    for (int p = row_offsets_[static_cast<std::size_t>(i)]; p < row_offsets_[static_cast<std::size_t>(i) + 1]; ++p) {
      const int j = cols_[static_cast<std::size_t>(p)];
      const double v = values_[static_cast<std::size_t>(p)];
      if (rpos[static_cast<std::size_t>(i)] >= 0 && cpos[static_cast<std::size_t>(j)] >= 0) {
        t.emplace_back(rpos[static_cast<std::size_t>(i)], cpos[static_cast<std::size_t>(j)], v);
      }
      if (j != i && rpos[static_cast<std::size_t>(j)] >= 0 && cpos[static_cast<std::size_t>(i)] >= 0) {
        t.emplace_back(rpos[static_cast<std::size_t>(j)], cpos[static_cast<std::size_t>(i)], v);
      }
    }
  }
  Eigen::SparseMatrix<double> out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

Eigen::SparseMatrix<double> SparseSym::to_eigen_upper() const {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(values_.size());
  for (int i = 0; i < n_; ++i) {
    for (int p = row_offsets_[static_cast<std::size_t>(i)]; p < row_offsets_[static_cast<std::size_t>(i) + 1]; ++p) {
      t.emplace_back(i, cols_[static_cast<std::size_t>(p)], values_[static_cast<std::size_t>(p)]);
    }
  }
  Eigen::SparseMatrix<double> out(n_, n_);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

Eigen::SparseMatrix<double> SparseSym::to_eigen_full() const {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(2 * values_.size());
  for (int i = 0; i < n_; ++i) {
    for (int p = row_offsets_[static_cast<std::size_t>(i)]; p < row_offsets_[static_cast<std::size_t>(i) + 1]; ++p) {
      const int j = cols_[static_cast<std::size_t>(p)];
      t.emplace_back(i, j, values_[static_cast<std::size_t>(p)]);
      if (j != i) t.emplace_back(j, i, values_[static_cast<std::size_t>(p)]);
    }
  }
  Eigen::SparseMatrix<double> out(n_, n_);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

namespace {

void mm_header(std::ostream& os, std::string_view field, std::string_view comment) {
  os << "%%MatrixMarket matrix coordinate " << field << " symmetric\n";
  if (!comment.empty()) os << "% " << comment << '\n';
}

}  // namespace

void write_matrix_market(std::ostream& os, const SparseSym& a, std::string_view comment) {
  mm_header(os, "real", comment);
  os << a.dimension() << ' ' << a.dimension() << ' ' << a.nonzeros() << '\n';
  os << std::setprecision(17);
  const auto ro = a.row_offsets();
  const auto cols = a.col_indices();
  const auto vals = a.values();
  for (int i = 0; i < a.dimension(); ++i) {
    for (int p = ro[static_cast<std::size_t>(i)]; p < ro[static_cast<std::size_t>(i) + 1]; ++p) {
      // Upper entry (i, j) is written as the lower entry (j, i), 1-based.
      os << cols[static_cast<std::size_t>(p)] + 1 << ' ' << i + 1 << ' ' << vals[static_cast<std::size_t>(p)] << '\n';
    }
  }
}

void write_matrix_market(std::ostream& os, const Eigen::SparseMatrix<std::complex<double>>& a, std::string_view comment) {
  mm_header(os, "complex", comment);
  std::vector<std::tuple<Eigen::Index, Eigen::Index, std::complex<double>>> lower;
  for (Eigen::Index c = 0; c < a.outerSize(); ++c) {
    for (Eigen::SparseMatrix<std::complex<double>>::InnerIterator it(a, c); it; ++it) {
      if (it.row() >= it.col()) lower.emplace_back(it.row(), it.col(), it.value());
    }
  }
  os << a.rows() << ' ' << a.cols() << ' ' << lower.size() << '\n' << std::setprecision(17);
  for (const auto& [r, c, v] : lower) os << r + 1 << ' ' << c + 1 << ' ' << v.real() << ' ' << v.imag() << '\n';
}

void write_matrix_market(std::ostream& os, const Eigen::MatrixXd& a, std::string_view comment) {
  mm_header(os, "real", comment);
  std::size_t nnz = 0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = j; i < a.rows(); ++i) nnz += a(i, j) != 0.0;
  os << a.rows() << ' ' << a.cols() << ' ' << nnz << '\n' << std::setprecision(17);
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = j; i < a.rows(); ++i)
      if (a(i, j) != 0.0) os << i + 1 << ' ' << j + 1 << ' ' << a(i, j) << '\n';
}

}  // namespace steklov
