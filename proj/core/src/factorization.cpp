#include "steklov/factorization.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <cmath>
#include <limits>

#include "steklov/errors.hpp"

namespace steklov {

namespace {

constexpr double kSingularPivotRatio = 1e-13;
constexpr double kRefineTarget = 1e-12;
constexpr int kMaxRefineSteps = 4;

}  // namespace

struct SymmetricFactorization::Impl {
  Eigen::SparseMatrix<double> upper;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Upper> ldlt;
};

SymmetricFactorization::SymmetricFactorization() = default;
SymmetricFactorization::~SymmetricFactorization() = default;
SymmetricFactorization::SymmetricFactorization(SymmetricFactorization&&) noexcept = default;
SymmetricFactorization& SymmetricFactorization::operator=(SymmetricFactorization&&) noexcept = default;

SymmetricFactorization::SymmetricFactorization(const SparseSym& a) : impl_(std::make_unique<Impl>()), n_(a.dimension()) {
  impl_->upper = a.to_eigen_upper();
  if (n_ == 0) {
    status_ = FactorStatus::kOk;
    return;
  }
  impl_->ldlt.compute(impl_->upper);
  if (impl_->ldlt.info() != Eigen::Success) {
    status_ = FactorStatus::kSingular;
    return;
  }
  const Field d = impl_->ldlt.vectorD();
  const double dmax = d.cwiseAbs().maxCoeff();
  const double dmin = d.cwiseAbs().minCoeff();
  min_pivot_ratio_ = dmax > 0.0 ? dmin / dmax : 0.0;
  negative_pivots_ = static_cast<int>((d.array() < 0.0).count());
  if (!std::isfinite(dmax) || min_pivot_ratio_ < kSingularPivotRatio) {
    status_ = FactorStatus::kSingular;
  } else if (negative_pivots_ > 0) {
    status_ = FactorStatus::kNotPositiveDefinite;
  } else {
    status_ = FactorStatus::kOk;
  }
}

Field SymmetricFactorization::solve(const Field& b) const {
  if (b.size() != n_) throw ArgumentError("SymmetricFactorization::solve: size mismatch");
  if (!ok()) throw NumericalError("solve with a singular factorization");
  if (n_ == 0) return b;
  Field x = impl_->ldlt.solve(b);
  const double bnorm = b.norm();
  if (bnorm == 0.0) return Field::Zero(n_);
  double prev = std::numeric_limits<double>::infinity();
  for (int step = 0; step < kMaxRefineSteps; ++step) {
    const Field r = b - impl_->upper.selfadjointView<Eigen::Upper>() * x;
    const double rn = r.norm();
    if (rn <= kRefineTarget * bnorm || rn >= 0.5 * prev) break;
    prev = rn;
    x += impl_->ldlt.solve(r);
  }
  return x;
}

Eigen::MatrixXd SymmetricFactorization::solve(const Eigen::MatrixXd& b) const {
  Eigen::MatrixXd x(b.rows(), b.cols());
  for (Eigen::Index c = 0; c < b.cols(); ++c) x.col(c) = solve(Field(b.col(c)));
  return x;
}

struct ComplexFactorization::Impl {
  Eigen::SparseMatrix<std::complex<double>> a;
  Eigen::SparseLU<Eigen::SparseMatrix<std::complex<double>>, Eigen::COLAMDOrdering<int>> lu;
};

ComplexFactorization::~ComplexFactorization() = default;
ComplexFactorization::ComplexFactorization(ComplexFactorization&&) noexcept = default;
ComplexFactorization& ComplexFactorization::operator=(ComplexFactorization&&) noexcept = default;

ComplexFactorization::ComplexFactorization(const Eigen::SparseMatrix<std::complex<double>>& a)
    : impl_(std::make_unique<Impl>()) {
  impl_->a = a;
  impl_->a.makeCompressed();
  impl_->lu.analyzePattern(impl_->a);
  impl_->lu.factorize(impl_->a);
  ok_ = impl_->lu.info() == Eigen::Success;
}

ComplexField ComplexFactorization::solve(const ComplexField& b) const {
  if (!ok_) throw NumericalError("solve with a failed complex factorization");
  ComplexField x = impl_->lu.solve(b);
  const double bnorm = b.norm();
  if (bnorm == 0.0) return ComplexField::Zero(b.size());
  double prev = std::numeric_limits<double>::infinity();
  for (int step = 0; step < kMaxRefineSteps; ++step) {
    const ComplexField r = b - impl_->a * x;
    const double rn = r.norm();
    if (rn <= kRefineTarget * bnorm || rn >= 0.5 * prev) break;
    prev = rn;
    x += impl_->lu.solve(r);
  }
  return x;
}

}  // namespace steklov
