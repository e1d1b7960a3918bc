#include "steklov/steklov.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <utility>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "steklov/errors.hpp"
#include "steklov/parallel.hpp"

namespace steklov {

namespace {

using Eigen::MatrixXd;

[[noreturn]] void throw_exclusion(const OperatorSet& ops, double k, const std::string& why) {
  const std::optional<double> lam = nearest_dirichlet_eigenvalue(ops, -k);
  std::ostringstream msg;
  msg << "build_steklov: k = " << k << ' ' << why;
  if (lam) msg << " (nearest interior Dirichlet eigenvalue " << *lam << ", i.e. k = " << -*lam << ")";
  throw SpectralExclusionError(msg.str(), k, lam);
}

}  // namespace

SteklovOperator build_steklov(const OperatorSet& ops, double k, SteklovOptions options) {
  return build_steklov(std::make_shared<const OperatorSet>(ops), k, options);
}

SteklovOperator build_steklov(std::shared_ptr<const OperatorSet> ops_ptr, double k, SteklovOptions options) {
  const OperatorSet& ops = *ops_ptr;
  if (ops.gamma_count() == 0) throw ArgumentError("build_steklov: Gamma is empty");
  if (ops.boundary_count() > options.max_dense_dofs) {
    throw CapacityError("build_steklov: " + std::to_string(ops.boundary_count()) + " boundary dofs exceed the dense limit " +
                        std::to_string(options.max_dense_dofs) + "; use ImplicitSteklov");
  }
  SteklovOperator st;
  st.k = k;
  st.ops = ops_ptr;
  st.boundary = ops.dofmap.boundary;
  st.gamma = ops.dofmap.robin;

  const double c[] = {1.0, k};
  const SparseSym* mats[] = {&ops.K, &ops.M};
  const SparseSym a = SparseSym::combine(c, mats);
  const auto& interior = ops.dofmap.interior;
  const auto& boundary = ops.dofmap.boundary;
  auto fact = std::make_shared<SymmetricFactorization>(a.principal(interior));
  if (!fact->ok()) throw_exclusion(ops, k, "makes the interior block singular");
  if (options.require_definite && !fact->positive_definite()) {
    throw_exclusion(ops, k, "lies below minus the lowest interior Dirichlet eigenvalue");
  }
  st.interior = fact;

  const int nb = static_cast<int>(boundary.size());
  const Eigen::SparseMatrix<double> aib = a.block(interior, boundary);
  const Eigen::SparseMatrix<double> abi = aib.transpose();
  MatrixXd s = MatrixXd(a.block(boundary, boundary));
  if (!interior.empty()) {
    parallel_for(static_cast<std::size_t>(nb), [&](std::size_t begin, std::size_t end, int) {
      for (std::size_t j = begin; j < end; ++j) {
        const Field x = fact->solve(Field(aib.col(static_cast<Eigen::Index>(j))));
        s.col(static_cast<Eigen::Index>(j)) -= abi * x;
      }
    });
  }
  const double smax = s.cwiseAbs().maxCoeff();
  st.raw_asymmetry = smax > 0.0 ? (s - s.transpose()).cwiseAbs().maxCoeff() / smax : 0.0;
  st.S_full = 0.5 * (s + s.transpose());

  std::vector<bool> in_gamma(static_cast<std::size_t>(ops.vertex_count()), false);
  for (int v : st.gamma) in_gamma[static_cast<std::size_t>(v)] = true;
  std::vector<int> gpos, opos;
  st.off_gamma.resize(boundary.size());
  for (int i = 0; i < nb; ++i) {
    const bool on = in_gamma[static_cast<std::size_t>(boundary[static_cast<std::size_t>(i)])];
    st.off_gamma[static_cast<std::size_t>(i)] = !on;
    (on ? gpos : opos).push_back(i);
  }
  const int ng = static_cast<int>(gpos.size()), no = static_cast<int>(opos.size());
  if (no == 0) {
    st.S = st.S_full;
  } else {
    MatrixXd sgg(ng, ng), sgo(ng, no), soo(no, no);
    for (int i = 0; i < ng; ++i) {
      for (int j = 0; j < ng; ++j) sgg(i, j) = st.S_full(gpos[static_cast<std::size_t>(i)], gpos[static_cast<std::size_t>(j)]);
      for (int j = 0; j < no; ++j) sgo(i, j) = st.S_full(gpos[static_cast<std::size_t>(i)], opos[static_cast<std::size_t>(j)]);
    }
    for (int i = 0; i < no; ++i) {
      for (int j = 0; j < no; ++j) soo(i, j) = st.S_full(opos[static_cast<std::size_t>(i)], opos[static_cast<std::size_t>(j)]);
    }
    const Eigen::LDLT<MatrixXd> ldlt(soo);
    if (ldlt.info() != Eigen::Success) throw_exclusion(ops, k, "makes the off-Gamma boundary block singular");
    const MatrixXd red = sgg - sgo * ldlt.solve(MatrixXd(sgo.transpose()));
    st.S = 0.5 * (red + red.transpose());
  }
  // Gamma rows of S follow dofmap.robin, which lists Gamma vertices in increasing order as
  // does dofmap.boundary; so gpos order matches st.gamma.
  st.B_gamma = MatrixXd(ops.B.principal(st.gamma).to_eigen_full());
  auto llt = std::make_shared<Eigen::LLT<MatrixXd>>(st.B_gamma);
  if (llt->info() != Eigen::Success) throw ArgumentError("build_steklov: boundary mass on Gamma is not positive definite");
  st.b_gamma_llt = llt;
  return st;
}

Spectrum steklov_spectrum(const SteklovOperator& st, int count) {
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(st.S, st.B_gamma);
  if (es.info() != Eigen::Success) throw NumericalError("steklov_spectrum: dense eigensolver failed");
  const int n = static_cast<int>(st.S.rows());
  const int m = count <= 0 ? n : std::min(count, n);
  Spectrum s;
  s.problem.bc = "steklov";
  s.problem.k = st.k;
  if (st.ops) s.problem.measure = std::string(to_string(st.ops->measure.kind));
  MatrixXd x = es.eigenvectors().leftCols(m);
  for (int i = 0; i < m; ++i) {
    Eigen::Index imax = 0;
    x.col(i).cwiseAbs().maxCoeff(&imax);
    if (x(imax, i) < 0.0) x.col(i) *= -1.0;
    const double lam = es.eigenvalues()[i];
    s.eigenvalues.push_back(lam);
    s.residual_norms.push_back((st.S * x.col(i) - lam * (st.B_gamma * x.col(i))).norm());
  }
  s.eigenvectors = std::move(x);
  return s;
}

Field apply_dtn(const SteklovOperator& st, const Field& f) {
  if (f.size() != st.S.rows()) throw ArgumentError("apply_dtn: data must live on the Gamma dofs");
  return st.b_gamma_llt->solve(st.S * f);
}

ComplexField steklov_resolvent(const SteklovOperator& st, double s, const Field& h) {
  if (h.size() != st.S.rows()) throw ArgumentError("steklov_resolvent: data must live on the Gamma dofs");
  const Eigen::MatrixXcd op = std::complex<double>(0.0, s) * st.B_gamma.cast<std::complex<double>>() -
                              st.S.cast<std::complex<double>>();
  const ComplexField rhs = (st.B_gamma * h).cast<std::complex<double>>();
  return op.partialPivLu().solve(rhs);
}

double resolvent_check(const SteklovOperator& st, double s, const Field& h) {
  if (s == 0.0) throw ArgumentError("resolvent_check: s must be nonzero");
  if (!st.ops) throw ArgumentError("resolvent_check: Steklov operator carries no operator set");
  const ComplexField route_b = steklov_resolvent(st, s, h);
  const ComplexField u = solve_robin(*st.ops, 0.0, st.k, s, h);
  ComplexField route_a(static_cast<Eigen::Index>(st.gamma.size()));
  for (std::size_t i = 0; i < st.gamma.size(); ++i) route_a[static_cast<Eigen::Index>(i)] = u[st.gamma[i]];
  const double nb = route_b.norm();
  const double diff = (route_a - route_b).norm();
  return nb > 0.0 ? diff / nb : diff;
}

ProbeSample probe_at(const OperatorSet& ops, double k) {
  const SteklovOperator st = build_steklov(ops, k, SteklovOptions{.require_definite = false});
  ProbeSample p;
  p.k = k;
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> ges(st.S, st.B_gamma, Eigen::EigenvaluesOnly);
  p.min_singular = ges.eigenvalues().cwiseAbs().minCoeff();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(st.S, Eigen::EigenvaluesOnly);
  p.s_norm = es.eigenvalues().cwiseAbs().maxCoeff();
  return p;
}

InjectivityReport injectivity_probe(const OperatorSet& ops, int which, double offset) {
  if (which < 1 || which > 10) throw ArgumentError("injectivity_probe: which must be in 1..10");
  InjectivityReport rep;
  rep.which = which;
  EigenOptions opt;
  opt.vectors = false;
  const Spectrum neumann = robin_spectrum(ops, 0.0, which, opt);
  rep.neumann_eigenvalue = neumann.eigenvalues.back();
  rep.k_star = -rep.neumann_eigenvalue;
  if (const auto lam = nearest_dirichlet_eigenvalue(ops, rep.neumann_eigenvalue)) {
    const double scale = std::max(1.0, std::abs(rep.neumann_eigenvalue));
    if (std::abs(*lam - rep.neumann_eigenvalue) <= 1e-6 * scale) {
      rep.shifted = true;
      rep.k_star += 1e-4 * scale;
      std::ostringstream msg;
      msg << "k_star = " << -rep.neumann_eigenvalue << " collides with the interior Dirichlet eigenvalue " << *lam
          << "; probing at " << rep.k_star;
      rep.warning = msg.str();
    }
  }
  rep.at_k_star = probe_at(ops, rep.k_star);
  rep.at_offset = probe_at(ops, rep.k_star + offset);
  return rep;
}

ImplicitSteklov::ImplicitSteklov(std::shared_ptr<const OperatorSet> ops, double k, SteklovOptions options)
    : k_(k), ops_(std::move(ops)) {
  if (!ops_) throw ArgumentError("ImplicitSteklov: no operator set");
  const OperatorSet& o = *ops_;
  if (o.gamma_count() == 0) throw ArgumentError("ImplicitSteklov: Gamma is empty");
  gamma_ = o.dofmap.robin;
  std::vector<bool> on(static_cast<std::size_t>(o.vertex_count()), false);
  for (int v : gamma_) on[static_cast<std::size_t>(v)] = true;
  std::vector<int> eliminated;
  for (int v = 0; v < o.vertex_count(); ++v) {
    if (!on[static_cast<std::size_t>(v)]) eliminated.push_back(v);
  }

  const double c[] = {1.0, k};
  const SparseSym* mats[] = {&o.K, &o.M};
  const SparseSym a = SparseSym::combine(c, mats);
  a_gg_ = a.principal(gamma_);
  if (!eliminated.empty()) {
    auto fact = std::make_shared<SymmetricFactorization>(a.principal(eliminated));
    if (!fact->ok()) throw_exclusion(o, k, "makes the eliminated block singular");
    if (options.require_definite && !fact->positive_definite()) {
      throw_exclusion(o, k, "lies below minus the lowest interior Dirichlet eigenvalue");
    }
    eliminated_ = fact;
    a_eg_ = a.block(eliminated, gamma_);
    a_ge_ = a_eg_.transpose();
  }
  auto b = std::make_shared<SymmetricFactorization>(o.B.principal(gamma_));
  if (!b->positive_definite()) throw ArgumentError("ImplicitSteklov: boundary mass on Gamma is not positive definite");
  b_gamma_ = b;
}

Field ImplicitSteklov::apply(const Field& f) const {
  if (f.size() != gamma_count()) throw ArgumentError("ImplicitSteklov::apply: data must live on the Gamma dofs");
  Field y = a_gg_.apply(f);
  if (eliminated_) y -= a_ge_ * eliminated_->solve(Field(a_eg_ * f));
  return y;
}

Field ImplicitSteklov::apply_dtn(const Field& f) const { return b_gamma_->solve(apply(f)); }

void write_steklov_matrix(std::ostream& os, const SteklovOperator& st, std::string_view comment) {
  write_matrix_market(os, st.S, comment);
}

}  // namespace steklov
