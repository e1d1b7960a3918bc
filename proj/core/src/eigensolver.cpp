#include "steklov/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "steklov/errors.hpp"
#include "steklov/factorization.hpp"

namespace steklov {

namespace {

using Eigen::MatrixXd;
using Eigen::SparseMatrix;

// Largest-magnitude component made positive so eigenvectors are reproducible up to ties.
void normalize_signs(MatrixXd& x) {
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    Eigen::Index imax = 0;
    x.col(c).cwiseAbs().maxCoeff(&imax);
    if (x(imax, c) < 0.0) x.col(c) *= -1.0;
  }
}

std::vector<double> true_residuals(const SparseMatrix<double>& a, const SparseMatrix<double>& w,
                                   const std::vector<double>& lambda, const MatrixXd& x) {
  std::vector<double> r(lambda.size());
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    const Field xi = x.col(static_cast<Eigen::Index>(i));
    r[i] = (a * xi - lambda[i] * (w * xi)).norm();
  }
  return r;
}

Spectrum dense_eigs(const SparseSym& a, const SparseSym& w, int count, const EigenOptions& opt) {
  const MatrixXd ad = MatrixXd(a.to_eigen_full());
  const MatrixXd wd = MatrixXd(w.to_eigen_full());
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(ad, wd);
  if (es.info() != Eigen::Success) throw NumericalError("dense generalized eigensolver failed (W not positive definite?)");
  const Field& ev = es.eigenvalues();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(ev.size()));
  std::iota(order.begin(), order.end(), 0);
  if (opt.mode == EigenMode::kNearest) {
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
      return std::abs(ev[i] - opt.sigma) < std::abs(ev[j] - opt.sigma);
    });
    order.resize(static_cast<std::size_t>(count));
    std::sort(order.begin(), order.end());
  } else {
    order.resize(static_cast<std::size_t>(count));
  }
  Spectrum s;
  MatrixXd x(ad.rows(), count);
  for (int i = 0; i < count; ++i) {
    s.eigenvalues.push_back(ev[order[static_cast<std::size_t>(i)]]);
    x.col(i) = es.eigenvectors().col(order[static_cast<std::size_t>(i)]);
  }
  normalize_signs(x);
  s.residual_norms = true_residuals(a.to_eigen_full(), w.to_eigen_full(), s.eigenvalues, x);
  if (opt.vectors) s.eigenvectors = std::move(x);
  return s;
}

struct LanczosResult {
  std::vector<double> lambda;  // all wanted, ascending
  MatrixXd x;
  std::vector<double> residuals;
  std::vector<double> history;
  int restarts = 0;
};

class ShiftInvertLanczos {
 public:
  ShiftInvertLanczos(const SparseSym& a, const SparseSym& w, const EigenOptions& opt, double sigma)
      : a_(a.to_eigen_full()), w_(w.to_eigen_full()), opt_(opt), sigma_(sigma), n_(a.dimension()) {
    const double c[] = {1.0, -sigma};
    const SparseSym* mats[] = {&a, &w};
    fact_ = SymmetricFactorization(SparseSym::combine(c, mats));
    if (!fact_.ok()) throw SpectralExclusionError("shift-invert: A - sigma W is singular", sigma, sigma);
  }

  LanczosResult run(int want, std::uint64_t seed, int block) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    auto random_vec = [&] {
      Field v(n_);
      for (Eigen::Index i = 0; i < n_; ++i) v[i] = uni(rng);
      return v;
    };
    const int mmax = std::min(std::max(2 * want + 2 * block, want + 20), std::max(want + block, n_ / 2));
    const int keep = std::min(want + block, mmax - block);
    V_ = MatrixXd::Zero(n_, mmax);
    Y_ = MatrixXd::Zero(n_, mmax);
    H_ = MatrixXd::Zero(mmax, mmax);
    m_ = 0;

    for (int j = 0; j < block; ++j) append(random_vec(), random_vec);

    LanczosResult out;
    for (int restart = 0;; ++restart) {
      // Fill the subspace.
      Ritz ritz;
      while (true) {
        ritz = rayleigh_ritz(want);
        if (ritz.converged || m_ + block > mmax) break;
        for (int j = 0; j < block && j < static_cast<int>(ritz.expand.size()); ++j) append(ritz.expand[static_cast<std::size_t>(j)], random_vec);
      }
      out.history.push_back(ritz.worst);
      out.restarts = restart;
      if (ritz.converged) {
        std::vector<int> idx(static_cast<std::size_t>(want));
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](int i, int j) { return ritz.lambda[static_cast<std::size_t>(i)] < ritz.lambda[static_cast<std::size_t>(j)]; });
        out.x.resize(n_, want);
        for (int i = 0; i < want; ++i) {
          const int k = idx[static_cast<std::size_t>(i)];
          out.lambda.push_back(ritz.lambda[static_cast<std::size_t>(k)]);
          out.residuals.push_back(ritz.residual[static_cast<std::size_t>(k)]);
          out.x.col(i) = V_.leftCols(m_) * ritz.s.col(k);
        }
        return out;
      }
      if (restart >= opt_.max_restarts) {
        std::ostringstream msg;
        msg << "shift-invert Lanczos did not converge after " << restart << " restarts; worst Ritz residual history:";
        const std::size_t from = out.history.size() > 8 ? out.history.size() - 8 : 0;
        for (std::size_t i = from; i < out.history.size(); ++i) msg << ' ' << out.history[i];
        throw NumericalError(msg.str());
      }
      // Thick restart: keep the leading Ritz vectors, then continue from the residuals.
      const int kk = std::min(keep, m_);
      const MatrixXd vk = V_.leftCols(m_) * ritz.s_all.leftCols(kk);
      const MatrixXd yk = Y_.leftCols(m_) * ritz.s_all.leftCols(kk);
      V_.leftCols(kk) = vk;
      Y_.leftCols(kk) = yk;
      H_.setZero();
      for (int i = 0; i < kk; ++i) H_(i, i) = ritz.theta_all[static_cast<std::size_t>(i)];
      m_ = kk;
      for (int j = 0; j < block && j < static_cast<int>(ritz.expand.size()); ++j) append(ritz.expand[static_cast<std::size_t>(j)], random_vec);
    }
  }

  int negative_count(double tau, const SparseSym& a, const SparseSym& w) const {
    const double c[] = {1.0, -tau};
    const SparseSym* mats[] = {&a, &w};
    const SymmetricFactorization f(SparseSym::combine(c, mats));
    return f.ok() ? f.negative_pivots() : -1;
  }

 private:
  struct Ritz {
    bool converged = false;
    double worst = 0.0;
    std::vector<double> lambda, residual;
    MatrixXd s;                    // wanted Ritz coefficient vectors
    MatrixXd s_all;                // all, in wanted order
    std::vector<double> theta_all;
    std::vector<Field> expand;     // residual directions of unconverged pairs
  };

  template <typename Rand>
  void append(Field y, Rand&& random_vec) {
    for (int attempt = 0; attempt < 4; ++attempt) {
      const double orig = std::sqrt(std::max(0.0, y.dot(w_ * y)));
      for (int pass = 0; pass < 2 && m_ > 0; ++pass) {
        const Field wy = w_ * y;
        const Field c = V_.leftCols(m_).transpose() * wy;
        y -= V_.leftCols(m_) * c;
      }
      const double nrm = std::sqrt(std::max(0.0, y.dot(w_ * y)));
      if (orig > 0.0 && nrm > 1e-8 * orig) {
        y /= nrm;
        V_.col(m_) = y;
        const Field oy = fact_.solve(Field(w_ * y));
        Y_.col(m_) = oy;
        const Field woy = w_ * oy;
        const Field h = V_.leftCols(m_ + 1).transpose() * woy;
        H_.block(0, m_, m_ + 1, 1) = h;
        H_.block(m_, 0, 1, m_ + 1) = h.transpose();
        ++m_;
        return;
      }
      y = random_vec();
    }
    throw NumericalError("shift-invert Lanczos: could not extend the Krylov basis");
  }

  Ritz rayleigh_ritz(int want) const {
    Ritz r;
    const MatrixXd h = 0.5 * (H_.topLeftCorner(m_, m_) + H_.topLeftCorner(m_, m_).transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(h);
    const Field& th = es.eigenvalues();
    std::vector<int> order(static_cast<std::size_t>(m_));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return std::abs(th[i]) > std::abs(th[j]); });
    r.s_all.resize(m_, m_);
    for (int i = 0; i < m_; ++i) {
      r.s_all.col(i) = es.eigenvectors().col(order[static_cast<std::size_t>(i)]);
      r.theta_all.push_back(th[order[static_cast<std::size_t>(i)]]);
    }
    const int nw = std::min(want, m_);
    r.s = r.s_all.leftCols(nw);
    r.converged = nw == want;
    std::vector<Field> pending_extra;
    for (int i = 0; i < m_; ++i) {
      const double theta = r.theta_all[static_cast<std::size_t>(i)];
      const Field x = V_.leftCols(m_) * r.s_all.col(i);
      const Field y = Y_.leftCols(m_) * r.s_all.col(i);
      if (i < nw) {
        const double lambda = sigma_ + 1.0 / theta;
        const double res = (a_ * x - lambda * (w_ * x)).norm();
        r.lambda.push_back(lambda);
        r.residual.push_back(res);
        const double rel = res / std::max(1.0, std::abs(lambda));
        r.worst = std::max(r.worst, rel);
        if (!(rel <= opt_.tolerance)) {
          r.converged = false;
          r.expand.push_back(y - theta * x);
        }
      } else if (static_cast<int>(r.expand.size() + pending_extra.size()) < opt_.block_size) {
        pending_extra.push_back(y - theta * x);
      } else {
        break;
      }
    }
    // Fewer unconverged wanted pairs than the block: pad with the next Ritz residuals.
    for (auto& e : pending_extra) {
      if (static_cast<int>(r.expand.size()) >= opt_.block_size) break;
      r.expand.push_back(std::move(e));
    }
    return r;
  }

  SparseMatrix<double> a_, w_;
  EigenOptions opt_;
  double sigma_;
  int n_;
  SymmetricFactorization fact_;
  MatrixXd V_, Y_, H_;
  int m_ = 0;
};

// A shift a little below the spectrum: 1e-6 of the diagonal ratio (an upper-spectrum
// estimate) keeps A - sigma W well conditioned even when A itself is singular.
double smallest_mode_shift(const SparseSym& a, const SparseSym& w) {
  const double scale = a.diagonal().mean() / w.diagonal().mean();
  for (int j = -6; j <= 6; ++j) {
    const double sigma = -scale * std::pow(10.0, j);
    const double c[] = {1.0, -sigma};
    const SparseSym* mats[] = {&a, &w};
    if (SymmetricFactorization(SparseSym::combine(c, mats)).positive_definite()) return sigma;
  }
  throw NumericalError("eigs_generalized: could not find a shift below the spectrum");
}

}  // namespace

Spectrum eigs_generalized(const SparseSym& a, const SparseSym& w, int count, const EigenOptions& options) {
  const int n = a.dimension();
  if (w.dimension() != n) throw ArgumentError("eigs_generalized: A and W differ in size");
  if (count < 0) throw ArgumentError("eigs_generalized: negative count");
  if (count == 0) return {};
  if (count > std::max(1, n / 4)) throw ArgumentError("eigs_generalized: count must be <= n/4");
  if (options.block_size < 1) throw ArgumentError("eigs_generalized: block size must be >= 1");
  {
    const SymmetricFactorization wf(w);
    if (!wf.positive_definite()) throw ArgumentError("eigs_generalized: W is not positive definite");
  }
  if (n <= options.dense_threshold) return dense_eigs(a, w, count, options);

  double sigma = options.sigma;
  if (options.mode == EigenMode::kSmallest) {
    sigma = smallest_mode_shift(a, w);
  } else {
    const double c[] = {1.0, -sigma};
    const SparseSym* mats[] = {&a, &w};
    if (!SymmetricFactorization(SparseSym::combine(c, mats)).ok()) sigma += 1e-8 * std::max(1.0, std::abs(sigma));
  }

  const int want = std::min(count + 2, n / 2);
  int block = options.block_size;
  std::uint64_t seed = options.seed;
  for (int attempt = 0; attempt < 3; ++attempt, block += 2, ++seed) {
    EigenOptions opt = options;
    opt.block_size = block;
    ShiftInvertLanczos solver(a, w, opt, sigma);
    LanczosResult res = solver.run(want, seed, block);

    bool complete = true;
    if (options.mode == EigenMode::kSmallest) {
      // Inertia check at the first clear gap at or after index `count`.
      for (int c = count; c < want; ++c) {
        const double lo = res.lambda[static_cast<std::size_t>(c) - 1], hi = res.lambda[static_cast<std::size_t>(c)];
        if (hi - lo > 1e-6 * std::max(1.0, std::abs(hi))) {
          complete = solver.negative_count(0.5 * (lo + hi), a, w) == c;
          break;
        }
      }
    }
    if (!complete) continue;

    Spectrum s;
    MatrixXd x = res.x.leftCols(count);
    if (options.mode == EigenMode::kNearest) {
      // `want` pairs nearest sigma, ascending: keep the `count` closest.
      std::vector<int> idx(static_cast<std::size_t>(want));
      std::iota(idx.begin(), idx.end(), 0);
      std::stable_sort(idx.begin(), idx.end(), [&](int i, int j) {
        return std::abs(res.lambda[static_cast<std::size_t>(i)] - sigma) < std::abs(res.lambda[static_cast<std::size_t>(j)] - sigma);
      });
      idx.resize(static_cast<std::size_t>(count));
      std::sort(idx.begin(), idx.end());
      for (int i = 0; i < count; ++i) x.col(i) = res.x.col(idx[static_cast<std::size_t>(i)]);
      for (int i : idx) {
        s.eigenvalues.push_back(res.lambda[static_cast<std::size_t>(i)]);
        s.residual_norms.push_back(res.residuals[static_cast<std::size_t>(i)]);
      }
    } else {
      s.eigenvalues.assign(res.lambda.begin(), res.lambda.begin() + count);
      s.residual_norms.assign(res.residuals.begin(), res.residuals.begin() + count);
    }
    normalize_signs(x);
    if (options.vectors) s.eigenvectors = std::move(x);
    s.restarts = res.restarts;
    s.residual_history = std::move(res.history);
    return s;
  }
  throw NumericalError("eigs_generalized: inertia check failed; an eigenvalue below the computed set was missed");
}

Spectrum robin_spectrum(const OperatorSet& ops, double alpha, int count, EigenOptions options) {
  if (!(alpha >= 0.0)) throw ArgumentError("robin_spectrum: alpha must be >= 0");
  options.mode = EigenMode::kSmallest;
  const double c[] = {1.0, alpha};
  const SparseSym* mats[] = {&ops.K, &ops.B};
  Spectrum s = eigs_generalized(SparseSym::combine(c, mats), ops.M, count, options);
  s.problem.bc = alpha == 0.0 ? "neumann" : "robin";
  s.problem.alpha = alpha;
  s.problem.measure = std::string(to_string(ops.measure.kind));
  return s;
}

Spectrum dirichlet_spectrum(const OperatorSet& ops, int count, EigenOptions options) {
  options.mode = EigenMode::kSmallest;
  const auto& interior = ops.dofmap.interior;
  Spectrum s = eigs_generalized(ops.K.principal(interior), ops.M.principal(interior), count, options);
  if (s.eigenvectors) {
    MatrixXd full = MatrixXd::Zero(ops.vertex_count(), s.eigenvectors->cols());
    for (std::size_t i = 0; i < interior.size(); ++i) full.row(interior[i]) = s.eigenvectors->row(static_cast<Eigen::Index>(i));
    s.eigenvectors = std::move(full);
  }
  s.problem.bc = "dirichlet";
  return s;
}

std::optional<double> nearest_dirichlet_eigenvalue(const OperatorSet& ops, double target) {
  const auto& interior = ops.dofmap.interior;
  if (interior.size() < 4) return std::nullopt;
  try {
    EigenOptions opt;
    opt.mode = EigenMode::kNearest;
    opt.sigma = target;
    opt.vectors = false;
    return eigs_generalized(ops.K.principal(interior), ops.M.principal(interior), 1, opt).eigenvalues.front();
  } catch (const Error&) {
    return std::nullopt;
  }
}

void write_spectrum_csv(std::ostream& os, const Spectrum& s, std::string_view comment) {
  if (!comment.empty()) {
    std::istringstream lines{std::string(comment)};
    for (std::string line; std::getline(lines, line);) os << "# " << line << '\n';
  }
  os << "index,eigenvalue,residual\n";
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(17);
  for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
    os << i << ',' << s.eigenvalues[i] << ',' << (i < s.residual_norms.size() ? s.residual_norms[i] : 0.0) << '\n';
  }
  os.flags(flags);
  os.precision(prec);
}

}  // namespace steklov
