#include "steklov/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "steklov/errors.hpp"

namespace steklov {

double participation_ratio(const Field& phi, const TriMesh& mesh, const SparseSym& mass) {
  if (phi.size() != static_cast<Eigen::Index>(mesh.vertex_count())) throw ArgumentError("participation_ratio: size mismatch");
  if (phi.cwiseAbs().maxCoeff() == 0.0) throw ArgumentError("participation_ratio: zero field");
  // Scale out the magnitude first; PR is homogeneous of degree 0.
  const Field u = phi / phi.cwiseAbs().maxCoeff();
  const double l2 = mass.bilinear(u, u);
  double q4 = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double a = u[tri[0]], b = u[tri[1]], c = u[tri[2]];
    // Sum of all degree-4 monomials a^i b^j c^k, i + j + k = 4.
    double sum = 0.0;
    for (int i = 0; i <= 4; ++i) {
      for (int j = 0; i + j <= 4; ++j) sum += std::pow(a, i) * std::pow(b, j) * std::pow(c, 4 - i - j);
    }
    q4 += mesh.triangle_area(t) * sum / 15.0;
  }
  return l2 * l2 / (mesh.area() * q4);
}

double participation_ratio(const Field& phi, const OperatorSet& ops) { return participation_ratio(phi, *ops.mesh, ops.M); }

ModeLocalization localize(const Field& phi, const OperatorSet& ops) {
  const TriMesh& mesh = *ops.mesh;
  ModeLocalization out;
  out.participation_ratio = participation_ratio(phi, ops);
  std::vector<double> lumped(mesh.vertex_count(), 0.0);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const double a3 = mesh.triangle_area(t) / 3.0;
    for (int v : mesh.triangles[t]) lumped[static_cast<std::size_t>(v)] += a3;
  }
  const double peak = phi.cwiseAbs().maxCoeff();
  double support = 0.0, wsum = 0.0;
  Vec2 c{0.0, 0.0};
  out.box_min = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  out.box_max = -1.0 * out.box_min;
  for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
    const double val = phi[static_cast<Eigen::Index>(v)];
    const double w = val * val * lumped[v];
    wsum += w;
    c = c + w * mesh.vertices[v];
    if (std::abs(val) >= 0.5 * peak) {
      support += lumped[v];
      out.box_min = {std::min(out.box_min.x, mesh.vertices[v].x), std::min(out.box_min.y, mesh.vertices[v].y)};
      out.box_max = {std::max(out.box_max.x, mesh.vertices[v].x), std::max(out.box_max.y, mesh.vertices[v].y)};
    }
  }
  out.support_fraction = support / mesh.area();
  out.centroid = (1.0 / wsum) * c;
  return out;
}

LocalizationReport localization(const Spectrum& spectrum, const OperatorSet& ops) {
  if (!spectrum.eigenvectors) throw ArgumentError("localization: spectrum carries no eigenvectors");
  LocalizationReport rep;
  std::vector<double> prs;
  for (Eigen::Index i = 0; i < spectrum.eigenvectors->cols(); ++i) {
    rep.modes.push_back(localize(spectrum.eigenvectors->col(i), ops));
    prs.push_back(rep.modes.back().participation_ratio);
  }
  if (!prs.empty()) {
    std::sort(prs.begin(), prs.end());
    const std::size_t n = prs.size();
    rep.median_pr = n % 2 ? prs[n / 2] : 0.5 * (prs[n / 2 - 1] + prs[n / 2]);
  }
  return rep;
}

MeshLocator::MeshLocator(std::shared_ptr<const TriMesh> mesh) : mesh_(std::move(mesh)) {
  const TriMesh& m = *mesh_;
  if (m.triangles.empty()) throw ArgumentError("MeshLocator: empty mesh");
  lo_ = hi_ = m.vertices.front();
  for (const Vec2& p : m.vertices) {
    lo_ = {std::min(lo_.x, p.x), std::min(lo_.y, p.y)};
    hi_ = {std::max(hi_.x, p.x), std::max(hi_.y, p.y)};
  }
  const double extent = std::max(hi_.x - lo_.x, hi_.y - lo_.y);
  const double target = std::sqrt(static_cast<double>(m.triangles.size()));
  cell_ = extent / std::max(1.0, std::floor(target));
  nx_ = static_cast<int>(std::floor((hi_.x - lo_.x) / cell_)) + 1;
  ny_ = static_cast<int>(std::floor((hi_.y - lo_.y) / cell_)) + 1;
  const std::size_t ncell = static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_);
  std::vector<std::vector<int>> buckets(ncell);
  auto clampx = [&](double x) { return std::clamp(static_cast<int>(std::floor((x - lo_.x) / cell_)), 0, nx_ - 1); };
  auto clampy = [&](double y) { return std::clamp(static_cast<int>(std::floor((y - lo_.y) / cell_)), 0, ny_ - 1); };
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (int v : m.triangles[t]) {
      const Vec2 p = m.vertices[static_cast<std::size_t>(v)];
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
    for (int j = clampy(y0); j <= clampy(y1); ++j) {
      for (int i = clampx(x0); i <= clampx(x1); ++i) buckets[static_cast<std::size_t>(j) * nx_ + i].push_back(static_cast<int>(t));
    }
  }
  offsets_.assign(ncell + 1, 0);
  for (std::size_t c = 0; c < ncell; ++c) offsets_[c + 1] = offsets_[c] + static_cast<int>(buckets[c].size());
  items_.reserve(static_cast<std::size_t>(offsets_.back()));
  for (const auto& b : buckets) items_.insert(items_.end(), b.begin(), b.end());
}

std::optional<MeshLocator::Hit> MeshLocator::locate(Vec2 p) const {
  const double tol = 1e-12 * std::max(1.0, cell_);
  if (p.x < lo_.x - tol || p.y < lo_.y - tol || p.x > hi_.x + tol || p.y > hi_.y + tol) return std::nullopt;
  const int i = std::clamp(static_cast<int>(std::floor((p.x - lo_.x) / cell_)), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor((p.y - lo_.y) / cell_)), 0, ny_ - 1);
  const std::size_t c = static_cast<std::size_t>(j) * nx_ + i;
  const TriMesh& m = *mesh_;
  for (int q = offsets_[c]; q < offsets_[c + 1]; ++q) {
    const auto& tri = m.triangles[static_cast<std::size_t>(items_[static_cast<std::size_t>(q)])];
    const Vec2 a = m.vertices[static_cast<std::size_t>(tri[0])];
    const Vec2 b = m.vertices[static_cast<std::size_t>(tri[1])];
    const Vec2 cc = m.vertices[static_cast<std::size_t>(tri[2])];
    const double det = cross(b - a, cc - a);
    const double l1 = cross(b - p, cc - p) / det;
    const double l2 = cross(cc - p, a - p) / det;
    const double l3 = 1.0 - l1 - l2;
    const double eps = -1e-12;
    if (l1 >= eps && l2 >= eps && l3 >= eps) return Hit{items_[static_cast<std::size_t>(q)], {l1, l2, l3}};
  }
  return std::nullopt;
}

std::optional<double> MeshLocator::interpolate(const Field& f, Vec2 p) const {
  const auto hit = locate(p);
  if (!hit) return std::nullopt;
  const auto& tri = mesh_->triangles[static_cast<std::size_t>(hit->triangle)];
  return hit->bary[0] * f[tri[0]] + hit->bary[1] * f[tri[1]] + hit->bary[2] * f[tri[2]];
}

MacResult match_modes(const MeshLocator& a, const Eigen::MatrixXd& modes_a, const MeshLocator& b,
                      const Eigen::MatrixXd& modes_b, int resolution) {
  if (resolution < 2) throw ArgumentError("match_modes: resolution must be >= 2");
  auto bbox = [](const TriMesh& m) {
    Vec2 lo = m.vertices.front(), hi = lo;
    for (const Vec2& p : m.vertices) {
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    return std::pair{lo, hi};
  };
  const auto [alo, ahi] = bbox(a.mesh());
  const auto [blo, bhi] = bbox(b.mesh());
  const Vec2 lo{std::max(alo.x, blo.x), std::max(alo.y, blo.y)};
  const Vec2 hi{std::min(ahi.x, bhi.x), std::min(ahi.y, bhi.y)};
  if (!(hi.x > lo.x && hi.y > lo.y)) throw ArgumentError("match_modes: domains are disjoint");

  std::vector<std::pair<MeshLocator::Hit, MeshLocator::Hit>> samples;
  const double dx = (hi.x - lo.x) / resolution, dy = (hi.y - lo.y) / resolution;
  for (int j = 0; j < resolution; ++j) {
    for (int i = 0; i < resolution; ++i) {
      const Vec2 p{lo.x + (i + 0.5) * dx, lo.y + (j + 0.5) * dy};
      const auto ha = a.locate(p);
      if (!ha) continue;
      const auto hb = b.locate(p);
      if (!hb) continue;
      samples.emplace_back(*ha, *hb);
    }
  }
  if (samples.empty()) throw ArgumentError("match_modes: domains do not overlap on the sampling grid");

  auto sample = [&](const TriMesh& m, const Eigen::MatrixXd& modes, bool first) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(samples.size()), modes.cols());
    for (std::size_t s = 0; s < samples.size(); ++s) {
      const MeshLocator::Hit& h = first ? samples[s].first : samples[s].second;
      const auto& tri = m.triangles[static_cast<std::size_t>(h.triangle)];
      out.row(static_cast<Eigen::Index>(s)) =
          h.bary[0] * modes.row(tri[0]) + h.bary[1] * modes.row(tri[1]) + h.bary[2] * modes.row(tri[2]);
    }
    return out;
  };
  const Eigen::MatrixXd sa = sample(a.mesh(), modes_a, true);
  const Eigen::MatrixXd sb = sample(b.mesh(), modes_b, false);
  const Eigen::MatrixXd cross_ip = sa.transpose() * sb;
  const Field na = sa.colwise().squaredNorm().transpose();
  const Field nb = sb.colwise().squaredNorm().transpose();

  MacResult r;
  r.sample_points = samples.size();
  r.mac.resize(sa.cols(), sb.cols());
  for (Eigen::Index i = 0; i < sa.cols(); ++i) {
    for (Eigen::Index j = 0; j < sb.cols(); ++j) {
      const double den = na[i] * nb[j];
      r.mac(i, j) = den > 0.0 ? std::min(1.0, cross_ip(i, j) * cross_ip(i, j) / den) : 0.0;
    }
  }
  std::vector<ModeMatch> all;
  for (Eigen::Index i = 0; i < r.mac.rows(); ++i) {
    for (Eigen::Index j = 0; j < r.mac.cols(); ++j) all.push_back({static_cast<int>(i), static_cast<int>(j), r.mac(i, j)});
  }
  std::stable_sort(all.begin(), all.end(), [](const ModeMatch& x, const ModeMatch& y) { return x.mac > y.mac; });
  std::vector<bool> used_a(static_cast<std::size_t>(r.mac.rows()), false), used_b(static_cast<std::size_t>(r.mac.cols()), false);
  for (const ModeMatch& m : all) {
    if (used_a[static_cast<std::size_t>(m.a)] || used_b[static_cast<std::size_t>(m.b)]) continue;
    used_a[static_cast<std::size_t>(m.a)] = used_b[static_cast<std::size_t>(m.b)] = true;
    r.matches.push_back(m);
  }
  return r;
}

double spectral_hausdorff(std::span<const double> a, std::span<const double> b, double cutoff) {
  std::vector<double> ta, tb;
  for (double x : a) {
    if (x <= cutoff) ta.push_back(x);
  }
  for (double x : b) {
    if (x <= cutoff) tb.push_back(x);
  }
  if (ta.empty() || tb.empty()) throw ArgumentError("spectral_hausdorff: empty truncated spectrum");
  std::sort(ta.begin(), ta.end());
  std::sort(tb.begin(), tb.end());
  auto directed = [](const std::vector<double>& from, const std::vector<double>& to) {
    double worst = 0.0;
    for (double x : from) {
      const auto it = std::lower_bound(to.begin(), to.end(), x);
      double best = std::numeric_limits<double>::infinity();
      if (it != to.end()) best = *it - x;
      if (it != to.begin()) best = std::min(best, x - *(it - 1));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(ta, tb), directed(tb, ta));
}

const char* test_function_name(int i) {
  static constexpr const char* names[kTestFamilySize] = {"1", "x", "y", "x^2", "xy", "y^2"};
  if (i < 0 || i >= kTestFamilySize) throw ArgumentError("test function index out of range");
  return names[i];
}

double test_function(int i, Vec2 p) {
  switch (i) {
    case 0: return 1.0;
    case 1: return p.x;
    case 2: return p.y;
    case 3: return p.x * p.x;
    case 4: return p.x * p.y;
    case 5: return p.y * p.y;
    default: throw ArgumentError("test function index out of range");
  }
}

namespace {

double simpson(int i, Vec2 a, Vec2 b) {
  return (test_function(i, a) + 4.0 * test_function(i, 0.5 * (a + b)) + test_function(i, b)) / 6.0;
}

}  // namespace

double measure_moment(const BoundaryMeasure& m, int test_index) {
  double total = 0.0;
  for (const auto& e : m.edges) total += e.weight * simpson(test_index, e.pa, e.pb);
  return total;
}

std::array<double, kTestFamilySize> chain_moments(const PrefractalSpec& spec, double total) {
  const PolyChain chain = generate_minkowski(spec);
  const double w = total / static_cast<double>(chain.segment_count());
  std::array<double, kTestFamilySize> out{};
  for (std::size_t s = 0; s < chain.segment_count(); ++s) {
    const auto [a, b] = chain.segment(s);
    for (int i = 0; i < kTestFamilySize; ++i) out[static_cast<std::size_t>(i)] += w * simpson(i, a, b);
  }
  return out;
}

}  // namespace steklov
