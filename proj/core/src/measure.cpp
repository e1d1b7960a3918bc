#include "steklov/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "steklov/errors.hpp"
#include "steklov/factorization.hpp"
#include "steklov/fem.hpp"

namespace steklov {

std::string_view to_string(MeasureKind kind) {
  return kind == MeasureKind::kArclength ? "arclength" : "selfsimilar";
}

MeasureKind measure_kind_from_string(std::string_view name) {
  if (name == "arclength") return MeasureKind::kArclength;
  if (name == "selfsimilar") return MeasureKind::kSelfSimilar;
  throw ArgumentError("unknown measure kind '" + std::string(name) + "'");
}

BoundaryMeasure arclength_measure(const TriMesh& mesh, TagSet gamma_tags) {
  BoundaryMeasure m;
  m.kind = MeasureKind::kArclength;
  m.gamma = gamma_tags;
  m.d = 1.0;
  m.vertex_count = mesh.vertex_count();
  for (const auto& e : mesh.boundary_edges) {
    if (!gamma_tags.contains(e.tag)) continue;
    const Vec2 pa = mesh.vertices[static_cast<std::size_t>(e.v[0])];
    const Vec2 pb = mesh.vertices[static_cast<std::size_t>(e.v[1])];
    m.edges.push_back({e.v[0], e.v[1], pa, pb, norm(pb - pa)});
    m.total_mass += m.edges.back().weight;
  }
  if (m.edges.empty()) throw ArgumentError("arclength_measure: Gamma is empty");
  return m;
}

BoundaryMeasure selfsimilar_measure(const PrefractalSpec& spec, const TriMesh& mesh, double total) {
  if (!(total > 0.0)) throw ArgumentError("selfsimilar_measure: total mass must be positive");
  const PolyChain chain = generate_minkowski(spec);
  const double ell = spec.segment_length();
  const Vec2 o = spec.anchor;

  // Elementary segments keyed by their midpoint in half-segment units.
  auto half_units = [&](Vec2 p) {
    return std::pair{std::llround(2.0 * (p.x - o.x) / ell), std::llround(2.0 * (p.y - o.y) / ell)};
  };
  auto key = [](long long i, long long j) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32) | static_cast<std::uint32_t>(j);
  };
  std::unordered_map<std::uint64_t, std::size_t> segment_at;
  segment_at.reserve(chain.segment_count() * 2);
  for (std::size_t s = 0; s < chain.segment_count(); ++s) {
    auto [a, b] = chain.segment(s);
    auto [i, j] = half_units(0.5 * (a + b));
    segment_at.emplace(key(i, j), s);
  }

  const double seg_mass = total / static_cast<double>(spec.segment_count());
  std::vector<double> covered(chain.segment_count(), 0.0);
  BoundaryMeasure m;
  m.kind = MeasureKind::kSelfSimilar;
  m.gamma = TagSet{BoundaryTag::kFractal};
  m.d = std::log(8.0) / std::log(4.0);
  m.vertex_count = mesh.vertex_count();
  for (const auto& e : mesh.boundary_edges) {
    if (e.tag != BoundaryTag::kFractal) continue;
    const Vec2 pa = mesh.vertices[static_cast<std::size_t>(e.v[0])];
    const Vec2 pb = mesh.vertices[static_cast<std::size_t>(e.v[1])];
    const double len = norm(pb - pa);
    // The elementary segment containing this edge: snap the edge midpoint to the
    // segment midpoint along the edge direction.
    const Vec2 mid = 0.5 * (pa + pb);
    const double ux = (mid.x - o.x) / ell, uy = (mid.y - o.y) / ell;
    long long ki, kj;
    if (std::abs(pb.y - pa.y) < 1e-12 * ell) {
      ki = 2 * static_cast<long long>(std::floor(ux)) + 1;
      kj = std::llround(2.0 * uy);
    } else {
      ki = std::llround(2.0 * ux);
      kj = 2 * static_cast<long long>(std::floor(uy)) + 1;
    }
    auto it = segment_at.find(key(ki, kj));
    if (it == segment_at.end()) {
      throw ArgumentError("selfsimilar_measure: mesh fractal edge does not lie on the generation-" +
                          std::to_string(spec.generation) + " chain");
    }
    auto [sa, sb] = chain.segment(it->second);
    if (point_segment_distance(pa, sa, sb) > 1e-12 * spec.base_length ||
        point_segment_distance(pb, sa, sb) > 1e-12 * spec.base_length) {
      throw ArgumentError("selfsimilar_measure: mesh/spec generation mismatch");
    }
    covered[it->second] += len;
    m.edges.push_back({e.v[0], e.v[1], pa, pb, seg_mass * len / ell});
  }
  for (double c : covered) {
    if (std::abs(c - ell) > 1e-9 * ell) throw ArgumentError("selfsimilar_measure: mesh does not cover the prefractal chain");
  }
  for (const auto& e : m.edges) m.total_mass += e.weight;
  return m;
}

namespace {

double disk_intersection_length(Vec2 a, Vec2 b, Vec2 c, double r) {
  const Vec2 d = b - a;
  const Vec2 f = a - c;
  const double A = dot(d, d);
  if (A == 0.0) return 0.0;
  const double B = 2.0 * dot(f, d);
  const double C = dot(f, f) - r * r;
  const double disc = B * B - 4.0 * A * C;
  if (disc <= 0.0) return 0.0;
  const double sq = std::sqrt(disc);
  const double t0 = std::max(0.0, (-B - sq) / (2.0 * A));
  const double t1 = std::min(1.0, (-B + sq) / (2.0 * A));
  return t1 > t0 ? (t1 - t0) * std::sqrt(A) : 0.0;
}

double edge_ball_mass(const WeightedEdge& e, Vec2 c, double r) {
  const double len = norm(e.pb - e.pa);
  if (len == 0.0) return 0.0;
  return e.weight * disk_intersection_length(e.pa, e.pb, c, r) / len;
}

// Edges bucketed by midpoint with per-row prefix sums of cell masses: cells entirely
// inside the ball contribute their mass in O(1) per row, boundary cells are resolved
// edge by edge.
class BallIndex {
 public:
  explicit BallIndex(const BoundaryMeasure& m) : m_(m) {
    double xmin = std::numeric_limits<double>::infinity(), ymin = xmin, xmax = -xmin, ymax = -xmin, lmax = 0.0;
    for (const auto& e : m.edges) {
      const Vec2 mid = 0.5 * (e.pa + e.pb);
      xmin = std::min(xmin, mid.x);
      xmax = std::max(xmax, mid.x);
      ymin = std::min(ymin, mid.y);
      ymax = std::max(ymax, mid.y);
      lmax = std::max(lmax, norm(e.pb - e.pa));
    }
    margin_ = 0.5 * lmax;
    const double extent = std::max({xmax - xmin, ymax - ymin, 1e-300});
    cell_ = std::max(2.0 * lmax, extent / 1024.0);
    origin_ = {xmin, ymin};
    nx_ = static_cast<int>(std::floor((xmax - xmin) / cell_)) + 1;
    ny_ = static_cast<int>(std::floor((ymax - ymin) / cell_)) + 1;
    const std::size_t ncell = static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_);
    offsets_.assign(ncell + 1, 0);
    std::vector<std::size_t> cell_of(m.edges.size());
    for (std::size_t k = 0; k < m.edges.size(); ++k) {
      const Vec2 mid = 0.5 * (m.edges[k].pa + m.edges[k].pb);
      const int i = std::clamp(static_cast<int>(std::floor((mid.x - xmin) / cell_)), 0, nx_ - 1);
      const int j = std::clamp(static_cast<int>(std::floor((mid.y - ymin) / cell_)), 0, ny_ - 1);
      cell_of[k] = static_cast<std::size_t>(j) * nx_ + i;
      ++offsets_[cell_of[k] + 1];
    }
    for (std::size_t c = 0; c < ncell; ++c) offsets_[c + 1] += offsets_[c];
    items_.resize(m.edges.size());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t k = 0; k < m.edges.size(); ++k) items_[fill[cell_of[k]]++] = k;
    // prefix_[j * (nx + 1) + i] = mass of cells 0..i-1 in row j.
    prefix_.assign(static_cast<std::size_t>(ny_) * (nx_ + 1), 0.0);
    for (int j = 0; j < ny_; ++j) {
      for (int i = 0; i < nx_; ++i) {
        double mass = 0.0;
        const std::size_t c = static_cast<std::size_t>(j) * nx_ + i;
        for (std::size_t p = offsets_[c]; p < offsets_[c + 1]; ++p) mass += m.edges[items_[p]].weight;
        prefix_[static_cast<std::size_t>(j) * (nx_ + 1) + i + 1] = prefix_[static_cast<std::size_t>(j) * (nx_ + 1) + i] + mass;
      }
    }
  }

  double mass(Vec2 c, double r) const {
    double total = 0.0;
    const double m = margin_;
    const int jlo = std::max(0, static_cast<int>(std::floor((c.y - r - m - origin_.y) / cell_)));
    const int jhi = std::min(ny_ - 1, static_cast<int>(std::floor((c.y + r + m - origin_.y) / cell_)));
    for (int j = jlo; j <= jhi; ++j) {
      const double y0 = origin_.y + j * cell_ - m, y1 = origin_.y + (j + 1) * cell_ + m;
      const double dy_min = c.y < y0 ? y0 - c.y : (c.y > y1 ? c.y - y1 : 0.0);
      if (dy_min > r) continue;
      const double w_out = std::sqrt(r * r - dy_min * dy_min);
      const int clo = std::max(0, static_cast<int>(std::floor((c.x - w_out - m - origin_.x) / cell_)));
      const int chi = std::min(nx_ - 1, static_cast<int>(std::floor((c.x + w_out + m - origin_.x) / cell_)));
      if (clo > chi) continue;
      const double dy_max = std::max(std::abs(y0 - c.y), std::abs(y1 - c.y));
      int flo = 1, fhi = 0;
      if (dy_max < r) {
        const double w_in = std::sqrt(r * r - dy_max * dy_max);
        flo = std::max(clo, static_cast<int>(std::ceil((c.x - w_in + m - origin_.x) / cell_)));
        fhi = std::min(chi, static_cast<int>(std::floor((c.x + w_in - m - origin_.x) / cell_)) - 1);
      }
      const std::size_t row = static_cast<std::size_t>(j) * (nx_ + 1);
      if (flo <= fhi) {
        total += prefix_[row + static_cast<std::size_t>(fhi) + 1] - prefix_[row + static_cast<std::size_t>(flo)];
        total += exact(c, r, j, clo, flo - 1) + exact(c, r, j, fhi + 1, chi);
      } else {
        total += exact(c, r, j, clo, chi);
      }
    }
    return total;
  }

 private:
  double exact(Vec2 c, double r, int j, int ilo, int ihi) const {
    double total = 0.0;
    for (int i = ilo; i <= ihi; ++i) {
      const std::size_t cell = static_cast<std::size_t>(j) * nx_ + i;
      for (std::size_t p = offsets_[cell]; p < offsets_[cell + 1]; ++p) total += edge_ball_mass(m_.edges[items_[p]], c, r);
    }
    return total;
  }

  const BoundaryMeasure& m_;
  Vec2 origin_{};
  double cell_ = 1.0;
  double margin_ = 0.0;
  int nx_ = 1, ny_ = 1;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> items_;
  std::vector<double> prefix_;
};

}  // namespace

double ball_mass(const BoundaryMeasure& m, Vec2 center, double r) {
  double total = 0.0;
  for (const auto& e : m.edges) total += edge_ball_mass(e, center, r);
  return total;
}

RegularityReport check_upper_regularity(const BoundaryMeasure& m, double d, std::span<const double> radii,
                                        CenterSampling centers) {
  if (!(d > 0.0)) throw ArgumentError("check_upper_regularity: exponent d must be > 0");
  if (d > 2.0) throw ArgumentError("check_upper_regularity: exponent d must be <= 2");
  if (radii.empty()) throw ArgumentError("check_upper_regularity: no radii");
  for (double r : radii) {
    if (!(r > 0.0) || r > 1.0) throw ArgumentError("check_upper_regularity: radii must lie in (0, 1]");
  }
  if (m.edges.empty()) throw ArgumentError("check_upper_regularity: empty measure");
  const std::size_t stride = std::max<std::size_t>(1, centers.stride);

  std::vector<Vec2> pts;
  for (std::size_t k = 0; k < m.edges.size(); k += stride) {
    pts.push_back(m.edges[k].pa);
    pts.push_back(0.5 * (m.edges[k].pa + m.edges[k].pb));
    pts.push_back(m.edges[k].pb);
  }

  const BallIndex index(m);
  RegularityReport rep;
  rep.d = d;
  rep.centers = pts.size();
  rep.outside_trace_regime = d >= 2.0;
  rep.c_d = -1.0;
  for (double r : radii) {
    const double rd = std::pow(r, d);
    double best = 0.0;
    Vec2 best_x{};
    for (const Vec2& x : pts) {
      const double ratio = index.mass(x, r) / rd;
      if (ratio > best) {
        best = ratio;
        best_x = x;
      }
    }
    rep.radii.push_back(r);
    rep.max_ratio_per_radius.push_back(best);
    if (best > rep.c_d) {
      rep.c_d = best;
      rep.worst_center = best_x;
      rep.worst_radius = r;
    }
  }
  const auto rmin = std::min_element(rep.radii.begin(), rep.radii.end()) - rep.radii.begin();
  const auto rmax = std::max_element(rep.radii.begin(), rep.radii.end()) - rep.radii.begin();
  const double at_max = rep.max_ratio_per_radius[static_cast<std::size_t>(rmax)];
  rep.growth = at_max > 0.0 ? rep.max_ratio_per_radius[static_cast<std::size_t>(rmin)] / at_max
                            : std::numeric_limits<double>::infinity();
  rep.irregular = rep.growth > 10.0;
  return rep;
}

double boundary_integral(const BoundaryMeasure& m, std::span<const double> trace_values) {
  if (trace_values.size() != m.vertex_count) {
    throw ArgumentError("boundary_integral: trace values must be given for every mesh vertex");
  }
  double total = 0.0;
  for (const auto& e : m.edges) {
    const double va = trace_values[static_cast<std::size_t>(e.a)];
    const double vb = trace_values[static_cast<std::size_t>(e.b)];
    if (!std::isfinite(va) || !std::isfinite(vb)) throw ArgumentError("boundary_integral: missing trace value on Gamma");
    total += e.weight * 0.5 * (va + vb);
  }
  return total;
}

double capacity_estimate(const TriMesh& box_mesh, std::span<const int> target_nodes) {
  if (target_nodes.empty()) return 0.0;
  const std::size_t n = box_mesh.vertex_count();
  std::vector<std::uint8_t> role(n, 0);  // 0 free, 1 target, 2 box boundary
  for (const auto& e : box_mesh.boundary_edges) {
    role[static_cast<std::size_t>(e.v[0])] = 2;
    role[static_cast<std::size_t>(e.v[1])] = 2;
  }
  for (int t : target_nodes) {
    if (t < 0 || static_cast<std::size_t>(t) >= n) throw ArgumentError("capacity_estimate: target node out of range");
    if (role[static_cast<std::size_t>(t)] == 2) throw ArgumentError("capacity_estimate: target touches the box boundary");
    role[static_cast<std::size_t>(t)] = 1;
  }
  const SparseSym K = assemble_stiffness(box_mesh);
  const SparseSym M = assemble_mass(box_mesh);
  const double c[] = {1.0, 1.0};
  const SparseSym* mats[] = {&K, &M};
  const SparseSym A = SparseSym::combine(c, mats);

  std::vector<int> free_nodes, targets;
  for (std::size_t v = 0; v < n; ++v) {
    if (role[v] == 0) free_nodes.push_back(static_cast<int>(v));
    if (role[v] == 1) targets.push_back(static_cast<int>(v));
  }
  Field u = Field::Zero(static_cast<Eigen::Index>(n));
  for (int t : targets) u[t] = 1.0;
  if (!free_nodes.empty()) {
    const SymmetricFactorization fact(A.principal(free_nodes));
    if (!fact.positive_definite()) throw NumericalError("capacity_estimate: free block is not positive definite");
    const Eigen::SparseMatrix<double> aft = A.block(free_nodes, targets);
    const Field rhs = -(aft * Field::Ones(static_cast<Eigen::Index>(targets.size())));
    const Field uf = fact.solve(rhs);
    for (std::size_t k = 0; k < free_nodes.size(); ++k) u[free_nodes[k]] = uf[static_cast<Eigen::Index>(k)];
  }
  return A.bilinear(u, u);
}

nlohmann::json to_json(const BoundaryMeasure& m) {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : m.edges) edges.push_back({e.a, e.b, e.weight});
  nlohmann::json out = {{"version", 1}, {"kind", std::string(to_string(m.kind))}, {"d", m.d},
                        {"edges", edges}, {"total", m.total_mass}};
  if (m.c_d) out["c_d"] = *m.c_d;
  return out;
}

nlohmann::json to_json(const RegularityReport& r) {
  return {{"version", 1},
          {"d", r.d},
          {"c_d", r.c_d},
          {"worst_case", {{"x", {r.worst_center.x, r.worst_center.y}}, {"r", r.worst_radius}}},
          {"radii", r.radii},
          {"max_ratio_per_radius", r.max_ratio_per_radius},
          {"growth", r.growth},
          {"irregular", r.irregular},
          {"outside_trace_regime", r.outside_trace_regime},
          {"centers", r.centers}};
}

}  // namespace steklov
