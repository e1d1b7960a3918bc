#include "steklov/fem.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "steklov/errors.hpp"
#include "steklov/factorization.hpp"
#include "steklov/parallel.hpp"
#include "steklov/spectral.hpp"

namespace steklov {

namespace {

using Local = std::array<std::array<double, 3>, 3>;

template <typename ElementFn>
SparseSym assemble_elements(const TriMesh& mesh, ElementFn element) {
  const std::size_t nt = mesh.triangles.size();
  const int chunks = std::max(1, chunk_count(nt));
  std::vector<std::vector<Triplet>> parts(static_cast<std::size_t>(chunks));
  parallel_for(nt, [&](std::size_t begin, std::size_t end, int w) {
    auto& out = parts[static_cast<std::size_t>(w)];
    out.reserve((end - begin) * 6);
    for (std::size_t t = begin; t < end; ++t) {
      const auto& tri = mesh.triangles[t];
      const Local a = element(mesh.vertices[static_cast<std::size_t>(tri[0])], mesh.vertices[static_cast<std::size_t>(tri[1])],
                              mesh.vertices[static_cast<std::size_t>(tri[2])]);
      for (int i = 0; i < 3; ++i) {
        for (int j = i; j < 3; ++j) out.push_back({tri[static_cast<std::size_t>(i)], tri[static_cast<std::size_t>(j)], a[i][j]});
      }
    }
  });
  std::vector<Triplet> all;
  all.reserve(nt * 6);
  for (const auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  return SparseSym::from_triplets(static_cast<int>(mesh.vertex_count()), all);
}

Local element_stiffness(Vec2 p0, Vec2 p1, Vec2 p2) {
  const double area = 0.5 * cross(p1 - p0, p2 - p0);
  const std::array<double, 3> b{p1.y - p2.y, p2.y - p0.y, p0.y - p1.y};
  const std::array<double, 3> c{p2.x - p1.x, p0.x - p2.x, p1.x - p0.x};
  Local a{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) a[i][j] = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
  }
  return a;
}

Local element_mass(Vec2 p0, Vec2 p1, Vec2 p2) {
  const double area = 0.5 * cross(p1 - p0, p2 - p0);
  Local a{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) a[i][j] = area * (i == j ? 2.0 : 1.0) / 12.0;
  }
  return a;
}

SparseSym shifted(const OperatorSet& ops, double k) {
  const double c[] = {1.0, k};
  const SparseSym* mats[] = {&ops.K, &ops.M};
  return SparseSym::combine(c, mats);
}

Field source_load(const OperatorSet& ops, const Field& source) {
  if (source.size() == 0) return Field::Zero(ops.vertex_count());
  if (source.size() != ops.vertex_count()) throw ArgumentError("source must be vertex-indexed");
  return ops.M.apply(source);
}

Eigen::SparseMatrix<std::complex<double>> complex_operator(const OperatorSet& ops, std::complex<double> alpha, double k,
                                                           double s) {
  const std::complex<double> coeff = alpha - std::complex<double>(0.0, s);
  const int n = ops.vertex_count();
  std::vector<Eigen::Triplet<std::complex<double>>> t;
  auto add = [&](const SparseSym& a, std::complex<double> f) {
    if (f == 0.0) return;
    const auto ro = a.row_offsets();
    const auto cols = a.col_indices();
    const auto vals = a.values();
    for (int i = 0; i < n; ++i) {
      for (int p = ro[static_cast<std::size_t>(i)]; p < ro[static_cast<std::size_t>(i) + 1]; ++p) {
        const int j = cols[static_cast<std::size_t>(p)];
        const std::complex<double> v = f * vals[static_cast<std::size_t>(p)];
        t.emplace_back(i, j, v);
        if (j != i) t.emplace_back(j, i, v);
      }
    }
  };
  add(ops.K, 1.0);
  add(ops.M, k);
  add(ops.B, coeff);
  Eigen::SparseMatrix<std::complex<double>> a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

}  // namespace

SparseSym assemble_stiffness(const TriMesh& mesh) { return assemble_elements(mesh, element_stiffness); }

SparseSym assemble_mass(const TriMesh& mesh) { return assemble_elements(mesh, element_mass); }

SparseSym assemble_boundary_mass(const TriMesh& mesh, const BoundaryMeasure& m, bool lumped) {
  if (m.vertex_count != mesh.vertex_count()) throw ArgumentError("boundary measure belongs to a different mesh");
  std::vector<Triplet> t;
  t.reserve(m.edges.size() * 3);
  const int n = static_cast<int>(mesh.vertex_count());
  for (const auto& e : m.edges) {
    if (e.a < 0 || e.b < 0 || e.a >= n || e.b >= n) throw ArgumentError("boundary measure edge out of range");
    if (lumped) {
      t.push_back({e.a, e.a, 0.5 * e.weight});
      t.push_back({e.b, e.b, 0.5 * e.weight});
    } else {
      t.push_back({e.a, e.a, e.weight / 3.0});
      t.push_back({e.b, e.b, e.weight / 3.0});
      t.push_back({e.a, e.b, e.weight / 6.0});
    }
  }
  return SparseSym::from_triplets(n, t);
}

OperatorSet assemble(const TriMesh& mesh, const BoundaryMeasure& m, AssemblyOptions options) {
  if (m.vertex_count != mesh.vertex_count()) throw ArgumentError("assemble: measure/mesh mismatch");
  // Every measure edge must be a Gamma-tagged boundary edge of this mesh.
  std::vector<std::pair<int, int>> gamma_edges;
  for (const auto& e : mesh.boundary_edges) {
    if (m.gamma.contains(e.tag)) gamma_edges.emplace_back(std::min(e.v[0], e.v[1]), std::max(e.v[0], e.v[1]));
  }
  std::sort(gamma_edges.begin(), gamma_edges.end());
  for (const auto& e : m.edges) {
    const std::pair<int, int> key{std::min(e.a, e.b), std::max(e.a, e.b)};
    if (!std::binary_search(gamma_edges.begin(), gamma_edges.end(), key)) {
      throw ArgumentError("assemble: measure is not supported on the mesh Gamma edges");
    }
  }
  OperatorSet ops;
  ops.mesh = std::make_shared<const TriMesh>(mesh);
  ops.K = assemble_stiffness(mesh);
  ops.M = assemble_mass(mesh);
  ops.B = assemble_boundary_mass(mesh, m, options.lumped_boundary_mass);
  ops.dofmap = extract_dofmap(mesh, m.gamma);
  ops.measure = m;
  return ops;
}

Field restrict_to_boundary(const OperatorSet& ops, const Field& u) {
  if (u.size() != ops.vertex_count()) throw ArgumentError("restrict_to_boundary: size mismatch");
  Field f(ops.boundary_count());
  for (int i = 0; i < ops.boundary_count(); ++i) f[i] = u[ops.dofmap.boundary[static_cast<std::size_t>(i)]];
  return f;
}

Field restrict_to_gamma(const OperatorSet& ops, const Field& u) {
  if (u.size() != ops.vertex_count()) throw ArgumentError("restrict_to_gamma: size mismatch");
  Field f(ops.gamma_count());
  for (int i = 0; i < ops.gamma_count(); ++i) f[i] = u[ops.dofmap.robin[static_cast<std::size_t>(i)]];
  return f;
}

Field extend_from_boundary(const OperatorSet& ops, const Field& f) {
  if (f.size() != ops.boundary_count()) throw ArgumentError("extend_from_boundary: size mismatch");
  Field u = Field::Zero(ops.vertex_count());
  for (int i = 0; i < ops.boundary_count(); ++i) u[ops.dofmap.boundary[static_cast<std::size_t>(i)]] = f[i];
  return u;
}

Field extend_from_gamma(const OperatorSet& ops, const Field& h) {
  if (h.size() != ops.gamma_count()) throw ArgumentError("extend_from_gamma: size mismatch");
  Field u = Field::Zero(ops.vertex_count());
  for (int i = 0; i < ops.gamma_count(); ++i) u[ops.dofmap.robin[static_cast<std::size_t>(i)]] = h[i];
  return u;
}

Field solve_dirichlet(const OperatorSet& ops, double k, const Field& boundary_data, const Field& source) {
  if (boundary_data.size() != ops.boundary_count()) throw ArgumentError("solve_dirichlet: boundary data size mismatch");
  const Field load = source_load(ops, source);
  Field u = extend_from_boundary(ops, boundary_data);
  const auto& interior = ops.dofmap.interior;
  if (interior.empty()) return u;
  const SparseSym a = shifted(ops, k);
  const SymmetricFactorization fact(a.principal(interior));
  if (!fact.positive_definite()) {
    const auto lam = nearest_dirichlet_eigenvalue(ops, -k);
    throw SpectralExclusionError("solve_dirichlet: K + kM is not positive definite on the interior (k = " +
                                     std::to_string(k) + " is at or below minus the lowest Dirichlet eigenvalue" +
                                     (lam ? ", nearest " + std::to_string(*lam) : std::string()) + ")",
                                 k, lam);
  }
  const Eigen::SparseMatrix<double> aib = a.block(interior, ops.dofmap.boundary);
  Field rhs(static_cast<Eigen::Index>(interior.size()));
  for (std::size_t i = 0; i < interior.size(); ++i) rhs[static_cast<Eigen::Index>(i)] = load[interior[i]];
  rhs -= aib * boundary_data;
  const Field ui = fact.solve(rhs);
  for (std::size_t i = 0; i < interior.size(); ++i) u[interior[i]] = ui[static_cast<Eigen::Index>(i)];
  return u;
}

ComplexField solve_robin(const OperatorSet& ops, std::complex<double> alpha, double k, double s, const Field& h) {
  const Field hv = extend_from_gamma(ops, h);
  const ComplexField rhs = -ops.B.apply(hv).cast<std::complex<double>>();
  if (h.size() > 0 && h.cwiseAbs().maxCoeff() == 0.0) return ComplexField::Zero(ops.vertex_count());
  if (s == 0.0 && alpha.imag() == 0.0) {
    const double c[] = {1.0, k, alpha.real()};
    const SparseSym* mats[] = {&ops.K, &ops.M, &ops.B};
    const SymmetricFactorization fact(SparseSym::combine(c, mats));
    if (!fact.positive_definite()) {
      std::optional<double> lam;
      try {
        EigenOptions opt;
        opt.mode = EigenMode::kNearest;
        opt.sigma = -k;
        opt.vectors = false;
        const double c2[] = {1.0, alpha.real()};
        const SparseSym* m2[] = {&ops.K, &ops.B};
        lam = eigs_generalized(SparseSym::combine(c2, m2), ops.M, 1, opt).eigenvalues.front();
      } catch (const Error&) {
      }
      throw SpectralExclusionError("solve_robin: K + kM + alpha B is not positive definite (k = " + std::to_string(k) +
                                       " hits the Robin spectrum" +
                                       (lam ? ", nearest " + std::to_string(*lam) : std::string()) + ")",
                                   k, lam);
    }
    const Field u = fact.solve(Field(rhs.real()));
    return u.cast<std::complex<double>>();
  }
  const ComplexFactorization fact(complex_operator(ops, alpha, k, s));
  if (!fact.ok()) throw SpectralExclusionError("solve_robin: complex Robin system is singular", k);
  ComplexField u = fact.solve(rhs);
  const double res = robin_residual(ops, alpha, k, s, h, u);
  if (!(res <= 1e-10)) throw NumericalError("solve_robin: relative residual " + std::to_string(res) + " exceeds 1e-10");
  return u;
}

double robin_residual(const OperatorSet& ops, std::complex<double> alpha, double k, double s, const Field& h,
                      const ComplexField& u) {
  const ComplexField rhs = -ops.B.apply(extend_from_gamma(ops, h)).cast<std::complex<double>>();
  const std::complex<double> coeff = alpha - std::complex<double>(0.0, s);
  const ComplexField au = ops.K.apply(u) + k * ops.M.apply(u) + coeff * ops.B.apply(u);
  const double denom = rhs.norm();
  const double r = (au - rhs).norm();
  return denom > 0.0 ? r / denom : r;
}

NormalDerivative normal_derivative(const OperatorSet& ops, const Field& u, double k, const Field& source) {
  if (ops.gamma_count() == 0) throw ArgumentError("normal_derivative: Gamma is empty");
  if (u.size() != ops.vertex_count()) throw ArgumentError("normal_derivative: u must be vertex-indexed");
  const Field full = ops.K.apply(u) + k * ops.M.apply(u) - source_load(ops, source);
  NormalDerivative nd;
  nd.functional = restrict_to_boundary(ops, full);
  const double gmax = nd.functional.size() > 0 ? nd.functional.cwiseAbs().maxCoeff() : 0.0;

  std::vector<std::uint8_t> in_gamma(static_cast<std::size_t>(ops.vertex_count()), 0);
  for (int v : ops.dofmap.robin) in_gamma[static_cast<std::size_t>(v)] = 1;
  double off = 0.0;
  for (int v : ops.dofmap.boundary) {
    if (!in_gamma[static_cast<std::size_t>(v)]) off = std::max(off, std::abs(full[v]));
  }
  nd.off_gamma = gmax > 0.0 ? off / gmax : 0.0;
  nd.off_gamma_flagged = nd.off_gamma > 1e-8;
  if (!nd.off_gamma_flagged) {
    const SymmetricFactorization fact(ops.B.principal(ops.dofmap.robin));
    if (!fact.positive_definite()) throw ArgumentError("normal_derivative: boundary mass on Gamma is singular");
    nd.l2_rep = fact.solve(restrict_to_gamma(ops, full));
  }
  return nd;
}

double trace_norm(const OperatorSet& ops, const Field& boundary_data) {
  const Field u = solve_dirichlet(ops, 1.0, boundary_data);
  return std::sqrt(std::max(0.0, ops.K.bilinear(u, u) + ops.M.bilinear(u, u)));
}

ElementForms element_forms(const TriMesh& mesh, const Field& u, const Field& v) {
  const auto n = static_cast<Eigen::Index>(mesh.vertex_count());
  if (u.size() != n || v.size() != n) throw ArgumentError("element_forms: fields must be vertex-indexed");
  ElementForms out;
  for (const auto& tri : mesh.triangles) {
    const Vec2 p0 = mesh.vertices[static_cast<std::size_t>(tri[0])];
    const Vec2 p1 = mesh.vertices[static_cast<std::size_t>(tri[1])];
    const Vec2 p2 = mesh.vertices[static_cast<std::size_t>(tri[2])];
    const double area = 0.5 * cross(p1 - p0, p2 - p0);
    const double u0 = u[tri[0]], u1 = u[tri[1]], u2 = u[tri[2]];
    const double v0 = v[tri[0]], v1 = v[tri[1]], v2 = v[tri[2]];
    // Constant gradients from the affine interpolant.
    const Vec2 e1 = p1 - p0, e2 = p2 - p0;
    auto grad = [&](double f0, double f1, double f2) {
      const double d1 = f1 - f0, d2 = f2 - f0;
      return Vec2{(d1 * e2.y - d2 * e1.y) / (2.0 * area), (d2 * e1.x - d1 * e2.x) / (2.0 * area)};
    };
    out.stiffness += area * dot(grad(u0, u1, u2), grad(v0, v1, v2));
    const double m01 = 0.25 * (u0 + u1) * (v0 + v1);
    const double m12 = 0.25 * (u1 + u2) * (v1 + v2);
    const double m20 = 0.25 * (u2 + u0) * (v2 + v0);
    out.mass += area * (m01 + m12 + m20) / 3.0;
  }
  return out;
}

GreenResidual greens_identity_residual(const OperatorSet& ops, const Field& u, const Field& v, double k,
                                       const Field& source) {
  const NormalDerivative nd = normal_derivative(ops, u, k, source);
  const double lhs = nd.functional.dot(restrict_to_boundary(ops, v));
  const Field load = source_load(ops, source);
  GreenResidual r;
  r.assembled = std::abs(lhs - (ops.K.bilinear(v, u) + k * ops.M.bilinear(v, u) - v.dot(load)));
  const ElementForms f = element_forms(*ops.mesh, u, v);
  double src_term = 0.0;
  if (source.size() > 0) src_term = element_forms(*ops.mesh, source, v).mass;
  r.quadrature = std::abs(lhs - (f.stiffness + k * f.mass - src_term));
  r.scale = u.norm() * v.norm();
  return r;
}

}  // namespace steklov
