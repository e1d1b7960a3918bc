#pragma once

#include <complex>
#include <memory>
#include <optional>

#include "steklov/measure.hpp"
#include "steklov/mesh.hpp"
#include "steklov/sparse.hpp"

namespace steklov {

/// Sign convention: every solver works with K + kM, i.e. the operator -Delta + k. The
/// Dirichlet Laplacian spectrum sigma(Delta_D) in (-inf, 0) therefore appears as the
/// positive eigenvalues of the interior pencil (K_II, M_II), and K + kM is singular on the
/// interior exactly when -k is one of them.

SparseSym assemble_stiffness(const TriMesh& mesh);
SparseSym assemble_mass(const TriMesh& mesh);
/// Boundary mass int_Gamma phi_i phi_j dmu. Consistent: w_e [[2,1],[1,2]] / 6 per edge;
/// lumped: w_e / 2 on each endpoint.
SparseSym assemble_boundary_mass(const TriMesh& mesh, const BoundaryMeasure& m, bool lumped = false);

struct AssemblyOptions {
  bool lumped_boundary_mass = false;
};

/// Immutable after assembly; safe to share across threads.
struct OperatorSet {
  std::shared_ptr<const TriMesh> mesh;
  SparseSym K;  // int grad phi_i . grad phi_j
  SparseSym M;  // int phi_i phi_j
  SparseSym B;  // int_Gamma phi_i phi_j dmu
  DofMap dofmap;
  BoundaryMeasure measure;

  int vertex_count() const { return K.dimension(); }
  int boundary_count() const { return static_cast<int>(dofmap.boundary.size()); }
  int gamma_count() const { return static_cast<int>(dofmap.robin.size()); }
};

OperatorSet assemble(const TriMesh& mesh, const BoundaryMeasure& m, AssemblyOptions options = {});

/// Vertex-indexed field -> values at dofmap.boundary / dofmap.robin (and back, zero-filled).
Field restrict_to_boundary(const OperatorSet& ops, const Field& u);
Field restrict_to_gamma(const OperatorSet& ops, const Field& u);
Field extend_from_boundary(const OperatorSet& ops, const Field& f);
Field extend_from_gamma(const OperatorSet& ops, const Field& h);

/// Weak Dirichlet problem: u = f on the boundary and interior rows of (K + kM) u = M source.
/// `boundary_data` is indexed like dofmap.boundary; an empty `source` means zero.
/// Throws SpectralExclusionError when K + kM is not positive definite on the interior.
Field solve_dirichlet(const OperatorSet& ops, double k, const Field& boundary_data, const Field& source = {});

/// Complex Robin problem (K + kM + (alpha - i s) B) u = -B h, the discrete form of
/// <grad u, grad v> + k <u, v> = int_Gamma (i s Tr u - h) Tr v dmu - alpha int_Gamma Tr u Tr v dmu.
/// `h` is indexed like dofmap.robin. With s = 0 the real part of the operator must be
/// positive definite, otherwise SpectralExclusionError.
ComplexField solve_robin(const OperatorSet& ops, std::complex<double> alpha, double k, double s, const Field& h);

/// Relative residual of the last Robin system, exposed for verification.
double robin_residual(const OperatorSet& ops, std::complex<double> alpha, double k, double s, const Field& h,
                      const ComplexField& u);

struct NormalDerivative {
  Field functional;            // g on dofmap.boundary: ((K + kM) u - M source) boundary rows
  std::optional<Field> l2_rep; // psi on dofmap.robin with B_Gamma psi = g_Gamma
  double off_gamma = 0.0;      // max |g| on boundary vertices outside Gamma, relative to max |g|
  bool off_gamma_flagged = false;
};

/// Discrete weak normal derivative from Green's identity and its L^2(Gamma, mu) representative.
/// Throws ArgumentError when Gamma is empty.
NormalDerivative normal_derivative(const OperatorSet& ops, const Field& u, double k, const Field& source = {});

/// Quotient trace norm: sqrt(u^T (K + M) u) with u the 1-harmonic extension of f.
double trace_norm(const OperatorSet& ops, const Field& boundary_data);

struct ElementForms {
  double stiffness = 0.0;  // int grad u . grad v
  double mass = 0.0;       // int u v
};

/// Element-by-element quadrature of the bilinear forms, independent of the assembled matrices
/// (edge-midpoint rule, exact for products of P1 functions).
ElementForms element_forms(const TriMesh& mesh, const Field& u, const Field& v);

struct GreenResidual {
  double assembled = 0.0;   // |g^T Tr v - (v^T K u + k v^T M u - v^T M source)|
  double quadrature = 0.0;  // same, right-hand side from element_forms
  double scale = 0.0;       // ||u|| ||v|| for relative comparisons
};

/// The identity holds when u solves the interior rows of (K + kM) u = M source.
GreenResidual greens_identity_residual(const OperatorSet& ops, const Field& u, const Field& v, double k,
                                       const Field& source = {});

}  // namespace steklov
