#pragma once

#include "fem.hpp"

namespace bfem {

// (Psi u)(z) = u(iota(z)) as the nodal permutation of a symmetric mesh.
NodalField reflect(const TetMesh& mesh, const NodalField& u);

// Adjoint action on right-hand sides: <Psi* f, v> = <f, Psi v>.
RhsFunctional reflect_rhs(const TetMesh& mesh, const RhsFunctional& f);

struct SplitFields {
  NodalField anti; // (u - Psi u)/2
  NodalField sym;  // (u + Psi u)/2
};
SplitFields split(const TetMesh& mesh, const NodalField& u);

enum class HalfVariant { Antisymmetric, Symmetric };

struct HalfProblem {
  TetMesh mesh;                   // the restriction to {x<0}
  std::vector<int> vertex_map;    // half vertex -> full vertex
  std::vector<int> tet_map;       // half tet -> full tet
  std::vector<int> full_symmetry; // the full mesh's vertex permutation
  HalfVariant variant = HalfVariant::Antisymmetric;
};

struct HalfProblems {
  HalfProblem anti; // plane facets Dirichlet
  HalfProblem sym;  // plane facets minus the slit Neumann
};

// Builds the two induced problems on the x<0 half of a symmetric constellation.
HalfProblems make_half_problems(const TetMesh& mesh, const Constellation& c);

// Restriction of a right-hand side to a half (or component) mesh.
RhsFunctional restrict_rhs(const HalfProblem& half, const RhsFunctional& f);

// Even reflection: w on the half, w(iota(y)) on the other side, trace on the plane.
NodalField extend_even(const TetMesh& full, const HalfProblem& half, const NodalField& w);
// Odd reflection: zero trace on the plane.
NodalField extend_odd(const TetMesh& full, const HalfProblem& half, const NodalField& w);

// Extension by zero from a component whose interface facets are Dirichlet.
NodalField extend_zero(const TetMesh& parent, const ComponentMesh& comp, const NodalField& psi);

struct SymmetrySolveReport {
  double anti_residual = 0.0;
  double sym_residual = 0.0;
  double reconstruction_error = 0.0; // filled by callers comparing routes
  int anti_iterations = 0;
  int sym_iterations = 0;
};

// Splits f into antisymmetric and symmetric parts, solves the two half
// problems on the x<0 half, and reconstructs the full solution by odd/even
// extension. Requires an iota-invariant coefficient field.
NodalField solve_via_symmetry(const TetMesh& mesh, const Constellation& c,
                              const CoefficientField& rho, const RhsFunctional& f, double tol,
                              SymmetrySolveReport* report = nullptr);

} // namespace bfem
