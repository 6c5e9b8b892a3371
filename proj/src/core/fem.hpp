#pragma once

#include <optional>
#include <vector>

#include "coefficients.hpp"
#include "geometry.hpp"

namespace bfem {

using NodalField = std::vector<double>;

struct DofMap {
  std::vector<char> dirichlet;  // per vertex
  std::vector<int> free_index;  // -1 for constrained vertices
  int n_free = 0;

  static DofMap build(const TetMesh& mesh);
};

struct CsrMatrix {
  int n = 0;
  std::vector<int> rowptr, col;
  std::vector<double> val;

  void mul(const std::vector<double>& x, std::vector<double>& y) const;
  std::vector<double> diagonal() const;
  double entry(int i, int j) const; // 0 if not stored
};

struct StiffnessSystem {
  CsrMatrix full;    // over all vertices
  CsrMatrix reduced; // over free dofs (after apply_bc)
  DofMap dofs;
  int element_count = 0;
  double ellipticity = 0.0;
};

// <f, v> = ∫ f0 v + ∫ F · grad v, with an optional raw nodal load for
// localized functionals.
struct RhsFunctional {
  std::vector<double> tet_density;   // per-tet constant f0
  std::vector<double> nodal_density; // P1 f0
  std::vector<Vec3> tet_flux;        // per-tet constant F
  std::vector<double> extra_load;    // raw dual vector (nodal pairing)

  static RhsFunctional constant(const TetMesh& mesh, double value);
  static RhsFunctional nodal(std::vector<double> values);
};

struct SolveLog {
  int iterations = 0;
  bool converged = false;
  double final_residual = 0.0;
  std::vector<double> residual_history;
};

// Element matrices are exact for P1; assembly reduces sorted contribution
// triplets so the result is independent of element order and bitwise
// symmetric under the mesh's iota permutation.
StiffnessSystem assemble(const TetMesh& mesh, const CoefficientField& rho);
void apply_bc(StiffnessSystem& system);

std::vector<double> assemble_load(const TetMesh& mesh, const RhsFunctional& f);

// Jacobi-preconditioned conjugate gradients on the reduced system; the result
// carries zeros on Dirichlet dofs. tol is the relative residual.
NodalField solve(const StiffnessSystem& system, const std::vector<double>& load, double tol,
                 SolveLog* log = nullptr);

double residual(const StiffnessSystem& system, const NodalField& u, const std::vector<double>& load);

// Localized right-hand side for eta*u:
// <f., v> = <f, eta v> + ∫ u rho grad(eta) . grad v - ∫ v rho grad(u) . grad(eta)
RhsFunctional localize(const TetMesh& mesh, const CoefficientField& rho, const NodalField& u,
                       const NodalField& eta, const RhsFunctional& f);

// Dual-norm proxy of the localized equation residual: energy norm of the
// difference between the solve of the localized system and the interpolant of
// eta*u, relative to the latter.
double localization_residual(const TetMesh& mesh, const CoefficientField& rho, const NodalField& u,
                             const NodalField& eta, const RhsFunctional& f, double tol);

// ---- norms and evaluation ---------------------------------------------------

double h1_seminorm(const TetMesh& mesh, const NodalField& u);
double l2_norm(const TetMesh& mesh, const NodalField& u);
// (sum_T vol (|mean u|^p + |grad u|^p))^(1/p)
double w1p_norm(const TetMesh& mesh, const NodalField& u, double p);
double energy_product(const TetMesh& mesh, const CoefficientField& rho, const NodalField& u,
                      const NodalField& v);
Vec3 tet_gradient(const TetMesh& mesh, int t, const NodalField& u);

// Crack-aware point evaluation of P1 fields.
class PointLocator {
public:
  explicit PointLocator(const TetMesh& mesh);
  // side: +1/-1 selects the crack side for points on the slit plane, 0 = any.
  double eval(const NodalField& u, const Vec3& p, int side = 0) const;

private:
  const TetMesh& mesh_;
  Vec3 lo_;
  double cell_ = 0.0;
  int nx_ = 0, ny_ = 0, nz_ = 0;
  std::vector<std::vector<int>> buckets_;
  bool bary(int t, const Vec3& p, std::array<double, 4>& b) const;
};

// Nodal interpolation of a coarse solution onto a finer mesh of the same
// constellation (used by convergence studies).
NodalField interpolate_nodal(const TetMesh& coarse, const NodalField& u, const TetMesh& fine);

// Power-iteration estimate of the spectral norm of a symmetric CSR matrix.
double spectral_norm_estimate(const CsrMatrix& a, int iterations = 200);

// Difference of two stiffness matrices with identical pattern.
CsrMatrix csr_difference(const CsrMatrix& a, const CsrMatrix& b);

} // namespace bfem
