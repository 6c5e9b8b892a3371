#pragma once

#include <map>
#include <optional>
#include <vector>

#include "geometry.hpp"
#include "transforms.hpp"

namespace bfem {

// Symmetric 3x3 matrix stored by its six independent entries, so symmetry is
// exact by construction.
struct SymMat3 {
  double xx = 1, yy = 1, zz = 1, xy = 0, xz = 0, yz = 0;

  static SymMat3 identity() { return {}; }
  static SymMat3 diag(double a, double b, double c) { return {a, b, c, 0, 0, 0}; }
  static SymMat3 from(const Mat3& m); // symmetrizes exactly

  Mat3 mat() const;
  SymMat3 iota_conjugate() const { return {xx, yy, zz, -xy, -xz, yz}; } // iota m iota
  double min_eigenvalue() const;
  double spectral_norm() const;
  SymMat3 operator+(const SymMat3& o) const {
    return {xx + o.xx, yy + o.yy, zz + o.zz, xy + o.xy, xz + o.xz, yz + o.yz};
  }
  SymMat3 operator*(double s) const { return {s * xx, s * yy, s * zz, s * xy, s * xz, s * yz}; }
  bool equals(const SymMat3& o, double tol) const;
};

// Piecewise-constant matrix field over mesh regions.
struct CoefficientField {
  std::map<int, SymMat3> regions;

  struct Limit {
    Vec3 point;
    int x_side = 1; // +1 approaches from x>0, -1 from x<0
    SymMat3 value;
  };
  std::vector<Limit> limits;
  std::optional<double> perturb_eps; // recorded by perturb()

  static CoefficientField constant(const TetMesh& mesh, const SymMat3& value);
  const SymMat3& at_region(int label) const;
  const SymMat3& at_tet(const TetMesh& mesh, int t) const { return at_region(mesh.tet_region[t]); }
  void require_regions(const TetMesh& mesh) const; // every region assigned
  void check_limits(const TetMesh& mesh) const;    // declared limits match adjacent regions
};

double ellipticity_constant(const CoefficientField& c);

// True iff value(iota(region)) == iota * value(region) * iota for all regions
// exchanged by the mesh symmetry.
bool check_iota_invariance(const CoefficientField& c, const TetMesh& mesh);

// mu_plus on {x>0}, iota mu_plus iota on {x<0}.
CoefficientField mirror_extend(const SymMat3& mu_plus, const TetMesh& mesh);

CoefficientField perturb(const CoefficientField& c, const CoefficientField& delta, double eps);

// max over regions of the spectral norm (the L-infinity norm of the field).
double linf_norm(const CoefficientField& c);

// Transformed coefficient field: omega = A rho A^T / |det A| per refined region.
CoefficientField pushforward_coefficient(const PiecewiseAffineMap& m, const CoefficientField& rho,
                                         const TransformedMesh& tm);

} // namespace bfem
