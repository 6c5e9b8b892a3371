#pragma once

#include <utility>
#include <vector>

#include "geometry.hpp"

namespace bfem {

struct AffineMap {
  Mat3 linear = Mat3::Identity();
  Vec3 offset = Vec3::Zero();

  Vec3 operator()(const Vec3& x) const { return linear * x + offset; }
  AffineMap inverse() const;
};

struct HalfSpace {
  Vec3 normal = Vec3::UnitZ();
  double bound = 0.0; // normal . x <= bound
  bool contains(const Vec3& x, double tol = 0.0) const { return normal.dot(x) <= bound + tol; }
};

struct MapCell {
  std::vector<HalfSpace> region;
  AffineMap map;
  bool contains(const Vec3& x, double tol = 0.0) const {
    for (const auto& h : region)
      if (!h.contains(x, tol)) return false;
    return true;
  }
};

// Continuous piecewise-affine bijection; pieces agree on shared interfaces.
struct PiecewiseAffineMap {
  std::vector<MapCell> cells;

  int piece_at(const Vec3& x, double tol = 1e-12) const;
  Vec3 operator()(const Vec3& x) const { return cells[piece_at(x)].map(x); }
  Vec3 apply_inverse(const Vec3& y) const; // searches the piece whose image contains y
  bool single_cell() const { return cells.size() == 1; }
};

// The fixed involution: reflection in the first coordinate.
PiecewiseAffineMap involution_map();
PiecewiseAffineMap identity_map();
PiecewiseAffineMap linear_map(const Mat3& a);
PiecewiseAffineMap diagonal_map(double d1, double d2, double d3);

// min/max singular values over all pieces.
std::pair<double, double> bilipschitz_constants(const PiecewiseAffineMap& m);

// Linear bijection b preserving the y-z-plane with b a b^T / |det b| = Id.
Mat3 normalize_matrix(const Mat3& a);

// Two-piece map splitting space at the plane {z = x/4}: identity on and below
// the plane, and above it the linear map fixing the plane pointwise that
// takes (-1,0,0) to (0,0,1).
PiecewiseAffineMap build_l_map();

// Two-half-space shear fixing the x-y-plane that maps the slit-triangle leg
// unit vectors onto -e3 / +e3, reducing Sigma2/Sigma3 near the origin to a
// Sigma1-type slit. Leaves the x-direction untouched.
PiecewiseAffineMap straighten_slit_triangle(SlitKind kind);

// Largest alpha such that alpha*[-1,1]^3 is contained in the image of the
// cube under a two-piece z-split map (by inspecting preimages of vertices).
double shrink_factor(const PiecewiseAffineMap& m);

struct TransformedMesh {
  TetMesh mesh;                // same indexing as the source mesh
  std::vector<int> tet_piece;  // map piece used by each tet
  std::vector<int> region_old; // refined label -> source region label
  std::vector<int> region_piece;
};

// Applies the map vertex-wise; tets must not straddle map pieces (checked,
// alignment error otherwise). Region labels are refined per (region, piece).
TransformedMesh transform_mesh(const PiecewiseAffineMap& m, const TetMesh& src);

// Nodal pullback f∘φ: meshes correspond node-to-node through transform_mesh.
std::vector<double> pullback_function(const TransformedMesh& tm, const std::vector<double>& f_image);

} // namespace bfem
