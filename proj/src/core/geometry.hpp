#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"

namespace bfem {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Model domains, all expressed in the unit-cube frame: the cube is ]-1,1[^3,
// the half cube is its lower half {z<0}, and the x-halves split at {x=0}.
enum class DomainShape {
  CubeMinusSlit,     // ]-1,1[^3 minus a slit in the plane {x=0}
  HalfcubeMinusSlit, // ]-1,1[^2 x ]-1,0[ minus a slit in the plane {x=0}
  HalfcubePlus,      // ]0,1[ x ]-1,1[ x ]-1,0[
  HalfcubeMinus,     // ]-1,0[ x ]-1,1[ x ]-1,0[
  CubeHalfX,         // ]-1,0[ x ]-1,1[ x ]-1,1[
};

enum class SlitKind { Sigma1, Sigma2, Sigma3, FullPlane };

// Which case of the geometry catalog an entry instantiates.
enum class Classification { DParallelC, DParallelD, RC, RD, ModelHalf };

enum class FacetSide : std::uint8_t { Outer, SlitPlus, SlitMinus, Interface };
enum class BoundaryCondition : std::uint8_t { Unset, Dirichlet, Neumann };

// Neumann parts M of the catalog, as subsets of the boundary; everything not
// matched is Dirichlet. Slit facets are always Dirichlet.
enum class NeumannKind {
  None,
  CubeTopMinusSlit,       // (]-1,1[ x ]-1,1[ x {0}) minus Sigma1
  CubeTopYPos,            // ]-1,1[ x ]0,1[ x {0}
  XiYPosFull,             // {0} x ]0,1[ x ]-1,1[
  XiYPosLower,            // {0} x ]0,1[ x ]-1,0[
  TopLeftAll_XiYPosLower, // ]-1,0[ x ]-1,1[ x {0}  u  {0} x ]0,1[ x ]-1,0[
  TopLeftYPos_XiYPosLower,// ]-1,0[ x ]0,1[ x {0}   u  {0} x ]0,1[ x ]-1,0]
  TopLeftYPos,            // ]-1,0[ x ]0,1[ x {0}
  TopRightYPos,           // ]0,1[ x ]0,1[ x {0}
};

struct SlitSurface {
  SlitKind kind = SlitKind::Sigma1;

  // True if a mesh vertex at (0,y,z) carries two independent traces: the
  // point lies on the slit surface but not on its crack border (the tip or
  // leg lines, where the domain connects around the slit). Points where the
  // slit meets the outer walls do get duplicated.
  bool duplicates_vertex(double y, double z) const;
  // True for facet centroids: the slit region test used for labeling.
  bool contains_centroid(double y, double z) const;
  // Tip lines: the slit border inside the open domain, as (point, direction,
  // param range) segments.
  struct TipSegment {
    Vec3 point;
    Vec3 direction; // unit
    double t_lo = 0.0, t_hi = 0.0;
  };
  std::vector<TipSegment> tip_segments(DomainShape domain) const;
  // Triangulation of the slit surface (unit-cube frame, full-cube extent),
  // used by the 2-set check and the surface export.
  std::vector<std::array<Vec3, 3>> triangles() const;
};

// Default edge probe attached to a catalog entry (consumed by the regularity
// module; kept here so the catalog is self-contained).
struct ProbeSpec {
  enum class Kind { Cylinder, Sphere } kind = Kind::Cylinder;
  Vec3 point = Vec3::Zero();
  Vec3 axis = Vec3::UnitZ(); // unit; ignored for Sphere
  double window_lo = -0.5, window_hi = 0.5;
  double r_max = 0.25;
};

struct Constellation {
  std::string name;
  DomainShape domain = DomainShape::CubeMinusSlit;
  std::optional<SlitSurface> slit;
  NeumannKind neumann = NeumannKind::None;
  Classification classification = Classification::DParallelC;
  std::string description;
  std::optional<ProbeSpec> default_probe;

  bool iota_invariant() const; // domain, slit and labels invariant under iota
  bool in_neumann(const Vec3& facet_centroid) const;
};

struct BoundaryFacet {
  std::array<int, 3> v{};
  int tet = -1; // owning tet
  FacetSide side = FacetSide::Outer;
  BoundaryCondition bc = BoundaryCondition::Unset;
};

struct TetMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 4>> tets; // positively oriented
  std::vector<int> tet_region;          // octant code, bit0:x>0 bit1:y>0 bit2:z>0
  std::vector<BoundaryFacet> boundary;
  std::vector<std::pair<int, int>> crack_pairs; // (plus copy, minus copy)
  std::vector<int> vertex_symmetry;             // iota vertex permutation; empty if absent
  std::vector<int> tet_symmetry;                // iota tet permutation; empty if absent
  double h = 0.0;                               // grid spacing

  bool symmetric() const { return !vertex_symmetry.empty(); }
  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t tet_count() const { return tets.size(); }

  double tet_volume(int t) const;
  Vec3 tet_centroid(int t) const;
  double total_volume() const; // compensated sum
  Vec3 facet_centroid(const BoundaryFacet& f) const;
};

// ---- catalog --------------------------------------------------------------

const std::vector<Constellation>& constellation_catalog();
const Constellation& build_constellation(const std::string& name);

// ---- operations -----------------------------------------------------------

// Structured mirrored-Kuhn mesh; n is the subdivision count of the full cube
// edge (cells are cubes of side 2/n in every domain). n must be even and >= 2.
TetMesh generate_mesh(const Constellation& c, int n);

// (Re)label every boundary facet according to the constellation; idempotent.
void classify_boundary(TetMesh& mesh, const Constellation& c);

struct ComponentMesh {
  TetMesh mesh;
  std::vector<int> vertex_map; // component vertex -> parent vertex
  std::vector<int> tet_map;    // component tet -> parent tet
};

// Connected components (face adjacency) of the selected tets; interface
// facets against unselected tets become Dirichlet boundary.
std::vector<ComponentMesh> split_components(const TetMesh& mesh,
                                            const std::function<bool(int)>& selector = {});

struct TwoSetSample {
  Vec3 point;
  double radius = 0.0;
  double area = 0.0;
  double ratio = 0.0; // area / r^2
};

struct TwoSetReport {
  double c_lower = 0.0;
  double c_upper = 0.0;
  std::vector<TwoSetSample> samples;
};

// Measures H2(surface ∩ B(x,r)) by exact triangle-disk clipping.
TwoSetReport check_two_set(const std::vector<std::array<Vec3, 3>>& surface,
                           const std::vector<Vec3>& points, const std::vector<double>& radii);

// Area of the intersection of a triangle with a disk, both in the plane
// spanned by the triangle. Exposed for testing against quadrature.
double triangle_disk_area(const std::array<Vec3, 3>& tri, const Vec3& center, double radius);

const char* to_string(Classification c);
const char* to_string(SlitKind k);
const char* to_string(DomainShape d);

} // namespace bfem
