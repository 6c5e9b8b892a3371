#include "geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>

namespace bfem {

namespace {

double neumaier_sum(const std::vector<double>& xs) {
  double s = 0.0, c = 0.0;
  for (double x : xs) {
    double t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
  return s + c;
}

std::string fmt_point(const Vec3& p) {
  std::ostringstream os;
  os << "(" << p.x() << ", " << p.y() << ", " << p.z() << ")";
  return os.str();
}

} // namespace

// ---- slit surfaces ----------------------------------------------------------

bool SlitSurface::duplicates_vertex(double y, double z) const {
  switch (kind) {
  case SlitKind::Sigma1:
    return y < 0.0; // the tip line {y=0} stays single
  case SlitKind::Sigma2:
    return std::abs(z) < -y; // the legs |z| = -y stay single
  case SlitKind::Sigma3:
    return std::abs(z) > -y;
  case SlitKind::FullPlane:
    return true; // a full cut disconnects; no border inside the domain
  }
  return false;
}

bool SlitSurface::contains_centroid(double y, double z) const {
  switch (kind) {
  case SlitKind::Sigma1:
    return y < 0.0 && y > -1.0 && std::abs(z) < 1.0;
  case SlitKind::Sigma2:
    return y < 0.0 && std::abs(z) < -y;
  case SlitKind::Sigma3:
    return std::abs(y) < 1.0 && std::abs(z) < 1.0 && std::abs(z) > -y;
  case SlitKind::FullPlane:
    return std::abs(y) < 1.0 && std::abs(z) < 1.0;
  }
  return false;
}

std::vector<SlitSurface::TipSegment> SlitSurface::tip_segments(DomainShape domain) const {
  const double s = 1.0 / std::sqrt(2.0);
  switch (kind) {
  case SlitKind::Sigma1: {
    double lo = -1.0, hi = domain == DomainShape::HalfcubeMinusSlit ? 0.0 : 1.0;
    return {{Vec3(0, 0, 0), Vec3(0, 0, 1), lo, hi}};
  }
  case SlitKind::Sigma2:
  case SlitKind::Sigma3:
    return {{Vec3(0, 0, 0), Vec3(0, -s, -s), 0.0, std::sqrt(2.0)},
            {Vec3(0, 0, 0), Vec3(0, -s, s), 0.0, std::sqrt(2.0)}};
  case SlitKind::FullPlane:
    return {};
  }
  return {};
}

std::vector<std::array<Vec3, 3>> SlitSurface::triangles() const {
  switch (kind) {
  case SlitKind::Sigma1:
    return {{Vec3(0, -1, -1), Vec3(0, 0, -1), Vec3(0, 0, 1)},
            {Vec3(0, -1, -1), Vec3(0, 0, 1), Vec3(0, -1, 1)}};
  case SlitKind::Sigma2:
    return {{Vec3(0, 0, 0), Vec3(0, -1, -1), Vec3(0, -1, 1)}};
  case SlitKind::Sigma3:
    return {{Vec3(0, 0, 0), Vec3(0, -1, 1), Vec3(0, 1, 1)},
            {Vec3(0, 0, 0), Vec3(0, 1, 1), Vec3(0, 1, -1)},
            {Vec3(0, 0, 0), Vec3(0, 1, -1), Vec3(0, -1, -1)}};
  case SlitKind::FullPlane:
    return {{Vec3(0, -1, -1), Vec3(0, 1, -1), Vec3(0, 1, 1)},
            {Vec3(0, -1, -1), Vec3(0, 1, 1), Vec3(0, -1, 1)}};
  }
  return {};
}

// ---- constellation ----------------------------------------------------------

bool Constellation::iota_invariant() const {
  if (domain != DomainShape::CubeMinusSlit && domain != DomainShape::HalfcubeMinusSlit)
    return false;
  switch (neumann) {
  case NeumannKind::None:
  case NeumannKind::CubeTopMinusSlit:
  case NeumannKind::CubeTopYPos:
    return true;
  default:
    return false;
  }
}

bool Constellation::in_neumann(const Vec3& p) const {
  const double x = p.x(), y = p.y(), z = p.z();
  switch (neumann) {
  case NeumannKind::None:
    return false;
  case NeumannKind::CubeTopMinusSlit:
    return z == 0.0;
  case NeumannKind::CubeTopYPos:
    return z == 0.0 && y > 0.0;
  case NeumannKind::XiYPosFull:
  case NeumannKind::XiYPosLower:
    return x == 0.0 && y > 0.0;
  case NeumannKind::TopLeftAll_XiYPosLower:
    return (z == 0.0 && x < 0.0) || (x == 0.0 && y > 0.0);
  case NeumannKind::TopLeftYPos_XiYPosLower:
    return (z == 0.0 && x < 0.0 && y > 0.0) || (x == 0.0 && y > 0.0);
  case NeumannKind::TopLeftYPos:
    return z == 0.0 && x < 0.0 && y > 0.0;
  case NeumannKind::TopRightYPos:
    return z == 0.0 && x > 0.0 && y > 0.0;
  }
  return false;
}

// ---- mesh helpers -----------------------------------------------------------

double TetMesh::tet_volume(int t) const {
  const auto& T = tets[t];
  Mat3 B;
  for (int k = 0; k < 3; ++k) B.col(k) = vertices[T[k + 1]] - vertices[T[0]];
  return B.determinant() / 6.0;
}

Vec3 TetMesh::tet_centroid(int t) const {
  const auto& T = tets[t];
  return 0.25 * (vertices[T[0]] + vertices[T[1]] + vertices[T[2]] + vertices[T[3]]);
}

double TetMesh::total_volume() const {
  std::vector<double> vols(tet_count());
  for (std::size_t t = 0; t < tet_count(); ++t) vols[t] = tet_volume(static_cast<int>(t));
  return neumaier_sum(vols);
}

Vec3 TetMesh::facet_centroid(const BoundaryFacet& f) const {
  return (vertices[f.v[0]] + vertices[f.v[1]] + vertices[f.v[2]]) / 3.0;
}

// ---- catalog ----------------------------------------------------------------

namespace {

ProbeSpec cyl_probe(Vec3 p, Vec3 axis, double lo, double hi, double rmax) {
  ProbeSpec s;
  s.kind = ProbeSpec::Kind::Cylinder;
  s.point = p;
  s.axis = axis.normalized();
  s.window_lo = lo;
  s.window_hi = hi;
  s.r_max = rmax;
  return s;
}

std::vector<Constellation> make_catalog() {
  std::vector<Constellation> cat;
  const double s2 = std::sqrt(2.0);
  auto add = [&](Constellation c) { cat.push_back(std::move(c)); };

  // Buried-slit cubes (D parallel, connected case).
  add({"cube_minus_sigma1", DomainShape::CubeMinusSlit, SlitSurface{SlitKind::Sigma1},
       NeumannKind::None, Classification::DParallelC,
       "cube minus the half-plane slit Sigma1, full Dirichlet boundary",
       cyl_probe(Vec3(0, 0, 0), Vec3(0, 0, 1), -0.5, 0.5, 0.4)});
  add({"cube_minus_sigma2", DomainShape::CubeMinusSlit, SlitSurface{SlitKind::Sigma2},
       NeumannKind::None, Classification::DParallelC,
       "cube minus the closed triangle slit Sigma2, full Dirichlet boundary",
       cyl_probe(Vec3(0, 0, 0), Vec3(0, -1, -1), 0.25 * s2, 0.65 * s2, 0.3)});
  add({"cube_minus_sigma3", DomainShape::CubeMinusSlit, SlitSurface{SlitKind::Sigma3},
       NeumannKind::None, Classification::DParallelC,
       "cube minus the notched-square slit Sigma3, full Dirichlet boundary",
       cyl_probe(Vec3(0, 0, 0), Vec3(0, -1, -1), 0.25 * s2, 0.65 * s2, 0.3)});

  // Half cube with slit reaching its top surface (R, connected case).
  add({"halfcube_minus_sigma1", DomainShape::HalfcubeMinusSlit, SlitSurface{SlitKind::Sigma1},
       NeumannKind::None, Classification::RC,
       "half cube minus Sigma1, full Dirichlet boundary",
       cyl_probe(Vec3(0, 0, 0), Vec3(0, 0, 1), -0.7, -0.3, 0.28)});
  add({"halfcube_minus_sigma1_mtop", DomainShape::HalfcubeMinusSlit, SlitSurface{SlitKind::Sigma1},
       NeumannKind::CubeTopMinusSlit, Classification::RC,
       "half cube minus Sigma1, Neumann on the whole top surface minus the slit",
       cyl_probe(Vec3(0, 0, 0), Vec3(0, 0, 1), -0.7, -0.3, 0.28)});
  add({"halfcube_minus_sigma1_mhalf", DomainShape::HalfcubeMinusSlit, SlitSurface{SlitKind::Sigma1},
       NeumannKind::CubeTopYPos, Classification::RC,
       "half cube minus Sigma1, Neumann on half of the top surface",
       cyl_probe(Vec3(0, 0, 0), Vec3(0, 0, 1), -0.7, -0.3, 0.28)});

  // Symmetric halves of the slit constellations (model half problems).
  add({"cubehalf_sym_possi1", DomainShape::CubeHalfX, std::nullopt, NeumannKind::XiYPosFull,
       Classification::ModelHalf,
       "left half cube, Neumann on {0} x ]0,1[ x ]-1,1[, rest Dirichlet",
       cyl_probe(Vec3(0, 0, 0), Vec3(0, 0, 1), -0.5, 0.5, 0.4)});
  add({"halfcube_sym_possi2", DomainShape::HalfcubeMinus, std::nullopt, NeumannKind::XiYPosLower,
       Classification::ModelHalf,
       "left half of the half cube, Neumann on {0} x ]0,1[ x ]-1,0[, rest Dirichlet",
       cyl_probe(Vec3(0, 0, 0), Vec3(0, 0, 1), -0.7, -0.3, 0.28)});
  add({"halfcube_sym_possi3", DomainShape::HalfcubeMinus, std::nullopt,
       NeumannKind::TopLeftAll_XiYPosLower, Classification::ModelHalf,
       "left half of the half cube, Neumann on ]-1,0[ x ]-1,1[ x {0} and {0} x ]0,1[ x ]-1,0[",
       cyl_probe(Vec3(0, 0, 0), Vec3(0, 0, 1), -0.7, -0.3, 0.28)});
  add({"halfcube_sym_possi4", DomainShape::HalfcubeMinus, std::nullopt,
       NeumannKind::TopLeftYPos_XiYPosLower, Classification::ModelHalf,
       "left half of the half cube, Neumann on ]-1,0[ x ]0,1[ x {0} and {0} x ]0,1[ x ]-1,0]",
       cyl_probe(Vec3(0, 0, 0), Vec3(0, 0, 1), -0.7, -0.3, 0.28)});

  // Neumann-edge constellations.
  add({"neumann_edge_M7", DomainShape::HalfcubeMinus, std::nullopt, NeumannKind::TopLeftYPos,
       Classification::ModelHalf,
       "left half of the half cube, Neumann on ]-1,0[ x ]0,1[ x {0}, rest Dirichlet",
       cyl_probe(Vec3(0, 0, 0), Vec3(1, 0, 0), -0.7, -0.3, 0.28)});
  add({"neumann_edge_M8", DomainShape::HalfcubeMinus, std::nullopt,
       NeumannKind::TopLeftAll_XiYPosLower, Classification::ModelHalf,
       "left half of the half cube, Neumann on ]-1,0[ x ]-1,1[ x {0} and {0} x ]0,1[ x ]-1,0]",
       cyl_probe(Vec3(0, 0, 0), Vec3(0, 0, 1), -0.7, -0.3, 0.28)});
  add({"neumann_edge_M7_plus", DomainShape::HalfcubePlus, std::nullopt, NeumannKind::TopRightYPos,
       Classification::ModelHalf,
       "right half of the half cube, Neumann on ]0,1[ x ]0,1[ x {0}, rest Dirichlet",
       cyl_probe(Vec3(0, 0, 0), Vec3(1, 0, 0), 0.3, 0.7, 0.28)});

  // Disconnecting slits (d cases).
  add({"cube_minus_fullplane", DomainShape::CubeMinusSlit, SlitSurface{SlitKind::FullPlane},
       NeumannKind::None, Classification::DParallelD,
       "cube cut by the full plane square {x=0}, full Dirichlet boundary; two components",
       cyl_probe(Vec3(-0.5, 0.2, 0), Vec3(0, 0, 1), -0.3, 0.3, 0.3)});
  add({"halfcube_minus_fullplane", DomainShape::HalfcubeMinusSlit, SlitSurface{SlitKind::FullPlane},
       NeumannKind::CubeTopYPos, Classification::RD,
       "half cube cut by the full plane section {x=0}, Neumann on half of the top surface",
       cyl_probe(Vec3(0, 0, 0), Vec3(1, 0, 0), -0.7, -0.3, 0.28)});

  // Smooth baselines and the reflected Neumann cuboid.
  add({"cube_dirichlet", DomainShape::CubeMinusSlit, std::nullopt, NeumannKind::None,
       Classification::ModelHalf, "plain cube, full Dirichlet boundary",
       cyl_probe(Vec3(0.3, 0.2, 0), Vec3(0, 0, 1), -0.5, 0.5, 0.4)});
  add({"halfcube_dirichlet", DomainShape::HalfcubeMinusSlit, std::nullopt, NeumannKind::None,
       Classification::ModelHalf, "plain half cube, full Dirichlet boundary",
       cyl_probe(Vec3(0, 0.25, -0.5), Vec3(1, 0, 0), -0.5, 0.5, 0.35)});
  add({"halfcube_neumann_top", DomainShape::HalfcubeMinusSlit, std::nullopt,
       NeumannKind::CubeTopMinusSlit, Classification::ModelHalf,
       "plain half cube, Neumann on the whole top surface",
       cyl_probe(Vec3(0, 0.25, -0.5), Vec3(1, 0, 0), -0.5, 0.5, 0.35)});

  return cat;
}

} // namespace

const std::vector<Constellation>& constellation_catalog() {
  static const std::vector<Constellation> cat = make_catalog();
  return cat;
}

const Constellation& build_constellation(const std::string& name) {
  for (const auto& c : constellation_catalog())
    if (c.name == name) return c;
  std::ostringstream os;
  os << "unknown constellation '" << name << "'; valid names:";
  for (const auto& c : constellation_catalog()) os << " " << c.name;
  fail(ErrorCode::Catalog, os.str());
}

// ---- mesh generation --------------------------------------------------------

namespace {

// Axis arrays are built so that mirrored coordinates are bitwise negations.
std::vector<double> full_axis(int n) {
  std::vector<double> a(n + 1);
  for (int i = 0; i < n / 2; ++i) a[i] = (2.0 * i) / n - 1.0;
  a[n / 2] = 0.0;
  for (int i = n / 2 + 1; i <= n; ++i) a[i] = -a[n - i];
  return a;
}

std::vector<double> low_axis(int n) { // [-1, 0]
  std::vector<double> a(n / 2 + 1);
  for (int i = 0; i < n / 2; ++i) a[i] = (2.0 * i) / n - 1.0;
  a[n / 2] = 0.0;
  return a;
}

std::vector<double> high_axis(int n) { // [0, 1]
  std::vector<double> a(n / 2 + 1);
  for (int i = 0; i <= n / 2; ++i) a[i] = (2.0 * i) / n;
  return a;
}

struct FaceRec {
  std::array<int, 3> key; // sorted
  int tet;
  std::array<int, 3> tri; // original order
};

constexpr int kPerms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};

} // namespace

TetMesh generate_mesh(const Constellation& c, int n) {
  if (n < 2 || n % 2 != 0) {
    std::ostringstream os;
    os << "subdivision count must be even and >= 2, got " << n;
    fail(ErrorCode::InvalidArgument, os.str());
  }

  std::vector<double> xs, ys, zs;
  switch (c.domain) {
  case DomainShape::CubeMinusSlit:
    xs = full_axis(n), ys = full_axis(n), zs = full_axis(n);
    break;
  case DomainShape::HalfcubeMinusSlit:
    xs = full_axis(n), ys = full_axis(n), zs = low_axis(n);
    break;
  case DomainShape::HalfcubePlus:
    xs = high_axis(n), ys = full_axis(n), zs = low_axis(n);
    break;
  case DomainShape::HalfcubeMinus:
    xs = low_axis(n), ys = full_axis(n), zs = low_axis(n);
    break;
  case DomainShape::CubeHalfX:
    xs = low_axis(n), ys = full_axis(n), zs = full_axis(n);
    break;
  }
  const int nx = static_cast<int>(xs.size()) - 1;
  const int ny = static_cast<int>(ys.size()) - 1;
  const int nz = static_cast<int>(zs.size()) - 1;

  TetMesh mesh;
  mesh.h = 2.0 / n;
  auto vid = [&](int i, int j, int k) { return (i * (ny + 1) + j) * (nz + 1) + k; };
  const int n_grid = (nx + 1) * (ny + 1) * (nz + 1);
  mesh.vertices.resize(n_grid);
  for (int i = 0; i <= nx; ++i)
    for (int j = 0; j <= ny; ++j)
      for (int k = 0; k <= nz; ++k) mesh.vertices[vid(i, j, k)] = Vec3(xs[i], ys[j], zs[k]);

  // Crack duplication: vertices in the 2D relative interior of the slit that
  // are interior to the domain get a second (minus side) copy.
  const bool full_domain =
      c.domain == DomainShape::CubeMinusSlit || c.domain == DomainShape::HalfcubeMinusSlit;
  std::vector<int> minus_copy(n_grid, -1);
  if (c.slit && full_domain) {
    const int imid = n / 2;
    for (int j = 0; j <= ny; ++j)
      for (int k = 0; k <= nz; ++k) {
        const int v = vid(imid, j, k);
        if (!c.slit->duplicates_vertex(mesh.vertices[v].y(), mesh.vertices[v].z())) continue;
        minus_copy[v] = static_cast<int>(mesh.vertices.size());
        mesh.vertices.push_back(mesh.vertices[v]);
        mesh.crack_pairs.emplace_back(v, minus_copy[v]);
      }
  }

  // Mirrored Kuhn subdivision: cells left of {x=0} use the x-reflected corner
  // pattern and cells above {z=0} the z-reflected one, so that both planes are
  // triangulated compatibly and iota is an exact mesh symmetry.
  mesh.tets.reserve(static_cast<std::size_t>(nx) * ny * nz * 6);
  for (int ci = 0; ci < nx; ++ci)
    for (int cj = 0; cj < ny; ++cj)
      for (int ck = 0; ck < nz; ++ck) {
        const bool minus_cell = xs[ci] + xs[ci + 1] < 0.0;
        const bool flip_x = minus_cell;
        const bool flip_z = zs[ck] + zs[ck + 1] > 0.0;
        auto corner = [&](int dx, int dy, int dz) {
          int i = ci + (flip_x ? 1 - dx : dx);
          int k = ck + (flip_z ? 1 - dz : dz);
          int v = vid(i, cj + dy, k);
          if (minus_cell && minus_copy[v] >= 0) v = minus_copy[v];
          return v;
        };
        for (const auto& p : kPerms) {
          std::array<int, 3> d{0, 0, 0};
          std::array<int, 4> t;
          t[0] = corner(0, 0, 0);
          d[p[0]] = 1;
          t[1] = corner(d[0], d[1], d[2]);
          d[p[1]] = 1;
          t[2] = corner(d[0], d[1], d[2]);
          t[3] = corner(1, 1, 1);
          Mat3 B;
          for (int m = 0; m < 3; ++m) B.col(m) = mesh.vertices[t[m + 1]] - mesh.vertices[t[0]];
          if (B.determinant() < 0.0) std::swap(t[2], t[3]);
          mesh.tets.push_back(t);
        }
      }

  mesh.tet_region.resize(mesh.tet_count());
  for (std::size_t t = 0; t < mesh.tet_count(); ++t) {
    const Vec3 cen = mesh.tet_centroid(static_cast<int>(t));
    mesh.tet_region[t] =
        (cen.x() > 0.0 ? 1 : 0) | (cen.y() > 0.0 ? 2 : 0) | (cen.z() > 0.0 ? 4 : 0);
  }

  // Boundary facets: faces referenced by exactly one tet.
  {
    std::vector<FaceRec> faces;
    faces.reserve(mesh.tet_count() * 4);
    constexpr int F[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};
    for (std::size_t t = 0; t < mesh.tet_count(); ++t)
      for (const auto& f : F) {
        FaceRec r;
        r.tri = {mesh.tets[t][f[0]], mesh.tets[t][f[1]], mesh.tets[t][f[2]]};
        r.key = r.tri;
        std::sort(r.key.begin(), r.key.end());
        r.tet = static_cast<int>(t);
        faces.push_back(r);
      }
    std::sort(faces.begin(), faces.end(),
              [](const FaceRec& a, const FaceRec& b) { return a.key < b.key; });
    for (std::size_t i = 0; i < faces.size();) {
      std::size_t j = i + 1;
      while (j < faces.size() && faces[j].key == faces[i].key) ++j;
      if (j - i == 1) {
        BoundaryFacet bf;
        bf.v = faces[i].tri;
        bf.tet = faces[i].tet;
        const Vec3 a = mesh.vertices[bf.v[0]], b = mesh.vertices[bf.v[1]],
                   d = mesh.vertices[bf.v[2]];
        if (full_domain && a.x() == 0.0 && b.x() == 0.0 && d.x() == 0.0) {
          const Vec3 cen = (a + b + d) / 3.0;
          if (!c.slit || !c.slit->contains_centroid(cen.y(), cen.z()))
            fail(ErrorCode::Internal, "sealed or stray facet in the slit plane at " + fmt_point(cen));
          bf.side = mesh.tet_centroid(bf.tet).x() > 0.0 ? FacetSide::SlitPlus : FacetSide::SlitMinus;
        } else {
          bf.side = FacetSide::Outer;
        }
        mesh.boundary.push_back(bf);
      }
      i = j;
    }
  }

  // iota as an exact mesh symmetry, when the constellation allows it.
  if (c.iota_invariant()) {
    mesh.vertex_symmetry.assign(mesh.vertex_count(), -1);
    // Grid part: mirrored index; crack copies swap sides.
    for (int i = 0; i <= nx; ++i)
      for (int j = 0; j <= ny; ++j)
        for (int k = 0; k <= nz; ++k) {
          const int v = vid(i, j, k);
          mesh.vertex_symmetry[v] = vid(nx - i, j, k);
        }
    for (const auto& [plus, minus] : mesh.crack_pairs) {
      mesh.vertex_symmetry[plus] = minus;
      mesh.vertex_symmetry[minus] = plus;
    }

    std::map<std::array<int, 4>, int> tet_index;
    for (std::size_t t = 0; t < mesh.tet_count(); ++t) {
      auto key = mesh.tets[t];
      std::sort(key.begin(), key.end());
      tet_index[key] = static_cast<int>(t);
    }
    mesh.tet_symmetry.resize(mesh.tet_count());
    for (std::size_t t = 0; t < mesh.tet_count(); ++t) {
      std::array<int, 4> key;
      for (int m = 0; m < 4; ++m) key[m] = mesh.vertex_symmetry[mesh.tets[t][m]];
      std::sort(key.begin(), key.end());
      auto it = tet_index.find(key);
      if (it == tet_index.end())
        fail(ErrorCode::Internal, "mesh is not an exact iota symmetry at tet " +
                                      std::to_string(t));
      mesh.tet_symmetry[t] = it->second;
    }
  }

  classify_boundary(mesh, c);
  return mesh;
}

void classify_boundary(TetMesh& mesh, const Constellation& c) {
  double x_lo, x_hi = 1.0, z_lo = -1.0, z_hi;
  switch (c.domain) {
  case DomainShape::CubeMinusSlit: x_lo = -1.0; z_hi = 1.0; break;
  case DomainShape::HalfcubeMinusSlit: x_lo = -1.0; z_hi = 0.0; break;
  case DomainShape::HalfcubePlus: x_lo = 0.0; z_hi = 0.0; break;
  case DomainShape::HalfcubeMinus: x_lo = -1.0; x_hi = 0.0; z_hi = 0.0; break;
  case DomainShape::CubeHalfX: x_lo = -1.0; x_hi = 0.0; z_hi = 1.0; break;
  }
  for (auto& f : mesh.boundary) {
    if (f.side == FacetSide::SlitPlus || f.side == FacetSide::SlitMinus) {
      f.bc = BoundaryCondition::Dirichlet; // the slit belongs to D
      continue;
    }
    const Vec3 a = mesh.vertices[f.v[0]], b = mesh.vertices[f.v[1]], d = mesh.vertices[f.v[2]];
    auto on_plane = [&](int axis, double value) {
      return a[axis] == value && b[axis] == value && d[axis] == value;
    };
    const bool on_wall = on_plane(0, x_lo) || on_plane(0, x_hi) || on_plane(1, -1.0) ||
                         on_plane(1, 1.0) || on_plane(2, z_lo) || on_plane(2, z_hi);
    if (!on_wall && f.side != FacetSide::Interface)
      fail(ErrorCode::Mesh,
           "boundary facet matches no predicate of '" + c.name + "' at " +
               fmt_point(mesh.facet_centroid(f)));
    f.bc = c.in_neumann(mesh.facet_centroid(f)) ? BoundaryCondition::Neumann
                                                : BoundaryCondition::Dirichlet;
  }
}

// ---- components -------------------------------------------------------------

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) {
    for (int i = 0; i < n; ++i) parent[i] = i;
  }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

} // namespace

std::vector<ComponentMesh> split_components(const TetMesh& mesh,
                                            const std::function<bool(int)>& selector) {
  const int nt = static_cast<int>(mesh.tet_count());
  std::vector<char> sel(nt, 1);
  if (selector)
    for (int t = 0; t < nt; ++t) sel[t] = selector(t) ? 1 : 0;

  std::vector<FaceRec> faces;
  constexpr int F[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};
  for (int t = 0; t < nt; ++t)
    for (const auto& f : F) {
      FaceRec r;
      r.tri = {mesh.tets[t][f[0]], mesh.tets[t][f[1]], mesh.tets[t][f[2]]};
      r.key = r.tri;
      std::sort(r.key.begin(), r.key.end());
      r.tet = t;
      faces.push_back(r);
    }
  std::sort(faces.begin(), faces.end(),
            [](const FaceRec& a, const FaceRec& b) { return a.key < b.key; });

  UnionFind uf(nt);
  // face shared by two selected tets -> same component; selected against
  // unselected -> interface facet
  std::vector<std::pair<std::array<int, 3>, int>> interface_faces; // (tri, tet)
  for (std::size_t i = 0; i < faces.size();) {
    std::size_t j = i + 1;
    while (j < faces.size() && faces[j].key == faces[i].key) ++j;
    if (j - i == 2) {
      const int t0 = faces[i].tet, t1 = faces[i + 1].tet;
      if (sel[t0] && sel[t1])
        uf.unite(t0, t1);
      else if (sel[t0] != sel[t1]) {
        const auto& owner = sel[t0] ? faces[i] : faces[i + 1];
        interface_faces.emplace_back(owner.tri, owner.tet);
      }
    }
    i = j;
  }

  std::map<int, int> root_to_comp;
  for (int t = 0; t < nt; ++t)
    if (sel[t]) {
      const int r = uf.find(t);
      if (!root_to_comp.count(r)) {
        const int id = static_cast<int>(root_to_comp.size());
        root_to_comp[r] = id;
      }
    }
  // Renumber components by smallest tet index for determinism.
  {
    std::map<int, int> first_tet;
    for (int t = 0; t < nt; ++t)
      if (sel[t]) {
        const int r = uf.find(t);
        if (!first_tet.count(r)) first_tet[r] = t;
      }
    std::vector<std::pair<int, int>> order; // (first tet, root)
    for (auto& [r, ft] : first_tet) order.emplace_back(ft, r);
    std::sort(order.begin(), order.end());
    root_to_comp.clear();
    for (std::size_t i = 0; i < order.size(); ++i) root_to_comp[order[i].second] = static_cast<int>(i);
  }

  std::vector<ComponentMesh> comps(root_to_comp.size());
  std::vector<std::vector<int>> vmap_inv(comps.size()); // parent vertex -> local (lazy)
  for (auto& v : vmap_inv) v.assign(mesh.vertex_count(), -1);

  auto local_vertex = [&](int ci, int pv) {
    int& lv = vmap_inv[ci][pv];
    if (lv < 0) {
      lv = static_cast<int>(comps[ci].mesh.vertices.size());
      comps[ci].mesh.vertices.push_back(mesh.vertices[pv]);
      comps[ci].vertex_map.push_back(pv);
    }
    return lv;
  };

  std::vector<int> tet_local(nt, -1);
  for (int t = 0; t < nt; ++t) {
    if (!sel[t]) continue;
    const int ci = root_to_comp[uf.find(t)];
    auto& cm = comps[ci];
    std::array<int, 4> lt;
    for (int m = 0; m < 4; ++m) lt[m] = local_vertex(ci, mesh.tets[t][m]);
    tet_local[t] = static_cast<int>(cm.mesh.tets.size());
    cm.mesh.tets.push_back(lt);
    cm.mesh.tet_region.push_back(mesh.tet_region[t]);
    cm.tet_map.push_back(t);
    cm.mesh.h = mesh.h;
  }

  for (const auto& f : mesh.boundary) {
    if (!sel[f.tet]) continue;
    const int ci = root_to_comp[uf.find(f.tet)];
    BoundaryFacet bf = f;
    for (int m = 0; m < 3; ++m) bf.v[m] = vmap_inv[ci][f.v[m]];
    bf.tet = tet_local[f.tet];
    comps[ci].mesh.boundary.push_back(bf);
  }
  for (const auto& [tri, tet] : interface_faces) {
    const int ci = root_to_comp[uf.find(tet)];
    BoundaryFacet bf;
    for (int m = 0; m < 3; ++m) bf.v[m] = vmap_inv[ci][tri[m]];
    bf.tet = tet_local[tet];
    bf.side = FacetSide::Interface;
    bf.bc = BoundaryCondition::Dirichlet; // interfaces lie in the Dirichlet part
    comps[ci].mesh.boundary.push_back(bf);
  }
  return comps;
}

// ---- 2-set check ------------------------------------------------------------

namespace {

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

// Signed contribution of one directed polygon edge to the polygon/disk
// intersection area; points are relative to the disk center.
double edge_disk_contrib(const Eigen::Vector2d& p, const Eigen::Vector2d& q, double R) {
  auto sector = [R](const Eigen::Vector2d& u, const Eigen::Vector2d& v) {
    return 0.5 * R * R * std::atan2(cross2(u, v), u.dot(v));
  };
  const Eigen::Vector2d d = q - p;
  const double dd = d.squaredNorm();
  if (dd == 0.0) return 0.0;
  const double b = p.dot(d);
  const double c = p.squaredNorm() - R * R;
  const double disc = b * b - dd * c;
  if (disc <= 0.0) return sector(p, q);
  const double s = std::sqrt(disc);
  double t0 = std::clamp((-b - s) / dd, 0.0, 1.0);
  double t1 = std::clamp((-b + s) / dd, 0.0, 1.0);
  if (t0 >= t1) return sector(p, q);
  const Eigen::Vector2d a0 = p + t0 * d, a1 = p + t1 * d;
  return sector(p, a0) + 0.5 * cross2(a0, a1) + sector(a1, q);
}

} // namespace

double triangle_disk_area(const std::array<Vec3, 3>& tri, const Vec3& center, double radius) {
  const Vec3 e1 = tri[1] - tri[0], e2 = tri[2] - tri[0];
  Vec3 nrm = e1.cross(e2);
  const double nn = nrm.norm();
  if (nn == 0.0) return 0.0;
  nrm /= nn;
  const Vec3 u = e1.normalized();
  const Vec3 v = nrm.cross(u);
  std::array<Eigen::Vector2d, 3> p2;
  for (int i = 0; i < 3; ++i) {
    const Vec3 rel = tri[i] - center;
    p2[i] = Eigen::Vector2d(rel.dot(u), rel.dot(v));
  }
  double total = 0.0;
  for (int i = 0; i < 3; ++i) total += edge_disk_contrib(p2[i], p2[(i + 1) % 3], radius);
  return std::abs(total);
}

TwoSetReport check_two_set(const std::vector<std::array<Vec3, 3>>& surface,
                           const std::vector<Vec3>& points, const std::vector<double>& radii) {
  for (double r : radii)
    if (!(r > 0.0 && r <= 1.0)) fail(ErrorCode::InvalidArgument, "2-set radii must lie in ]0,1]");

  auto dist_to_triangle = [](const std::array<Vec3, 3>& t, const Vec3& x) {
    // Plane distance is enough here: sample points are expected on the surface.
    const Vec3 nrm = (t[1] - t[0]).cross(t[2] - t[0]).normalized();
    const double dplane = std::abs(nrm.dot(x - t[0]));
    // Barycentric in-plane test with generous clamp.
    const Vec3 proj = x - nrm.dot(x - t[0]) * nrm;
    const Vec3 v0 = t[1] - t[0], v1 = t[2] - t[0], v2 = proj - t[0];
    const double d00 = v0.dot(v0), d01 = v0.dot(v1), d11 = v1.dot(v1);
    const double d20 = v2.dot(v0), d21 = v2.dot(v1);
    const double den = d00 * d11 - d01 * d01;
    const double b1 = (d11 * d20 - d01 * d21) / den;
    const double b2 = (d00 * d21 - d01 * d20) / den;
    const double out = std::max({-b1, -b2, b1 + b2 - 1.0, 0.0});
    return dplane + out; // crude but only used as an on-surface gate
  };

  TwoSetReport rep;
  rep.c_lower = std::numeric_limits<double>::infinity();
  rep.c_upper = 0.0;
  for (const auto& x : points) {
    double dmin = std::numeric_limits<double>::infinity();
    for (const auto& t : surface) dmin = std::min(dmin, dist_to_triangle(t, x));
    if (dmin > 1e-9)
      fail(ErrorCode::InvalidArgument, "sample point " + fmt_point(x) + " is off the surface");
    for (double r : radii) {
      double area = 0.0;
      for (const auto& t : surface) {
        const Vec3 nrm = (t[1] - t[0]).cross(t[2] - t[0]).normalized();
        const double d = nrm.dot(x - t[0]);
        if (std::abs(d) >= r) continue;
        const Vec3 cen = x - d * nrm;
        area += triangle_disk_area(t, cen, std::sqrt(r * r - d * d));
      }
      TwoSetSample s;
      s.point = x;
      s.radius = r;
      s.area = area;
      s.ratio = area / (r * r);
      rep.c_lower = std::min(rep.c_lower, s.ratio);
      rep.c_upper = std::max(rep.c_upper, s.ratio);
      rep.samples.push_back(s);
    }
  }
  return rep;
}

// ---- names ------------------------------------------------------------------

const char* to_string(Classification c) {
  switch (c) {
  case Classification::DParallelC: return "D_PARALLEL_C";
  case Classification::DParallelD: return "D_PARALLEL_D";
  case Classification::RC: return "R_C";
  case Classification::RD: return "R_D";
  case Classification::ModelHalf: return "MODEL_HALF";
  }
  return "?";
}

const char* to_string(SlitKind k) {
  switch (k) {
  case SlitKind::Sigma1: return "SIGMA1";
  case SlitKind::Sigma2: return "SIGMA2";
  case SlitKind::Sigma3: return "SIGMA3";
  case SlitKind::FullPlane: return "FULL_PLANE";
  }
  return "?";
}

const char* to_string(DomainShape d) {
  switch (d) {
  case DomainShape::CubeMinusSlit: return "CUBE_MINUS_SLIT";
  case DomainShape::HalfcubeMinusSlit: return "HALFCUBE_MINUS_SLIT";
  case DomainShape::HalfcubePlus: return "HALFCUBE_PLUS";
  case DomainShape::HalfcubeMinus: return "HALFCUBE_MINUS";
  case DomainShape::CubeHalfX: return "CUBE_HALF_X";
  }
  return "?";
}

} // namespace bfem
