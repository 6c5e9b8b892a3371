#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <set>

#include "core/geometry.hpp"

using namespace bfem;

namespace {

// Independent component count: breadth-first search over face-adjacent tets.
int bfs_component_count(const TetMesh& mesh) {
  const int nt = static_cast<int>(mesh.tet_count());
  std::map<std::array<int, 3>, std::vector<int>> face_tets;
  constexpr int F[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};
  for (int t = 0; t < nt; ++t)
    for (const auto& f : F) {
      std::array<int, 3> key{mesh.tets[t][f[0]], mesh.tets[t][f[1]], mesh.tets[t][f[2]]};
      std::sort(key.begin(), key.end());
      face_tets[key].push_back(t);
    }
  std::vector<std::vector<int>> adj(nt);
  for (const auto& [key, ts] : face_tets)
    if (ts.size() == 2) {
      adj[ts[0]].push_back(ts[1]);
      adj[ts[1]].push_back(ts[0]);
    }
  std::vector<char> seen(nt, 0);
  int comps = 0;
  for (int s = 0; s < nt; ++s) {
    if (seen[s]) continue;
    ++comps;
    std::queue<int> q;
    q.push(s);
    seen[s] = 1;
    while (!q.empty()) {
      const int t = q.front();
      q.pop();
      for (int u : adj[t])
        if (!seen[u]) {
          seen[u] = 1;
          q.push(u);
        }
    }
  }
  return comps;
}

double facet_area(const TetMesh& mesh, const BoundaryFacet& f) {
  const Vec3 a = mesh.vertices[f.v[0]], b = mesh.vertices[f.v[1]], c = mesh.vertices[f.v[2]];
  return 0.5 * (b - a).cross(c - a).norm();
}

// Quadrature oracle for the triangle/disk area: uniform barycentric subdivision.
double triangle_disk_area_quadrature(const std::array<Vec3, 3>& tri, const Vec3& center,
                                     double radius, int n = 600) {
  const Vec3 e1 = tri[1] - tri[0], e2 = tri[2] - tri[0];
  const double full = 0.5 * e1.cross(e2).norm();
  const double cell = full / (n * n);
  double area = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n - i; ++j) {
      // lower and upper sub-triangle centroids of the (i,j) rhombus
      const double a0 = (i + 1.0 / 3.0) / n, b0 = (j + 1.0 / 3.0) / n;
      if ((tri[0] + a0 * e1 + b0 * e2 - center).norm() < radius) area += cell;
      if (j < n - i - 1) {
        const double a1 = (i + 2.0 / 3.0) / n, b1 = (j + 2.0 / 3.0) / n;
        if ((tri[0] + a1 * e1 + b1 * e2 - center).norm() < radius) area += cell;
      }
    }
  return area;
}

} // namespace

TEST_CASE("catalog lookup and error reporting") {
  const auto& c = build_constellation("cube_minus_sigma1");
  CHECK(c.domain == DomainShape::CubeMinusSlit);
  CHECK(c.slit.has_value());
  CHECK(c.classification == Classification::DParallelC);

  const auto& possi2 = build_constellation("halfcube_sym_possi2");
  CHECK(possi2.domain == DomainShape::HalfcubeMinus);
  CHECK(possi2.neumann == NeumannKind::XiYPosLower);

  const auto& m7 = build_constellation("neumann_edge_M7");
  CHECK(m7.domain == DomainShape::HalfcubeMinus);
  CHECK(m7.neumann == NeumannKind::TopLeftYPos);

  CHECK_THROWS_WITH_AS(build_constellation("no_such_entry"),
                       doctest::Contains("valid names"), Error);

  // required catalog entries
  for (const char* name :
       {"cube_minus_sigma1", "cube_minus_sigma2", "cube_minus_sigma3", "halfcube_minus_sigma1",
        "halfcube_minus_sigma1_mtop", "halfcube_minus_sigma1_mhalf", "cubehalf_sym_possi1",
        "halfcube_sym_possi2", "halfcube_sym_possi3", "halfcube_sym_possi4", "neumann_edge_M7",
        "neumann_edge_M8"})
    CHECK_NOTHROW(build_constellation(name));
}

TEST_CASE("mesh generation basics at n=2") {
  const auto& c = build_constellation("cube_minus_sigma1");
  const TetMesh mesh = generate_mesh(c, 2);
  CHECK(mesh.tet_count() == 48);
  CHECK(mesh.total_volume() == doctest::Approx(8.0).epsilon(1e-12));
  // duplicates only on the slit, never on the tip line or beyond it
  for (const auto& [p, m] : mesh.crack_pairs) {
    CHECK(mesh.vertices[p].x() == 0.0);
    CHECK(mesh.vertices[p].y() < 0.0);
  }
  for (std::size_t t = 0; t < mesh.tet_count(); ++t) CHECK(mesh.tet_volume(t) > 0.0);

  CHECK_THROWS_AS(generate_mesh(c, 3), Error);
  CHECK_THROWS_AS(generate_mesh(c, 0), Error);
}

TEST_CASE("mesh volumes across the catalog") {
  for (const auto& c : constellation_catalog()) {
    const TetMesh mesh = generate_mesh(c, 4);
    double expected = 0.0;
    switch (c.domain) {
    case DomainShape::CubeMinusSlit: expected = 8.0; break;
    case DomainShape::HalfcubeMinusSlit: expected = 4.0; break;
    case DomainShape::HalfcubePlus:
    case DomainShape::HalfcubeMinus: expected = 2.0; break;
    case DomainShape::CubeHalfX: expected = 4.0; break;
    }
    CHECK(mesh.total_volume() == doctest::Approx(expected).epsilon(1e-12));
    for (std::size_t t = 0; t < mesh.tet_count(); ++t) CHECK(mesh.tet_volume(t) > 0.0);
    std::size_t unset = 0;
    for (const auto& f : mesh.boundary)
      if (f.bc == BoundaryCondition::Unset) ++unset;
    CHECK(unset == 0);
  }
}

TEST_CASE("halfcube volume example") {
  const TetMesh mesh = generate_mesh(build_constellation("halfcube_minus_sigma1"), 4);
  CHECK(mesh.total_volume() == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("mesh symmetry is an exact involution") {
  for (const char* name : {"cube_minus_sigma1", "cube_minus_sigma2", "cube_minus_sigma3",
                           "halfcube_minus_sigma1_mhalf", "cube_minus_fullplane"}) {
    const auto& c = build_constellation(name);
    const TetMesh mesh = generate_mesh(c, 4);
    REQUIRE(mesh.symmetric());
    for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
      const int j = mesh.vertex_symmetry[i];
      CHECK(mesh.vertex_symmetry[j] == static_cast<int>(i));
      CHECK(mesh.vertices[j].x() == -mesh.vertices[i].x());
      CHECK(mesh.vertices[j].y() == mesh.vertices[i].y());
      CHECK(mesh.vertices[j].z() == mesh.vertices[i].z());
    }
    for (std::size_t t = 0; t < mesh.tet_count(); ++t) {
      const int s = mesh.tet_symmetry[t];
      CHECK(mesh.tet_symmetry[s] == static_cast<int>(t));
      CHECK(mesh.tet_region[s] == (mesh.tet_region[t] ^ 1)); // x bit flips
    }
  }
}

TEST_CASE("crack bookkeeping") {
  const auto& c = build_constellation("cube_minus_sigma1");
  const TetMesh mesh = generate_mesh(c, 4);
  // slit vertices off the tip line: y in {-1,-0.5} times z in {-1,...,1}
  CHECK(mesh.crack_pairs.size() == 10);
  for (const auto& [p, m] : mesh.crack_pairs) {
    CHECK(mesh.vertices[p] == mesh.vertices[m]);
    for (const auto& t : mesh.tets) {
      const bool has_p = std::count(t.begin(), t.end(), p) > 0;
      const bool has_m = std::count(t.begin(), t.end(), m) > 0;
      CHECK(!(has_p && has_m));
    }
  }
  const TetMesh half = generate_mesh(build_constellation("halfcube_minus_sigma1"), 4);
  CHECK(half.crack_pairs.size() == 6); // y in {-1,-0.5} times z in {-1,-0.5,0}

  const TetMesh fine = generate_mesh(c, 8);
  CHECK(fine.crack_pairs.size() == 36); // 4 y values x 9 z values
}

TEST_CASE("slit facets are resolved and labeled") {
  const auto& c = build_constellation("cube_minus_sigma1");
  const TetMesh mesh = generate_mesh(c, 4);
  double plus_area = 0.0, minus_area = 0.0;
  std::size_t plus_count = 0, minus_count = 0;
  for (const auto& f : mesh.boundary) {
    if (f.side == FacetSide::SlitPlus) {
      plus_area += facet_area(mesh, f);
      ++plus_count;
      CHECK(f.bc == BoundaryCondition::Dirichlet);
    }
    if (f.side == FacetSide::SlitMinus) {
      minus_area += facet_area(mesh, f);
      ++minus_count;
      CHECK(f.bc == BoundaryCondition::Dirichlet);
    }
  }
  CHECK(plus_count == 16);
  CHECK(minus_count == 16);
  CHECK(plus_area == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(minus_area == doctest::Approx(2.0).epsilon(1e-12));

  const TetMesh m2 = generate_mesh(build_constellation("cube_minus_sigma2"), 4);
  double a2 = 0.0;
  for (const auto& f : m2.boundary)
    if (f.side == FacetSide::SlitPlus) a2 += facet_area(m2, f);
  CHECK(a2 == doctest::Approx(1.0).epsilon(1e-12)); // triangle area

  const TetMesh m3 = generate_mesh(build_constellation("cube_minus_sigma3"), 4);
  double a3 = 0.0;
  for (const auto& f : m3.boundary)
    if (f.side == FacetSide::SlitPlus) a3 += facet_area(m3, f);
  CHECK(a3 == doctest::Approx(3.0).epsilon(1e-12)); // square minus triangle
}

TEST_CASE("boundary classification censuses") {
  // full Dirichlet cube: no Neumann facets
  const TetMesh cube = generate_mesh(build_constellation("cube_minus_sigma1"), 4);
  for (const auto& f : cube.boundary) CHECK(f.bc == BoundaryCondition::Dirichlet);

  // halfcube with Neumann on half of the top surface
  const auto& c = build_constellation("halfcube_minus_sigma1_mhalf");
  TetMesh mesh = generate_mesh(c, 4);
  std::size_t neumann = 0;
  for (const auto& f : mesh.boundary)
    if (f.bc == BoundaryCondition::Neumann) {
      ++neumann;
      const Vec3 cen = mesh.facet_centroid(f);
      CHECK(cen.z() == 0.0);
      CHECK(cen.y() > 0.0);
    }
  CHECK(neumann == 2 * 4 * 2); // 8 top squares with y>0, two triangles each

  // classification is idempotent
  const auto before = mesh.boundary;
  classify_boundary(mesh, c);
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(before[i].bc == mesh.boundary[i].bc);

  // every boundary facet carries exactly one label
  std::size_t d = 0, n = 0;
  for (const auto& f : mesh.boundary) (f.bc == BoundaryCondition::Neumann ? n : d)++;
  CHECK(d + n == mesh.boundary.size());
}

TEST_CASE("connected components") {
  // full-plane slit disconnects the cube into the two x-halves
  const TetMesh cut = generate_mesh(build_constellation("cube_minus_fullplane"), 4);
  const auto comps = split_components(cut);
  CHECK(comps.size() == 2);
  CHECK(bfs_component_count(cut) == 2);
  for (const auto& comp : comps)
    CHECK(comp.mesh.total_volume() == doctest::Approx(4.0).epsilon(1e-12));

  // half-plane slit keeps the cube connected around the tip
  const TetMesh slit = generate_mesh(build_constellation("cube_minus_sigma1"), 4);
  CHECK(split_components(slit).size() == 1);
  CHECK(bfs_component_count(slit) == 1);

  // selector restricted to the x>0 half of the half cube
  const TetMesh q = generate_mesh(build_constellation("halfcube_minus_sigma1"), 4);
  const auto plus = split_components(
      q, [&](int t) { return q.tet_centroid(t).x() > 0.0; });
  REQUIRE(plus.size() == 1);
  CHECK(plus[0].mesh.total_volume() == doctest::Approx(2.0).epsilon(1e-12));
  bool has_interface = false;
  for (const auto& f : plus[0].mesh.boundary)
    if (f.side == FacetSide::Interface) {
      has_interface = true;
      CHECK(f.bc == BoundaryCondition::Dirichlet);
    }
  CHECK(has_interface);

  // empty selection
  CHECK(split_components(q, [](int) { return false; }).empty());
}

TEST_CASE("two-set measurements against closed forms") {
  SlitSurface full{SlitKind::FullPlane};
  const double pi = std::acos(-1.0);

  // interior point of a plane square: full disk
  auto rep = check_two_set(full.triangles(), {Vec3(0, 0.2, 0.1)}, {0.1});
  CHECK(rep.samples[0].ratio == doctest::Approx(pi).epsilon(0.01));

  // point on the tip edge of the half-plane slit: half disk
  SlitSurface s1{SlitKind::Sigma1};
  rep = check_two_set(s1.triangles(), {Vec3(0, 0, 0.3)}, {0.1});
  CHECK(rep.samples[0].ratio == doctest::Approx(pi / 2).epsilon(0.01));

  // Sigma2 vertex at the origin: sector of the opening angle
  SlitSurface s2{SlitKind::Sigma2};
  const Vec3 leg1 = Vec3(0, -1, -1).normalized(), leg2 = Vec3(0, -1, 1).normalized();
  const double opening = std::acos(leg1.dot(leg2));
  rep = check_two_set(s2.triangles(), {Vec3(0, 0, 0)}, {0.1});
  CHECK(rep.samples[0].ratio == doctest::Approx(opening / 2).epsilon(0.01));
  CHECK(rep.c_lower > 0.0);
  CHECK(rep.c_lower <= rep.c_upper);

  // off-surface point and bad radii are rejected
  CHECK_THROWS_AS(check_two_set(s1.triangles(), {Vec3(0.5, 0, 0)}, {0.1}), Error);
  CHECK_THROWS_AS(check_two_set(s1.triangles(), {Vec3(0, 0, 0)}, {1.5}), Error);
}

TEST_CASE("triangle-disk clipping against subdivision quadrature") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::array<Vec3, 3> tri;
    for (auto& p : tri) p = Vec3(uni(rng), uni(rng), 0.0);
    const double area = 0.5 * (tri[1] - tri[0]).cross(tri[2] - tri[0]).norm();
    if (area < 0.05) continue;
    const Vec3 center(0.5 * uni(rng), 0.5 * uni(rng), 0.0);
    const double r = 0.3 + 0.4 * std::abs(uni(rng));
    const double exact = triangle_disk_area(tri, center, r);
    const double quad = triangle_disk_area_quadrature(tri, center, r);
    CHECK(exact == doctest::Approx(quad).epsilon(0.01).scale(std::max(exact, 1e-6)));
  }
}
