#include <doctest.h>

#include <cmath>
#include <random>

#include "core/symmetry.hpp"

using namespace bfem;

namespace {

NodalField coord_field(const TetMesh& mesh, int axis) {
  NodalField u(mesh.vertex_count());
  for (std::size_t v = 0; v < u.size(); ++v) u[v] = mesh.vertices[v][axis];
  return u;
}

NodalField dyadic_field(const TetMesh& mesh, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> ints(-(1 << 26), 1 << 26);
  NodalField u(mesh.vertex_count());
  for (auto& v : u) v = std::ldexp(double(ints(rng)), -26);
  return u;
}

std::size_t count_neumann(const TetMesh& mesh, const std::function<bool(const Vec3&)>& pred) {
  std::size_t n = 0;
  for (const auto& f : mesh.boundary)
    if (f.bc == BoundaryCondition::Neumann) {
      CHECK(pred(mesh.facet_centroid(f)));
      ++n;
    }
  return n;
}

} // namespace

TEST_CASE("reflection operator") {
  const auto& c = build_constellation("cube_minus_sigma1");
  const TetMesh mesh = generate_mesh(c, 4);

  // symmetric fields are fixed
  const NodalField y = coord_field(mesh, 1);
  CHECK(reflect(mesh, y) == y);

  // x flips sign exactly
  const NodalField x = coord_field(mesh, 0);
  const NodalField px = reflect(mesh, x);
  for (std::size_t v = 0; v < x.size(); ++v) CHECK(px[v] == -x[v]);

  // involution and H1 isometry
  const NodalField u = dyadic_field(mesh, 9);
  CHECK(reflect(mesh, reflect(mesh, u)) == u);
  CHECK(h1_seminorm(mesh, reflect(mesh, u)) ==
        doctest::Approx(h1_seminorm(mesh, u)).epsilon(1e-12));
  CHECK(l2_norm(mesh, reflect(mesh, u)) == doctest::Approx(l2_norm(mesh, u)).epsilon(1e-12));

  const TetMesh plain = generate_mesh(build_constellation("halfcube_sym_possi2"), 2);
  CHECK_THROWS_AS(reflect(plain, NodalField(plain.vertex_count(), 0.0)), Error);
}

TEST_CASE("antisymmetric/symmetric split") {
  const auto& c = build_constellation("cube_minus_sigma1");
  const TetMesh mesh = generate_mesh(c, 4);

  const SplitFields sx = split(mesh, coord_field(mesh, 0));
  for (std::size_t v = 0; v < sx.sym.size(); ++v) {
    CHECK(sx.anti[v] == mesh.vertices[v].x());
    CHECK(sx.sym[v] == 0.0);
  }
  const SplitFields sy = split(mesh, coord_field(mesh, 1));
  for (std::size_t v = 0; v < sy.sym.size(); ++v) {
    CHECK(sy.anti[v] == 0.0);
    CHECK(sy.sym[v] == mesh.vertices[v].y());
  }

  // exact reconstruction and parity on dyadic data, zero trace on the plane
  const NodalField u = dyadic_field(mesh, 31);
  const SplitFields s = split(mesh, u);
  const NodalField pa = reflect(mesh, s.anti), ps = reflect(mesh, s.sym);
  for (std::size_t v = 0; v < u.size(); ++v) {
    CHECK(s.anti[v] + s.sym[v] == u[v]);
    CHECK(pa[v] == -s.anti[v]);
    CHECK(ps[v] == s.sym[v]);
    if (mesh.vertex_symmetry[v] == static_cast<int>(v)) CHECK(s.anti[v] == 0.0);
  }
}

TEST_CASE("stiffness commutes with the reflection permutation") {
  for (const char* coeff : {"identity", "mirrored"}) {
    const auto& c = build_constellation("halfcube_minus_sigma1_mhalf");
    const TetMesh mesh = generate_mesh(c, 4);
    CoefficientField rho =
        std::string(coeff) == "identity"
            ? CoefficientField::constant(mesh, SymMat3::identity())
            : mirror_extend(SymMat3{2, 1.5, 1, 0.3, 0.2, 0.1}, mesh);
    REQUIRE(check_iota_invariance(rho, mesh));
    const StiffnessSystem sys = assemble(mesh, rho);
    for (int i = 0; i < sys.full.n; ++i)
      for (int k = sys.full.rowptr[i]; k < sys.full.rowptr[i + 1]; ++k) {
        const int pi = mesh.vertex_symmetry[i];
        const int pj = mesh.vertex_symmetry[sys.full.col[k]];
        CHECK(sys.full.entry(pi, pj) == sys.full.val[k]);
      }
  }
}

TEST_CASE("half problems match the catalog constellations") {
  struct Expect {
    const char* full;
    const char* half_entry; // catalog entry with the same Neumann set
  };
  const Expect cases[] = {
      {"cube_minus_sigma1", "cubehalf_sym_possi1"},
      {"halfcube_minus_sigma1", "halfcube_sym_possi2"},
      {"halfcube_minus_sigma1_mtop", "halfcube_sym_possi3"},
      {"halfcube_minus_sigma1_mhalf", "halfcube_sym_possi4"},
  };
  for (const auto& [full_name, half_name] : cases) {
    const auto& c = build_constellation(full_name);
    const TetMesh mesh = generate_mesh(c, 4);
    const HalfProblems halves = make_half_problems(mesh, c);

    // anti: no Neumann facets beyond the inherited ones; the plane is Dirichlet
    for (const auto& f : halves.anti.mesh.boundary)
      if (f.side == FacetSide::Interface) CHECK(f.bc == BoundaryCondition::Dirichlet);

    // sym: Neumann facets agree facet-by-facet with the catalog half entry
    const auto& ch = build_constellation(half_name);
    const TetMesh ref = generate_mesh(ch, 4);
    std::size_t ref_neumann = 0;
    for (const auto& f : ref.boundary)
      if (f.bc == BoundaryCondition::Neumann) ++ref_neumann;
    std::size_t sym_neumann = 0;
    for (const auto& f : halves.sym.mesh.boundary)
      if (f.bc == BoundaryCondition::Neumann) {
        ++sym_neumann;
        CHECK(ch.in_neumann(halves.sym.mesh.facet_centroid(f)));
      }
    CHECK(sym_neumann == ref_neumann);

    // slit facets stay Dirichlet in both halves
    for (const auto& hp : {&halves.anti, &halves.sym})
      for (const auto& f : hp->mesh.boundary)
        if (f.side == FacetSide::SlitMinus) CHECK(f.bc == BoundaryCondition::Dirichlet);
  }
}

TEST_CASE("half problem Neumann censuses at n=4") {
  const auto& c = build_constellation("halfcube_minus_sigma1");
  const TetMesh mesh = generate_mesh(c, 4);
  const HalfProblems halves = make_half_problems(mesh, c);
  //

  const std::size_t count = count_neumann(halves.sym.mesh, [](const Vec3& p) {
    return p.x() == 0.0 && p.y() > 0.0 && p.z() < 0.0;
  });
  CHECK(count == 8); // 2x2 squares, two triangles each

  const auto& cc = build_constellation("cube_minus_sigma1");
  const TetMesh cm = generate_mesh(cc, 4);
  const HalfProblems ch = make_half_problems(cm, cc);
  const std::size_t count_cube = count_neumann(ch.sym.mesh, [](const Vec3& p) {
    return p.x() == 0.0 && p.y() > 0.0;
  });
  CHECK(count_cube == 16); // 2x4 squares
}

TEST_CASE("even extension") {
  const auto& c = build_constellation("halfcube_minus_sigma1");
  const TetMesh mesh = generate_mesh(c, 4);
  const HalfProblems halves = make_half_problems(mesh, c);
  const HalfProblem& sym = halves.sym;

  NodalField ones(sym.mesh.vertex_count(), 1.0);
  const NodalField ext1 = extend_even(mesh, sym, ones);
  for (double v : ext1) CHECK(v == 1.0);

  NodalField xs(sym.mesh.vertex_count());
  for (std::size_t v = 0; v < xs.size(); ++v) xs[v] = sym.mesh.vertices[v].x();
  const NodalField extx = extend_even(mesh, sym, xs);
  for (std::size_t v = 0; v < extx.size(); ++v)
    CHECK(extx[v] == -std::abs(mesh.vertices[v].x()));

  // energy doubling for iota-invariant coefficients
  const CoefficientField rho_full = mirror_extend(SymMat3{2, 1.5, 1, 0.3, 0.2, 0.1}, mesh);
  CoefficientField rho_half;
  for (int r : sym.mesh.tet_region)
    if (!rho_half.regions.count(r)) rho_half.regions.emplace(r, rho_full.at_region(r));
  const NodalField w = dyadic_field(sym.mesh, 77);
  const NodalField ext = extend_even(mesh, sym, w);
  const double full_energy = energy_product(mesh, rho_full, ext, ext);
  const double half_energy = energy_product(sym.mesh, rho_half, w, w);
  CHECK(full_energy == doctest::Approx(2.0 * half_energy).epsilon(1e-12));
}

TEST_CASE("zero extension is an isometry") {
  const auto& c = build_constellation("cube_minus_fullplane");
  const TetMesh mesh = generate_mesh(c, 4);
  const auto comps = split_components(mesh);
  REQUIRE(comps.size() == 2);
  const ComponentMesh& comp = comps[0];

  const NodalField zero(comp.mesh.vertex_count(), 0.0);
  const NodalField ext0 = extend_zero(mesh, comp, zero);
  for (double v : ext0) CHECK(v == 0.0);

  // admissible random field: zero on interface Dirichlet nodes
  NodalField psi = dyadic_field(comp.mesh, 5);
  DofMap dofs = DofMap::build(comp.mesh);
  for (const auto& f : comp.mesh.boundary)
    if (f.side == FacetSide::Interface)
      for (int v : f.v) psi[v] = 0.0;
  const NodalField ext = extend_zero(mesh, comp, psi);
  for (double p : {2.0, 4.0}) {
    const double a = w1p_norm(comp.mesh, psi, p);
    const double b = w1p_norm(mesh, ext, p);
    CHECK(std::abs(a - b) <= 1e-14 * std::max(a, 1.0));
  }

  // class violation on a selector split, where genuine interface facets exist
  const TetMesh q = generate_mesh(build_constellation("halfcube_minus_sigma1"), 4);
  const auto plus = split_components(q, [&](int t) { return q.tet_centroid(t).x() > 0.0; });
  REQUIRE(plus.size() == 1);
  NodalField bad(plus[0].mesh.vertex_count(), 0.0);
  bool found = false;
  for (const auto& f : plus[0].mesh.boundary)
    if (f.side == FacetSide::Interface && !found) {
      bad[f.v[0]] = 1.0;
      found = true;
    }
  REQUIRE(found);
  CHECK_THROWS_AS(extend_zero(q, plus[0], bad), Error);
}

TEST_CASE("solving through the symmetry decomposition") {
  const auto& c = build_constellation("halfcube_minus_sigma1_mhalf");
  const TetMesh mesh = generate_mesh(c, 8);
  const CoefficientField id = CoefficientField::constant(mesh, SymMat3::identity());

  SUBCASE("symmetric source gives a symmetric solution with zero anti part") {
    const RhsFunctional f = RhsFunctional::constant(mesh, 1.0);
    StiffnessSystem sys = assemble(mesh, id);
    const NodalField u = solve(sys, assemble_load(mesh, f), 1e-12);
    const NodalField pu = reflect(mesh, u);
    for (std::size_t v = 0; v < u.size(); ++v) CHECK(std::abs(pu[v] - u[v]) <= 1e-9);

    SymmetrySolveReport rep;
    const NodalField via = solve_via_symmetry(mesh, c, id, f, 1e-12, &rep);
    NodalField diff(u.size());
    for (std::size_t v = 0; v < u.size(); ++v) diff[v] = via[v] - u[v];
    CHECK(h1_seminorm(mesh, diff) / h1_seminorm(mesh, u) <= 1e-8);
  }

  SUBCASE("antisymmetric source gives an antisymmetric solution") {
    RhsFunctional f;
    NodalField d(mesh.vertex_count());
    for (std::size_t v = 0; v < d.size(); ++v) d[v] = mesh.vertices[v].x();
    f.nodal_density = d;
    StiffnessSystem sys = assemble(mesh, id);
    const NodalField u = solve(sys, assemble_load(mesh, f), 1e-12);
    const NodalField pu = reflect(mesh, u);
    const double scale = *std::max_element(u.begin(), u.end());
    for (std::size_t v = 0; v < u.size(); ++v) CHECK(std::abs(pu[v] + u[v]) <= 1e-8 * scale);
  }

  SUBCASE("generic source, mirrored coefficients, both routes agree") {
    const CoefficientField rho = mirror_extend(SymMat3{2, 1.5, 1, 0.3, 0.2, 0.1}, mesh);
    RhsFunctional f = RhsFunctional::constant(mesh, 1.0);
    f.tet_flux.assign(mesh.tet_count(), Vec3(0.3, 0.2, 0.1));
    SymmetrySolveReport rep;
    const NodalField via = solve_via_symmetry(mesh, c, rho, f, 1e-12, &rep);
    StiffnessSystem sys = assemble(mesh, rho);
    const NodalField direct = solve(sys, assemble_load(mesh, f), 1e-12);
    NodalField diff(direct.size());
    for (std::size_t v = 0; v < diff.size(); ++v) diff[v] = via[v] - direct[v];
    CHECK(h1_seminorm(mesh, diff) / h1_seminorm(mesh, direct) <= 1e-8);
    CHECK(rep.anti_residual <= 1e-10);
    CHECK(rep.sym_residual <= 1e-10);
  }

  SUBCASE("non-invariant coefficients are rejected") {
    SymMat3 tilted = SymMat3::identity();
    tilted.xy = 0.1;
    const CoefficientField rho = CoefficientField::constant(mesh, tilted);
    CHECK_THROWS_AS(
        solve_via_symmetry(mesh, c, rho, RhsFunctional::constant(mesh, 1.0), 1e-10, nullptr),
        Error);
  }
}

TEST_CASE("pullback by the involution permutes by the symmetry map") {
  const auto& c = build_constellation("cube_minus_sigma1");
  const TetMesh mesh = generate_mesh(c, 4);
  const NodalField u = dyadic_field(mesh, 13);
  const NodalField composed = reflect(mesh, u); // u(iota(x)) nodally
  for (std::size_t v = 0; v < u.size(); ++v)
    CHECK(composed[v] == u[mesh.vertex_symmetry[v]]);
}
