#include <doctest.h>

#include <cmath>
#include <random>

#include "core/fem.hpp"
#include "core/regularity.hpp"

using namespace bfem;

namespace {

// Single reference tetrahedron with a fully Dirichlet boundary.
TetMesh reference_tet() {
  TetMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  m.tets = {{0, 1, 2, 3}};
  m.tet_region = {0};
  m.h = 1.0;
  constexpr int F[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};
  for (const auto& f : F) {
    BoundaryFacet bf;
    bf.v = {f[0], f[1], f[2]};
    bf.tet = 0;
    bf.bc = BoundaryCondition::Dirichlet;
    m.boundary.push_back(bf);
  }
  return m;
}

NodalField nodal_from(const TetMesh& mesh, const std::function<double(const Vec3&)>& f) {
  NodalField u(mesh.vertex_count());
  for (std::size_t v = 0; v < u.size(); ++v) u[v] = f(mesh.vertices[v]);
  return u;
}

} // namespace

TEST_CASE("element matrix of the reference tet") {
  const TetMesh mesh = reference_tet();
  const StiffnessSystem sys = assemble(mesh, CoefficientField::constant(mesh, SymMat3::identity()));
  // gradients: (-1,-1,-1), e1, e2, e3; volume 1/6
  const double expected[4][4] = {{0.5, -1.0 / 6, -1.0 / 6, -1.0 / 6},
                                 {-1.0 / 6, 1.0 / 6, 0, 0},
                                 {-1.0 / 6, 0, 1.0 / 6, 0},
                                 {-1.0 / 6, 0, 0, 1.0 / 6}};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(sys.full.entry(i, j) == doctest::Approx(expected[i][j]).epsilon(1e-14));
}

TEST_CASE("assembly basics") {
  const TetMesh mesh = generate_mesh(build_constellation("cube_dirichlet"), 4);
  const CoefficientField id = CoefficientField::constant(mesh, SymMat3::identity());
  const StiffnessSystem sys = assemble(mesh, id);

  // constant fields are in the kernel of the full matrix
  std::vector<double> ones(mesh.vertex_count(), 1.0), out;
  sys.full.mul(ones, out);
  for (double v : out) CHECK(std::abs(v) <= 1e-13);

  // exact symmetry of the assembled matrix
  for (int i = 0; i < sys.full.n; ++i)
    for (int k = sys.full.rowptr[i]; k < sys.full.rowptr[i + 1]; ++k)
      CHECK(sys.full.entry(sys.full.col[k], i) == sys.full.val[k]);

  // scaling the coefficients scales every entry exactly
  const StiffnessSystem sys2 = assemble(mesh, CoefficientField::constant(mesh, SymMat3::diag(2, 2, 2)));
  for (std::size_t k = 0; k < sys.full.val.size(); ++k)
    CHECK(sys2.full.val[k] == 2.0 * sys.full.val[k]);

  // all-Dirichlet boundary leaves the interior unknowns
  CHECK(sys.dofs.n_free == 27); // (n-1)^3 interior vertices
}

TEST_CASE("free dof census for Neumann tops") {
  const StiffnessSystem dir = assemble(
      generate_mesh(build_constellation("halfcube_dirichlet"), 4),
      CoefficientField::constant(generate_mesh(build_constellation("halfcube_dirichlet"), 4),
                                 SymMat3::identity()));
  const TetMesh neu_mesh = generate_mesh(build_constellation("halfcube_neumann_top"), 4);
  const StiffnessSystem neu = assemble(neu_mesh, CoefficientField::constant(neu_mesh, SymMat3::identity()));
  // the interior of the top face is freed: (n+1-2)^2 vertices
  CHECK(neu.dofs.n_free - dir.dofs.n_free == 9);
}

TEST_CASE("solver behaviour") {
  const TetMesh mesh = generate_mesh(build_constellation("cube_dirichlet"), 4);
  const CoefficientField id = CoefficientField::constant(mesh, SymMat3::identity());
  StiffnessSystem sys = assemble(mesh, id);

  // zero load gives the zero solution
  const NodalField zero = solve(sys, std::vector<double>(mesh.vertex_count(), 0.0), 1e-10);
  for (double v : zero) CHECK(v == 0.0);

  // constant source: converged, small residual, Galerkin orthogonality
  const auto load = assemble_load(mesh, RhsFunctional::constant(mesh, 1.0));
  SolveLog log;
  const NodalField u = solve(sys, load, 1e-10, &log);
  CHECK(log.converged);
  CHECK(residual(sys, u, load) <= 1e-10);
  double bnorm = 0.0;
  for (std::size_t v = 0; v < load.size(); ++v)
    if (!sys.dofs.dirichlet[v]) bnorm += load[v] * load[v];
  bnorm = std::sqrt(bnorm);
  std::vector<double> x(sys.dofs.n_free, 0.0), b(sys.dofs.n_free, 0.0), Ax;
  for (std::size_t v = 0; v < load.size(); ++v)
    if (sys.dofs.free_index[v] >= 0) {
      x[sys.dofs.free_index[v]] = u[v];
      b[sys.dofs.free_index[v]] = load[v];
    }
  sys.reduced.mul(x, Ax);
  for (int i = 0; i < sys.dofs.n_free; ++i) CHECK(std::abs(Ax[i] - b[i]) <= 1e-10 * bnorm);

  // maximum principle smoke check: nonnegative source, zero boundary data
  for (double v : u) CHECK(v >= -1e-10);

  // Dirichlet rows stay zero
  for (std::size_t v = 0; v < u.size(); ++v)
    if (sys.dofs.dirichlet[v]) CHECK(u[v] == 0.0);

  // residual of a perturbed solution grows monotonically
  double prev = residual(sys, u, load);
  for (double amp : {0.1, 0.2, 0.4}) {
    NodalField w = u;
    for (std::size_t v = 0; v < w.size(); ++v)
      if (!sys.dofs.dirichlet[v]) w[v] += amp;
    const double r = residual(sys, w, load);
    CHECK(r > prev);
    prev = r;
  }

  // u = 0 with nonzero load has relative residual 1
  CHECK(residual(sys, NodalField(mesh.vertex_count(), 0.0), load) == doctest::Approx(1.0));

  CHECK_THROWS_AS(solve(sys, load, 1e-20), Error);
  CHECK_THROWS_AS(solve(sys, load, 1e-3), Error);
}

TEST_CASE("pure Neumann problems are rejected") {
  TetMesh mesh = reference_tet();
  for (auto& f : mesh.boundary) f.bc = BoundaryCondition::Neumann;
  StiffnessSystem sys = assemble(mesh, CoefficientField::constant(mesh, SymMat3::identity()));
  CHECK_THROWS_AS(solve(sys, std::vector<double>(4, 1.0), 1e-10), Error);
}

TEST_CASE("manufactured solution convergence") {
  const Manufactured m = manufactured_sine();
  const auto& c = build_constellation("cube_dirichlet");
  std::vector<double> errors;
  for (int n : {4, 8, 16}) {
    const TetMesh mesh = generate_mesh(c, n);
    StiffnessSystem sys = assemble(mesh, CoefficientField::constant(mesh, SymMat3::identity()));
    RhsFunctional f = RhsFunctional::nodal(nodal_from(mesh, m.f));
    const NodalField u = solve(sys, assemble_load(mesh, f), 1e-11);
    errors.push_back(h1_error(mesh, u, m.grad));
  }
  const double rate1 = std::log2(errors[0] / errors[1]);
  const double rate2 = std::log2(errors[1] / errors[2]);
  CHECK(rate1 == doctest::Approx(1.0).epsilon(0.25));
  CHECK(rate2 == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("flux data enters through the gradient pairing") {
  const TetMesh mesh = generate_mesh(build_constellation("cube_dirichlet"), 4);
  RhsFunctional f;
  f.tet_flux.assign(mesh.tet_count(), Vec3(1, 0, 0));
  const auto load = assemble_load(mesh, f);
  // <F, grad v> with constant F and linear v = x: equals ∫ F.grad(x) = volume
  const NodalField vx = nodal_from(mesh, [](const Vec3& p) { return p.x(); });
  double pairing = 0.0;
  for (std::size_t v = 0; v < load.size(); ++v) pairing += load[v] * vx[v];
  CHECK(pairing == doctest::Approx(mesh.total_volume()).epsilon(1e-12));
}

TEST_CASE("localized right-hand side") {
  const TetMesh mesh = generate_mesh(build_constellation("cube_dirichlet"), 4);
  const CoefficientField id = CoefficientField::constant(mesh, SymMat3::identity());
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  NodalField u(mesh.vertex_count());
  for (auto& v : u) v = uni(rng);
  const RhsFunctional f = RhsFunctional::constant(mesh, 1.0);

  // eta == 1: localized functional equals f
  NodalField ones(mesh.vertex_count(), 1.0);
  const RhsFunctional f1 = localize(mesh, id, u, ones, f);
  const auto l0 = assemble_load(mesh, f);
  const auto l1 = assemble_load(mesh, f1);
  for (std::size_t v = 0; v < l0.size(); ++v)
    CHECK(l1[v] == doctest::Approx(l0[v]).epsilon(1e-13).scale(1.0));

  // eta == 0: everything vanishes
  NodalField zeros(mesh.vertex_count(), 0.0);
  const auto l2 = assemble_load(mesh, localize(mesh, id, u, zeros, f));
  for (double v : l2) CHECK(v == 0.0);

  // out-of-range cutoff rejected
  NodalField bad(mesh.vertex_count(), 1.5);
  CHECK_THROWS_AS(localize(mesh, id, u, bad, f), Error);
}

TEST_CASE("localized functional on one element by hand") {
  const TetMesh mesh = reference_tet();
  const CoefficientField id = CoefficientField::constant(mesh, SymMat3::identity());
  const NodalField u = {0, 1, 0, 0};   // u = x
  const NodalField eta = {0, 0, 0, 1}; // eta = z
  RhsFunctional none;
  const RhsFunctional floc = localize(mesh, id, u, eta, none);
  // density -grad(u).grad(eta) = 0; flux = mean(u) grad(eta) = e3/4
  CHECK(floc.tet_density[0] == 0.0);
  CHECK(floc.tet_flux[0] == Vec3(0, 0, 0.25));
  const auto load = assemble_load(mesh, floc);
  const double expected[4] = {-1.0 / 24, 0, 0, 1.0 / 24};
  for (int i = 0; i < 4; ++i) CHECK(load[i] == doctest::Approx(expected[i]).epsilon(1e-14));
}

TEST_CASE("localization residual decays under refinement") {
  const auto& c = build_constellation("cube_dirichlet");
  const Manufactured m = manufactured_sine();
  std::vector<double> res;
  for (int n : {4, 8}) {
    const TetMesh mesh = generate_mesh(c, n);
    const CoefficientField id = CoefficientField::constant(mesh, SymMat3::identity());
    StiffnessSystem sys = assemble(mesh, id);
    const RhsFunctional f = RhsFunctional::nodal(nodal_from(mesh, m.f));
    const NodalField u = solve(sys, assemble_load(mesh, f), 1e-11);
    NodalField eta(mesh.vertex_count());
    for (std::size_t v = 0; v < eta.size(); ++v) {
      const double d = mesh.vertices[v].cwiseAbs().maxCoeff();
      eta[v] = std::clamp(2.0 - 2.0 * d / 0.8, 0.0, 1.0);
    }
    res.push_back(localization_residual(mesh, id, u, eta, f, 1e-11));
  }
  CHECK(res[1] < 0.8 * res[0]);
}

TEST_CASE("point evaluation and nodal interpolation") {
  const auto& c = build_constellation("cube_dirichlet");
  const TetMesh coarse = generate_mesh(c, 4);
  const TetMesh fine = generate_mesh(c, 8);
  const auto linear = [](const Vec3& p) { return 2 * p.x() - p.y() + 3 * p.z() + 1; };
  const NodalField u = nodal_from(coarse, linear);
  const NodalField v = interpolate_nodal(coarse, u, fine);
  for (std::size_t i = 0; i < fine.vertex_count(); ++i)
    CHECK(v[i] == doctest::Approx(linear(fine.vertices[i])).epsilon(1e-12));

  // crack-aware interpolation keeps the sides separate
  const auto& cs = build_constellation("cube_minus_sigma1");
  const TetMesh slit_coarse = generate_mesh(cs, 4);
  const TetMesh slit_fine = generate_mesh(cs, 8);
  NodalField w(slit_coarse.vertex_count(), 0.0);
  std::vector<int> side(slit_coarse.vertex_count(), 0);
  for (const auto& [p, mi] : slit_coarse.crack_pairs) {
    w[p] = 1.0;
    w[mi] = -1.0;
  }
  const NodalField wf = interpolate_nodal(slit_coarse, w, slit_fine);
  for (const auto& [p, mi] : slit_fine.crack_pairs) {
    CHECK(wf[p] >= 0.0);
    CHECK(wf[mi] <= 0.0);
  }
}
