#include "symmetry.hpp"

#include <algorithm>
#include <set>

namespace bfem {

namespace {

void require_symmetric(const TetMesh& mesh) {
  if (!mesh.symmetric() || mesh.tet_symmetry.empty())
    fail(ErrorCode::Mesh, "operation requires a mesh with an iota symmetry map");
}

} // namespace

NodalField reflect(const TetMesh& mesh, const NodalField& u) {
  require_symmetric(mesh);
  NodalField out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[mesh.vertex_symmetry[i]];
  return out;
}

RhsFunctional reflect_rhs(const TetMesh& mesh, const RhsFunctional& f) {
  require_symmetric(mesh);
  RhsFunctional out;
  if (!f.tet_density.empty()) {
    out.tet_density.resize(f.tet_density.size());
    for (std::size_t t = 0; t < f.tet_density.size(); ++t)
      out.tet_density[t] = f.tet_density[mesh.tet_symmetry[t]];
  }
  if (!f.nodal_density.empty()) {
    out.nodal_density.resize(f.nodal_density.size());
    for (std::size_t i = 0; i < f.nodal_density.size(); ++i)
      out.nodal_density[i] = f.nodal_density[mesh.vertex_symmetry[i]];
  }
  if (!f.tet_flux.empty()) {
    out.tet_flux.resize(f.tet_flux.size());
    for (std::size_t t = 0; t < f.tet_flux.size(); ++t) {
      Vec3 F = f.tet_flux[mesh.tet_symmetry[t]];
      F.x() = -F.x(); // iota F(iota(.))
      out.tet_flux[t] = F;
    }
  }
  if (!f.extra_load.empty()) {
    out.extra_load.resize(f.extra_load.size());
    for (std::size_t i = 0; i < f.extra_load.size(); ++i)
      out.extra_load[i] = f.extra_load[mesh.vertex_symmetry[i]];
  }
  return out;
}

SplitFields split(const TetMesh& mesh, const NodalField& u) {
  const NodalField pu = reflect(mesh, u);
  SplitFields s;
  s.anti.resize(u.size());
  s.sym.resize(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    s.anti[i] = (u[i] - pu[i]) / 2.0;
    s.sym[i] = (u[i] + pu[i]) / 2.0;
  }
  return s;
}

HalfProblems make_half_problems(const TetMesh& mesh, const Constellation& c) {
  require_symmetric(mesh);
  if (!c.iota_invariant())
    fail(ErrorCode::Catalog, "half problems require a symmetric catalog constellation");

  std::set<std::array<int, 3>> boundary_keys;
  for (const auto& bf : mesh.boundary) {
    std::array<int, 3> k = bf.v;
    std::sort(k.begin(), k.end());
    boundary_keys.insert(k);
  }

  auto build = [&](HalfVariant variant) {
    HalfProblem hp;
    hp.variant = variant;
    hp.full_symmetry = mesh.vertex_symmetry;
    std::vector<int> vmap_inv(mesh.vertex_count(), -1);
    std::vector<int> tmap_inv(mesh.tet_count(), -1);
    auto local_vertex = [&](int pv) {
      if (vmap_inv[pv] < 0) {
        vmap_inv[pv] = static_cast<int>(hp.mesh.vertices.size());
        hp.mesh.vertices.push_back(mesh.vertices[pv]);
        hp.vertex_map.push_back(pv);
      }
      return vmap_inv[pv];
    };
    for (std::size_t t = 0; t < mesh.tet_count(); ++t) {
      if (mesh.tet_centroid(static_cast<int>(t)).x() >= 0.0) continue;
      std::array<int, 4> lt;
      for (int m = 0; m < 4; ++m) lt[m] = local_vertex(mesh.tets[t][m]);
      tmap_inv[t] = static_cast<int>(hp.mesh.tets.size());
      hp.mesh.tets.push_back(lt);
      hp.mesh.tet_region.push_back(mesh.tet_region[t]);
      hp.tet_map.push_back(static_cast<int>(t));
    }
    hp.mesh.h = mesh.h;

    // Inherited boundary facets of minus tets.
    for (const auto& f : mesh.boundary) {
      if (tmap_inv[f.tet] < 0) continue;
      BoundaryFacet bf = f;
      for (int m = 0; m < 3; ++m) bf.v[m] = vmap_inv[f.v[m]];
      bf.tet = tmap_inv[f.tet];
      hp.mesh.boundary.push_back(bf);
    }
    // New facets on the symmetry plane: interior faces of the full mesh whose
    // two tets straddle {x=0}. They are exactly the minus-tet faces with all
    // vertices on the plane that were not boundary before.
    constexpr int F[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};
    for (std::size_t t = 0; t < mesh.tet_count(); ++t) {
      if (tmap_inv[t] < 0) continue;
      for (const auto& fc : F) {
        const int a = mesh.tets[t][fc[0]], b = mesh.tets[t][fc[1]], d = mesh.tets[t][fc[2]];
        if (mesh.vertices[a].x() != 0.0 || mesh.vertices[b].x() != 0.0 ||
            mesh.vertices[d].x() != 0.0)
          continue;
        // Skip slit facets: they are already boundary (and stay Dirichlet).
        std::array<int, 3> key{a, b, d};
        std::sort(key.begin(), key.end());
        if (boundary_keys.count(key)) continue;
        BoundaryFacet bf;
        bf.v = {vmap_inv[a], vmap_inv[b], vmap_inv[d]};
        bf.tet = tmap_inv[t];
        bf.side = FacetSide::Interface;
        bf.bc = variant == HalfVariant::Antisymmetric ? BoundaryCondition::Dirichlet
                                                      : BoundaryCondition::Neumann;
        hp.mesh.boundary.push_back(bf);
      }
    }
    return hp;
  };

  HalfProblems out{build(HalfVariant::Antisymmetric), build(HalfVariant::Symmetric)};
  return out;
}

RhsFunctional restrict_rhs(const HalfProblem& half, const RhsFunctional& f) {
  RhsFunctional out;
  if (!f.tet_density.empty()) {
    out.tet_density.resize(half.tet_map.size());
    for (std::size_t t = 0; t < half.tet_map.size(); ++t)
      out.tet_density[t] = f.tet_density[half.tet_map[t]];
  }
  if (!f.nodal_density.empty()) {
    out.nodal_density.resize(half.vertex_map.size());
    for (std::size_t v = 0; v < half.vertex_map.size(); ++v)
      out.nodal_density[v] = f.nodal_density[half.vertex_map[v]];
  }
  if (!f.tet_flux.empty()) {
    out.tet_flux.resize(half.tet_map.size());
    for (std::size_t t = 0; t < half.tet_map.size(); ++t)
      out.tet_flux[t] = f.tet_flux[half.tet_map[t]];
  }
  if (!f.extra_load.empty()) {
    // Plane vertices with two-sided support keep only the half-sided share;
    // crack copies are one-sided and keep their full value.
    out.extra_load.resize(half.vertex_map.size());
    for (std::size_t v = 0; v < half.vertex_map.size(); ++v) {
      const int pv = half.vertex_map[v];
      const bool fixed_point = !half.full_symmetry.empty() && half.full_symmetry[pv] == pv;
      out.extra_load[v] = fixed_point ? f.extra_load[pv] / 2.0 : f.extra_load[pv];
    }
  }
  return out;
}

NodalField extend_even(const TetMesh& full, const HalfProblem& half, const NodalField& w) {
  require_symmetric(full);
  std::vector<int> vmap_inv(full.vertex_count(), -1);
  for (std::size_t v = 0; v < half.vertex_map.size(); ++v) vmap_inv[half.vertex_map[v]] = static_cast<int>(v);
  NodalField out(full.vertex_count(), 0.0);
  for (std::size_t v = 0; v < full.vertex_count(); ++v) {
    if (vmap_inv[v] >= 0)
      out[v] = w[vmap_inv[v]];
    else {
      const int mirrored = full.vertex_symmetry[v];
      if (vmap_inv[mirrored] < 0) fail(ErrorCode::Mesh, "even extension: mirrored vertex missing");
      out[v] = w[vmap_inv[mirrored]];
    }
  }
  return out;
}

NodalField extend_odd(const TetMesh& full, const HalfProblem& half, const NodalField& w) {
  require_symmetric(full);
  std::vector<int> vmap_inv(full.vertex_count(), -1);
  for (std::size_t v = 0; v < half.vertex_map.size(); ++v) vmap_inv[half.vertex_map[v]] = static_cast<int>(v);
  NodalField out(full.vertex_count(), 0.0);
  for (std::size_t v = 0; v < full.vertex_count(); ++v) {
    if (vmap_inv[v] >= 0) {
      out[v] = w[vmap_inv[v]]; // fixed plane points carry 0 for genuinely odd data
    } else {
      const int mirrored = full.vertex_symmetry[v];
      if (vmap_inv[mirrored] < 0) fail(ErrorCode::Mesh, "odd extension: mirrored vertex missing");
      out[v] = -w[vmap_inv[mirrored]];
    }
  }
  return out;
}

NodalField extend_zero(const TetMesh& parent, const ComponentMesh& comp, const NodalField& psi) {
  // The component's interface facets are Dirichlet; psi must be admissible.
  DofMap dofs = DofMap::build(comp.mesh);
  for (const auto& f : comp.mesh.boundary)
    if (f.side == FacetSide::Interface)
      for (int v : f.v)
        if (psi[v] != 0.0)
          fail(ErrorCode::InvalidArgument,
               "zero extension requires zero values on interface Dirichlet nodes");
  NodalField out(parent.vertex_count(), 0.0);
  for (std::size_t v = 0; v < comp.vertex_map.size(); ++v) out[comp.vertex_map[v]] = psi[v];
  return out;
}

NodalField solve_via_symmetry(const TetMesh& mesh, const Constellation& c,
                              const CoefficientField& rho, const RhsFunctional& f, double tol,
                              SymmetrySolveReport* report) {
  require_symmetric(mesh);
  if (!check_iota_invariance(rho, mesh))
    fail(ErrorCode::InvalidArgument,
         "solve_via_symmetry requires an iota-invariant coefficient field");

  const RhsFunctional pf = reflect_rhs(mesh, f);
  auto combine = [](const std::vector<double>& a, const std::vector<double>& b, double s) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] + s * b[i]) / 2.0;
    return out;
  };
  auto combine3 = [](const std::vector<Vec3>& a, const std::vector<Vec3>& b, double s) {
    std::vector<Vec3> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] + s * b[i]) / 2.0;
    return out;
  };
  RhsFunctional f_anti, f_sym;
  if (!f.tet_density.empty()) {
    f_anti.tet_density = combine(f.tet_density, pf.tet_density, -1.0);
    f_sym.tet_density = combine(f.tet_density, pf.tet_density, 1.0);
  }
  if (!f.nodal_density.empty()) {
    f_anti.nodal_density = combine(f.nodal_density, pf.nodal_density, -1.0);
    f_sym.nodal_density = combine(f.nodal_density, pf.nodal_density, 1.0);
  }
  if (!f.tet_flux.empty()) {
    f_anti.tet_flux = combine3(f.tet_flux, pf.tet_flux, -1.0);
    f_sym.tet_flux = combine3(f.tet_flux, pf.tet_flux, 1.0);
  }
  if (!f.extra_load.empty()) {
    f_anti.extra_load = combine(f.extra_load, pf.extra_load, -1.0);
    f_sym.extra_load = combine(f.extra_load, pf.extra_load, 1.0);
  }

  HalfProblems halves = make_half_problems(mesh, c);

  auto half_field = [&](const HalfProblem& hp) {
    CoefficientField r;
    for (int reg : hp.mesh.tet_region)
      if (!r.regions.count(reg)) r.regions.emplace(reg, rho.at_region(reg));
    return r;
  };

  SymmetrySolveReport local;
  SymmetrySolveReport& rep = report ? *report : local;

  StiffnessSystem anti_sys = assemble(halves.anti.mesh, half_field(halves.anti));
  const auto anti_load = assemble_load(halves.anti.mesh, restrict_rhs(halves.anti, f_anti));
  SolveLog anti_log;
  const NodalField v_anti = solve(anti_sys, anti_load, tol, &anti_log);
  rep.anti_residual = residual(anti_sys, v_anti, anti_load);
  rep.anti_iterations = anti_log.iterations;

  StiffnessSystem sym_sys = assemble(halves.sym.mesh, half_field(halves.sym));
  const auto sym_load = assemble_load(halves.sym.mesh, restrict_rhs(halves.sym, f_sym));
  SolveLog sym_log;
  const NodalField v_sym = solve(sym_sys, sym_load, tol, &sym_log);
  rep.sym_residual = residual(sym_sys, v_sym, sym_load);
  rep.sym_iterations = sym_log.iterations;

  const NodalField u_anti = extend_odd(mesh, halves.anti, v_anti);
  const NodalField u_sym = extend_even(mesh, halves.sym, v_sym);
  NodalField u(mesh.vertex_count());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = u_anti[i] + u_sym[i];
  return u;
}

} // namespace bfem
