#include <doctest.h>

#include <random>

#include "core/coefficients.hpp"
#include "core/fem.hpp"
#include "core/json_io.hpp"

using namespace bfem;

TEST_CASE("ellipticity constants") {
  const TetMesh mesh = generate_mesh(build_constellation("cube_minus_sigma1"), 2);
  CHECK(ellipticity_constant(CoefficientField::constant(mesh, SymMat3::identity())) == 1.0);

  CoefficientField two;
  two.regions.emplace(0, SymMat3::diag(2, 3, 4));
  two.regions.emplace(1, SymMat3::diag(1, 5, 5));
  CHECK(ellipticity_constant(two) == doctest::Approx(1.0));

  CoefficientField bad;
  bad.regions.emplace(7, SymMat3::diag(1, 0, 1));
  CHECK_THROWS_WITH_AS(ellipticity_constant(bad), doctest::Contains("region 7"), Error);
}

TEST_CASE("iota invariance of coefficient fields") {
  const TetMesh mesh = generate_mesh(build_constellation("cube_minus_sigma1"), 2);

  // constant diagonal field
  CHECK(check_iota_invariance(CoefficientField::constant(mesh, SymMat3::diag(2, 3, 4)), mesh));

  // mu+ with m12 = +0.1 and mu- with m12 = -0.1
  SymMat3 mu_plus = SymMat3::identity();
  mu_plus.xy = 0.1;
  CoefficientField paired;
  for (int r : mesh.tet_region)
    if (!paired.regions.count(r))
      paired.regions.emplace(r, (r & 1) ? mu_plus : mu_plus.iota_conjugate());
  CHECK(check_iota_invariance(paired, mesh));

  // equal off-diagonal on both halves breaks the relation
  CoefficientField broken = CoefficientField::constant(mesh, mu_plus);
  CHECK_FALSE(check_iota_invariance(broken, mesh));

  const TetMesh one_sided = generate_mesh(build_constellation("halfcube_sym_possi2"), 2);
  CHECK_THROWS_AS(check_iota_invariance(broken, one_sided), Error);
}

TEST_CASE("mirror extension") {
  const TetMesh mesh = generate_mesh(build_constellation("halfcube_minus_sigma1"), 4);

  const CoefficientField id = mirror_extend(SymMat3::identity(), mesh);
  for (const auto& [r, m] : id.regions) CHECK(m.equals(SymMat3::identity(), 0.0));

  const CoefficientField diag = mirror_extend(SymMat3::diag(2, 3, 4), mesh);
  for (const auto& [r, m] : diag.regions) CHECK(m.equals(SymMat3::diag(2, 3, 4), 0.0));

  SymMat3 mu = SymMat3::identity();
  mu.xz = 0.2;
  const CoefficientField f = mirror_extend(mu, mesh);
  for (const auto& [r, m] : f.regions) CHECK(m.xz == ((r & 1) ? 0.2 : -0.2));
  CHECK(check_iota_invariance(f, mesh));

  const TetMesh asym = generate_mesh(build_constellation("halfcube_sym_possi2"), 2);
  CHECK_THROWS_AS(mirror_extend(mu, asym), Error);
}

TEST_CASE("perturbations") {
  const TetMesh mesh = generate_mesh(build_constellation("cube_minus_sigma1"), 2);
  const CoefficientField base = CoefficientField::constant(mesh, SymMat3::identity());

  CoefficientField zero;
  for (const auto& [r, m] : base.regions) zero.regions.emplace(r, SymMat3{0, 0, 0, 0, 0, 0});
  const CoefficientField same = perturb(base, zero, 0.1);
  for (const auto& [r, m] : same.regions) CHECK(m.equals(SymMat3::identity(), 0.0));
  CHECK(same.perturb_eps == 0.1);

  // rank-one bump: eigenvalues 1, 1, 1.05
  CoefficientField bump;
  for (const auto& [r, m] : base.regions) bump.regions.emplace(r, SymMat3{0.05, 0, 0, 0, 0, 0});
  const CoefficientField pert = perturb(base, bump, 0.05);
  CHECK(ellipticity_constant(pert) == doctest::Approx(1.0));

  // exceeding the declared bound
  CHECK_THROWS_AS(perturb(base, bump, 0.01), Error);

  // losing definiteness
  CoefficientField crush;
  for (const auto& [r, m] : base.regions) crush.regions.emplace(r, SymMat3{-2, 0, 0, 0, 0, 0});
  CHECK_THROWS_AS(perturb(base, crush, 2.0), Error);
}

TEST_CASE("operator norm perturbation bound") {
  const TetMesh mesh = generate_mesh(build_constellation("cube_minus_sigma1"), 4);
  const CoefficientField base = CoefficientField::constant(mesh, SymMat3::identity());
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  CoefficientField delta;
  for (const auto& [r, m] : base.regions) {
    SymMat3 d{uni(rng), uni(rng), uni(rng), uni(rng), uni(rng), uni(rng)};
    const double norm = d.spectral_norm();
    delta.regions.emplace(r, d * (0.05 / norm));
  }
  const CoefficientField pert = perturb(base, delta, 0.05 * (1 + 1e-12));

  StiffnessSystem a0 = assemble(mesh, base);
  StiffnessSystem a1 = assemble(mesh, pert);
  StiffnessSystem aid = assemble(mesh, CoefficientField::constant(mesh, SymMat3::identity()));
  const double diff = spectral_norm_estimate(csr_difference(a1.reduced, a0.reduced));
  const double idn = spectral_norm_estimate(aid.reduced);
  CHECK(diff <= linf_norm(delta) * idn * (1 + 1e-8));
}

TEST_CASE("declared limits") {
  const TetMesh mesh = generate_mesh(build_constellation("halfcube_minus_sigma1"), 4);
  CoefficientField f = mirror_extend(SymMat3{2, 1.5, 1, 0.3, 0.2, 0.1}, mesh);
  SUBCASE("consistent") {
    f.limits.push_back({Vec3(0, 0, 0), +1, f.at_region(1)});
    CHECK_NOTHROW(f.check_limits(mesh));
  }
  SUBCASE("inconsistent") {
    f.limits.push_back({Vec3(0, 0, 0), +1, SymMat3::diag(9, 9, 9)});
    CHECK_THROWS_AS(f.check_limits(mesh), Error);
  }
}

TEST_CASE("coefficient json round trip") {
  CoefficientField f;
  f.regions.emplace(0, SymMat3{2, 1.5, 1, 0.3, 0.2, 0.1});
  f.regions.emplace(5, SymMat3::diag(1, 2, 3));
  f.limits.push_back({Vec3(0, 0, 0), -1, SymMat3::identity()});
  const ordered_json j = coefficient_to_json(f);
  const CoefficientField back = coefficient_from_json(j);
  CHECK(coefficient_to_json(back) == j);
  CHECK(coefficient_hash(back) == coefficient_hash(f));

  CHECK_THROWS_AS(coefficient_from_json(ordered_json::object()), Error);
}
