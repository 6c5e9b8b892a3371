#include "buriedfem/buriedfem.h"

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "../core/json_io.hpp"
#include "../core/scenario.hpp"
#include "../core/vtk.hpp"

struct bfem_mesh_s {
  bfem::TetMesh mesh;
  const bfem::Constellation* constellation = nullptr;
};

struct bfem_field_s {
  bfem::NodalField values;
  bfem::SolveLog log;
};

namespace {

thread_local std::string g_last_error;

int code_of(const bfem::Error& e) {
  switch (e.code()) {
  case bfem::ErrorCode::InvalidArgument: return BFEM_ERR_INVALID_ARGUMENT;
  case bfem::ErrorCode::Catalog: return BFEM_ERR_CATALOG;
  case bfem::ErrorCode::Mesh: return BFEM_ERR_MESH;
  case bfem::ErrorCode::Definiteness: return BFEM_ERR_DEFINITENESS;
  case bfem::ErrorCode::Solver: return BFEM_ERR_SOLVER;
  case bfem::ErrorCode::Config: return BFEM_ERR_CONFIG;
  case bfem::ErrorCode::Io: return BFEM_ERR_IO;
  case bfem::ErrorCode::Internal: return BFEM_ERR_INTERNAL;
  }
  return BFEM_ERR_INTERNAL;
}

template <typename Fn> int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const bfem::Error& e) {
    g_last_error = e.what();
    return code_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return BFEM_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

bfem::ordered_json parse_json(const char* text, const char* what) {
  if (!text) bfem::fail(bfem::ErrorCode::Config, std::string(what) + ": null JSON text");
  auto j = bfem::ordered_json::parse(text, nullptr, false);
  if (j.is_discarded())
    bfem::fail(bfem::ErrorCode::Config, std::string(what) + ": malformed JSON");
  return j;
}

int require(bool ok, const char* message) {
  if (!ok) {
    g_last_error = message;
    return BFEM_ERR_INVALID_ARGUMENT;
  }
  return BFEM_OK;
}

} // namespace

extern "C" {

const char* bfem_version(void) { return "0.1.0"; }

const char* bfem_last_error(void) { return g_last_error.c_str(); }

void bfem_string_free(char* s) { delete[] s; }

int bfem_catalog_json(char** out_json) {
  if (int rc = require(out_json != nullptr, "out_json is null")) return rc;
  return guarded([&] {
    *out_json = dup_string(bfem::catalog_json().dump(2));
    return BFEM_OK;
  });
}

int bfem_mesh_create(const char* constellation, int n, bfem_mesh** out) {
  if (int rc = require(constellation && out, "constellation/out is null")) return rc;
  return guarded([&] {
    const bfem::Constellation& c = bfem::build_constellation(constellation);
    auto* handle = new bfem_mesh_s{bfem::generate_mesh(c, n), &c};
    *out = handle;
    return BFEM_OK;
  });
}

void bfem_mesh_free(bfem_mesh* mesh) { delete mesh; }

int bfem_mesh_counts(const bfem_mesh* mesh, size_t* vertices, size_t* tets, size_t* crack_pairs) {
  if (int rc = require(mesh != nullptr, "mesh is null")) return rc;
  if (vertices) *vertices = mesh->mesh.vertex_count();
  if (tets) *tets = mesh->mesh.tet_count();
  if (crack_pairs) *crack_pairs = mesh->mesh.crack_pairs.size();
  return BFEM_OK;
}

int bfem_mesh_volume(const bfem_mesh* mesh, double* volume) {
  if (int rc = require(mesh && volume, "mesh/volume is null")) return rc;
  return guarded([&] {
    *volume = mesh->mesh.total_volume();
    return BFEM_OK;
  });
}

int bfem_mesh_info_json(const bfem_mesh* mesh, char** out_json) {
  if (int rc = require(mesh && out_json, "mesh/out_json is null")) return rc;
  return guarded([&] {
    bfem::ordered_json j;
    j["constellation"] = mesh->constellation->name;
    j["classification"] = bfem::to_string(mesh->constellation->classification);
    j["vertices"] = mesh->mesh.vertex_count();
    j["tets"] = mesh->mesh.tet_count();
    j["boundary_facets"] = mesh->mesh.boundary.size();
    j["crack_pairs"] = mesh->mesh.crack_pairs.size();
    j["volume"] = mesh->mesh.total_volume();
    j["symmetric"] = mesh->mesh.symmetric();
    std::size_t dirichlet = 0, neumann = 0;
    for (const auto& f : mesh->mesh.boundary)
      (f.bc == bfem::BoundaryCondition::Neumann ? neumann : dirichlet)++;
    j["dirichlet_facets"] = dirichlet;
    j["neumann_facets"] = neumann;
    *out_json = dup_string(j.dump(2));
    return BFEM_OK;
  });
}

int bfem_mesh_write_vtk(const bfem_mesh* mesh, const char* volume_path, const char* surface_path) {
  if (int rc = require(mesh != nullptr, "mesh is null")) return rc;
  return guarded([&] {
    if (volume_path) bfem::write_vtk_volume(mesh->mesh, volume_path);
    if (surface_path) bfem::write_vtk_surface(mesh->mesh, surface_path);
    return BFEM_OK;
  });
}

int bfem_solve(const bfem_mesh* mesh, const char* coefficients_json, const char* rhs_json,
               double tolerance, bfem_field** out) {
  if (int rc = require(mesh && out, "mesh/out is null")) return rc;
  return guarded([&] {
    const bfem::ordered_json cs =
        coefficients_json ? parse_json(coefficients_json, "coefficients")
                          : bfem::ordered_json{{"preset", "identity"}};
    const bfem::ordered_json rs = rhs_json ? parse_json(rhs_json, "rhs")
                                           : bfem::ordered_json{{"kind", "constant"}, {"value", 1.0}};
    const bfem::CoefficientField rho = bfem::make_coefficients(cs, mesh->mesh, 42);
    const bfem::RhsFunctional f = bfem::make_rhs(rs, mesh->mesh, 42);
    bfem::StiffnessSystem sys = bfem::assemble(mesh->mesh, rho);
    auto* field = new bfem_field_s;
    field->values = bfem::solve(sys, bfem::assemble_load(mesh->mesh, f), tolerance, &field->log);
    *out = field;
    return BFEM_OK;
  });
}

void bfem_field_free(bfem_field* field) { delete field; }

int bfem_field_size(const bfem_field* field, size_t* size) {
  if (int rc = require(field && size, "field/size is null")) return rc;
  *size = field->values.size();
  return BFEM_OK;
}

int bfem_field_values(const bfem_field* field, const double** data, size_t* size) {
  if (int rc = require(field && data && size, "field/data/size is null")) return rc;
  *data = field->values.data();
  *size = field->values.size();
  return BFEM_OK;
}

int bfem_field_write_vtk(const bfem_field* field, const bfem_mesh* mesh, const char* path) {
  if (int rc = require(field && mesh && path, "field/mesh/path is null")) return rc;
  return guarded([&] {
    bfem::write_vtk_volume(mesh->mesh, path, {{"u", field->values}});
    return BFEM_OK;
  });
}

int bfem_exponent_json(const bfem_mesh* mesh, const bfem_field* field, const char* probe_json,
                       char** out_json) {
  if (int rc = require(mesh && field && out_json, "mesh/field/out_json is null")) return rc;
  return guarded([&] {
    const bfem::ordered_json ps =
        probe_json ? parse_json(probe_json, "probe") : bfem::ordered_json{{"kind", "default"}};
    const bfem::EdgeProbe probe = bfem::make_probe(ps, *mesh->constellation, mesh->mesh);
    const bfem::ShellMoments moments = bfem::shell_moments(mesh->mesh, field->values, probe);
    const bfem::ExponentReport er = bfem::fit_exponent(moments);
    bfem::ordered_json j;
    j["constellation"] = mesh->constellation->name;
    j["lambda"] = er.lambda;
    j["q_star"] = std::isfinite(er.q_star) ? bfem::ordered_json(er.q_star) : bfem::ordered_json("inf");
    j["fit_residual"] = er.residual;
    j["shells_used"] = er.shells_used;
    j["flags"] = {{"above_3", er.above_3}, {"below_4", er.below_4}, {"unreliable", er.unreliable}};
    bfem::ordered_json shells = bfem::ordered_json::array();
    for (const auto& s : moments.shells)
      shells.push_back({{"r_in", s.r_in}, {"r_out", s.r_out}, {"value", s.value},
                        {"tets", s.tet_count}});
    j["shells"] = shells;
    *out_json = dup_string(j.dump(2));
    return BFEM_OK;
  });
}

int bfem_run_config_json(const char* config_json, const char* out_dir, long long seed, int threads,
                         char** out_report_json) {
  if (int rc = require(config_json && out_report_json, "config/out is null")) return rc;
  return guarded([&] {
    const bfem::ordered_json config = parse_json(config_json, "config");
    std::optional<std::uint64_t> seed_override;
    if (seed >= 0) seed_override = static_cast<std::uint64_t>(seed);
    const bfem::RunResult r =
        bfem::run_config(config, out_dir ? out_dir : ".", seed_override, threads);
    *out_report_json = dup_string(r.report.dump(2));
    return r.all_passed ? BFEM_OK : BFEM_ERR_CHECKS_FAILED;
  });
}

int bfem_run_config_file(const char* config_path, const char* out_dir, long long seed, int threads,
                         char** out_report_json) {
  if (int rc = require(config_path && out_report_json, "path/out is null")) return rc;
  return guarded([&] {
    std::ifstream in(config_path);
    if (!in) bfem::fail(bfem::ErrorCode::Io, std::string("cannot read config '") + config_path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    return bfem_run_config_json(text.c_str(), out_dir, seed, threads, out_report_json);
  });
}

int bfem_compare_reports(const char* report_json_a, const char* report_json_b,
                         char** out_diff_json) {
  if (int rc = require(report_json_a && report_json_b && out_diff_json, "reports/out is null"))
    return rc;
  return guarded([&] {
    const bfem::ordered_json a = parse_json(report_json_a, "report A");
    const bfem::ordered_json b = parse_json(report_json_b, "report B");
    *out_diff_json = dup_string(bfem::compare_reports(a, b).dump(2));
    return BFEM_OK;
  });
}

} // extern "C"
