#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "json_io.hpp"
#include "regularity.hpp"
#include "symmetry.hpp"

namespace bfem {

struct RunResult {
  ordered_json report;
  bool all_passed = true;
};

// Executes a config document: either one scenario object or
// {"scenarios": [...]}. Reports embed the resolved config; identical config
// and seed give byte-identical reports.
RunResult run_config(const ordered_json& config, const std::string& out_dir,
                     std::optional<std::uint64_t> seed_override, int threads);

ordered_json catalog_json();

// Field-wise diff with per-field tolerances; throws Config on schema mismatch.
ordered_json compare_reports(const ordered_json& a, const ordered_json& b);

// Coefficient / right-hand-side factories shared by scenarios and tests.
CoefficientField make_coefficients(const ordered_json& spec, const TetMesh& mesh,
                                   std::uint64_t seed);
RhsFunctional make_rhs(const ordered_json& spec, const TetMesh& mesh, std::uint64_t seed);
EdgeProbe make_probe(const ordered_json& spec, const Constellation& c, const TetMesh& mesh);

// The anisotropic matrix used by the "mirrored_aniso" preset.
SymMat3 preset_mu_plus();

} // namespace bfem
