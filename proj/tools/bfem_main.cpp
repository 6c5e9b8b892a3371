#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "buriedfem/buriedfem.h"

namespace {

using json = nlohmann::ordered_json;

constexpr int kExitChecksFailed = 1;
constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;

struct CommonOpts {
  std::string out_dir;
  long long seed = -1;
  int threads = 1;
};

std::string take_string(char* s) {
  std::string out = s ? s : "";
  bfem_string_free(s);
  return out;
}

int exit_code_for(int rc) {
  switch (rc) {
  case BFEM_OK: return 0;
  case BFEM_ERR_CHECKS_FAILED: return kExitChecksFailed;
  case BFEM_ERR_SOLVER: return kExitSolver;
  default: return kExitValidation;
  }
}

int report_error(int rc) {
  std::cerr << "error: " << bfem_last_error() << "\n";
  return exit_code_for(rc);
}

void apply_env(CommonOpts& opts, bool out_dir_set, bool threads_set) {
  if (!out_dir_set) {
    if (const char* env = std::getenv("BFEM_OUT_DIR")) opts.out_dir = env;
  }
  if (!threads_set) {
    if (const char* env = std::getenv("BFEM_THREADS")) opts.threads = std::atoi(env);
  }
  if (opts.out_dir.empty()) opts.out_dir = ".";
  if (opts.threads < 1) opts.threads = 1;
}

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) {
    std::cerr << "error: cannot write '" << path << "'\n";
    return false;
  }
  out << text << "\n";
  return true;
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot read '" << path << "'\n";
    return std::nullopt;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int run_and_report(const json& config, const CommonOpts& opts, const std::string& report_path) {
  char* report = nullptr;
  const int rc = bfem_run_config_json(config.dump().c_str(), opts.out_dir.c_str(), opts.seed,
                                      opts.threads, &report);
  if (rc != BFEM_OK && rc != BFEM_ERR_CHECKS_FAILED) return report_error(rc);
  const std::string text = take_string(report);
  if (!report_path.empty() && !write_file(report_path, text)) return kExitValidation;
  std::cout << text << "\n";
  return exit_code_for(rc);
}

json scenario_skeleton(const std::string& name, const std::string& constellation,
                       const std::vector<int>& levels, const std::string& coeff,
                       const std::string& rhs) {
  json s;
  s["name"] = name;
  s["constellation"] = constellation;
  s["coefficients"] = {{"preset", coeff}};
  s["rhs"] = json::parse(rhs);
  s["levels"] = levels;
  return s;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"buriedfem: elliptic solver and regularity probes for slit domains"};
  app.require_subcommand(1);

  CommonOpts opts;
  bool out_dir_set = false, threads_set = false;
  app.add_option("--out-dir", opts.out_dir, "output directory (env BFEM_OUT_DIR)")
      ->each([&](const std::string&) { out_dir_set = true; });
  app.add_option("--seed", opts.seed, "override the scenario seed");
  app.add_option("--threads", opts.threads, "parallel scenarios (env BFEM_THREADS)")
      ->each([&](const std::string&) { threads_set = true; });

  // list-constellations
  auto* cmd_list = app.add_subcommand("list-constellations", "print the geometry catalog");

  // mesh
  auto* cmd_mesh = app.add_subcommand("mesh", "generate a mesh and export VTK");
  std::string mesh_constellation = "cube_minus_sigma1";
  int mesh_n = 8;
  cmd_mesh->add_option("--constellation", mesh_constellation, "catalog name");
  cmd_mesh->add_option("--n", mesh_n, "subdivision count (even)");

  // solve
  auto* cmd_solve = app.add_subcommand("solve", "mesh, solve and export the solution");
  std::string solve_constellation = "cube_minus_sigma1";
  int solve_n = 8;
  std::string solve_coeff = "identity";
  std::string solve_rhs = R"({"kind":"constant","value":1.0})";
  double solve_tol = 1e-10;
  std::string solve_config;
  cmd_solve->add_option("--constellation", solve_constellation, "catalog name");
  cmd_solve->add_option("--n", solve_n, "subdivision count (even)");
  cmd_solve->add_option("--coefficients", solve_coeff, "coefficient preset");
  cmd_solve->add_option("--rhs", solve_rhs, "right-hand side JSON");
  cmd_solve->add_option("--tol", solve_tol, "solver tolerance");
  cmd_solve->add_option("--config", solve_config, "scenario config file (overrides flags)");

  // symmetry-check
  auto* cmd_sym = app.add_subcommand("symmetry-check", "reflection algebra and half/full solves");
  std::string sym_constellation = "halfcube_minus_sigma1";
  int sym_n = 8;
  std::string sym_coeff = "identity";
  cmd_sym->add_option("--constellation", sym_constellation, "catalog name");
  cmd_sym->add_option("--n", sym_n, "subdivision count (even)");
  cmd_sym->add_option("--coefficients", sym_coeff, "coefficient preset");

  // transform-check
  auto* cmd_tr = app.add_subcommand("transform-check", "coefficient pushforward form equality");

  // exponent
  auto* cmd_exp = app.add_subcommand("exponent", "solve and fit the edge exponent");
  std::string exp_constellation = "halfcube_minus_sigma1_mhalf";
  int exp_n = 32;
  std::string exp_coeff = "identity";
  std::string exp_rhs = R"({"kind":"constant","value":1.0})";
  cmd_exp->add_option("--constellation", exp_constellation, "catalog name");
  cmd_exp->add_option("--n", exp_n, "subdivision count (even)");
  cmd_exp->add_option("--coefficients", exp_coeff, "coefficient preset");
  cmd_exp->add_option("--rhs", exp_rhs, "right-hand side JSON");

  // convergence
  auto* cmd_conv = app.add_subcommand("convergence", "mesh refinement study");
  std::string conv_constellation = "cube_dirichlet";
  std::vector<int> conv_levels{8, 16, 32};
  std::string conv_coeff = "identity";
  std::string conv_rhs = R"({"kind":"manufactured_sine"})";
  cmd_conv->add_option("--constellation", conv_constellation, "catalog name");
  cmd_conv->add_option("--levels", conv_levels, "subdivision counts")->expected(-1);
  cmd_conv->add_option("--coefficients", conv_coeff, "coefficient preset");
  cmd_conv->add_option("--rhs", conv_rhs, "right-hand side JSON");

  // compare
  auto* cmd_cmp = app.add_subcommand("compare", "diff two report files");
  std::string cmp_a, cmp_b;
  cmd_cmp->add_option("report_a", cmp_a, "first report")->required();
  cmd_cmp->add_option("report_b", cmp_b, "second report")->required();

  // run (config-driven batch)
  auto* cmd_run = app.add_subcommand("run", "run a scenario config file");
  std::string run_config;
  std::string run_report;
  cmd_run->add_option("--config", run_config, "config JSON file")->required();
  cmd_run->add_option("--report", run_report, "write the report to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }
  apply_env(opts, out_dir_set, threads_set);

  if (cmd_list->parsed()) {
    char* text = nullptr;
    const int rc = bfem_catalog_json(&text);
    if (rc != BFEM_OK) return report_error(rc);
    const json catalog = json::parse(take_string(text));
    std::printf("%-28s %-20s %-14s %-10s %s\n", "name", "domain", "classification", "slit",
                "description");
    for (const auto& c : catalog) {
      std::printf("%-28s %-20s %-14s %-10s %s\n", c.at("name").get<std::string>().c_str(),
                  c.at("domain").get<std::string>().c_str(),
                  c.at("classification").get<std::string>().c_str(),
                  c.at("slit").is_null() ? "-" : c.at("slit").get<std::string>().c_str(),
                  c.at("description").get<std::string>().c_str());
    }
    return 0;
  }

  if (cmd_mesh->parsed()) {
    bfem_mesh* mesh = nullptr;
    int rc = bfem_mesh_create(mesh_constellation.c_str(), mesh_n, &mesh);
    if (rc != BFEM_OK) return report_error(rc);
    const std::string stem =
        opts.out_dir + "/" + mesh_constellation + "_n" + std::to_string(mesh_n);
    rc = bfem_mesh_write_vtk(mesh, (stem + ".vtk").c_str(), (stem + "_surf.vtk").c_str());
    if (rc != BFEM_OK) {
      bfem_mesh_free(mesh);
      return report_error(rc);
    }
    char* info = nullptr;
    rc = bfem_mesh_info_json(mesh, &info);
    bfem_mesh_free(mesh);
    if (rc != BFEM_OK) return report_error(rc);
    const std::string text = take_string(info);
    std::cout << text << "\n";
    if (!write_file(stem + "_info.json", text)) return kExitValidation;
    std::cout << "wrote " << stem << ".vtk and " << stem << "_surf.vtk\n";
    return 0;
  }

  if (cmd_solve->parsed()) {
    json config;
    if (!solve_config.empty()) {
      const auto text = read_file(solve_config);
      if (!text) return kExitValidation;
      config = json::parse(*text, nullptr, false);
      if (config.is_discarded()) {
        std::cerr << "error: malformed config '" << solve_config << "'\n";
        return kExitValidation;
      }
    } else {
      config = scenario_skeleton("solve", solve_constellation, {solve_n}, solve_coeff, solve_rhs);
      config["solver_tol"] = solve_tol;
      config["outputs"] = {{"vtk", true}};
    }
    return run_and_report(config, opts, opts.out_dir + "/solve_report.json");
  }

  if (cmd_sym->parsed()) {
    json config = scenario_skeleton("symmetry_check", sym_constellation, {sym_n}, sym_coeff,
                                    R"({"kind":"mixed"})");
    config["checks"] = {"symmetry"};
    return run_and_report(config, opts, opts.out_dir + "/symmetry_report.json");
  }

  if (cmd_tr->parsed()) {
    json config = scenario_skeleton("transform_check", "cube_minus_sigma1", {4}, "identity",
                                    R"({"kind":"constant","value":1.0})");
    config["checks"] = {"transform"};
    return run_and_report(config, opts, opts.out_dir + "/transform_report.json");
  }

  if (cmd_exp->parsed()) {
    json config =
        scenario_skeleton("exponent", exp_constellation, {exp_n}, exp_coeff, exp_rhs);
    config["checks"] = {"exponent"};
    return run_and_report(config, opts, opts.out_dir + "/exponent_report.json");
  }

  if (cmd_conv->parsed()) {
    json config = scenario_skeleton("convergence", conv_constellation, conv_levels, conv_coeff,
                                    conv_rhs);
    config["checks"] = {"convergence"};
    return run_and_report(config, opts, opts.out_dir + "/convergence_report.json");
  }

  if (cmd_cmp->parsed()) {
    const auto a = read_file(cmp_a), b = read_file(cmp_b);
    if (!a || !b) return kExitValidation;
    char* diff = nullptr;
    const int rc = bfem_compare_reports(a->c_str(), b->c_str(), &diff);
    if (rc != BFEM_OK) return report_error(rc);
    const std::string text = take_string(diff);
    std::cout << text << "\n";
    const json parsed = json::parse(text);
    return parsed.at("mismatch_count").get<int>() == 0 ? 0 : kExitChecksFailed;
  }

  if (cmd_run->parsed()) {
    char* report = nullptr;
    const int rc = bfem_run_config_file(run_config.c_str(), opts.out_dir.c_str(), opts.seed,
                                        opts.threads, &report);
    if (rc != BFEM_OK && rc != BFEM_ERR_CHECKS_FAILED) return report_error(rc);
    const std::string text = take_string(report);
    if (!run_report.empty() && !write_file(run_report, text)) return kExitValidation;
    std::cout << text << "\n";
    return exit_code_for(rc);
  }

  return kExitValidation;
}
