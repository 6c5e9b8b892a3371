/* buriedfem — finite elements for elliptic problems with buried Dirichlet
 * boundary parts. C interface of the shared library.
 *
 * All functions return BFEM_OK (0) on success or a negative error code;
 * bfem_last_error() describes the most recent failure on the calling thread.
 * Objects returned through out-parameters are owned by the caller and
 * released with the matching *_free function. Strings returned through
 * `char**` are released with bfem_string_free.
 */
#ifndef BURIEDFEM_H
#define BURIEDFEM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define BFEM_OK 0
#define BFEM_ERR_INVALID_ARGUMENT (-1)
#define BFEM_ERR_CATALOG (-2)
#define BFEM_ERR_MESH (-3)
#define BFEM_ERR_DEFINITENESS (-4)
#define BFEM_ERR_SOLVER (-5)
#define BFEM_ERR_CONFIG (-6)
#define BFEM_ERR_IO (-7)
#define BFEM_ERR_INTERNAL (-8)
#define BFEM_ERR_CHECKS_FAILED (-9)

typedef struct bfem_mesh_s bfem_mesh;
typedef struct bfem_field_s bfem_field;

const char* bfem_version(void);
const char* bfem_last_error(void);
void bfem_string_free(char* s);

/* Catalog of model constellations as a JSON array. */
int bfem_catalog_json(char** out_json);

/* Structured mesh of a catalog constellation; n is the cube subdivision
 * count (even, >= 2). */
int bfem_mesh_create(const char* constellation, int n, bfem_mesh** out);
void bfem_mesh_free(bfem_mesh* mesh);
int bfem_mesh_counts(const bfem_mesh* mesh, size_t* vertices, size_t* tets, size_t* crack_pairs);
int bfem_mesh_volume(const bfem_mesh* mesh, double* volume);
int bfem_mesh_info_json(const bfem_mesh* mesh, char** out_json);
/* Legacy ASCII VTK export: volume grid and companion labeled surface file.
 * Either path may be NULL to skip that file. */
int bfem_mesh_write_vtk(const bfem_mesh* mesh, const char* volume_path, const char* surface_path);

/* Solves -div(rho grad u) = f on the mesh.
 * coefficients_json: {"preset":"identity"|"mirrored_aniso"|"z_contrast"} or
 *                    {"regions":[{"label":..,"matrix":[6]}]}; NULL = identity.
 * rhs_json: {"kind":"constant","value":..}|{"kind":"manufactured_sine"}|
 *           {"kind":"flux","value":[3]}|{"kind":"mixed"}; NULL = constant 1. */
int bfem_solve(const bfem_mesh* mesh, const char* coefficients_json, const char* rhs_json,
               double tolerance, bfem_field** out);
void bfem_field_free(bfem_field* field);
int bfem_field_size(const bfem_field* field, size_t* size);
int bfem_field_values(const bfem_field* field, const double** data, size_t* size);
int bfem_field_write_vtk(const bfem_field* field, const bfem_mesh* mesh, const char* path);

/* Fits the edge exponent of a solved field.
 * probe_json: {"kind":"default"} uses the constellation's probe; explicit form
 * {"point":[3],"axis":[3],"window":[lo,hi],"r_max":..,"spherical":bool}. */
int bfem_exponent_json(const bfem_mesh* mesh, const bfem_field* field, const char* probe_json,
                       char** out_json);

/* Runs a scenario config (JSON text or file). Returns BFEM_OK when every hard
 * check passed, BFEM_ERR_CHECKS_FAILED when the run finished with failures.
 * seed >= 0 overrides the config seed; threads <= 1 runs sequentially. */
int bfem_run_config_json(const char* config_json, const char* out_dir, long long seed, int threads,
                         char** out_report_json);
int bfem_run_config_file(const char* config_path, const char* out_dir, long long seed, int threads,
                         char** out_report_json);

/* Field-wise report diff; BFEM_ERR_CONFIG on schema mismatch. */
int bfem_compare_reports(const char* report_json_a, const char* report_json_b, char** out_diff_json);

#ifdef __cplusplus
}
#endif

#endif /* BURIEDFEM_H */
