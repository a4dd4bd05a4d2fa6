/*
specstab
Copyright 2026 specstab contributors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

   http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

/* C interface of the spectral-stability toolkit: opaque handles over the
 * C++ core, status codes for every fallible call, and a thread-local
 * error message. All handles are created by specstab_* constructors and
 * released with the matching *_free. */

#ifndef SPECSTAB_H
#define SPECSTAB_H

#include <stdint.h>

#if defined(_WIN32)
#define SPECSTAB_API __declspec(dllexport)
#else
#define SPECSTAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum specstab_status {
    SPECSTAB_OK = 0,
    SPECSTAB_ERR_INVALID_INPUT = 1,
    SPECSTAB_ERR_CAPACITY = 2,
    SPECSTAB_ERR_RESOLUTION = 3,
    SPECSTAB_ERR_NUMERIC = 4,
    SPECSTAB_ERR_BALANCE = 5,
    SPECSTAB_ERR_RANK_DEFICIENT = 6,
    SPECSTAB_ERR_UNSUPPORTED = 7,
    SPECSTAB_ERR_IO = 8,
    SPECSTAB_ERR_CHECK_FAILED = 9,
    SPECSTAB_ERR_UNKNOWN = 10
} specstab_status;

typedef struct specstab_mesh specstab_mesh;
typedef struct specstab_measure specstab_measure;
typedef struct specstab_spectrum specstab_spectrum;
typedef struct specstab_report specstab_report;

SPECSTAB_API const char* specstab_version(void);

/* Message of the last failure on the calling thread; empty on success. */
SPECSTAB_API const char* specstab_last_error(void);

/* --- meshes ------------------------------------------------------------ */

/* spec: "icosphere:L", "icosphere_unit:L", "torus:c,d:n", or a file path */
SPECSTAB_API specstab_status specstab_mesh_create(const char* spec, specstab_mesh** out);
SPECSTAB_API specstab_status specstab_mesh_save(const specstab_mesh* mesh, const char* path);
SPECSTAB_API int specstab_mesh_vertex_count(const specstab_mesh* mesh);
SPECSTAB_API int specstab_mesh_triangle_count(const specstab_mesh* mesh);
SPECSTAB_API double specstab_mesh_area(const specstab_mesh* mesh);
SPECSTAB_API void specstab_mesh_free(specstab_mesh* mesh);

/* --- measures ----------------------------------------------------------- */

/* spec: "uniform", "unit", "caps:eps:M", "perturb:l:m:t",
 * "random:amplitude", or a measure file path */
SPECSTAB_API specstab_status specstab_measure_create(const specstab_mesh* mesh, const char* spec,
                                                     uint64_t seed, specstab_measure** out);
SPECSTAB_API specstab_status specstab_measure_save(const specstab_measure* measure,
                                                   const char* path);
SPECSTAB_API double specstab_measure_total_mass(const specstab_mesh* mesh,
                                                const specstab_measure* measure);
SPECSTAB_API void specstab_measure_free(specstab_measure* measure);

/* --- eigenvalues --------------------------------------------------------- */

SPECSTAB_API specstab_status specstab_solve(const specstab_mesh* mesh,
                                            const specstab_measure* measure, int k,
                                            uint64_t seed, specstab_spectrum** out);
SPECSTAB_API int specstab_spectrum_count(const specstab_spectrum* spectrum);
SPECSTAB_API double specstab_spectrum_lambda(const specstab_spectrum* spectrum, int index);
SPECSTAB_API double specstab_spectrum_normalized(const specstab_spectrum* spectrum, int index);
SPECSTAB_API double specstab_spectrum_mass(const specstab_spectrum* spectrum);
SPECSTAB_API double specstab_spectrum_residual(const specstab_spectrum* spectrum, int index);
SPECSTAB_API specstab_status specstab_spectrum_save(const specstab_spectrum* spectrum,
                                                    const char* path);
SPECSTAB_API void specstab_spectrum_free(specstab_spectrum* spectrum);

/* --- conformal balancing -------------------------------------------------- */

SPECSTAB_API specstab_status specstab_hersch_balance(const specstab_mesh* mesh,
                                                     const specstab_measure* measure,
                                                     double a_out[3], double* residual,
                                                     int* iterations);

/* --- audits --------------------------------------------------------------- */

/* name: lemma21, hersch, sharpness, concentration, robin, bubbling,
 * canonical, jacobi, density. config_text: flat key=value lines. */
SPECSTAB_API specstab_status specstab_run_audit(const char* name, const char* config_text,
                                                specstab_report** out);
SPECSTAB_API int specstab_report_passed(const specstab_report* report);
SPECSTAB_API int specstab_report_informational(const specstab_report* report);
SPECSTAB_API int specstab_report_row_count(const specstab_report* report);
SPECSTAB_API const char* specstab_report_summary(const specstab_report* report);
SPECSTAB_API specstab_status specstab_report_save_json(const specstab_report* report,
                                                       const char* path);
SPECSTAB_API specstab_status specstab_report_save_csv(const specstab_report* report,
                                                      const char* path);
SPECSTAB_API void specstab_report_free(specstab_report* report);

/* --- artifacts ------------------------------------------------------------- */

/* Flatten report JSON files into one tidy CSV (param,lhs,rhs,margin,pass). */
SPECSTAB_API specstab_status specstab_plotdata(const char* const* report_paths, int count,
                                               const char* out_csv);

/* Reproducibility manifest: config hash, version, seed. */
SPECSTAB_API specstab_status specstab_write_manifest(const char* config_text, uint64_t seed,
                                                     int deterministic, const char* path);

#ifdef __cplusplus
}
#endif

#endif /* SPECSTAB_H */
