// Copyright 2026 The kmpc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef KMPC_KMPC_H_
#define KMPC_KMPC_H_

#include <stddef.h>
#include <stdint.h>

#if defined(KMPC_BUILDING_LIBRARY)
#define KMPC_API __attribute__((visibility("default")))
#else
#define KMPC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every fallible call returns a status; on failure kmpc_last_error() holds a
 * message for the calling thread until its next failing call. */
typedef enum kmpc_status {
  KMPC_OK = 0,
  KMPC_ERR_INVALID_ARGUMENT = 1,
  KMPC_ERR_IO = 2,
  KMPC_ERR_PARSE = 3,
  KMPC_ERR_SCHEMA = 4,
  KMPC_ERR_INFEASIBLE = 5,
  KMPC_ERR_NUMERICAL = 6,
  KMPC_ERR_INTERNAL = 7
} kmpc_status;

typedef struct kmpc_config kmpc_config;
typedef struct kmpc_reach kmpc_reach;
typedef struct kmpc_design kmpc_design;
typedef struct kmpc_artifact kmpc_artifact;
typedef struct kmpc_verdict kmpc_verdict;
typedef struct kmpc_controller kmpc_controller;
typedef struct kmpc_trajectory kmpc_trajectory;

typedef void (*kmpc_log_fn)(const char* line, void* user);

KMPC_API const char* kmpc_version(void);
KMPC_API const char* kmpc_last_error(void);
KMPC_API const char* kmpc_status_name(kmpc_status status);
/* Frees strings returned through char** out-parameters. */
KMPC_API void kmpc_string_free(char* s);

/* ---- run configuration ---- */
KMPC_API kmpc_status kmpc_config_default(kmpc_config** out);
KMPC_API kmpc_status kmpc_config_load(const char* path, kmpc_config** out);
KMPC_API kmpc_status kmpc_config_parse(const char* json_text, kmpc_config** out);
KMPC_API void kmpc_config_free(kmpc_config* config);
KMPC_API kmpc_status kmpc_config_to_json(const kmpc_config* config, char** out);
KMPC_API kmpc_status kmpc_config_set_seed(kmpc_config* config, uint64_t seed);
KMPC_API kmpc_status kmpc_config_set_verify_every(kmpc_config* config, int k);
KMPC_API kmpc_status kmpc_config_set_eps_perf(kmpc_config* config, double eps_perf);
KMPC_API kmpc_status kmpc_config_set_out_dir(kmpc_config* config, const char* dir);
/* Overrides the scenario sample count (0 restores the bound). */
KMPC_API kmpc_status kmpc_config_set_n_samples(kmpc_config* config, uint64_t n);
KMPC_API kmpc_status kmpc_config_set_pool_size(kmpc_config* config, int m);
KMPC_API kmpc_status kmpc_config_set_max_iters(kmpc_config* config, int n);
KMPC_API uint64_t kmpc_config_seed(const kmpc_config* config);
KMPC_API double kmpc_config_eps_perf(const kmpc_config* config);
KMPC_API int kmpc_config_n_sim(const kmpc_config* config);
KMPC_API int kmpc_config_n_x(const kmpc_config* config);
KMPC_API int kmpc_config_n_u(const kmpc_config* config);
/* Borrowed; valid until the config is modified or freed. */
KMPC_API const char* kmpc_config_out_dir(const kmpc_config* config);
/* Number of initial-state samples used per reachability estimate. */
KMPC_API kmpc_status kmpc_config_scenario_count(const kmpc_config* config, uint64_t* out);

/* ---- reachability ---- */
/* Reachable set of the implicit MPC under the configured disturbance. */
KMPC_API kmpc_status kmpc_reference_reach(const kmpc_config* config, kmpc_log_fn log, void* user,
                                          kmpc_reach** out);
KMPC_API kmpc_status kmpc_reach_load(const char* path, kmpc_reach** out);
KMPC_API kmpc_status kmpc_reach_save(const kmpc_reach* reach, const char* path);
KMPC_API void kmpc_reach_free(kmpc_reach* reach);
KMPC_API int kmpc_reach_n_hulls(const kmpc_reach* reach);
KMPC_API int kmpc_reach_n_x(const kmpc_reach* reach);
KMPC_API int kmpc_reach_n_u(const kmpc_reach* reach);
KMPC_API uint64_t kmpc_reach_n_samples(const kmpc_reach* reach);
KMPC_API kmpc_status kmpc_reach_state_hull(const kmpc_reach* reach, int step, double* lb, double* ub);
KMPC_API kmpc_status kmpc_reach_input_hull(const kmpc_reach* reach, double* lb, double* ub);
/* Absolute and relative performance-deviation hulls, [lb, ub]. */
KMPC_API kmpc_status kmpc_reach_perf_hull(const kmpc_reach* reach, double* abs_lb, double* abs_ub,
                                          double* rel_lb, double* rel_ub);
KMPC_API kmpc_status kmpc_reach_contains(const kmpc_reach* reach, const double* x, double tol,
                                         int* inside);
/* n states drawn uniformly from the union of state hulls, row-major n x n_x. */
KMPC_API kmpc_status kmpc_reach_sample(const kmpc_reach* reach, int n, uint64_t seed, double* out);

/* ---- design ---- */
/* reference may be NULL, in which case it is computed first. */
KMPC_API kmpc_status kmpc_design_run(const kmpc_config* config, const kmpc_reach* reference,
                                     kmpc_log_fn log, void* user, kmpc_design** out);
KMPC_API void kmpc_design_free(kmpc_design* design);
KMPC_API int kmpc_design_converged(const kmpc_design* design);
KMPC_API int kmpc_design_iterations(const kmpc_design* design);
KMPC_API int kmpc_design_n_data(const kmpc_design* design);
KMPC_API kmpc_status kmpc_design_artifact(const kmpc_design* design, kmpc_artifact** out);
KMPC_API kmpc_status kmpc_design_save_report(const kmpc_design* design, const char* path);

/* ---- controller artifacts ---- */
KMPC_API kmpc_status kmpc_artifact_load(const char* path, kmpc_artifact** out);
KMPC_API kmpc_status kmpc_artifact_save(const kmpc_artifact* artifact, const char* path);
KMPC_API void kmpc_artifact_free(kmpc_artifact* artifact);
KMPC_API int kmpc_artifact_n_data(const kmpc_artifact* artifact);
KMPC_API int kmpc_artifact_n_x(const kmpc_artifact* artifact);
KMPC_API int kmpc_artifact_n_u(const kmpc_artifact* artifact);
KMPC_API kmpc_status kmpc_artifact_data_point(const kmpc_artifact* artifact, int i, double* x,
                                              double* u);
KMPC_API kmpc_status kmpc_artifact_predict(const kmpc_artifact* artifact, const double* x, double* u);

/* ---- verification ---- */
/* reference may be NULL; inside_reference is then reported as false. */
KMPC_API kmpc_status kmpc_verify(const kmpc_artifact* artifact, const kmpc_config* config,
                                 const kmpc_reach* reference, kmpc_log_fn log, void* user,
                                 kmpc_verdict** out);
KMPC_API void kmpc_verdict_free(kmpc_verdict* verdict);
KMPC_API int kmpc_verdict_pass(const kmpc_verdict* verdict);
KMPC_API int kmpc_verdict_inside_reference(const kmpc_verdict* verdict);
KMPC_API int kmpc_verdict_n_failures(const kmpc_verdict* verdict);
KMPC_API const char* kmpc_verdict_failure(const kmpc_verdict* verdict, int i);
/* Borrowed; lives as long as the verdict. */
KMPC_API const kmpc_reach* kmpc_verdict_reach(const kmpc_verdict* verdict);
KMPC_API kmpc_status kmpc_verdict_save(const kmpc_verdict* verdict, const char* path);

/* ---- controllers and simulation ---- */
KMPC_API kmpc_status kmpc_controller_from_artifact(const kmpc_artifact* artifact, kmpc_controller** out);
KMPC_API kmpc_status kmpc_controller_mpc(const kmpc_config* config, kmpc_controller** out);
KMPC_API void kmpc_controller_free(kmpc_controller* controller);
/* KMPC_ERR_INFEASIBLE when the MPC has no solution at x. */
KMPC_API kmpc_status kmpc_controller_evaluate(kmpc_controller* controller, const double* x, double* u);
KMPC_API void kmpc_controller_reset(kmpc_controller* controller);

KMPC_API kmpc_status kmpc_simulate(const kmpc_config* config, kmpc_controller* controller,
                                   const double* x0, int n_steps, kmpc_trajectory** out);
KMPC_API void kmpc_trajectory_free(kmpc_trajectory* trajectory);
/* Number of transitions. */
KMPC_API int kmpc_trajectory_length(const kmpc_trajectory* trajectory);
KMPC_API kmpc_status kmpc_trajectory_state(const kmpc_trajectory* trajectory, int k, double* x);
KMPC_API kmpc_status kmpc_trajectory_input(const kmpc_trajectory* trajectory, int k, double* u);
KMPC_API double kmpc_trajectory_cost(const kmpc_trajectory* trajectory);

#ifdef __cplusplus
}
#endif

#endif /* KMPC_KMPC_H_ */
