// Copyright 2026 The cbfform Authors
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

/* C interface to the cbfform simulator. All functions returning int report a
 * cbf_status; on failure cbf_last_error() describes the problem (thread-local,
 * valid until the next call on the same thread). Strings handed out through
 * char** parameters are owned by the caller and released with cbf_string_free. */

#ifndef CBFFORM_H
#define CBFFORM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CBFFORM_BUILDING)
#    define CBF_API __declspec(dllexport)
#  else
#    define CBF_API __declspec(dllimport)
#  endif
#else
#  define CBF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cbf_status {
  CBF_OK = 0,
  CBF_ERROR = 1,              /* I/O or internal failure */
  CBF_BARRIER_VIOLATION = 2,  /* a run ended with some d_i <= d_floor */
  CBF_INVALID = 3,            /* parse or validation error */
  CBF_CLAIM_FAILED = 4        /* a verification claim did not hold */
} cbf_status;

typedef enum cbf_termination {
  CBF_TERM_COMPLETED = 0,
  CBF_TERM_BARRIER_VIOLATION = 1,
  CBF_TERM_NON_FINITE = 2
} cbf_termination;

typedef struct cbf_scenario cbf_scenario;
typedef struct cbf_run_result cbf_run_result;

CBF_API const char* cbf_version(void);
CBF_API const char* cbf_last_error(void);
CBF_API void cbf_string_free(char* s);

/* Scenarios */
CBF_API int cbf_scenario_from_preset(const char* name, cbf_scenario** out);
CBF_API int cbf_scenario_load(const char* path, cbf_scenario** out);
CBF_API int cbf_scenario_parse(const char* json_text, cbf_scenario** out);
CBF_API int cbf_scenario_clone(const cbf_scenario* s, cbf_scenario** out);
/* Applies "key=value"; the scenario is left unchanged if the result is invalid. */
CBF_API int cbf_scenario_set(cbf_scenario* s, const char* assignment);
CBF_API int cbf_scenario_to_json(const cbf_scenario* s, char** out);
CBF_API int cbf_scenario_agent_count(const cbf_scenario* s);
CBF_API void cbf_scenario_free(cbf_scenario* s);
/* Newline-separated preset names. */
CBF_API int cbf_preset_names(char** out);

/* Runs. cbf_run returns CBF_OK whenever a record was produced; inspect the
 * termination to tell a clean run from a barrier violation. */
CBF_API int cbf_run(const cbf_scenario* s, cbf_run_result** out);
CBF_API cbf_termination cbf_run_termination(const cbf_run_result* r);
CBF_API double cbf_run_min_d(const cbf_run_result* r);
CBF_API double cbf_run_max_abs_phi(const cbf_run_result* r);
/* NaN / 0 when the run did not end in a violation. */
CBF_API double cbf_run_violation_time(const cbf_run_result* r);
CBF_API int cbf_run_violation_edge(const cbf_run_result* r);
CBF_API double cbf_run_wall_time(const cbf_run_result* r);
CBF_API size_t cbf_run_row_count(const cbf_run_result* r);
CBF_API double cbf_run_final_time(const cbf_run_result* r);
/* Agent indices are 1-based; xyz receives three doubles. */
CBF_API int cbf_run_final_position(const cbf_run_result* r, int agent, double* xyz);
CBF_API int cbf_run_final_position_error(const cbf_run_result* r, int agent, double* err);
CBF_API int cbf_run_write_csv(const cbf_run_result* r, const char* path);
CBF_API int cbf_run_metadata_json(const cbf_run_result* r, char** out);
CBF_API int cbf_run_write_metadata(const cbf_run_result* r, const char* path);
CBF_API void cbf_run_free(cbf_run_result* r);

/* Verification. suites is a comma-separated list of suite names or "all".
 * Returns CBF_CLAIM_FAILED if any claim fails; both outputs are still filled.
 * Either output pointer may be NULL. */
CBF_API int cbf_verify(const char* suites, uint64_t seed, unsigned threads, char** report_json, char** summary);
/* Comma-separated suite names. */
CBF_API int cbf_verify_suite_names(char** out);

/* Sweeps. grids holds "key=v1,v2,..." strings; the aggregate CSV goes to
 * csv_path. With run_dir non-NULL, per-run outputs are written beneath it. */
CBF_API int cbf_sweep(const cbf_scenario* base, const char* const* grids, size_t grid_count, unsigned threads,
                      const char* csv_path, const char* run_dir, size_t* run_count);

#ifdef __cplusplus
}
#endif

#endif /* CBFFORM_H */
