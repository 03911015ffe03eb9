/*******************************************************************************
* Copyright 2026 The straightleg Authors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*******************************************************************************/

/*
 * C interface to the walking simulator.
 *
 * Handles are opaque and owned by the caller; release them with the matching
 * *_destroy function. Every call that can fail returns an sl_status and leaves
 * a message for sl_last_error() on the calling thread.
 */

#ifndef STRAIGHTLEG_STRAIGHTLEG_H_
#define STRAIGHTLEG_STRAIGHTLEG_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SL_API __declspec(dllexport)
#else
#define SL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sl_status
{
  SL_OK = 0,
  SL_ERR_INVALID_ARGUMENT = 1,
  SL_ERR_CONFIG = 2,
  SL_ERR_IO = 3,
  SL_ERR_INTERNAL = 4
} sl_status;

typedef enum sl_mode
{
  SL_MODE_STRAIGHT = 0,
  SL_MODE_BENT = 1
} sl_mode;

typedef enum sl_outcome
{
  SL_OUTCOME_OK = 0,
  SL_OUTCOME_FALL = 1,
  SL_OUTCOME_SOLVER_FAILURE = 2
} sl_outcome;

typedef struct sl_scenario sl_scenario;
typedef struct sl_result sl_result;
typedef struct sl_comparison sl_comparison;

typedef struct sl_metrics
{
  double average_speed;           /* m/s */
  double mean_stance_knee;        /* rad */
  double max_stance_knee;         /* rad */
  double min_straight_fraction;   /* worst single-support phase */
  double icp_rms;                 /* m */
  double com_range_transfer;      /* m */
  double com_range_swing;         /* m */
  double mean_stance_knee_torque; /* N m */
  int fell;
  int swings;
  int transfers;
  int toe_off_transfers;
  long rows;
} sl_metrics;

SL_API const char* sl_version(void);

/* Message for the last failed call on this thread; empty when none. */
SL_API const char* sl_last_error(void);

SL_API sl_status sl_scenario_load(const char* path, sl_scenario** out);
SL_API sl_status sl_scenario_parse(const char* yaml_text, sl_scenario** out);
SL_API sl_status sl_scenario_set_mode(sl_scenario* scenario, sl_mode mode);
SL_API sl_status sl_scenario_set_seed(sl_scenario* scenario, uint64_t seed);
SL_API void sl_scenario_destroy(sl_scenario* scenario);

/* A fall or solver failure is a successful call; see sl_result_outcome. */
SL_API sl_status sl_run(const sl_scenario* scenario, sl_result** out);
SL_API sl_outcome sl_result_outcome(const sl_result* result);
SL_API const char* sl_result_message(const sl_result* result);
SL_API sl_status sl_result_metrics(const sl_result* result, sl_metrics* out);
SL_API sl_status sl_result_write_csv(const sl_result* result, const char* path);
/* Writes icp.svg and com_height.svg into an existing directory. */
SL_API sl_status sl_result_write_plots(const sl_result* result, const char* directory);
SL_API sl_status sl_result_write_metrics_json(const sl_result* result, const char* path);
/* SL_ERR_INVALID_ARGUMENT when the run did not end in a solver failure. */
SL_API sl_status sl_result_write_qp_dump(const sl_result* result, const char* path);
SL_API void sl_result_destroy(sl_result* result);

SL_API sl_status sl_compare(const sl_scenario* scenario, sl_comparison** out);
SL_API const char* sl_comparison_report(const sl_comparison* comparison);
SL_API sl_outcome sl_comparison_outcome(const sl_comparison* comparison, sl_mode mode);
SL_API int sl_comparison_straight_lower_torque(const sl_comparison* comparison);
SL_API sl_status sl_comparison_write_json(const sl_comparison* comparison, const char* path);
SL_API void sl_comparison_destroy(sl_comparison* comparison);

#ifdef __cplusplus
}
#endif

#endif /* STRAIGHTLEG_STRAIGHTLEG_H_ */
