#ifndef HMX_H
#define HMX_H

#include <stddef.h>

#if defined(_WIN32)
#define HMX_API __declspec(dllexport)
#else
#define HMX_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct hmx_job hmx_job;
typedef struct hmx_report hmx_report;

typedef enum hmx_status {
  HMX_OK = 0,
  HMX_INVALID_SEQUENCE,
  HMX_NO_LIFT,
  HMX_NON_GENERIC_ARRANGEMENT,
  HMX_NON_UNIMODULAR_FLAT,
  HMX_COMPLETION_BLOWUP,
  HMX_NON_MONIC_RELATION,
  HMX_DEGREE_OVERFLOW,
  HMX_NOT_CENTRAL,
  HMX_ILL_TYPED_MAP,
  HMX_NO_SPANNING_FOREST,
  HMX_NOT_COMPOSABLE,
  HMX_NOT_ADJACENT,
  HMX_SIDE_UNSPECIFIED,
  HMX_FUNCTORIALITY_FAILURE,
  HMX_NON_TRANSVERSE_CUT,
  HMX_STEP_FAILURE,
  HMX_PARSE_ERROR,
  HMX_IO_ERROR = 100,
  HMX_INVALID_ARGUMENT,
  HMX_INTERNAL_ERROR
} hmx_status;

/* Message of the most recent failure on this thread; empty when none. */
HMX_API const char* hmx_last_error(void);
HMX_API const char* hmx_status_name(hmx_status status);
HMX_API const char* hmx_version(void);

HMX_API hmx_status hmx_job_from_json(const char* text, hmx_job** out);
HMX_API hmx_status hmx_job_from_file(const char* path, hmx_job** out);
HMX_API void hmx_job_free(hmx_job* job);

HMX_API hmx_status hmx_job_set_degree(hmx_job* job, int degree);
/* "auto" or comma separated rationals such as "1/2,1/3". */
HMX_API hmx_status hmx_job_set_cut_shift(hmx_job* job, const char* shift);
HMX_API hmx_status hmx_job_set_tolerance(hmx_job* job, double rel_tolerance);
HMX_API hmx_status hmx_job_set_max_flow_time(hmx_job* job, double max_time);
HMX_API hmx_status hmx_job_set_emit_trajectories(hmx_job* job, int enabled);

/* Stage failures are recorded in the report, so HMX_OK only means the job ran. */
HMX_API hmx_status hmx_run(const hmx_job* job, hmx_report** out);
HMX_API void hmx_report_free(hmx_report* report);

HMX_API int hmx_report_passed(const hmx_report* report);
/* 0 pass, 1 verification failure, 2 input error. */
HMX_API int hmx_report_exit_code(const hmx_report* report);
/* Owned by the report, valid until hmx_report_free. */
HMX_API const char* hmx_report_json(const hmx_report* report);
HMX_API const char* hmx_report_summary(const hmx_report* report);
HMX_API const char* hmx_report_trajectories_csv(const hmx_report* report);

#ifdef __cplusplus
}
#endif

#endif
