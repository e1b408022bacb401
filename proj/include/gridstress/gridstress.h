/* C interface of the gridstress engine. */
#ifndef GRIDSTRESS_H
#define GRIDSTRESS_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(GRIDSTRESS_BUILDING)
#    define GS_API __declspec(dllexport)
#  else
#    define GS_API __declspec(dllimport)
#  endif
#else
#  define GS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gs_status {
  GS_OK = 0,
  GS_ERR_PARSE = 1,
  GS_ERR_VALIDATION = 2,
  GS_ERR_DISCONNECTED = 3,
  GS_ERR_IO = 4,
  GS_ERR_EMPTY_REPORT = 5,
  GS_ERR_DOMAIN = 6,
  GS_ERR_CONVERGENCE = 7,
  GS_ERR_SINGULAR_BLOCK = 8,
  GS_ERR_IMBALANCE = 9,
  GS_ERR_BRIDGE_LINE = 10,
  GS_ERR_DENOMINATOR = 11,
  GS_ERR_NON_UNIFORM_INERTIA = 12,
  GS_ERR_NON_UNIFORM_DAMPING = 13,
  GS_ERR_CRITICAL_DAMPING = 14,
  GS_ERR_NOT_HURWITZ = 15,
  GS_ERR_STEP_SIZE = 16,
  GS_ERR_NON_DECAY = 17,
  GS_ERR_INVALID_ARGUMENT = 18,
  GS_ERR_CONSISTENCY = 19,
  GS_ERR_INTERNAL = 20
} gs_status;

typedef struct gs_case gs_case;
typedef struct gs_report gs_report;

typedef enum gs_command {
  GS_ANALYZE = 0,
  GS_RANK = 1,
  GS_SIMULATE = 2,
  GS_COMPARE = 3,
  GS_CENTRALITY = 4
} gs_command;

typedef enum gs_measure { GS_MEASURE_BOTH = 0, GS_MEASURE_ANGLE = 1, GS_MEASURE_PRIMARY = 2 } gs_measure;

typedef enum gs_format { GS_FORMAT_CSV = 0, GS_FORMAT_JSON = 1 } gs_format;

/* Options shared by every command. Initialize with gs_options_init. */
typedef struct gs_options {
  gs_measure measure;
  /* Durations: "0.02,0.04" seconds or "1c..4c" AC cycles. NULL = one cycle. */
  const char* tau;
  /* Regularization for the gramian_eps column; <= 0 selects 1e-5 lambda_2. */
  double epsilon;
  double dt;
  /* <= 0 selects 120 / gamma. */
  double t_max;
  /* 0 reads GRIDSTRESS_WORKERS (default 1). */
  int workers;
  /* "GenGen", "PassivePassive", "GenPassive" or NULL for all lines. */
  const char* case_class;
  /* Restrict to one line by source bus ids; both < 0 means every line. */
  int line_from;
  int line_to;
  /* Centrality only: pairwise pulse differences instead of per-bus rows. */
  int pairs;
} gs_options;

GS_API void gs_options_init(gs_options* options);

GS_API const char* gs_version(void);
GS_API const char* gs_status_name(gs_status status);
/* Message of the last failure on the calling thread ("" if none). */
GS_API const char* gs_last_error(void);

GS_API gs_status gs_case_load(const char* path, gs_case** out);
GS_API gs_status gs_case_parse(const char* json_text, gs_case** out);
GS_API void gs_case_free(gs_case* grid);
/* Scales every inertia and damping (gamma unchanged). */
GS_API gs_status gs_case_scale_inertia(gs_case* grid, double factor);
/* Multiplies every damping by 1 + jitter. */
GS_API gs_status gs_case_gamma_jitter(gs_case* grid, double jitter);
GS_API gs_status gs_case_info(const gs_case* grid, int* buses, int* active, int* lines, double* base_frequency);
GS_API size_t gs_case_warning_count(const gs_case* grid);
GS_API const char* gs_case_warning(const gs_case* grid, size_t index);
/* gamma m / lambda_2 of the reduced network, in seconds. */
GS_API gs_status gs_tau_validity_bound(const gs_case* grid, double* seconds);

GS_API gs_status gs_run(const gs_case* grid, gs_command command, const gs_options* options, gs_report** out);
GS_API void gs_report_free(gs_report* report);

GS_API size_t gs_report_rows(const gs_report* report);
GS_API size_t gs_report_columns(const gs_report* report);
GS_API const char* gs_report_column(const gs_report* report, size_t column);
GS_API const char* gs_report_cell(const gs_report* report, size_t row, size_t column);
GS_API int gs_report_row_errors(const gs_report* report);
GS_API int gs_report_bridges_excluded(const gs_report* report);
GS_API size_t gs_report_warning_count(const gs_report* report);
GS_API const char* gs_report_warning(const gs_report* report, size_t index);
GS_API size_t gs_report_note_count(const gs_report* report);
GS_API const char* gs_report_note(const gs_report* report, size_t index);
/* 0 when there are no row errors and (with strict) no warnings, else 1. */
GS_API int gs_report_exit_code(const gs_report* report, int strict);
/* Writes to `path`, or to stdout when path is NULL or "-". */
GS_API gs_status gs_report_write(const gs_report* report, const char* path, gs_format format);

/* Simulates one line outage and writes the trajectory CSV
 * (t,phi_0..,omega_0..) keeping every `stride`-th step. */
GS_API gs_status gs_simulate_trajectory(const gs_case* grid, int line_from, int line_to, double tau, double dt,
                                        double t_max, int stride, const char* path);

#ifdef __cplusplus
}
#endif

#endif /* GRIDSTRESS_H */
