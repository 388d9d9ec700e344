/* Copyright 2026 The qchaos Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the qchaos toolkit. Every call returns a status code; the
 * message for the most recent failure on the calling thread is available
 * from qchaos_last_error(). Strings returned by the library remain valid
 * until the owning handle is freed.
 */
#ifndef QCHAOS_QCHAOS_H_
#define QCHAOS_QCHAOS_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define QCHAOS_API __declspec(dllexport)
#else
#define QCHAOS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qchaos_status {
  QCHAOS_OK = 0,
  QCHAOS_E_INVALID_ARGUMENT = 1,
  QCHAOS_E_STEP_SIZE = 2,
  QCHAOS_E_TRUNCATION = 3,
  QCHAOS_E_CONVERGENCE = 4,
  QCHAOS_E_PROPAGATION = 5,
  QCHAOS_E_IO = 6,
  QCHAOS_E_CONFIG = 7,
  QCHAOS_E_INTERNAL = 99
} qchaos_status;

typedef enum qchaos_growth_law {
  QCHAOS_LAW_EXPONENTIAL = 0,
  QCHAOS_LAW_POWER = 1
} qchaos_growth_law;

typedef struct qchaos_config qchaos_config;
typedef struct qchaos_result qchaos_result;

typedef void (*qchaos_warning_fn)(const char* message, void* user);

QCHAOS_API const char* qchaos_version(void);
QCHAOS_API const char* qchaos_status_string(qchaos_status status);
QCHAOS_API const char* qchaos_last_error(void);

/* NULL restores the default handler, which prints to stderr. */
QCHAOS_API void qchaos_set_warning_handler(qchaos_warning_fn fn, void* user);

QCHAOS_API qchaos_status qchaos_config_parse(const char* json_text, qchaos_config** out);
QCHAOS_API qchaos_status qchaos_config_load(const char* path, qchaos_config** out);
QCHAOS_API qchaos_status qchaos_config_set_seed(qchaos_config* cfg, uint64_t seed);
QCHAOS_API qchaos_status qchaos_config_set_threads(qchaos_config* cfg, int threads);
QCHAOS_API qchaos_status qchaos_config_set_subtract_t0(qchaos_config* cfg, int enabled);
QCHAOS_API qchaos_status qchaos_config_set_svg(qchaos_config* cfg, int enabled);
/* Writes 16 hex digits and a terminating NUL into out[17]. */
QCHAOS_API qchaos_status qchaos_config_hash(const qchaos_config* cfg, char out[17]);
/* Resolved configuration as canonical JSON; owned by cfg. */
QCHAOS_API const char* qchaos_config_canonical(qchaos_config* cfg);
QCHAOS_API void qchaos_config_free(qchaos_config* cfg);

/* mode: one of classical-otoc, quantum-otoc, classical-m2, quantum-m2,
 * spectrum, mqc, scan, fit; NULL uses the mode named in the config. */
QCHAOS_API qchaos_status qchaos_run(const qchaos_config* cfg, const char* mode, const char* out_dir,
                                    qchaos_result** out);
QCHAOS_API const char* qchaos_result_summary(const qchaos_result* result);
QCHAOS_API void qchaos_result_free(qchaos_result* result);

/* Log-average of n_series linear-space series sampled on the same n_times
 * grid (values row-major by series). A t = 0 sample where all series vanish
 * is dropped; *n_out receives the number of points written to times_out
 * and log_out, each of capacity n_times. */
QCHAOS_API qchaos_status qchaos_log_average(const double* times, const double* values, size_t n_times,
                                            size_t n_series, double* times_out, double* log_out,
                                            size_t* n_out);

/* Growth fit of a log-space series. t_a >= t_b selects the automatic
 * window. Any output pointer may be NULL. */
QCHAOS_API qchaos_status qchaos_fit_growth(const double* times, const double* log_values, size_t n,
                                           qchaos_growth_law law, double t_a, double t_b, double* rate,
                                           double* intercept, double* r_squared, double* window_a,
                                           double* window_b);

/* Plateau analysis of a log-space series with the default tail window. */
QCHAOS_API qchaos_status qchaos_saturation(const double* times, const double* log_values, size_t n,
                                           double* t_star, double* v_bar, double* sat);

#ifdef __cplusplus
}
#endif

#endif /* QCHAOS_QCHAOS_H_ */
