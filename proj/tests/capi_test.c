/* Copyright 2026 The qchaos Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "qchaos/qchaos.h"

static int failures = 0;

#define EXPECT(cond)                                               \
  do {                                                             \
    if (!(cond)) {                                                 \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                  \
    }                                                              \
  } while (0)

static int warnings = 0;
static void on_warning(const char* message, void* user) {
  (void)message;
  ++*(int*)user;
}

int main(int argc, char** argv) {
  const char* out_dir = argc > 1 ? argv[1] : "capi_out";
  qchaos_config* cfg = NULL;
  qchaos_result* res = NULL;
  char hash[17];
  double t[60], y[60], rate = 0, r2 = 0, wa = 0, wb = 0, tout[3], lout[3];
  double values[6] = {0.0, exp(2.0), exp(4.0), 0.0, exp(4.0), exp(8.0)};
  double tt[3] = {0.0, 1.0, 2.0};
  size_t n_out = 0;
  int i;

  EXPECT(strlen(qchaos_version()) > 0);
  EXPECT(strcmp(qchaos_status_string(QCHAOS_E_CONFIG), "config") == 0);

  EXPECT(qchaos_config_parse("{\"hbar\": -1}", &cfg) == QCHAOS_E_CONFIG);
  EXPECT(cfg == NULL);
  EXPECT(strstr(qchaos_last_error(), "hbar") != NULL);
  EXPECT(qchaos_config_parse(NULL, &cfg) == QCHAOS_E_INVALID_ARGUMENT);
  EXPECT(qchaos_config_load("/nonexistent/config.json", &cfg) == QCHAOS_E_IO);

  EXPECT(qchaos_config_parse("{\"model\": {\"beta\": 0.3}, \"hbar\": 0.5, \"spectrum\": {\"n_max\": 50}}",
                             &cfg) == QCHAOS_OK);
  EXPECT(qchaos_config_set_threads(cfg, 0) == QCHAOS_E_INVALID_ARGUMENT);
  EXPECT(qchaos_config_set_threads(cfg, 2) == QCHAOS_OK);
  EXPECT(qchaos_config_set_seed(cfg, 42) == QCHAOS_OK);
  EXPECT(qchaos_config_hash(cfg, hash) == QCHAOS_OK);
  EXPECT(strlen(hash) == 16);
  EXPECT(strstr(qchaos_config_canonical(cfg), "\"seed\":42") != NULL);

  qchaos_set_warning_handler(on_warning, &warnings);
  EXPECT(qchaos_run(cfg, "dance", out_dir, &res) == QCHAOS_E_CONFIG);
  EXPECT(qchaos_run(cfg, "spectrum", out_dir, &res) == QCHAOS_OK);
  EXPECT(res != NULL && strstr(qchaos_result_summary(res), "\"delta\"") != NULL);
  EXPECT(res != NULL && strstr(qchaos_result_summary(res), "\"config_hash\"") != NULL);
  EXPECT(warnings > 0); /* few levels at this basis size */
  qchaos_set_warning_handler(NULL, NULL);
  qchaos_result_free(res);
  EXPECT(qchaos_run(cfg, "quantum-otoc", out_dir, &res) == QCHAOS_E_CONFIG);
  qchaos_config_free(cfg);

  EXPECT(qchaos_log_average(tt, values, 3, 2, tout, lout, &n_out) == QCHAOS_OK);
  EXPECT(n_out == 2);
  EXPECT(fabs(lout[0] - 3.0) < 1e-12 && fabs(lout[1] - 6.0) < 1e-12);
  values[4] = -1.0;
  EXPECT(qchaos_log_average(tt, values, 3, 2, tout, lout, &n_out) == QCHAOS_E_INVALID_ARGUMENT);

  for (i = 0; i < 60; ++i) {
    t[i] = 0.1 * (i + 1);
    y[i] = 1.25 * t[i] + 0.5;
  }
  EXPECT(qchaos_fit_growth(t, y, 60, QCHAOS_LAW_EXPONENTIAL, 1.0, 5.0, &rate, NULL, &r2, &wa, &wb) == QCHAOS_OK);
  EXPECT(fabs(rate - 1.25) < 1e-12 && fabs(r2 - 1.0) < 1e-12 && wa == 1.0 && wb == 5.0);
  EXPECT(qchaos_fit_growth(t, y, 60, QCHAOS_LAW_EXPONENTIAL, 1.0, 1.3, &rate, NULL, NULL, NULL, NULL) ==
         QCHAOS_E_INVALID_ARGUMENT);
  EXPECT(qchaos_saturation(t, y, 60, NULL, NULL, NULL) == QCHAOS_E_CONVERGENCE);

  if (failures) fprintf(stderr, "%d C API check(s) failed\n", failures);
  else printf("C API: all checks passed\n");
  return failures ? 1 : 0;
}
