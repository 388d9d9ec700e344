// Copyright 2026 The qchaos Authors
// SPDX-License-Identifier: Apache-2.0
#include "qchaos/qchaos.h"

#include <cstring>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

#include "qchaos/analysis.hpp"
#include "qchaos/error.hpp"
#include "qchaos/pipeline.hpp"

struct qchaos_config {
  qchaos::RunConfig cfg;
  std::string canonical;
};

struct qchaos_result {
  std::string summary;
};

namespace {

thread_local std::string g_last_error;

template <class F>
qchaos_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return QCHAOS_OK;
  } catch (const qchaos::Error& e) {
    g_last_error = e.what();
    return static_cast<qchaos_status>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return QCHAOS_E_INTERNAL;
}

void require(bool ok, const char* what) {
  if (!ok) throw qchaos::InvalidArgument(what);
}

qchaos::TimeSeries log_series(const double* times, const double* values, size_t n) {
  require(times && values, "null array");
  qchaos::TimeSeries s;
  s.times.assign(times, times + n);
  s.values.assign(values, values + n);
  s.log_space = true;
  return s;
}

}  // namespace

extern "C" {

const char* qchaos_version(void) { return QCHAOS_VERSION; }

const char* qchaos_status_string(qchaos_status status) {
  switch (status) {
    case QCHAOS_OK:
      return "ok";
    case QCHAOS_E_INVALID_ARGUMENT:
      return "invalid argument";
    case QCHAOS_E_STEP_SIZE:
      return "step size";
    case QCHAOS_E_TRUNCATION:
      return "truncation";
    case QCHAOS_E_CONVERGENCE:
      return "convergence";
    case QCHAOS_E_PROPAGATION:
      return "propagation";
    case QCHAOS_E_IO:
      return "io";
    case QCHAOS_E_CONFIG:
      return "config";
    case QCHAOS_E_INTERNAL:
      return "internal";
  }
  return "unknown";
}

const char* qchaos_last_error(void) { return g_last_error.c_str(); }

void qchaos_set_warning_handler(qchaos_warning_fn fn, void* user) { qchaos::set_warning_sink(fn, user); }

qchaos_status qchaos_config_parse(const char* json_text, qchaos_config** out) {
  return guarded([&] {
    require(json_text && out, "null argument");
    *out = nullptr;
    auto* c = new qchaos_config{qchaos::parse_config(json_text), {}};
    *out = c;
  });
}

qchaos_status qchaos_config_load(const char* path, qchaos_config** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = nullptr;
    std::ifstream f(path);
    if (!f) throw qchaos::IoError(std::string("cannot open config ") + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    *out = new qchaos_config{qchaos::parse_config(ss.str()), {}};
  });
}

qchaos_status qchaos_config_set_seed(qchaos_config* cfg, uint64_t seed) {
  return guarded([&] {
    require(cfg, "null config");
    cfg->cfg.seed = seed;
  });
}

qchaos_status qchaos_config_set_threads(qchaos_config* cfg, int threads) {
  return guarded([&] {
    require(cfg, "null config");
    require(threads >= 1, "threads must be at least 1");
    cfg->cfg.threads = threads;
  });
}

qchaos_status qchaos_config_set_subtract_t0(qchaos_config* cfg, int enabled) {
  return guarded([&] {
    require(cfg, "null config");
    cfg->cfg.subtract_t0 = enabled != 0;
  });
}

qchaos_status qchaos_config_set_svg(qchaos_config* cfg, int enabled) {
  return guarded([&] {
    require(cfg, "null config");
    cfg->cfg.svg = enabled != 0;
  });
}

qchaos_status qchaos_config_hash(const qchaos_config* cfg, char out[17]) {
  return guarded([&] {
    require(cfg && out, "null argument");
    const std::string h = qchaos::config_hash(cfg->cfg);
    std::memcpy(out, h.c_str(), 17);
  });
}

const char* qchaos_config_canonical(qchaos_config* cfg) {
  if (!cfg) return nullptr;
  cfg->canonical = qchaos::canonical_config(cfg->cfg);
  return cfg->canonical.c_str();
}

void qchaos_config_free(qchaos_config* cfg) { delete cfg; }

qchaos_status qchaos_run(const qchaos_config* cfg, const char* mode, const char* out_dir, qchaos_result** out) {
  return guarded([&] {
    require(cfg && out_dir && out, "null argument");
    *out = nullptr;
    std::optional<qchaos::RunMode> m;
    if (mode) m = qchaos::parse_run_mode(mode);
    *out = new qchaos_result{qchaos::run(cfg->cfg, out_dir, m)};
  });
}

const char* qchaos_result_summary(const qchaos_result* result) {
  return result ? result->summary.c_str() : nullptr;
}

void qchaos_result_free(qchaos_result* result) { delete result; }

qchaos_status qchaos_log_average(const double* times, const double* values, size_t n_times, size_t n_series,
                                 double* times_out, double* log_out, size_t* n_out) {
  return guarded([&] {
    require(times && values && times_out && log_out && n_out, "null argument");
    require(n_series > 0, "no series");
    std::vector<qchaos::TimeSeries> in(n_series);
    for (size_t k = 0; k < n_series; ++k) {
      in[k].times.assign(times, times + n_times);
      in[k].values.assign(values + k * n_times, values + (k + 1) * n_times);
    }
    const auto avg = qchaos::log_average(in);
    std::copy(avg.times.begin(), avg.times.end(), times_out);
    std::copy(avg.values.begin(), avg.values.end(), log_out);
    *n_out = avg.size();
  });
}

qchaos_status qchaos_fit_growth(const double* times, const double* log_values, size_t n, qchaos_growth_law law,
                                double t_a, double t_b, double* rate, double* intercept, double* r_squared,
                                double* window_a, double* window_b) {
  return guarded([&] {
    require(law == QCHAOS_LAW_EXPONENTIAL || law == QCHAOS_LAW_POWER, "unknown growth law");
    const auto s = log_series(times, log_values, n);
    std::optional<std::pair<double, double>> w;
    if (t_a < t_b) w = std::pair{t_a, t_b};
    const auto f = qchaos::fit_growth(
        s, law == QCHAOS_LAW_POWER ? qchaos::GrowthLaw::kPower : qchaos::GrowthLaw::kExponential, w);
    if (rate) *rate = f.rate_or_exponent;
    if (intercept) *intercept = f.intercept;
    if (r_squared) *r_squared = f.r_squared;
    if (window_a) *window_a = f.window.first;
    if (window_b) *window_b = f.window.second;
  });
}

qchaos_status qchaos_saturation(const double* times, const double* log_values, size_t n, double* t_star,
                                double* v_bar, double* sat) {
  return guarded([&] {
    const auto s = qchaos::saturation_velocity(log_series(times, log_values, n));
    if (t_star) *t_star = s.t_star;
    if (v_bar) *v_bar = s.v_bar;
    if (sat) *sat = s.sat;
  });
}

}  // extern "C"
