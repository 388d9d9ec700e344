// Copyright 2026 The qchaos Authors
// SPDX-License-Identifier: Apache-2.0
#include "qchaos/series.hpp"

#include <cmath>

#include "qchaos/error.hpp"

namespace qchaos {

void TimeSeries::validate() const {
  if (times.size() != values.size()) throw InvalidArgument("time series: length mismatch");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw InvalidArgument("time series: times not strictly increasing");
  }
}

std::vector<double> linear_grid(double t_max, int n) {
  if (n < 2 || !(t_max > 0.0)) throw InvalidArgument("linear_grid: need n >= 2 and t_max > 0");
  std::vector<double> t(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = t_max * i / (n - 1);
  return t;
}

std::vector<double> log_grid(double t_min, double t_max, int n, bool include_zero) {
  if (n < 2 || !(t_min > 0.0) || !(t_max > t_min)) {
    throw InvalidArgument("log_grid: need n >= 2 and 0 < t_min < t_max");
  }
  std::vector<double> t;
  if (include_zero) t.push_back(0.0);
  const double a = std::log(t_min), b = std::log(t_max);
  for (int i = 0; i < n; ++i) t.push_back(std::exp(a + (b - a) * i / (n - 1)));
  return t;
}

}  // namespace qchaos
