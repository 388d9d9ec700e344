// Copyright 2026 The qchaos Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

namespace qchaos {

// Ordered (time, value) samples of one observable.
struct TimeSeries {
  std::vector<double> times;
  std::vector<double> values;
  bool log_space = false;  // values hold ln(observable)
  std::map<std::string, std::string> meta;

  std::size_t size() const noexcept { return times.size(); }
  // Throws InvalidArgument unless times are strictly increasing and lengths match.
  void validate() const;
};

// times[i] = t_max * i / (n - 1), i = 0 .. n-1
std::vector<double> linear_grid(double t_max, int n);
// n points log-spaced in [t_min, t_max], preceded by t = 0 when include_zero.
std::vector<double> log_grid(double t_min, double t_max, int n, bool include_zero);

}  // namespace qchaos
