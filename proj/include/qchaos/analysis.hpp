// Copyright 2026 The qchaos Authors
// SPDX-License-Identifier: Apache-2.0
//
// Ensemble log-averaging, growth-law fits and saturation analysis.
#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>

#include "qchaos/series.hpp"

namespace qchaos {

// (1/N) sum_k ln value_k(t). A t = 0 sample where every series is zero is
// dropped; any other nonpositive value throws InvalidArgument.
TimeSeries log_average(std::span<const TimeSeries> series);

enum class GrowthLaw { kExponential, kPower };

const char* to_string(GrowthLaw law);
GrowthLaw parse_growth_law(const std::string& s);

struct GrowthFit {
  GrowthLaw law = GrowthLaw::kExponential;
  double rate_or_exponent = 0.0;
  double intercept = 0.0;
  std::pair<double, double> window{0.0, 0.0};
  double r_squared = 0.0;
  int n_points = 0;
};

struct SaturationOptions {
  double tail_fraction = 0.2;
  double max_tail_slope = 0.01;  // per unit time, on the log series
};

struct Saturation {
  double t_star = 0.0;
  double v_bar = 0.0;
  double sat = 0.0;       // linear-space plateau
  double tail_slope = 0.0;
};

// Plateau from the final tail window; t* is the first time the linear series
// reaches sat / 2 and v_bar = C(t*) / t*. Throws ConvergenceError without a
// plateau.
Saturation saturation_velocity(const TimeSeries& log_series, const SaturationOptions& opts = {});

// From the first time the linear series exceeds twice its first value to
// the first time it reaches half saturation.
std::pair<double, double> auto_fit_window(const TimeSeries& log_series,
                                          const SaturationOptions& opts = {});

// Least squares of the log series against t (exponential) or ln t (power)
// over the window; the auto window is used when none is given. Needs at
// least 8 points.
GrowthFit fit_growth(const TimeSeries& log_series, GrowthLaw law,
                     std::optional<std::pair<double, double>> window = std::nullopt,
                     const SaturationOptions& opts = {});

}  // namespace qchaos
