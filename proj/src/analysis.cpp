// Copyright 2026 The qchaos Authors
// SPDX-License-Identifier: Apache-2.0
#include "qchaos/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qchaos/error.hpp"

namespace qchaos {

TimeSeries log_average(std::span<const TimeSeries> series) {
  if (series.empty()) throw InvalidArgument("log_average: no series");
  for (const auto& s : series) {
    s.validate();
    if (s.log_space) throw InvalidArgument("log_average: inputs must be linear-space series");
    if (s.times != series.front().times) throw InvalidArgument("log_average: series must share the time grid");
  }
  const auto& times = series.front().times;
  TimeSeries out;
  out.log_space = true;
  out.meta["n_series"] = std::to_string(series.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    double acc = 0.0;
    bool all_zero_at_origin = times[i] == 0.0;
    for (const auto& s : series) {
      if (s.values[i] != 0.0) all_zero_at_origin = false;
    }
    if (all_zero_at_origin) continue;
    for (std::size_t k = 0; k < series.size(); ++k) {
      const double v = series[k].values[i];
      if (!(v > 0.0)) {
        std::ostringstream os;
        os << "log_average: nonpositive value " << v << " in series " << k << " at t=" << times[i];
        throw InvalidArgument(os.str());
      }
      acc += std::log(v);
    }
    out.times.push_back(times[i]);
    out.values.push_back(acc / static_cast<double>(series.size()));
  }
  if (out.times.empty()) throw InvalidArgument("log_average: nothing left after dropping t=0");
  return out;
}

const char* to_string(GrowthLaw law) {
  return law == GrowthLaw::kExponential ? "exponential" : "power";
}

GrowthLaw parse_growth_law(const std::string& s) {
  if (s == "exponential") return GrowthLaw::kExponential;
  if (s == "power") return GrowthLaw::kPower;
  throw InvalidArgument("unknown growth law '" + s + "' (expected exponential or power)");
}

namespace {

void require_log(const TimeSeries& s, const char* who) {
  s.validate();
  if (!s.log_space) throw InvalidArgument(std::string(who) + ": expects a log-space series");
  if (s.size() < 2) throw InvalidArgument(std::string(who) + ": series too short");
}

// Least-squares line y = a + b x; returns {a, b, r^2}.
std::array<double, 3> line_fit(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("fit: degenerate abscissae");
  const double b = sxy / sxx;
  const double r2 = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  return {my - b * mx, b, r2};
}

struct Tail {
  double sat;
  double slope;
};

Tail tail_stats(const TimeSeries& s, const SaturationOptions& opts) {
  if (!(opts.tail_fraction > 0.0 && opts.tail_fraction <= 1.0)) {
    throw InvalidArgument("saturation: tail_fraction must be in (0, 1]");
  }
  const std::size_t n = s.size();
  const auto k = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(opts.tail_fraction * n)));
  const std::size_t start = n - std::min(n, k);
  std::span<const double> t(s.times.data() + start, n - start), y(s.values.data() + start, n - start);
  double sat = 0.0;
  for (double v : y) sat += std::exp(v);
  sat /= static_cast<double>(y.size());
  return {sat, line_fit(t, y)[1]};
}

}  // namespace

Saturation saturation_velocity(const TimeSeries& log_series, const SaturationOptions& opts) {
  require_log(log_series, "saturation_velocity");
  const Tail tail = tail_stats(log_series, opts);
  if (std::abs(tail.slope) > opts.max_tail_slope) {
    std::ostringstream os;
    os << "saturation_velocity: no plateau; tail slope " << tail.slope << " per unit time exceeds "
       << opts.max_tail_slope;
    throw ConvergenceError(os.str());
  }
  Saturation out;
  out.sat = tail.sat;
  out.tail_slope = tail.slope;
  for (std::size_t i = 0; i < log_series.size(); ++i) {
    const double c = std::exp(log_series.values[i]);
    if (c >= 0.5 * tail.sat) {
      out.t_star = log_series.times[i];
      if (!(out.t_star > 0.0)) throw ConvergenceError("saturation_velocity: half saturation at t=0");
      out.v_bar = c / out.t_star;
      return out;
    }
  }
  throw ConvergenceError("saturation_velocity: series never reaches half saturation");
}

std::pair<double, double> auto_fit_window(const TimeSeries& log_series, const SaturationOptions& opts) {
  require_log(log_series, "auto_fit_window");
  const double first = log_series.values.front();
  double ta = log_series.times.back();
  for (std::size_t i = 0; i < log_series.size(); ++i) {
    if (log_series.values[i] > first + std::log(2.0)) {
      ta = log_series.times[i];
      break;
    }
  }
  // Without a plateau the window runs to the end of the data.
  double tb = log_series.times.back();
  const Tail tail = tail_stats(log_series, opts);
  if (std::abs(tail.slope) <= opts.max_tail_slope) {
    for (std::size_t i = 0; i < log_series.size(); ++i) {
      if (std::exp(log_series.values[i]) >= 0.5 * tail.sat) {
        tb = log_series.times[i];
        break;
      }
    }
  }
  return {ta, tb};
}

GrowthFit fit_growth(const TimeSeries& log_series, GrowthLaw law,
                     std::optional<std::pair<double, double>> window, const SaturationOptions& opts) {
  require_log(log_series, "fit_growth");
  const auto w = window ? *window : auto_fit_window(log_series, opts);
  if (!(w.second > w.first)) throw InvalidArgument("fit_growth: empty window");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < log_series.size(); ++i) {
    const double t = log_series.times[i];
    if (t < w.first || t > w.second) continue;
    if (law == GrowthLaw::kPower) {
      if (!(t > 0.0)) continue;
      x.push_back(std::log(t));
    } else {
      x.push_back(t);
    }
    y.push_back(log_series.values[i]);
  }
  if (x.size() < 8) {
    std::ostringstream os;
    os << "fit_growth: " << x.size() << " points in window [" << w.first << ", " << w.second
       << "]; need at least 8";
    throw InvalidArgument(os.str());
  }
  const auto [a, b, r2] = line_fit(x, y);
  GrowthFit f;
  f.law = law;
  f.rate_or_exponent = b;
  f.intercept = a;
  f.window = w;
  f.r_squared = r2;
  f.n_points = static_cast<int>(x.size());
  return f;
}

}  // namespace qchaos
