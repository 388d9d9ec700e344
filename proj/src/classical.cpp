// Copyright 2026 The qchaos Authors
// SPDX-License-Identifier: Apache-2.0
#include "qchaos/classical.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "qchaos/error.hpp"
#include "qchaos/parallel.hpp"

namespace qchaos {

namespace {

// Fourth-order Yoshida composition of the drift-kick-drift leapfrog.
struct Composition {
  double drift[4];
  double kick[3];
};

const Composition& yoshida4() {
  static const Composition c = [] {
    const double cr = std::cbrt(2.0);
    const double w1 = 1.0 / (2.0 - cr);
    const double w0 = -cr / (2.0 - cr);
    return Composition{{w1 / 2, (w0 + w1) / 2, (w0 + w1) / 2, w1 / 2}, {w1, w0, w1}};
  }();
  return c;
}

inline void step(const ModelParams& params, PhasePoint& x, double h) {
  const auto& c = yoshida4();
  for (int s = 0; s < 3; ++s) {
    x.q[0] += c.drift[s] * h * x.p[0];
    x.q[1] += c.drift[s] * h * x.p[1];
    const Vec2 f = force(params, x.q);
    x.p[0] += c.kick[s] * h * f[0];
    x.p[1] += c.kick[s] * h * f[1];
  }
  x.q[0] += c.drift[3] * h * x.p[0];
  x.q[1] += c.drift[3] * h * x.p[1];
}

inline void step_tangent(const ModelParams& params, PhasePoint& x, TangentVector& v, double h) {
  const auto& c = yoshida4();
  for (int s = 0; s < 3; ++s) {
    const double a = c.drift[s] * h;
    x.q[0] += a * x.p[0];
    x.q[1] += a * x.p[1];
    v.dq[0] += a * v.dp[0];
    v.dq[1] += a * v.dp[1];
    const Vec2 f = force(params, x.q);
    const auto hs = potential_hessian(params, x.q);
    const double b = c.kick[s] * h;
    x.p[0] += b * f[0];
    x.p[1] += b * f[1];
    v.dp[0] -= b * (hs[0] * v.dq[0] + hs[1] * v.dq[1]);
    v.dp[1] -= b * (hs[2] * v.dq[0] + hs[3] * v.dq[1]);
  }
  const double a = c.drift[3] * h;
  x.q[0] += a * x.p[0];
  x.q[1] += a * x.p[1];
  v.dq[0] += a * v.dp[0];
  v.dq[1] += a * v.dp[1];
}

void check_times(std::span<const double> times, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("integrate: dt must be positive");
  if (times.empty()) throw InvalidArgument("integrate: empty sample grid");
  if (times.front() < 0.0) throw InvalidArgument("integrate: negative sample time");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw InvalidArgument("integrate: sample times must increase");
  }
}

double relative_drift(double e, double e0) {
  if (!std::isfinite(e)) return std::numeric_limits<double>::infinity();
  const double scale = std::abs(e0) > 0.0 ? std::abs(e0) : 1.0;
  return std::abs(e - e0) / scale;
}

// Runs the (optionally tangent) flow over the sample grid, calling
// visit(i, x, v) at every sample. Returns the max relative energy drift.
template <bool WithTangent, class Visit>
double run_flow(const ModelParams& params, PhasePoint x, TangentVector v,
                std::span<const double> times, double dt, Visit&& visit) {
  const double e0 = energy(params, x);
  double drift = 0.0;
  double t = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double span = times[i] - t;
    if (span > 0.0) {
      const auto n = static_cast<long>(std::ceil(span / dt - 1e-9));
      const double h = span / static_cast<double>(n);
      for (long s = 0; s < n; ++s) {
        if constexpr (WithTangent) {
          step_tangent(params, x, v, h);
        } else {
          step(params, x, h);
        }
        if ((s & 255) == 255) drift = std::max(drift, relative_drift(energy(params, x), e0));
      }
      t = times[i];
    }
    drift = std::max(drift, relative_drift(energy(params, x), e0));
    visit(i, x, v);
  }
  return drift;
}

void throw_drift(double drift, const IntegratorOptions& opts) {
  std::ostringstream os;
  os << "integrate: relative energy drift " << drift << " exceeds bound " << opts.max_rel_drift
     << " at dt=" << opts.dt << "; shrink dt";
  throw StepSizeError(os.str());
}

// Tangent flow with automatic dt halving. Returns the drift actually achieved.
template <class Visit>
double tangent_flow_adaptive(const ModelParams& params, const PhasePoint& x, const TangentVector& v,
                             std::span<const double> times, const IntegratorOptions& opts,
                             Visit&& visit) {
  double dt = opts.dt;
  for (int attempt = 0;; ++attempt) {
    const double drift = run_flow<true>(params, x, v, times, dt, visit);
    if (drift <= opts.max_rel_drift) return drift;
    if (attempt >= opts.max_halvings) {
      IntegratorOptions o = opts;
      o.dt = dt;
      throw_drift(drift, o);
    }
    dt *= 0.5;
  }
}

}  // namespace

Trajectory integrate(const ModelParams& params, const PhasePoint& start,
                     std::span<const double> times, const IntegratorOptions& opts) {
  check_times(times, opts.dt);
  Trajectory tr;
  tr.times.assign(times.begin(), times.end());
  tr.points.resize(times.size());
  tr.dt_used = opts.dt;
  tr.rel_energy_drift = run_flow<false>(params, start, TangentVector{}, times, opts.dt,
                                        [&](std::size_t i, const PhasePoint& x, const TangentVector&) {
                                          tr.points[i] = x;
                                        });
  if (tr.rel_energy_drift > opts.max_rel_drift) throw_drift(tr.rel_energy_drift, opts);
  return tr;
}

Trajectory integrate(const ModelParams& params, const PhasePoint& start, double dt, double t_final,
                     double sample_interval) {
  if (!(t_final > 0.0) || !(sample_interval > 0.0)) {
    throw InvalidArgument("integrate: t_final and sample_interval must be positive");
  }
  const auto n = static_cast<int>(std::llround(t_final / sample_interval));
  std::vector<double> times;
  for (int i = 0; i <= n; ++i) times.push_back(std::min(t_final, i * sample_interval));
  if (times.back() < t_final) times.push_back(t_final);
  IntegratorOptions opts;
  opts.dt = dt;
  return integrate(params, start, times, opts);
}

Trajectory integrate_adaptive(const ModelParams& params, const PhasePoint& start,
                              std::span<const double> times, IntegratorOptions opts) {
  for (int attempt = 0;; ++attempt) {
    try {
      return integrate(params, start, times, opts);
    } catch (const StepSizeError&) {
      if (attempt >= opts.max_halvings) throw;
      opts.dt *= 0.5;
    }
  }
}

Trajectory tangent_integrate(const ModelParams& params, const PhasePoint& start,
                             const TangentVector& tv, std::span<const double> times,
                             const IntegratorOptions& opts) {
  check_times(times, opts.dt);
  Trajectory tr;
  tr.times.assign(times.begin(), times.end());
  tr.points.resize(times.size());
  tr.tangents.resize(times.size());
  tr.dt_used = opts.dt;
  tr.rel_energy_drift = run_flow<true>(params, start, tv, times, opts.dt,
                                       [&](std::size_t i, const PhasePoint& x, const TangentVector& v) {
                                         tr.points[i] = x;
                                         tr.tangents[i] = v;
                                       });
  if (tr.rel_energy_drift > opts.max_rel_drift) throw_drift(tr.rel_energy_drift, opts);
  return tr;
}

LyapunovEstimate lyapunov(const ModelParams& params, const PhasePoint& start, double t_total,
                          double renorm_interval, const IntegratorOptions& opts) {
  if (!(renorm_interval > 0.0) || !(t_total >= renorm_interval)) {
    throw InvalidArgument("lyapunov: need 0 < renorm_interval <= t_total");
  }
  const auto n_renorm = static_cast<int>(std::floor(t_total / renorm_interval));
  const auto steps = static_cast<long>(std::ceil(renorm_interval / opts.dt - 1e-9));
  const double h = renorm_interval / static_cast<double>(steps);
  PhasePoint x = start;
  TangentVector v;
  v.dq = {1.0 / std::sqrt(2.0), 0.0};
  v.dp = {1.0 / std::sqrt(2.0), 0.0};
  const double e0 = energy(params, start);
  double sum_log = 0.0;
  double drift = 0.0;
  std::vector<double> running;
  running.reserve(static_cast<std::size_t>(n_renorm));
  for (int r = 0; r < n_renorm; ++r) {
    for (long s = 0; s < steps; ++s) step_tangent(params, x, v, h);
    const double norm = std::sqrt(v.dq[0] * v.dq[0] + v.dq[1] * v.dq[1] + v.dp[0] * v.dp[0] +
                                  v.dp[1] * v.dp[1]);
    if (!(norm > 0.0) || !std::isfinite(norm)) throw ConvergenceError("lyapunov: tangent norm degenerate");
    sum_log += std::log(norm);
    for (auto* c : {&v.dq[0], &v.dq[1], &v.dp[0], &v.dp[1]}) *c /= norm;
    running.push_back(sum_log / ((r + 1) * renorm_interval));
    drift = std::max(drift, relative_drift(energy(params, x), e0));
  }
  if (drift > opts.max_rel_drift) throw_drift(drift, opts);
  LyapunovEstimate est;
  est.lambda = running.back();
  est.renormalizations = n_renorm;
  const std::size_t tail0 = running.size() - std::max<std::size_t>(1, running.size() / 5);
  const auto [lo, hi] = std::minmax_element(running.begin() + static_cast<long>(tail0), running.end());
  est.tail_variation = *hi - *lo;
  return est;
}

GaussianEnsemble GaussianEnsemble::coherent(const PhasePoint& center, double hbar, int n_samples,
                                            std::uint64_t seed) {
  if (!(hbar > 0.0)) throw InvalidArgument("ensemble: hbar must be positive");
  GaussianEnsemble e;
  e.center = center;
  e.sigma_q = e.sigma_p = std::sqrt(hbar / 2.0);
  e.n_samples = n_samples;
  e.seed = seed;
  return e;
}

void GaussianEnsemble::validate() const {
  if (!(sigma_q > 0.0) || !(sigma_p > 0.0)) throw InvalidArgument("ensemble: widths must be positive");
  if (n_samples < 1) throw InvalidArgument("ensemble: n_samples must be positive");
  for (double c : {center.q[0], center.q[1], center.p[0], center.p[1]}) {
    if (!std::isfinite(c)) throw InvalidArgument("ensemble: non-finite center");
  }
}

std::vector<PhasePoint> sample_ensemble(const GaussianEnsemble& ens, double width_scale) {
  ens.validate();
  Rng rng(ens.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<PhasePoint> out(static_cast<std::size_t>(ens.n_samples));
  for (auto& x : out) {
    for (int k = 0; k < 2; ++k) x.q[k] = ens.center.q[k] + width_scale * ens.sigma_q * gauss(rng);
    for (int k = 0; k < 2; ++k) x.p[k] = ens.center.p[k] + width_scale * ens.sigma_p * gauss(rng);
  }
  return out;
}

std::vector<TimeSeries> classical_otoc(const ModelParams& params,
                                       std::span<const GaussianEnsemble> ensembles,
                                       std::span<const double> times, const IntegratorOptions& opts,
                                       int threads) {
  params.validate();
  check_times(times, opts.dt);
  struct Job {
    std::size_t ens;
    PhasePoint x;
  };
  std::vector<Job> jobs;
  std::vector<std::size_t> offsets;
  for (std::size_t e = 0; e < ensembles.size(); ++e) {
    offsets.push_back(jobs.size());
    for (const auto& x : sample_ensemble(ensembles[e])) jobs.push_back({e, x});
  }
  const std::size_t nt = times.size();
  std::vector<double> slots(jobs.size() * nt);
  std::vector<double> drifts(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t j) {
    TangentVector v;
    v.dq[0] = 1.0;
    drifts[j] = tangent_flow_adaptive(params, jobs[j].x, v, times, opts,
                                      [&](std::size_t i, const PhasePoint&, const TangentVector& tv) {
                                        slots[j * nt + i] = tv.dp[0] * tv.dp[0];
                                      });
  });
  std::vector<TimeSeries> out(ensembles.size());
  for (std::size_t e = 0; e < ensembles.size(); ++e) {
    auto& s = out[e];
    s.times.assign(times.begin(), times.end());
    s.values.assign(nt, 0.0);
    const std::size_t begin = offsets[e];
    const std::size_t end = e + 1 < ensembles.size() ? offsets[e + 1] : jobs.size();
    double drift = 0.0;
    for (std::size_t j = begin; j < end; ++j) {
      for (std::size_t i = 0; i < nt; ++i) s.values[i] += slots[j * nt + i];
      drift = std::max(drift, drifts[j]);
    }
    for (auto& v : s.values) v /= static_cast<double>(end - begin);
    s.meta["observable"] = "classical_otoc_pp";
    s.meta["n_samples"] = std::to_string(end - begin);
    s.meta["seed"] = std::to_string(ensembles[e].seed);
    std::ostringstream d;
    d << drift;
    s.meta["max_rel_energy_drift"] = d.str();
  }
  return out;
}

TangentVector modified_gradient_direction(const GaussianEnsemble& ens, const PhasePoint& x,
                                          double* norm_sq) {
  TangentVector v;
  double n2 = 0.0;
  for (int k = 0; k < 2; ++k) {
    const double gq = -(x.q[k] - ens.center.q[k]) / (ens.sigma_q * ens.sigma_q);
    const double gp = -(x.p[k] - ens.center.p[k]) / (ens.sigma_p * ens.sigma_p);
    const double q = x.q[k], p = x.p[k];
    const double two_i = q * q + p * p;  // 2 I_k with omega = 1
    // dq/dtheta = -p, dp/dtheta = q; dq/dI = q/(2I), dp/dI = p/(2I)
    const double d_theta = gq * (-p) + gp * q;
    const double d_action = two_i > 0.0 ? (gq * q + gp * p) / two_i : 0.0;
    const double delta_theta = d_action;
    const double delta_i = -d_theta;
    n2 += delta_theta * delta_theta + delta_i * delta_i;
    v.dq[k] = (two_i > 0.0 ? q / two_i : 0.0) * delta_i - p * delta_theta;
    v.dp[k] = (two_i > 0.0 ? p / two_i : 0.0) * delta_i + q * delta_theta;
  }
  if (norm_sq) *norm_sq = n2;
  return v;
}

double classical_m2_initial(const GaussianEnsemble& ens) {
  const double sq2 = ens.sigma_q * ens.sigma_q;
  const double sp2 = ens.sigma_p * ens.sigma_p;
  const double cross = 1.0 / sq2 - 1.0 / sp2;
  double s = 0.0;
  for (int k = 0; k < 2; ++k) {
    s += ens.center.p[k] * ens.center.p[k] / (2.0 * sq2) + ens.center.q[k] * ens.center.q[k] / (2.0 * sp2) +
         0.25 * sq2 * sp2 * cross * cross;
  }
  return s;
}

namespace {

void reject_axis_center(const GaussianEnsemble& ens) {
  for (int k = 0; k < 2; ++k) {
    if (ens.center.q[k] == 0.0 && ens.center.p[k] == 0.0) {
      throw InvalidArgument("classical_m2: ensemble centered at I_k = 0; angle undefined");
    }
  }
}

}  // namespace

M2Estimate classical_m2(const ModelParams& params, const GaussianEnsemble& ensemble,
                        std::span<const double> times, bool subtract_t0,
                        const IntegratorOptions& opts, int threads) {
  params.validate();
  check_times(times, opts.dt);
  reject_axis_center(ensemble);
  // rho0^2 is Gaussian with widths sigma / sqrt(2).
  const auto samples = sample_ensemble(ensemble, 1.0 / std::sqrt(2.0));
  const std::size_t nt = times.size();
  std::vector<double> slots(samples.size() * nt);
  std::vector<double> drifts(samples.size());
  parallel_for(samples.size(), threads, [&](std::size_t j) {
    // The unnormalized modified gradient of ln rho0 carries the weight
    // |grad~ rho0|^2 / rho0^2 through linearity of the tangent map.
    const TangentVector v = modified_gradient_direction(ensemble, samples[j]);
    drifts[j] = tangent_flow_adaptive(params, samples[j], v, times, opts,
                                      [&](std::size_t i, const PhasePoint& x, const TangentVector& tv) {
                                        double acc = 0.0;
                                        for (int k = 0; k < 2; ++k) {
                                          const double di = x.q[k] * tv.dq[k] + x.p[k] * tv.dp[k];
                                          acc += di * di;
                                        }
                                        slots[j * nt + i] = acc;
                                      });
  });
  M2Estimate est;
  est.series.times.assign(times.begin(), times.end());
  est.series.values.assign(nt, 0.0);
  est.standard_error.assign(nt, 0.0);
  const double n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < nt; ++i) {
    double mean = 0.0, m2 = 0.0;
    for (std::size_t j = 0; j < samples.size(); ++j) {
      const double x = slots[j * nt + i];
      const double d = x - mean;
      mean += d / static_cast<double>(j + 1);
      m2 += d * (x - mean);
    }
    est.series.values[i] = mean;
    est.standard_error[i] = samples.size() > 1 ? std::sqrt(m2 / (n - 1.0) / n) : 0.0;
  }
  est.initial = times.front() == 0.0 ? est.series.values.front() : classical_m2_initial(ensemble);
  if (subtract_t0) {
    for (auto& v : est.series.values) v -= est.initial;
  }
  est.series.meta["observable"] = "classical_m2";
  est.series.meta["n_samples"] = std::to_string(samples.size());
  est.series.meta["seed"] = std::to_string(ensemble.seed);
  est.series.meta["subtract_t0"] = subtract_t0 ? "true" : "false";
  std::ostringstream d;
  d << *std::max_element(drifts.begin(), drifts.end());
  est.series.meta["max_rel_energy_drift"] = d.str();
  return est;
}

namespace {

double gaussian_density(const GaussianEnsemble& e, const PhasePoint& x) {
  double arg = 0.0;
  for (int k = 0; k < 2; ++k) {
    const double dq = (x.q[k] - e.center.q[k]) / e.sigma_q;
    const double dp = (x.p[k] - e.center.p[k]) / e.sigma_p;
    arg += dq * dq + dp * dp;
  }
  const double norm = 2.0 * std::numbers::pi * e.sigma_q * e.sigma_p;
  return std::exp(-0.5 * arg) / (norm * norm);
}

struct GridMoments {
  double num = 0.0;   // sum over cells of sum |m|^2 |c_m|^2
  double den = 0.0;   // sum over cells of sum |c_m|^2
  double tail = 0.0;  // part of den with some |m_k| > n/4
};

// rho_t on the theta grid at fixed actions, then its 2D DFT moments.
GridMoments theta_moments(const ModelParams& params, const GaussianEnsemble& e, double i1, double i2,
                          double t, const FourierOracleOptions& fo) {
  const int n = fo.theta_points;
  const double two_pi = 2.0 * std::numbers::pi;
  Eigen::MatrixXcd f(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      ActionAngle aa;
      aa.action = {i1, i2};
      aa.angle = {two_pi * a / n, two_pi * b / n};
      PhasePoint x = from_action_angle(aa, 1.0);
      if (t > 0.0) {
        // phi_{-t} = R phi_t R with R the momentum reversal.
        for (double& p : x.p) p = -p;
        const auto steps = static_cast<long>(std::ceil(t / fo.dt - 1e-9));
        const double h = t / static_cast<double>(steps);
        for (long s = 0; s < steps; ++s) step(params, x, h);
        for (double& p : x.p) p = -p;
      }
      f(a, b) = gaussian_density(e, x);
    }
  }
  Eigen::FFT<double> fft;
  Eigen::VectorXcd tmp_in(n), tmp_out(n);
  for (int a = 0; a < n; ++a) {
    tmp_in = f.row(a).transpose();
    fft.fwd(tmp_out, tmp_in);
    f.row(a) = tmp_out.transpose();
  }
  for (int b = 0; b < n; ++b) {
    tmp_in = f.col(b);
    fft.fwd(tmp_out, tmp_in);
    f.col(b) = tmp_out;
  }
  GridMoments g;
  const double scale = 1.0 / (static_cast<double>(n) * n);
  for (int a = 0; a < n; ++a) {
    const int m1 = a <= n / 2 ? a : a - n;
    for (int b = 0; b < n; ++b) {
      const int m2 = b <= n / 2 ? b : b - n;
      const double w = std::norm(f(a, b) * scale);
      g.den += w;
      g.num += (m1 * m1 + m2 * m2) * w;
      if (std::abs(m1) > n / 4 || std::abs(m2) > n / 4) g.tail += w;
    }
  }
  return g;
}

// Midpoint rule in r_k = sqrt(2 I_k), where dI = r dr keeps the integrand
// smooth at I = 0.
struct ActionGrid {
  double lo[2];
  double hi[2];
  int points;
  double r(int k, int j) const { return lo[k] + (hi[k] - lo[k]) * (j + 0.5) / points; }
  double action(int k, int j) const { return 0.5 * r(k, j) * r(k, j); }
  double weight(int j1, int j2) const {
    return r(0, j1) * r(1, j2) * (hi[0] - lo[0]) * (hi[1] - lo[1]) / (double(points) * points);
  }
};

}  // namespace

FourierOracleResult classical_m2_fourier_oracle(const ModelParams& params,
                                                const GaussianEnsemble& ensemble,
                                                std::span<const double> times,
                                                const FourierOracleOptions& fo, int threads) {
  params.validate();
  check_times(times, fo.dt);
  reject_axis_center(ensemble);
  if (fo.theta_points < 8 || fo.action_points < 2 || fo.box_samples < 10) {
    throw InvalidArgument("fourier oracle: need theta_points >= 8, action_points >= 2, box_samples >= 10");
  }
  GaussianEnsemble probe = ensemble;
  probe.n_samples = fo.box_samples;
  IntegratorOptions io;
  io.dt = fo.dt;
  io.max_rel_drift = 1e-5;
  const auto starts = sample_ensemble(probe);
  std::vector<Trajectory> fwd(starts.size());
  parallel_for(starts.size(), threads,
               [&](std::size_t j) { fwd[j] = integrate_adaptive(params, starts[j], times, io); });

  const double exact_norm = std::pow(4.0 * std::numbers::pi * ensemble.sigma_q * ensemble.sigma_p, -2);
  const double two_pi_sq = 4.0 * std::numbers::pi * std::numbers::pi;
  FourierOracleResult res;
  res.m2.times.assign(times.begin(), times.end());
  for (std::size_t i = 0; i < times.size(); ++i) {
    ActionGrid grid{};
    for (int k = 0; k < 2; ++k) {
      grid.lo[k] = 1e300;
      grid.hi[k] = -1e300;
      for (const auto& tr : fwd) {
        const double r = std::sqrt(2.0 * to_action_angle(tr.points[i], 1.0).action[k]);
        grid.lo[k] = std::min(grid.lo[k], r);
        grid.hi[k] = std::max(grid.hi[k], r);
      }
      const double pad = fo.box_pad * (grid.hi[k] - grid.lo[k]);
      grid.lo[k] = std::max(0.0, grid.lo[k] - pad);
      grid.hi[k] += pad;
    }
    auto integrate_grid = [&](int points, GridMoments& total) {
      ActionGrid g = grid;
      g.points = points;
      std::vector<GridMoments> cells(static_cast<std::size_t>(points) * static_cast<std::size_t>(points));
      parallel_for(cells.size(), threads, [&](std::size_t c) {
        const int j1 = static_cast<int>(c) / points, j2 = static_cast<int>(c) % points;
        cells[c] = theta_moments(params, ensemble, g.action(0, j1), g.action(1, j2), times[i], fo);
      });
      for (std::size_t c = 0; c < cells.size(); ++c) {
        const double w = g.weight(static_cast<int>(c) / points, static_cast<int>(c) % points);
        total.num += cells[c].num * w;
        total.den += cells[c].den * w;
        total.tail += cells[c].tail * w;
      }
    };
    GridMoments fine, coarse;
    integrate_grid(fo.action_points, fine);
    integrate_grid(std::max(1, fo.action_points / 2), coarse);
    const double m2 = fine.num / fine.den;
    res.m2.values.push_back(m2);
    res.quadrature_error.push_back(std::abs(m2 - coarse.num / coarse.den));
    res.norm_ratio.push_back(fine.den * two_pi_sq / exact_norm);
    res.tail_fraction.push_back(fine.tail / fine.den);
  }
  res.m2.meta["observable"] = "classical_m2_fourier_oracle";
  res.m2.meta["theta_points"] = std::to_string(fo.theta_points);
  res.m2.meta["action_points"] = std::to_string(fo.action_points);
  return res;
}

void default_shell_box(const ModelParams& params, double e_max, Vec2& q_max, Vec2& p_max) {
  params.validate();
  if (!(e_max > 0.0)) throw InvalidArgument("shell box: e_max must be positive");
  // Grow R until the potential exceeds e_max on the whole circle |q| = R.
  double r = 1.0;
  auto circle_min = [&](double rad) {
    double m = 1e300;
    for (int a = 0; a < 720; ++a) {
      const double phi = 2.0 * std::numbers::pi * a / 720.0;
      m = std::min(m, potential(params, {rad * std::cos(phi), rad * std::sin(phi)}));
    }
    return m;
  };
  int guard = 0;
  while (circle_min(r) <= e_max) {
    r *= 1.5;
    if (++guard > 200) throw InvalidArgument("shell box: potential does not confine the shell");
  }
  constexpr int kGrid = 801;
  const double h = 2.0 * r / (kGrid - 1);
  double m0 = 0.0, m1 = 0.0;
  for (int i = 0; i < kGrid; ++i) {
    for (int j = 0; j < kGrid; ++j) {
      const Vec2 q{-r + i * h, -r + j * h};
      if (potential(params, q) <= e_max) {
        m0 = std::max(m0, std::abs(q[0]));
        m1 = std::max(m1, std::abs(q[1]));
      }
    }
  }
  q_max = {(m0 + h) * 1.01, (m1 + h) * 1.01};
  const double pm = std::sqrt(2.0 * e_max) * 1.01;
  p_max = {pm, pm};
}

std::vector<PhasePoint> sample_shell(const ModelParams& params, const ShellSpec& spec) {
  params.validate();
  if (!(spec.de > 0.0) || spec.n_centers < 1) {
    throw InvalidArgument("sample_shell: need dE > 0 and n_centers >= 1");
  }
  if (spec.e0 != 0.0 && spec.de / std::abs(spec.e0) > 0.1) {
    warn("sample_shell: shell width dE/E0 > 0.1");
  }
  Vec2 qm = spec.q_max, pm = spec.p_max;
  if (qm[0] <= 0.0 || qm[1] <= 0.0 || pm[0] <= 0.0 || pm[1] <= 0.0) {
    default_shell_box(params, spec.e0 + spec.de, qm, pm);
  }
  Rng rng(spec.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<PhasePoint> out;
  out.reserve(static_cast<std::size_t>(spec.n_centers));
  long tries = 0;
  while (static_cast<int>(out.size()) < spec.n_centers) {
    if (++tries > spec.max_rejections) {
      std::ostringstream os;
      os << "sample_shell: " << out.size() << " of " << spec.n_centers << " centers after "
         << spec.max_rejections << " draws; box too small or shell empty";
      throw ConvergenceError(os.str());
    }
    PhasePoint x;
    x.q = {qm[0] * u(rng), qm[1] * u(rng)};
    x.p = {pm[0] * u(rng), pm[1] * u(rng)};
    if (std::abs(energy(params, x) - spec.e0) <= spec.de / 2.0) out.push_back(x);
  }
  return out;
}

}  // namespace qchaos
