// Copyright 2026 The qchaos Authors
// SPDX-License-Identifier: Apache-2.0
//
// Classical dynamics: 4th-order symplectic integration of the trajectory
// and of its tangent (variational) flow, Lyapunov estimates, the classical
// square-commutator correlator and the harmonics second moment of a
// Gaussian phase-space ensemble.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qchaos/model.hpp"
#include "qchaos/series.hpp"

namespace qchaos {

struct TangentVector {
  Vec2 dq{0.0, 0.0};
  Vec2 dp{0.0, 0.0};
};

struct IntegratorOptions {
  double dt = 1e-3;
  double max_rel_drift = 1e-8;
  // integrate_adaptive halves dt at most this many times.
  int max_halvings = 6;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<PhasePoint> points;
  std::vector<TangentVector> tangents;  // filled by tangent_integrate only
  double rel_energy_drift = 0.0;        // max_t |E(t) - E(0)| / |E(0)|
  double dt_used = 0.0;
};

// Integrates to every requested sample time (ascending, first >= 0). Steps
// between samples are equal and no longer than opts.dt. Throws
// StepSizeError when the relative energy drift exceeds opts.max_rel_drift.
Trajectory integrate(const ModelParams& params, const PhasePoint& start,
                     std::span<const double> times, const IntegratorOptions& opts = {});
Trajectory integrate(const ModelParams& params, const PhasePoint& start, double dt,
                     double t_final, double sample_interval);
// Retries with dt/2 until the drift bound passes.
Trajectory integrate_adaptive(const ModelParams& params, const PhasePoint& start,
                              std::span<const double> times, IntegratorOptions opts = {});

// Same splitting applied to the variational equations; the returned tangent
// is the exact differential of the discrete map.
Trajectory tangent_integrate(const ModelParams& params, const PhasePoint& start,
                             const TangentVector& tv, std::span<const double> times,
                             const IntegratorOptions& opts = {});

struct LyapunovEstimate {
  double lambda = 0.0;
  // max - min of the running estimate over the final 20% of renormalizations
  double tail_variation = 0.0;
  int renormalizations = 0;
};

// Benettin estimate of the largest exponent from the tangent flow.
LyapunovEstimate lyapunov(const ModelParams& params, const PhasePoint& start, double t_total,
                          double renorm_interval, const IntegratorOptions& opts = {});

struct GaussianEnsemble {
  PhasePoint center;
  double sigma_q = 0.0;
  double sigma_p = 0.0;
  int n_samples = 1;
  std::uint64_t seed = 0;

  // Mirrors a coherent state with omega = 1: sigma_q = sigma_p = sqrt(hbar/2).
  static GaussianEnsemble coherent(const PhasePoint& center, double hbar, int n_samples,
                                   std::uint64_t seed);
  void validate() const;
};

// Draws n_samples points; deterministic under seed. With width_scale w the
// standard deviations are multiplied by w.
std::vector<PhasePoint> sample_ensemble(const GaussianEnsemble& ens, double width_scale = 1.0);

// Per ensemble: mean over samples of (dp1(t))^2 for the tangent started at
// dq1 = 1. threads only affects wall time.
std::vector<TimeSeries> classical_otoc(const ModelParams& params,
                                       std::span<const GaussianEnsemble> ensembles,
                                       std::span<const double> times,
                                       const IntegratorOptions& opts = {}, int threads = 1);

struct M2Estimate {
  TimeSeries series;      // M2(t), t=0 value subtracted when requested
  double initial = 0.0;   // M2(0) before any subtraction
  std::vector<double> standard_error;  // Monte Carlo standard error per time
};

// Monte Carlo estimate of the classical harmonics second moment through
// the modified-gradient form. Points are drawn from rho0^2, the tangent
// starts along the modified gradient of ln rho0, and the deviations of the
// reference actions I_k = (q_k^2 + p_k^2)/2 are accumulated.
M2Estimate classical_m2(const ModelParams& params, const GaussianEnsemble& ensemble,
                        std::span<const double> times, bool subtract_t0 = false,
                        const IntegratorOptions& opts = {}, int threads = 1);

// Analytic M2(0) of a Gaussian ensemble; for equal widths sigma this is
// sum_k (q_k^2 + p_k^2) / (2 sigma^2) at the center.
double classical_m2_initial(const GaussianEnsemble& ensemble);

// Modified gradient of ln rho0 at x expressed as a Cartesian tangent vector:
// d(theta_k) = d ln rho / d I_k,  d(I_k) = -d ln rho / d theta_k.
// Also returns |grad~ ln rho0|^2 measured in (theta, I) coordinates.
TangentVector modified_gradient_direction(const GaussianEnsemble& ensemble, const PhasePoint& x,
                                          double* norm_sq = nullptr);

struct FourierOracleOptions {
  int theta_points = 64;   // per angle axis
  int action_points = 24;  // per action axis, midpoint rule
  double dt = 1e-2;        // backward flow step
  int box_samples = 4000;  // forward samples bounding the action support
  double box_pad = 0.15;   // relative padding of that support
};

struct FourierOracleResult {
  TimeSeries m2;
  // |M2 - M2 on the half-resolution action grid|
  std::vector<double> quadrature_error;
  // grid value of int rho^2 over its exact value
  std::vector<double> norm_ratio;
  // harmonic weight with some |m_k| > theta_points / 4
  std::vector<double> tail_fraction;
};

// Grid oracle: evaluates rho_t = rho0 o phi_{-t} on an (I, theta) grid by
// backward trajectories, Fourier transforms over both angles and integrates
// sum |m|^2 |rho_m(I)|^2 and sum |rho_m(I)|^2 over the actions.
FourierOracleResult classical_m2_fourier_oracle(const ModelParams& params,
                                                const GaussianEnsemble& ensemble,
                                                std::span<const double> times,
                                                const FourierOracleOptions& fopts = {},
                                                int threads = 1);

struct ShellSpec {
  double e0 = 5.0;
  double de = 0.002;
  int n_centers = 100;
  std::uint64_t seed = 1;
  Vec2 q_max{0.0, 0.0};  // sampling box |q_k| <= q_max[k]; zero -> automatic
  Vec2 p_max{0.0, 0.0};
  long max_rejections = 200'000'000;
};

// Box that contains {H <= e_max}, padded by 1%.
void default_shell_box(const ModelParams& params, double e_max, Vec2& q_max, Vec2& p_max);

// Uniform rejection sampling in the box restricted to |H - e0| <= de/2.
std::vector<PhasePoint> sample_shell(const ModelParams& params, const ShellSpec& spec);

}  // namespace qchaos
