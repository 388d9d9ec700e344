// Copyright 2026 The qchaos Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qchaos/classical.hpp"
#include "qchaos/error.hpp"
#include "qchaos/parallel.hpp"

using namespace qchaos;

TEST_CASE("harmonic orbit closes after one period") {
  const auto h = ModelParams::harmonic();
  const std::vector<double> t{2 * std::numbers::pi};
  const auto tr = integrate(h, {{1.0, 0.0}, {0.0, 0.0}}, t);
  CHECK(std::abs(tr.points[0].q[0] - 1.0) < 1e-8);
  CHECK(std::abs(tr.points[0].p[0]) < 1e-8);
}

TEST_CASE("harmonic tangent flow is analytic") {
  const auto h = ModelParams::harmonic();
  const auto times = linear_grid(10.0, 41);
  TangentVector tv;
  tv.dq[0] = 1.0;
  const auto tr = tangent_integrate(h, {{0.3, -0.2}, {0.1, 0.4}}, tv, times);
  for (std::size_t i = 0; i < times.size(); ++i) {
    CHECK(std::abs(tr.tangents[i].dp[0] + std::sin(times[i])) < 1e-8);
    CHECK(std::abs(tr.tangents[i].dq[0] - std::cos(times[i])) < 1e-8);
  }
}

TEST_CASE("energy conservation at beta = 1 over t = 100") {
  const auto m = ModelParams::quartic(1.0);
  Rng rng(derive_seed(21, 0));
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 3; ++trial) {
    const PhasePoint x{{u(rng), u(rng)}, {u(rng), u(rng)}};
    const auto tr = integrate(m, x, 1e-3, 100.0, 1.0);
    CHECK(tr.rel_energy_drift < 1e-8);
  }
}

TEST_CASE("drift violations are reported") {
  IntegratorOptions o;
  o.dt = 0.5;
  const std::vector<double> t{50.0};
  CHECK_THROWS_AS(integrate(ModelParams::quartic(1.0), {{2.0, 1.0}, {0.0, 0.5}}, t, o), StepSizeError);
  o.max_halvings = 12;
  CHECK_NOTHROW(integrate_adaptive(ModelParams::quartic(1.0), {{2.0, 1.0}, {0.0, 0.5}}, t, o));
}

TEST_CASE("tangent map against finite differences (property)") {
  Rng rng(derive_seed(22, 0));
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  const auto times = linear_grid(5.0, 11);
  for (double beta : {0.1, 1.0}) {
    const auto m = ModelParams::quartic(beta);
    for (int trial = 0; trial < 4; ++trial) {
      const PhasePoint x{{u(rng), u(rng)}, {u(rng), u(rng)}};
      TangentVector tv;
      tv.dq = {u(rng), u(rng)};
      tv.dp = {u(rng), u(rng)};
      const auto lin = tangent_integrate(m, x, tv, times);
      const double eps = 1e-6;
      PhasePoint xp = x, xm = x;
      for (int k = 0; k < 2; ++k) {
        xp.q[k] += eps * tv.dq[k];
        xp.p[k] += eps * tv.dp[k];
        xm.q[k] -= eps * tv.dq[k];
        xm.p[k] -= eps * tv.dp[k];
      }
      const auto a = integrate(m, xp, times), b = integrate(m, xm, times);
      for (std::size_t i = 1; i < times.size(); ++i) {
        double num = 0.0, den = 0.0;
        for (int k = 0; k < 2; ++k) {
          const double fq = (a.points[i].q[k] - b.points[i].q[k]) / (2 * eps);
          const double fp = (a.points[i].p[k] - b.points[i].p[k]) / (2 * eps);
          num += std::pow(fq - lin.tangents[i].dq[k], 2) + std::pow(fp - lin.tangents[i].dp[k], 2);
          den += fq * fq + fp * fp;
        }
        CHECK(std::sqrt(num / den) < 1e-4);
      }
    }
  }
}

TEST_CASE("classical OTOC for the harmonic potential") {
  const auto times = linear_grid(20.0, 81);
  std::vector<GaussianEnsemble> ens{GaussianEnsemble::coherent({{0.5, 1.0}, {-0.2, 0.3}}, 0.25, 5, 3)};
  const auto s = classical_otoc(ModelParams::harmonic(), ens, times);
  for (std::size_t i = 0; i < times.size(); ++i) {
    CHECK(std::abs(s[0].values[i] - std::pow(std::sin(times[i]), 2)) < 1e-6);
  }
}

TEST_CASE("ensembles are reproducible and thread-independent") {
  const auto m = ModelParams::quartic(0.1);
  const auto times = linear_grid(3.0, 7);
  std::vector<GaussianEnsemble> ens{GaussianEnsemble::coherent({{1.0, 2.0}, {0.5, -1.0}}, 0.125, 12, 99)};
  const auto a = classical_otoc(m, ens, times, {}, 1);
  const auto b = classical_otoc(m, ens, times, {}, 3);
  CHECK(a[0].values == b[0].values);
  ens[0].seed = 100;
  const auto c = classical_otoc(m, ens, times, {}, 1);
  CHECK(a[0].values.back() != c[0].values.back());
}

TEST_CASE("initial harmonics moment") {
  // Analytic value for equal widths: sum (q^2 + p^2) / (2 sigma^2).
  const auto e = GaussianEnsemble::coherent({{1.0, 2.0}, {0.5, -1.0}}, 0.125, 20000, 5);
  const double expect = (1 + 4 + 0.25 + 1) / (2 * 0.0625);
  CHECK(classical_m2_initial(e) == doctest::Approx(expect));
  const std::vector<double> t0{0.0};
  const auto est = classical_m2(ModelParams::quartic(0.1), e, t0);
  CHECK(std::abs(est.series.values[0] - expect) < 4 * est.standard_error[0]);
  // Unequal widths pick up the squeezing term.
  GaussianEnsemble sq = e;
  sq.sigma_q = 0.2;
  sq.sigma_p = 0.4;
  const auto est2 = classical_m2(ModelParams::quartic(0.1), sq, t0);
  CHECK(std::abs(est2.series.values[0] - classical_m2_initial(sq)) < 4 * est2.standard_error[0]);
}

TEST_CASE("classical M2 agrees with the angular Fourier oracle") {
  const auto m = ModelParams::quartic(0.1);
  const std::vector<double> times{0.0, 0.5, 1.0};
  const auto e = GaussianEnsemble::coherent({{0.9, 0.6}, {0.6, -0.9}}, 1.0, 4000, 8);
  const auto est = classical_m2(m, e, times);
  FourierOracleOptions fo;
  fo.theta_points = 48;
  fo.action_points = 16;
  fo.box_samples = 1000;
  const auto oracle = classical_m2_fourier_oracle(m, e, times, fo);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double err = std::hypot(est.standard_error[i], oracle.quadrature_error[i]);
    INFO("t=" << times[i] << " tangent=" << est.series.values[i] << " oracle=" << oracle.m2.values[i]
              << " err=" << err);
    CHECK(std::abs(est.series.values[i] - oracle.m2.values[i]) < 4 * err);
    CHECK(std::abs(oracle.norm_ratio[i] - 1.0) < 0.02);
    CHECK(oracle.tail_fraction[i] < 1e-3);
  }
}

TEST_CASE("shell sampling") {
  const auto m = ModelParams::quartic(0.1);
  ShellSpec s;
  s.n_centers = 40;
  const auto pts = sample_shell(m, s);
  REQUIRE(pts.size() == 40);
  for (const auto& x : pts) CHECK(std::abs(energy(m, x) - 5.0) <= 0.001);
  CHECK(sample_shell(m, s)[7].q[0] == pts[7].q[0]);
  s.max_rejections = 10;
  s.de = 1e-9;
  CHECK_THROWS_AS(sample_shell(m, s), ConvergenceError);
}

TEST_CASE("Lyapunov exponent separates chaotic and regular motion") {
  const auto chaotic = lyapunov(ModelParams::quartic(0.1), {{2.0, 1.0}, {0.5, 1.0}}, 400.0, 1.0);
  CHECK(chaotic.lambda > 0.2);
  const auto harmonic = lyapunov(ModelParams::harmonic(), {{1.0, 0.5}, {0.0, 0.2}}, 400.0, 1.0);
  CHECK(harmonic.lambda < 0.02);
}
