// Copyright 2026 The qchaos Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qchaos/error.hpp"
#include "qchaos/model.hpp"
#include "qchaos/parallel.hpp"

using namespace qchaos;

TEST_CASE("quartic potential values") {
  const auto m = ModelParams::quartic(1.0);
  CHECK(potential(m, {1.0, 1.0}) == doctest::Approx(1.0));
  CHECK(potential(m, {2.0, 0.0}) == doctest::Approx(4.0));
  const auto h = ModelParams::harmonic();
  CHECK(energy(h, {{1.0, 0.0}, {0.0, 1.0}}) == doctest::Approx(1.0));
}

TEST_CASE("force and hessian match finite differences") {
  Rng rng(derive_seed(11, 0));
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (double beta : {0.1, 0.5, 1.0}) {
    const auto m = ModelParams::quartic(beta);
    for (int trial = 0; trial < 50; ++trial) {
      const Vec2 q{u(rng), u(rng)};
      const double h = 1e-5;
      const Vec2 f = force(m, q);
      const auto hs = potential_hessian(m, q);
      for (int k = 0; k < 2; ++k) {
        Vec2 a = q, b = q;
        a[k] += h;
        b[k] -= h;
        CHECK(f[k] == doctest::Approx(-(potential(m, a) - potential(m, b)) / (2 * h)).epsilon(1e-7));
        const Vec2 fa = force(m, a), fb = force(m, b);
        CHECK(hs[static_cast<std::size_t>(k)] == doctest::Approx(-(fa[0] - fb[0]) / (2 * h)).epsilon(1e-6));
        CHECK(hs[static_cast<std::size_t>(2 + k)] ==
              doctest::Approx(-(fa[1] - fb[1]) / (2 * h)).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("action-angle conventions") {
  auto a = to_action_angle({{1.0, 0.0}, {0.0, 0.0}});
  CHECK(a.action[0] == doctest::Approx(0.5));
  CHECK(a.angle[0] == doctest::Approx(0.0));
  a = to_action_angle({{0.0, 0.0}, {1.0, 0.0}});
  CHECK(a.action[0] == doctest::Approx(0.5));
  CHECK(a.angle[0] == doctest::Approx(std::numbers::pi / 2));
}

TEST_CASE("action-angle round trip (property)") {
  Rng rng(derive_seed(12, 0));
  std::uniform_real_distribution<double> u(-3.0, 3.0), w(0.2, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const PhasePoint x{{u(rng), u(rng)}, {u(rng), u(rng)}};
    const double om = w(rng);
    const PhasePoint y = from_action_angle(to_action_angle(x, om), om);
    for (int k = 0; k < 2; ++k) {
      CHECK(y.q[k] == doctest::Approx(x.q[k]).epsilon(1e-12).scale(1.0));
      CHECK(y.p[k] == doctest::Approx(x.p[k]).epsilon(1e-12).scale(1.0));
    }
    const auto aa = to_action_angle(x, om);
    for (int k = 0; k < 2; ++k) {
      CHECK(aa.angle[k] >= 0.0);
      CHECK(aa.angle[k] < 2 * std::numbers::pi);
    }
  }
}

TEST_CASE("unbounded potentials are rejected") {
  ModelParams m = ModelParams::quartic(1.0);
  CHECK_NOTHROW(m.validate());
  m = ModelParams::quartic(-1.0);
  CHECK_THROWS_AS(m.validate(), InvalidArgument);
  m = ModelParams::quartic(1.0, -0.5);
  CHECK_THROWS_AS(m.validate(), InvalidArgument);
  ModelParams odd;
  odd.potential_terms = {{3, 0, 1.0}};
  CHECK_THROWS_AS(odd.validate(), InvalidArgument);
}
