// Copyright 2026 The qchaos Authors
// SPDX-License-Identifier: Apache-2.0
//
// Two-mode nonlinear oscillator model: polynomial potentials, Hamilton's
// equations and the reference-oscillator action-angle map.
#pragma once

#include <array>
#include <vector>

namespace qchaos {

using Vec2 = std::array<double, 2>;

// c * q1^j * q2^k
struct Monomial {
  int j = 0;
  int k = 0;
  double c = 0.0;
};

struct ModelParams {
  double beta = 1.0;
  double coupling = 0.5;
  std::vector<Monomial> potential_terms;

  // V = (beta/4)(q1^4 + q2^4) + coupling q1^2 q2^2.
  static ModelParams quartic(double beta, double coupling = 0.5);
  // V = (omega^2/2)(q1^2 + q2^2); beta and coupling are set to zero.
  static ModelParams harmonic(double omega = 1.0);

  // Throws InvalidArgument if the potential is not bounded below by the
  // leading-degree test: top total degree even, every top-degree term has
  // even exponents and nonnegative coefficient, both pure powers positive.
  void validate() const;
  int max_degree() const;
};

struct PhasePoint {
  Vec2 q{0.0, 0.0};
  Vec2 p{0.0, 0.0};
};

struct ActionAngle {
  Vec2 action{0.0, 0.0};
  Vec2 angle{0.0, 0.0};  // wrapped to [0, 2pi)
};

double potential(const ModelParams& params, const Vec2& q);
Vec2 force(const ModelParams& params, const Vec2& q);
// Hessian of V, row-major {V_11, V_12, V_21, V_22}.
std::array<double, 4> potential_hessian(const ModelParams& params, const Vec2& q);
double energy(const ModelParams& params, const PhasePoint& point);

// alpha_k = (omega q_k + i p_k) / sqrt(2 omega) = sqrt(I_k) exp(i theta_k)
ActionAngle to_action_angle(const PhasePoint& point, double omega = 1.0);
PhasePoint from_action_angle(const ActionAngle& aa, double omega = 1.0);

double wrap_angle(double theta);

}  // namespace qchaos
