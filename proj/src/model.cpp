// Copyright 2026 The qchaos Authors
// SPDX-License-Identifier: Apache-2.0
#include "qchaos/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "qchaos/error.hpp"

namespace qchaos {

namespace {

inline double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

}  // namespace

ModelParams ModelParams::quartic(double beta, double coupling) {
  ModelParams m;
  m.beta = beta;
  m.coupling = coupling;
  m.potential_terms = {{4, 0, beta / 4.0}, {0, 4, beta / 4.0}, {2, 2, coupling}};
  return m;
}

ModelParams ModelParams::harmonic(double omega) {
  ModelParams m;
  m.beta = 0.0;
  m.coupling = 0.0;
  const double c = 0.5 * omega * omega;
  m.potential_terms = {{2, 0, c}, {0, 2, c}};
  return m;
}

int ModelParams::max_degree() const {
  int d = 0;
  for (const auto& t : potential_terms) {
    if (t.c != 0.0) d = std::max(d, t.j + t.k);
  }
  return d;
}

void ModelParams::validate() const {
  if (potential_terms.empty()) throw InvalidArgument("model: empty potential");
  for (const auto& t : potential_terms) {
    if (t.j < 0 || t.k < 0) throw InvalidArgument("model: negative monomial exponent");
    if (!std::isfinite(t.c)) throw InvalidArgument("model: non-finite monomial coefficient");
  }
  const int d = max_degree();
  if (d == 0 || d % 2 != 0) {
    throw InvalidArgument("model: potential not bounded below (odd or zero leading degree)");
  }
  double pure1 = 0.0, pure2 = 0.0;
  for (const auto& t : potential_terms) {
    if (t.j + t.k != d || t.c == 0.0) continue;
    if (t.j % 2 != 0 || t.k % 2 != 0 || t.c < 0.0) {
      std::ostringstream os;
      os << "model: leading term " << t.c << " q1^" << t.j << " q2^" << t.k
         << " makes the potential unbounded below";
      throw InvalidArgument(os.str());
    }
    if (t.k == 0) pure1 += t.c;
    if (t.j == 0) pure2 += t.c;
  }
  if (!(pure1 > 0.0) || !(pure2 > 0.0)) {
    throw InvalidArgument("model: leading pure powers must have positive coefficients");
  }
}

double potential(const ModelParams& params, const Vec2& q) {
  double v = 0.0;
  for (const auto& t : params.potential_terms) v += t.c * ipow(q[0], t.j) * ipow(q[1], t.k);
  return v;
}

Vec2 force(const ModelParams& params, const Vec2& q) {
  Vec2 f{0.0, 0.0};
  for (const auto& t : params.potential_terms) {
    if (t.j > 0) f[0] -= t.c * t.j * ipow(q[0], t.j - 1) * ipow(q[1], t.k);
    if (t.k > 0) f[1] -= t.c * t.k * ipow(q[0], t.j) * ipow(q[1], t.k - 1);
  }
  return f;
}

std::array<double, 4> potential_hessian(const ModelParams& params, const Vec2& q) {
  double h11 = 0.0, h12 = 0.0, h22 = 0.0;
  for (const auto& t : params.potential_terms) {
    if (t.j > 1) h11 += t.c * t.j * (t.j - 1) * ipow(q[0], t.j - 2) * ipow(q[1], t.k);
    if (t.k > 1) h22 += t.c * t.k * (t.k - 1) * ipow(q[0], t.j) * ipow(q[1], t.k - 2);
    if (t.j > 0 && t.k > 0) h12 += t.c * t.j * t.k * ipow(q[0], t.j - 1) * ipow(q[1], t.k - 1);
  }
  return {h11, h12, h12, h22};
}

double energy(const ModelParams& params, const PhasePoint& point) {
  return 0.5 * (point.p[0] * point.p[0] + point.p[1] * point.p[1]) + potential(params, point.q);
}

double wrap_angle(double theta) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(theta, two_pi);
  if (w < 0.0) w += two_pi;
  // fmod can return two_pi - ulp + two_pi rounding to two_pi
  if (w >= two_pi) w = 0.0;
  return w;
}

ActionAngle to_action_angle(const PhasePoint& point, double omega) {
  if (!(omega > 0.0)) throw InvalidArgument("to_action_angle: omega must be positive");
  ActionAngle aa;
  const double s = std::sqrt(2.0 * omega);
  for (int k = 0; k < 2; ++k) {
    const double re = omega * point.q[k] / s;
    const double im = point.p[k] / s;
    aa.action[k] = re * re + im * im;
    aa.angle[k] = wrap_angle(std::atan2(im, re));
  }
  return aa;
}

PhasePoint from_action_angle(const ActionAngle& aa, double omega) {
  if (!(omega > 0.0)) throw InvalidArgument("from_action_angle: omega must be positive");
  PhasePoint pt;
  const double s = std::sqrt(2.0 * omega);
  for (int k = 0; k < 2; ++k) {
    if (aa.action[k] < 0.0) throw InvalidArgument("from_action_angle: negative action");
    const double r = std::sqrt(aa.action[k]);
    pt.q[k] = s * r * std::cos(aa.angle[k]) / omega;
    pt.p[k] = s * r * std::sin(aa.angle[k]);
  }
  return pt;
}

}  // namespace qchaos
