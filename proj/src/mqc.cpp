// Copyright 2026 The qchaos Authors
// SPDX-License-Identifier: Apache-2.0
#include "qchaos/mqc.hpp"

#include <unsupported/Eigen/FFT>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qchaos/error.hpp"

namespace qchaos {

PhaseGrid PhaseGrid::nyquist(const FockBasis& basis) {
  return {2 * basis.n_max() + 1, 2 * basis.n_max() + 1};
}

PhaseGrid PhaseGrid::single_mode(const FockBasis& basis, int mode) {
  if (mode != 0 && mode != 1) throw InvalidArgument("phase grid: mode must be 0 or 1");
  PhaseGrid g;
  (mode == 0 ? g.n1 : g.n2) = 2 * basis.n_max() + 1;
  return g;
}

void PhaseGrid::validate() const {
  if (n1 < 1 || n2 < 1) throw InvalidArgument("phase grid: point counts must be positive");
}

bool PhaseGrid::resolves(const FockBasis& basis) const {
  const int need = 2 * basis.n_max() + 1;
  return (n1 == 1 || n1 >= need) && (n2 == 1 || n2 >= need);
}

double PhaseGrid::phi(int mode, int j) const {
  return 2.0 * std::numbers::pi * j / (mode == 0 ? n1 : n2);
}

namespace {

void rotate(const FockBasis& basis, Eigen::Ref<Eigen::VectorXcd> psi, const Vec2& phi) {
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto& [a, b] = basis.state(i);
    psi(static_cast<Eigen::Index>(i)) *= std::polar(1.0, -(a * phi[0] + b * phi[1]));
  }
}

void check_state(const StateVector& s) {
  if (std::abs(s.norm() - 1.0) > 1e-10) throw InvalidArgument("echo: initial state must be normalized");
}

}  // namespace

double echo_signal(const StateVector& state0, const Propagator& prop, double t, const Vec2& phi) {
  check_state(state0);
  Eigen::VectorXcd psi = state0.amplitudes();
  prop.apply(psi, t);
  rotate(state0.basis(), psi, phi);
  prop.apply(psi, -t);
  return std::norm(state0.amplitudes().dot(psi));
}

Eigen::MatrixXd echo_signals(const StateVector& state0, const Propagator& prop, double t,
                             const PhaseGrid& grid, int batch) {
  check_state(state0);
  grid.validate();
  if (batch < 1) throw InvalidArgument("echo: batch must be positive");
  Eigen::VectorXcd fwd = state0.amplitudes();
  prop.apply(fwd, t);
  const long total = static_cast<long>(grid.n1) * grid.n2;
  Eigen::MatrixXd out(grid.n1, grid.n2);
  for (long start = 0; start < total; start += batch) {
    const long k = std::min<long>(batch, total - start);
    Eigen::MatrixXcd cols(fwd.size(), k);
    for (long c = 0; c < k; ++c) {
      const long idx = start + c;
      cols.col(c) = fwd;
      rotate(state0.basis(), cols.col(c),
             {grid.phi(0, static_cast<int>(idx / grid.n2)), grid.phi(1, static_cast<int>(idx % grid.n2))});
    }
    prop.apply_batch(cols, -t);
    for (long c = 0; c < k; ++c) {
      const long idx = start + c;
      out(idx / grid.n2, idx % grid.n2) = std::norm(state0.amplitudes().dot(cols.col(c)));
    }
  }
  return out;
}

double CoherenceSpectrum::total() const {
  double s = 0.0;
  for (const auto& [m, v] : intensities) s += v;
  return s;
}

CoherenceSpectrum extract_intensities(const Eigen::MatrixXd& signals, int n_max) {
  const auto n1 = static_cast<int>(signals.rows()), n2 = static_cast<int>(signals.cols());
  if (n1 < 1 || n2 < 1) throw InvalidArgument("extract_intensities: empty signal grid");
  // S(phi) = sum_m I_m exp(-i m.phi), so I_m is the inverse DFT.
  Eigen::MatrixXcd f = signals.cast<Complex>();
  Eigen::FFT<double> fft;
  Eigen::VectorXcd in, out;
  if (n2 > 1) {
    for (int a = 0; a < n1; ++a) {
      in = f.row(a).transpose();
      fft.inv(out, in);
      f.row(a) = out.transpose();
    }
  }
  if (n1 > 1) {
    for (int b = 0; b < n2; ++b) {
      in = f.col(b);
      fft.inv(out, in);
      f.col(b) = out;
    }
  }
  CoherenceSpectrum cs;
  auto fold = [](int k, int n) { return k <= n / 2 ? k : k - n; };
  for (int a = 0; a < n1; ++a) {
    for (int b = 0; b < n2; ++b) {
      const int m1 = fold(a, n1), m2 = fold(b, n2);
      const double v = f(a, b).real();
      cs.intensities[{m1, m2}] = v;
      const bool edge = (n1 > 1 && std::abs(m1) == n1 / 2) || (n2 > 1 && std::abs(m2) == n2 / 2);
      if (edge) cs.boundary_weight += std::abs(v);
    }
  }
  std::ostringstream os;
  if (n_max >= 0) {
    const int need = 2 * n_max + 1;
    if ((n1 > 1 && n1 < need) || (n2 > 1 && n2 < need)) {
      cs.aliasing_warning = true;
      os << "extract_intensities: phase grid " << n1 << "x" << n2 << " is below the " << need
         << " points per mode needed for n_max=" << n_max << "; coherences alias";
    }
  } else if (cs.boundary_weight > 1e-8) {
    cs.aliasing_warning = true;
    os << "extract_intensities: weight " << cs.boundary_weight
       << " on the fold boundary; the phase grid may undersample the coherence spectrum";
  }
  if (cs.aliasing_warning) warn(os.str());
  return cs;
}

double m2_from_mqc(const CoherenceSpectrum& spectrum, double purity) {
  if (!(purity > 0.0 && purity <= 1.0 + 1e-12)) throw InvalidArgument("m2_from_mqc: purity must be in (0, 1]");
  double s = 0.0;
  for (const auto& [m, v] : spectrum.intensities) s += (m.first * m.first + m.second * m.second) * v;
  return s / purity;
}

}  // namespace qchaos
