// Copyright 2026 The qchaos Authors
// SPDX-License-Identifier: Apache-2.0
//
// Multiple-quantum-coherence echo: forward evolution, phase rotation
// exp(-i(n1 phi1 + n2 phi2)), backward evolution, return probability.
#pragma once

#include <Eigen/Dense>
#include <map>
#include <utility>

#include "qchaos/model.hpp"
#include "qchaos/quantum.hpp"

namespace qchaos {

// Uniform phases phi_k = 2 pi j / n_k. n_k = 1 leaves mode k unrotated,
// which yields the marginal over m_k.
struct PhaseGrid {
  int n1 = 1;
  int n2 = 1;

  static PhaseGrid nyquist(const FockBasis& basis);  // 2 n_max + 1 per mode
  static PhaseGrid single_mode(const FockBasis& basis, int mode);
  void validate() const;
  bool resolves(const FockBasis& basis) const;  // each rotated mode >= 2 n_max + 1
  double phi(int mode, int j) const;
};

// |<psi0| U^dag W(phi) U |psi0>|^2 with U and U^dag applied as separate
// propagations.
double echo_signal(const StateVector& state0, const Propagator& prop, double t, const Vec2& phi);

// Signals on the whole grid; entry (j1, j2) belongs to (phi_1j1, phi_2j2).
Eigen::MatrixXd echo_signals(const StateVector& state0, const Propagator& prop, double t,
                             const PhaseGrid& grid, int batch = 32);

struct CoherenceSpectrum {
  std::map<std::pair<int, int>, double> intensities;
  double boundary_weight = 0.0;  // weight on the fold boundary of either axis
  bool aliasing_warning = false;

  double total() const;
};

// Inverse DFT of the grid signals. With n_max >= 0, warns when a rotated
// axis has fewer than 2 n_max + 1 points; otherwise warns when
// boundary_weight > 1e-8.
CoherenceSpectrum extract_intensities(const Eigen::MatrixXd& signals, int n_max = -1);

// sum |m|^2 I_m / purity.
double m2_from_mqc(const CoherenceSpectrum& spectrum, double purity = 1.0);

}  // namespace qchaos
