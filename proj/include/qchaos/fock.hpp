// Copyright 2026 The qchaos Authors
// SPDX-License-Identifier: Apache-2.0
//
// Truncated two-mode Fock basis and sparse operators on it.
//
// Ladder convention (reference oscillator of frequency omega):
//   q = sqrt(hbar / 2 omega) (a + a^dag),   p = i sqrt(hbar omega / 2) (a^dag - a).
// Basis states (n1, n2) with 0 <= n_k <= n_max are stored mode-1 major:
//   index(n1, n2) = n1 * (n_max + 1) + n2.
#pragma once

#include <Eigen/Sparse>
#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "qchaos/model.hpp"

namespace qchaos {

using Complex = std::complex<double>;
using SparseC = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;
using SparseR = Eigen::SparseMatrix<double, Eigen::RowMajor>;

inline constexpr std::size_t kDefaultMaxBasisStates = 1'000'000;

class FockBasis {
 public:
  FockBasis(double hbar, int n_max, double omega = 1.0,
            std::size_t max_states = kDefaultMaxBasisStates);

  double hbar() const noexcept { return hbar_; }
  double omega() const noexcept { return omega_; }
  int n_max() const noexcept { return n_max_; }
  int modes_dim() const noexcept { return n_max_ + 1; }
  std::size_t size() const noexcept { return states_.size(); }

  std::size_t index(int n1, int n2) const noexcept {
    return static_cast<std::size_t>(n1) * static_cast<std::size_t>(n_max_ + 1) +
           static_cast<std::size_t>(n2);
  }
  const std::pair<int, int>& state(std::size_t i) const { return states_[i]; }
  const std::vector<std::pair<int, int>>& states() const noexcept { return states_; }

  friend bool operator==(const FockBasis& a, const FockBasis& b) {
    return a.hbar_ == b.hbar_ && a.omega_ == b.omega_ && a.n_max_ == b.n_max_;
  }

 private:
  double hbar_;
  double omega_;
  int n_max_;
  std::vector<std::pair<int, int>> states_;
};

FockBasis build_basis(double hbar, int n_max, double omega = 1.0,
                      std::size_t max_states = kDefaultMaxBasisStates);

struct OperatorMatrix {
  SparseC entries;
  bool hermitian = false;

  Eigen::Index dimension() const { return entries.rows(); }
  // max |A - A^dag| over stored entries
  double hermiticity_residual() const;
  // True when every entry has zero imaginary part.
  bool is_real() const;
  SparseR real_part() const;
};

enum class OperatorKind { kPosition, kMomentum, kNumber };

// mode is 0 or 1.
OperatorMatrix operator_matrix(OperatorKind kind, int mode, const FockBasis& basis);

// Full Hamiltonian (p1^2 + p2^2)/2 + V(q1, q2). Powers of q and p are
// truncations of the exact infinite-dimensional powers, so quadratic
// forms such as (p^2 + omega^2 q^2)/2 are exactly diagonal up to the cutoff.
OperatorMatrix hamiltonian_matrix(const ModelParams& params, const FockBasis& basis);

// Largest |n1 - n1'| (resp. |n2 - n2'|) over nonzero entries.
std::pair<int, int> per_mode_bandwidth(const OperatorMatrix& op, const FockBasis& basis);

// Single-mode matrices, dimension n_max + 1, exact truncations.
Eigen::MatrixXd position_power_1d(int power, int n_max, double hbar, double omega);
Eigen::MatrixXd momentum_square_1d(int n_max, double hbar, double omega);

}  // namespace qchaos
