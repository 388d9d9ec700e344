// Copyright 2026 The qchaos Authors
// SPDX-License-Identifier: Apache-2.0
#include "qchaos/fock.hpp"

#include <cmath>
#include <sstream>

#include "qchaos/error.hpp"

namespace qchaos {

FockBasis::FockBasis(double hbar, int n_max, double omega, std::size_t max_states)
    : hbar_(hbar), omega_(omega), n_max_(n_max) {
  if (!(hbar > 0.0) || !std::isfinite(hbar)) throw InvalidArgument("basis: hbar must be positive");
  if (!(omega > 0.0) || !std::isfinite(omega)) throw InvalidArgument("basis: omega must be positive");
  if (n_max < 0) throw InvalidArgument("basis: n_max must be nonnegative");
  const auto per_mode = static_cast<std::size_t>(n_max) + 1;
  if (per_mode > max_states / per_mode) {
    std::ostringstream os;
    os << "basis: n_max=" << n_max << " gives " << per_mode * per_mode
       << " states, above the bound of " << max_states;
    throw InvalidArgument(os.str());
  }
  states_.reserve(per_mode * per_mode);
  for (int n1 = 0; n1 <= n_max; ++n1) {
    for (int n2 = 0; n2 <= n_max; ++n2) states_.emplace_back(n1, n2);
  }
}

FockBasis build_basis(double hbar, int n_max, double omega, std::size_t max_states) {
  return FockBasis(hbar, n_max, omega, max_states);
}

double OperatorMatrix::hermiticity_residual() const {
  const SparseC adj = entries.adjoint();
  const SparseC diff = entries - adj;
  double r = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k) {
    for (SparseC::InnerIterator it(diff, k); it; ++it) r = std::max(r, std::abs(it.value()));
  }
  return r;
}

bool OperatorMatrix::is_real() const {
  for (int k = 0; k < entries.outerSize(); ++k) {
    for (SparseC::InnerIterator it(entries, k); it; ++it) {
      if (it.value().imag() != 0.0) return false;
    }
  }
  return true;
}

SparseR OperatorMatrix::real_part() const { return entries.real(); }

namespace {

// Ladder matrix elements in a space of dimension dim.
Eigen::MatrixXd annihilation(int dim) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

// Kronecker product of two dense single-mode matrices (exact zeros dropped).
SparseC kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = b.rows();
  std::vector<Eigen::Triplet<Complex>> trip;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (a(i, j) == Complex(0.0)) continue;
      for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index l = 0; l < n; ++l) {
          if (b(k, l) == Complex(0.0)) continue;
          trip.emplace_back(static_cast<int>(i * n + k), static_cast<int>(j * n + l), a(i, j) * b(k, l));
        }
      }
    }
  }
  SparseC out(m * n, m * n);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

Eigen::MatrixXcd position_1d(int n_max, double hbar, double omega) {
  const Eigen::MatrixXd a = annihilation(n_max + 1);
  return (std::sqrt(hbar / (2.0 * omega)) * (a + a.transpose())).cast<Complex>();
}

Eigen::MatrixXcd momentum_1d(int n_max, double hbar, double omega) {
  const Eigen::MatrixXd a = annihilation(n_max + 1);
  const Eigen::MatrixXd d = a.transpose() - a;
  return Complex(0.0, std::sqrt(hbar * omega / 2.0)) * d.cast<Complex>();
}

Eigen::MatrixXcd number_1d(int n_max) {
  Eigen::MatrixXcd n = Eigen::MatrixXcd::Zero(n_max + 1, n_max + 1);
  for (int i = 0; i <= n_max; ++i) n(i, i) = static_cast<double>(i);
  return n;
}

}  // namespace

Eigen::MatrixXd position_power_1d(int power, int n_max, double hbar, double omega) {
  if (power < 0) throw InvalidArgument("position_power_1d: negative power");
  const int ext = n_max + 1 + power;
  const Eigen::MatrixXd a = annihilation(ext);
  const Eigen::MatrixXd q = std::sqrt(hbar / (2.0 * omega)) * (a + a.transpose());
  Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(ext, ext);
  for (int i = 0; i < power; ++i) acc = acc * q;
  return acc.topLeftCorner(n_max + 1, n_max + 1);
}

Eigen::MatrixXd momentum_square_1d(int n_max, double hbar, double omega) {
  const int ext = n_max + 3;
  const Eigen::MatrixXd a = annihilation(ext);
  const Eigen::MatrixXd d = a.transpose() - a;
  // p^2 = -(hbar omega / 2) (a^dag - a)^2
  const Eigen::MatrixXd p2 = -(hbar * omega / 2.0) * (d * d);
  return p2.topLeftCorner(n_max + 1, n_max + 1);
}

OperatorMatrix operator_matrix(OperatorKind kind, int mode, const FockBasis& basis) {
  if (mode != 0 && mode != 1) throw InvalidArgument("operator_matrix: mode must be 0 or 1");
  const int n = basis.n_max();
  Eigen::MatrixXcd single;
  switch (kind) {
    case OperatorKind::kPosition: single = position_1d(n, basis.hbar(), basis.omega()); break;
    case OperatorKind::kMomentum: single = momentum_1d(n, basis.hbar(), basis.omega()); break;
    case OperatorKind::kNumber: single = number_1d(n); break;
  }
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n + 1, n + 1);
  OperatorMatrix op;
  op.entries = mode == 0 ? kron(single, id) : kron(id, single);
  op.hermitian = true;
  return op;
}

OperatorMatrix hamiltonian_matrix(const ModelParams& params, const FockBasis& basis) {
  params.validate();
  const int n = basis.n_max();
  const double hb = basis.hbar();
  const double om = basis.omega();
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n + 1, n + 1);
  const Eigen::MatrixXcd p2 = momentum_square_1d(n, hb, om).cast<Complex>();

  SparseC h = 0.5 * (kron(p2, id) + kron(id, p2));
  int max_power = 0;
  for (const auto& t : params.potential_terms) max_power = std::max({max_power, t.j, t.k});
  std::vector<Eigen::MatrixXcd> qpow;
  qpow.reserve(static_cast<std::size_t>(max_power) + 1);
  for (int k = 0; k <= max_power; ++k) qpow.push_back(position_power_1d(k, n, hb, om).cast<Complex>());
  for (const auto& t : params.potential_terms) {
    if (t.c == 0.0) continue;
    h += t.c * kron(qpow[static_cast<std::size_t>(t.j)], qpow[static_cast<std::size_t>(t.k)]);
  }
  h.prune(Complex(0.0));
  // Symmetrize so the stored matrix is exactly Hermitian.
  const SparseC adj = h.adjoint();
  OperatorMatrix op;
  op.entries = 0.5 * (h + adj);
  op.hermitian = true;
  return op;
}

std::pair<int, int> per_mode_bandwidth(const OperatorMatrix& op, const FockBasis& basis) {
  int b1 = 0, b2 = 0;
  for (int k = 0; k < op.entries.outerSize(); ++k) {
    for (SparseC::InnerIterator it(op.entries, k); it; ++it) {
      if (it.value() == Complex(0.0)) continue;
      const auto& [r1, r2] = basis.state(static_cast<std::size_t>(it.row()));
      const auto& [c1, c2] = basis.state(static_cast<std::size_t>(it.col()));
      b1 = std::max(b1, std::abs(r1 - c1));
      b2 = std::max(b2, std::abs(r2 - c2));
    }
  }
  return {b1, b2};
}

}  // namespace qchaos
