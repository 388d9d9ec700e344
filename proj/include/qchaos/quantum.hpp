// Copyright 2026 The qchaos Authors
// SPDX-License-Identifier: Apache-2.0
//
// Pure-state dynamics in the truncated Fock basis.
#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "qchaos/fock.hpp"
#include "qchaos/series.hpp"

namespace qchaos {

class StateVector {
 public:
  StateVector(std::shared_ptr<const FockBasis> basis, Eigen::VectorXcd amplitudes);

  const FockBasis& basis() const noexcept { return *basis_; }
  const std::shared_ptr<const FockBasis>& basis_ptr() const noexcept { return basis_; }
  const Eigen::VectorXcd& amplitudes() const noexcept { return amps_; }
  Eigen::VectorXcd& amplitudes() noexcept { return amps_; }
  double norm() const { return amps_.norm(); }

 private:
  std::shared_ptr<const FockBasis> basis_;
  Eigen::VectorXcd amps_;
};

enum class PropagationMethod {
  kAuto,      // spectral when the largest symmetry block fits spectral_max_block
  kKrylov,    // short-iterative Lanczos
  kSpectral,  // exact exponential from a parity-blocked eigendecomposition
};

struct PropagatorSpec {
  double dt = 0.05;
  int krylov_dim = 30;
  double tol = 1e-10;
  PropagationMethod method = PropagationMethod::kAuto;
  Eigen::Index spectral_max_block = 9000;
};

// Applies exp(-i H t / hbar) in place; t may be negative.
class Propagator {
 public:
  virtual ~Propagator() = default;
  virtual void apply(Eigen::VectorXcd& psi, double t) const = 0;
  // Propagates every column by the same t.
  virtual void apply_batch(Eigen::MatrixXcd& psi, double t) const;
  virtual const char* name() const noexcept = 0;
};

class KrylovPropagator final : public Propagator {
 public:
  KrylovPropagator(const OperatorMatrix& h, double hbar, const PropagatorSpec& spec);
  void apply(Eigen::VectorXcd& psi, double t) const override;
  const char* name() const noexcept override { return "krylov"; }

 private:
  // One Lanczos step of length tau; returns false when the error estimate
  // exceeds the tolerance.
  bool try_step(Eigen::VectorXcd& psi, double tau) const;

  SparseC h_;
  double hbar_;
  PropagatorSpec spec_;
};

// Exact exponential from symmetry blocks of a real symmetric Hamiltonian:
// number parity of each mode and, when H commutes with mode exchange, the
// exchange-even/odd combinations. The (even, odd) and (odd, even) parity
// blocks of an exchange-symmetric H share one eigendecomposition.
class SpectralPropagator final : public Propagator {
 public:
  SpectralPropagator(const OperatorMatrix& h, const FockBasis& basis);
  void apply(Eigen::VectorXcd& psi, double t) const override;
  void apply_batch(Eigen::MatrixXcd& psi, double t) const override;
  const char* name() const noexcept override { return "spectral"; }

  std::size_t block_count() const noexcept { return groups_.size(); }
  Eigen::Index largest_block() const noexcept;
  bool exchange_symmetric() const noexcept { return exchange_; }

 private:
  struct Group {
    std::vector<SparseR> maps;  // columns are orthonormal sector vectors
    Eigen::VectorXd energies;
    Eigen::MatrixXd vectors;
  };
  std::vector<Group> groups_;
  double hbar_;
  bool exchange_ = false;
};

// Largest symmetry block the spectral propagator would diagonalize.
Eigen::Index spectral_block_estimate(const FockBasis& basis, bool exchange_symmetric);

std::unique_ptr<Propagator> make_propagator(const OperatorMatrix& h, const FockBasis& basis,
                                            const PropagatorSpec& spec);

// Coherent product state with alpha_k = (omega q_k + i p_k) / sqrt(2 hbar omega).
// Throws TruncationError when the per-mode Poisson tail beyond n_max exceeds
// max_tail; the truncated vector is renormalized.
StateVector coherent_state(const PhasePoint& center, std::shared_ptr<const FockBasis> basis,
                           double max_tail = 1e-10);
// Smallest n_max whose per-mode Poisson tail is below max_tail for every
// point in `centers`, plus `margin` extra quanta.
int coherent_cutoff(std::span<const PhasePoint> centers, double hbar, double omega,
                    double max_tail, int margin);

StateVector fock_state(int n1, int n2, std::shared_ptr<const FockBasis> basis);

StateVector evolve(const StateVector& state, const Propagator& prop, double t);
StateVector evolve(const StateVector& state, const OperatorMatrix& h, double t,
                   const PropagatorSpec& spec);

double expectation(const StateVector& state, const OperatorMatrix& op);

// 2 sum_k Var(n_k).
double number_variance_m2(const StateVector& state);

// Population of the top `shells` occupation numbers of either mode.
double edge_population(const StateVector& state, int shells = 5);

struct HarmonicsSpectrum {
  std::map<std::pair<int, int>, double> weights;

  double total() const;
  double second_moment() const;  // sum |m|^2 W_m
};

// W_m = sum_n |rho_{n+m,n}|^2 / sum_{m,n} |rho_{n+m,n}|^2 for rho = |psi><psi|;
// indices with any negative occupation are excluded.
HarmonicsSpectrum harmonics_distribution(const StateVector& state, double drop_below = 0.0);

struct QuantumRunStats {
  double max_norm_drift = 0.0;
  double max_rel_energy_drift = 0.0;
  double max_edge_population = 0.0;
};

// C_pp(t) = ||U^dag p U p psi - p U^dag p U psi||^2 / hbar^2 per sample time.
TimeSeries otoc_pp(const StateVector& state0, const OperatorMatrix& h, const OperatorMatrix& p1,
                   std::span<const double> times, const Propagator& prop,
                   QuantumRunStats* stats = nullptr);
TimeSeries otoc_pp(const StateVector& state0, const OperatorMatrix& h, const OperatorMatrix& p1,
                   std::span<const double> times, const PropagatorSpec& spec,
                   QuantumRunStats* stats = nullptr);

// number_variance_m2 along the evolution; optionally minus its t=0 value.
TimeSeries m2_series(const StateVector& state0, const OperatorMatrix& h,
                     std::span<const double> times, const Propagator& prop, bool subtract_t0,
                     QuantumRunStats* stats = nullptr);
TimeSeries m2_series(const StateVector& state0, const OperatorMatrix& h,
                     std::span<const double> times, const PropagatorSpec& spec, bool subtract_t0,
                     QuantumRunStats* stats = nullptr);

struct QuantumRunOptions {
  bool otoc = true;
  bool m2 = true;
  bool subtract_t0 = false;
  int edge_shells = 5;
  // Abort with TruncationError when the edge population exceeds this; <= 0 disables.
  double max_edge_population = 1e-8;
  int batch = 16;  // states propagated together
};

struct QuantumEnsembleSeries {
  std::vector<TimeSeries> otoc;  // one per state, empty unless requested
  std::vector<TimeSeries> m2;
  QuantumRunStats stats;
};

// otoc_pp and m2_series for many initial states sharing one basis and H.
QuantumEnsembleSeries quantum_ensemble_series(std::span<const StateVector> states,
                                              const OperatorMatrix& h, const OperatorMatrix& p1,
                                              std::span<const double> times, const Propagator& prop,
                                              const QuantumRunOptions& opts);

struct EigenResult {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns, empty unless requested
};

// Dense symmetric eigensolver on a real Hermitian operator. lowest_k <= 0
// returns the full spectrum.
EigenResult eigensolve(const OperatorMatrix& h, int lowest_k = 0, bool want_vectors = false);

}  // namespace qchaos
