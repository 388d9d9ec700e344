// Copyright 2026 The qchaos Authors
// SPDX-License-Identifier: Apache-2.0
//
// Level-spacing statistics within symmetry sectors of the Fock-space
// Hamiltonian.
#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "qchaos/fock.hpp"
#include "qchaos/parallel.hpp"

namespace qchaos {

// parity_k = (-1)^{n_k} eigenvalue of q_k -> -q_k; exchange = +1, -1, or 0
// for none. Exchange requires parity1 == parity2.
struct SymmetrySector {
  int parity1 = 1;
  int parity2 = 1;
  int exchange = 1;

  void validate() const;
  std::string label() const;  // e.g. "ee+", "oo-", "eo"
  static SymmetrySector parse(const std::string& label);
};

struct SectorProjection {
  SymmetrySector sector;
  SparseR map;  // dim x d, orthonormal columns spanning the sector

  Eigen::Index dimension() const { return map.cols(); }
};

// Basis vectors ordered lexicographically in (n1, n2) of their first component.
SectorProjection sector_project(const FockBasis& basis, const SymmetrySector& sector);

// Frobenius norm of (1 - P) H P.
double off_sector_norm(const OperatorMatrix& h, const SectorProjection& proj);

// All eigenvalues of P^T H P via banded reduction.
Eigen::VectorXd sector_eigenvalues(const OperatorMatrix& h, const SectorProjection& proj);

struct UnfoldOptions {
  int poly_degree = 7;
  double edge_fraction = 0.05;  // discarded at each end
};

// Spacings of the fitted staircase, N(E_{i+1}) - N(E_i), over the retained
// window. Throws ConvergenceError if the fit is not increasing there.
std::vector<double> unfold(std::span<const double> levels, const UnfoldOptions& opts = {});

struct SpacingHistogram {
  std::vector<double> bin_edges;
  std::vector<double> densities;
  long n_spacings = 0;

  double integral() const;
};

SpacingHistogram spacing_histogram(std::span<const double> spacings, int bins = 60, double s_max = 6.0);

double wigner_surmise(double s);
double poisson_spacing(double s);

// Distance of P(s) from Wigner-Dyson (0) toward Poisson (1); warns below
// 100 spacings.
double delta_parameter(std::span<const double> spacings, int bins = 60, double s_max = 6.0);

std::vector<double> sample_poisson_spacings(int n, Rng& rng);
std::vector<double> sample_wigner_spacings(int n, Rng& rng);
// Eigenvalues of an n x n matrix from the Gaussian orthogonal ensemble.
std::vector<double> sample_goe_levels(int n, Rng& rng);

struct LevelStatsOptions {
  std::vector<SymmetrySector> sectors{SymmetrySector{}};  // >1 pools the spectra
  int n_max = 200;
  // Levels count as converged when they move by less than
  // convergence_tol * mean spacing between n_max - convergence_step and n_max.
  int convergence_step = 24;
  double convergence_tol = 0.1;
  UnfoldOptions unfold;
  int bins = 60;
  double s_max = 6.0;
};

struct LevelStats {
  std::vector<double> levels;  // converged levels (pooled if several sectors)
  long sector_dimension = 0;   // summed over sectors at n_max
  std::vector<double> spacings;
  SpacingHistogram histogram;
  double delta = 0.0;
};

LevelStats level_statistics(const ModelParams& params, double hbar, const LevelStatsOptions& opts,
                            int threads = 1);

}  // namespace qchaos
