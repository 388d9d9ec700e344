// Copyright 2026 The qchaos Authors
// SPDX-License-Identifier: Apache-2.0
//
// Thin LAPACKE wrappers for the symmetric eigenproblems used internally.
#pragma once

#include <Eigen/Dense>

namespace qchaos::detail {

// Full decomposition of a dense symmetric matrix (dsyevd). On return `a`
// holds the eigenvectors in its columns when want_vectors is set.
Eigen::VectorXd symmetric_eigen(Eigen::MatrixXd& a, bool want_vectors);

// Eigenvalues il..iu (0-based, inclusive) of a dense symmetric matrix (dsyevr).
Eigen::VectorXd symmetric_eigenvalues_range(Eigen::MatrixXd a, int il, int iu);

// All eigenvalues of a symmetric band matrix given in LAPACK upper band
// storage: band(kd + i - j, j) = A(i, j) for max(0, j - kd) <= i <= j.
Eigen::VectorXd band_eigenvalues(Eigen::MatrixXd band, int kd);

}  // namespace qchaos::detail
