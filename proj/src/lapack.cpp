// Copyright 2026 The qchaos Authors
// SPDX-License-Identifier: Apache-2.0
#include "lapack.hpp"

#include <lapacke.h>

#include <string>

#include "qchaos/error.hpp"

namespace qchaos::detail {

namespace {

void check(lapack_int info, const char* routine) {
  if (info != 0) {
    throw ConvergenceError(std::string(routine) + " failed with info=" + std::to_string(info));
  }
}

}  // namespace

Eigen::VectorXd symmetric_eigen(Eigen::MatrixXd& a, bool want_vectors) {
  const auto n = static_cast<lapack_int>(a.rows());
  if (a.cols() != a.rows()) throw InvalidArgument("symmetric_eigen: matrix not square");
  Eigen::VectorXd w(n);
  if (n == 0) return w;
  check(LAPACKE_dsyevd(LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', 'U', n, a.data(), n, w.data()),
        "dsyevd");
  return w;
}

Eigen::VectorXd symmetric_eigenvalues_range(Eigen::MatrixXd a, int il, int iu) {
  const auto n = static_cast<lapack_int>(a.rows());
  if (il < 0 || iu >= n || il > iu) throw InvalidArgument("symmetric_eigenvalues_range: bad index range");
  Eigen::VectorXd w(n);
  lapack_int found = 0;
  Eigen::VectorXi isuppz(2 * n);
  double dummy_z = 0.0;
  check(LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'N', 'I', 'U', n, a.data(), n, 0.0, 0.0, il + 1, iu + 1, 0.0,
                       &found, w.data(), &dummy_z, 1, isuppz.data()),
        "dsyevr");
  return w.head(found);
}

Eigen::VectorXd band_eigenvalues(Eigen::MatrixXd band, int kd) {
  const auto n = static_cast<lapack_int>(band.cols());
  if (band.rows() != kd + 1) throw InvalidArgument("band_eigenvalues: band storage has wrong height");
  Eigen::VectorXd w(n);
  if (n == 0) return w;
  double dummy_z = 0.0;
  check(LAPACKE_dsbevd(LAPACK_COL_MAJOR, 'N', 'U', n, kd, band.data(), kd + 1, w.data(), &dummy_z, 1),
        "dsbevd");
  return w;
}

}  // namespace qchaos::detail
