// Copyright 2026 The qchaos Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "qchaos/error.hpp"
#include "qchaos/quantum.hpp"
#include "qchaos/spectral.hpp"

using namespace qchaos;

namespace {

const std::vector<std::string> kSectors{"ee+", "ee-", "oo+", "oo-", "eo", "oe"};

// Independent histogram distance from a reference density.
double l1_distance(const std::vector<double>& s, double (*ref)(double)) {
  const int bins = 60;
  const double w = 6.0 / bins;
  std::vector<double> h(bins, 0.0);
  for (double x : s) {
    const int k = static_cast<int>(x / w);
    if (k >= 0 && k < bins) h[k] += 1.0;
  }
  double d = 0.0;
  for (int k = 0; k < bins; ++k) d += std::abs(h[k] / (s.size() * w) - ref((k + 0.5) * w)) * w;
  return d;
}

}  // namespace

TEST_CASE("symmetry sector labels") {
  for (const auto& l : kSectors) CHECK(SymmetrySector::parse(l).label() == l);
  CHECK_THROWS_AS(SymmetrySector::parse("xx"), InvalidArgument);
  CHECK_THROWS_AS((SymmetrySector{1, -1, 1}.validate()), InvalidArgument);
}

TEST_CASE("sectors partition the Fock space and commute with H") {
  const FockBasis basis(0.25, 24);
  const auto h = hamiltonian_matrix(ModelParams::quartic(0.3), basis);
  Eigen::Index total = 0;
  std::vector<double> all;
  for (const auto& l : kSectors) {
    const auto proj = sector_project(basis, SymmetrySector::parse(l));
    total += proj.dimension();
    // Orthonormal columns.
    const Eigen::MatrixXd g = Eigen::MatrixXd(proj.map.transpose() * proj.map);
    CHECK((g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).norm() < 1e-12);
    CHECK(off_sector_norm(h, proj) < 1e-12);
    const auto ev = sector_eigenvalues(h, proj);
    all.insert(all.end(), ev.begin(), ev.end());
  }
  CHECK(total == static_cast<Eigen::Index>(basis.size()));
  // Sector spectra together reproduce the full spectrum.
  std::sort(all.begin(), all.end());
  const auto full = eigensolve(h).values;
  REQUIRE(static_cast<Eigen::Index>(all.size()) == full.size());
  double err = 0.0;
  for (Eigen::Index i = 0; i < full.size(); ++i) err = std::max(err, std::abs(all[i] - full(i)));
  CHECK(err < 1e-9 * full.cwiseAbs().maxCoeff());
}

TEST_CASE("ee+ sector has no degeneracies") {
  const FockBasis basis(0.25, 40);
  const auto h = hamiltonian_matrix(ModelParams::quartic(0.5), basis);
  const auto ev = sector_eigenvalues(h, sector_project(basis, SymmetrySector::parse("ee+")));
  double min_gap = INFINITY;
  for (Eigen::Index i = 1; i < ev.size(); ++i) min_gap = std::min(min_gap, ev(i) - ev(i - 1));
  CHECK(min_gap > 1e-8);
}

TEST_CASE("empty sector is an error") {
  const FockBasis basis(1.0, 0);
  CHECK_THROWS_AS(sector_project(basis, SymmetrySector::parse("oo+")), InvalidArgument);
}

TEST_CASE("unfolding") {
  Rng rng(11);
  SUBCASE("Poisson levels have unit mean spacing") {
    const auto s = sample_poisson_spacings(20000, rng);
    std::vector<double> levels(s.size() + 1, 0.0);
    std::partial_sum(s.begin(), s.end(), levels.begin() + 1);
    const auto u = unfold(levels);
    const double mean = std::accumulate(u.begin(), u.end(), 0.0) / u.size();
    CHECK(std::abs(mean - 1.0) < 0.02);
  }
  SUBCASE("picket fence") {
    std::vector<double> levels(500);
    for (int i = 0; i < 500; ++i) levels[i] = 0.3 * i;
    for (double x : unfold(levels)) CHECK(std::abs(x - 1.0) < 1e-8);
  }
  SUBCASE("affine invariance, property") {
    std::uniform_real_distribution<double> a(0.1, 20.0), b(-50.0, 50.0);
    const auto base = sample_goe_levels(300, rng);
    const auto u0 = unfold(base);
    for (int trial = 0; trial < 20; ++trial) {
      const double scale = a(rng), shift = b(rng);
      std::vector<double> moved(base.size());
      for (std::size_t i = 0; i < base.size(); ++i) moved[i] = scale * base[i] + shift;
      const auto u1 = unfold(moved);
      REQUIRE(u1.size() == u0.size());
      for (std::size_t i = 0; i < u0.size(); ++i) CHECK(std::abs(u1[i] - u0[i]) < 1e-6);
    }
  }
  SUBCASE("non-monotone fit is an error") {
    // A dense cluster inside a sparse spectrum forces an oscillating polynomial.
    std::vector<double> levels;
    for (int i = 0; i < 100; ++i) levels.push_back(0.1 * i);
    for (int i = 0; i < 300; ++i) levels.push_back(4.9 + 0.2 * i / 299.0);
    std::sort(levels.begin(), levels.end());
    CHECK_THROWS_AS(unfold(levels), ConvergenceError);
  }
}

TEST_CASE("spacing histogram normalization") {
  Rng rng(3);
  const auto s = sample_wigner_spacings(5000, rng);
  const auto h = spacing_histogram(s);
  CHECK(h.densities.size() == 60);
  CHECK(h.bin_edges.front() == 0.0);
  CHECK(h.bin_edges.back() == doctest::Approx(6.0));
  CHECK(h.integral() == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("reference distributions") {
  // Both normalized with unit mean, by midpoint quadrature.
  double n_w = 0, m_w = 0, n_p = 0, m_p = 0;
  const double ds = 1e-4;
  for (double s = ds / 2; s < 40.0; s += ds) {
    n_w += wigner_surmise(s) * ds;
    m_w += s * wigner_surmise(s) * ds;
    n_p += poisson_spacing(s) * ds;
    m_p += s * poisson_spacing(s) * ds;
  }
  CHECK(n_w == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(m_w == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(n_p == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(m_p == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("synthetic Delta") {
  Rng rng(2026);
  const auto p = sample_poisson_spacings(20000, rng);
  const auto w = sample_wigner_spacings(20000, rng);
  CHECK(std::abs(delta_parameter(p) - 1.0) < 0.1);
  CHECK(std::abs(delta_parameter(w)) < 0.1);
  // Samplers against an independent histogram distance.
  CHECK(l1_distance(p, poisson_spacing) < 0.05);
  CHECK(l1_distance(w, wigner_surmise) < 0.05);

  std::vector<double> goe;
  for (int k = 0; k < 10; ++k) {
    const auto u = unfold(sample_goe_levels(400, rng));
    goe.insert(goe.end(), u.begin(), u.end());
  }
  // GOE differs slightly from the surmise and its semicircle edges unfold worse.
  CHECK(std::abs(delta_parameter(goe)) < 0.15);
}

TEST_CASE("few spacings warn") {
  int warnings = 0;
  set_warning_sink([](const char*, void* u) { ++*static_cast<int*>(u); }, &warnings);
  Rng rng(5);
  delta_parameter(sample_poisson_spacings(50, rng));
  set_warning_sink(nullptr, nullptr);
  CHECK(warnings == 1);
}

TEST_CASE("pooling sectors hides level repulsion") {
  const auto params = ModelParams::quartic(0.1);
  LevelStatsOptions single;
  single.n_max = 140;
  const auto one = level_statistics(params, 0.125, single);
  double worst_single = one.delta;
  for (const auto& l : {"ee-", "oo+", "oo-", "eo"}) {
    LevelStatsOptions o = single;
    o.sectors = {SymmetrySector::parse(l)};
    worst_single = std::max(worst_single, level_statistics(params, 0.125, o).delta);
  }
  LevelStatsOptions pooled = single;
  pooled.sectors.clear();
  for (const auto& l : kSectors) pooled.sectors.push_back(SymmetrySector::parse(l));
  const auto all = level_statistics(params, 0.125, pooled);
  MESSAGE("single max Delta " << worst_single << ", pooled Delta " << all.delta);
  CHECK(all.delta > worst_single);
}
