// Copyright 2026 The qchaos Authors
// SPDX-License-Identifier: Apache-2.0
#include "qchaos/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "lapack.hpp"
#include "qchaos/error.hpp"

namespace qchaos {

void SymmetrySector::validate() const {
  if ((parity1 != 1 && parity1 != -1) || (parity2 != 1 && parity2 != -1)) {
    throw InvalidArgument("sector: parities must be +1 or -1");
  }
  if (exchange != 0 && exchange != 1 && exchange != -1) {
    throw InvalidArgument("sector: exchange must be +1, -1 or 0");
  }
  if (exchange != 0 && parity1 != parity2) {
    throw InvalidArgument("sector: exchange label needs equal mode parities");
  }
}

std::string SymmetrySector::label() const {
  std::string s;
  s += parity1 == 1 ? 'e' : 'o';
  s += parity2 == 1 ? 'e' : 'o';
  if (exchange == 1) s += '+';
  if (exchange == -1) s += '-';
  return s;
}

SymmetrySector SymmetrySector::parse(const std::string& label) {
  if (label.size() < 2 || label.size() > 3) throw InvalidArgument("sector: bad label '" + label + "'");
  auto par = [&](char c) {
    if (c == 'e') return 1;
    if (c == 'o') return -1;
    throw InvalidArgument("sector: bad label '" + label + "'");
  };
  SymmetrySector s{par(label[0]), par(label[1]), 0};
  if (label.size() == 3) {
    if (label[2] == '+') {
      s.exchange = 1;
    } else if (label[2] == '-') {
      s.exchange = -1;
    } else {
      throw InvalidArgument("sector: bad label '" + label + "'");
    }
  }
  s.validate();
  return s;
}

SectorProjection sector_project(const FockBasis& basis, const SymmetrySector& sector) {
  sector.validate();
  const int n = basis.n_max();
  const int r1 = sector.parity1 == 1 ? 0 : 1;
  const int r2 = sector.parity2 == 1 ? 0 : 1;
  std::vector<Eigen::Triplet<double>> t;
  Eigen::Index col = 0;
  const double h = std::sqrt(0.5);
  for (int a = r1; a <= n; a += 2) {
    for (int b = r2; b <= n; b += 2) {
      const auto ia = static_cast<Eigen::Index>(basis.index(a, b));
      if (sector.exchange == 0) {
        t.emplace_back(ia, col++, 1.0);
        continue;
      }
      if (b < a) continue;
      if (a == b) {
        if (sector.exchange == 1) t.emplace_back(ia, col++, 1.0);
        continue;
      }
      const auto ib = static_cast<Eigen::Index>(basis.index(b, a));
      t.emplace_back(ia, col, h);
      t.emplace_back(ib, col++, sector.exchange * h);
    }
  }
  if (col == 0) throw InvalidArgument("sector " + sector.label() + ": empty at this cutoff");
  SectorProjection p;
  p.sector = sector;
  p.map = SparseR(static_cast<Eigen::Index>(basis.size()), col);
  p.map.setFromTriplets(t.begin(), t.end());
  return p;
}

namespace {

SparseR require_real(const OperatorMatrix& h, const char* who) {
  if (!h.hermitian || !h.is_real()) throw InvalidArgument(std::string(who) + ": operator must be real symmetric");
  return h.real_part();
}

}  // namespace

double off_sector_norm(const OperatorMatrix& h, const SectorProjection& proj) {
  const SparseR hr = require_real(h, "off_sector_norm");
  const SparseR hp = hr * proj.map;
  const SparseR inside = proj.map * SparseR(SparseR(proj.map.transpose()) * hp);
  return SparseR(hp - inside).norm();
}

Eigen::VectorXd sector_eigenvalues(const OperatorMatrix& h, const SectorProjection& proj) {
  const SparseR hr = require_real(h, "sector_eigenvalues");
  const SparseR hs = SparseR(proj.map.transpose()) * SparseR(hr * proj.map);
  const Eigen::Index d = hs.rows();
  Eigen::Index kd = 0;
  for (int k = 0; k < hs.outerSize(); ++k) {
    for (SparseR::InnerIterator it(hs, k); it; ++it) kd = std::max(kd, it.col() - it.row());
  }
  Eigen::MatrixXd band = Eigen::MatrixXd::Zero(kd + 1, d);
  for (int k = 0; k < hs.outerSize(); ++k) {
    for (SparseR::InnerIterator it(hs, k); it; ++it) {
      const Eigen::Index i = it.row(), j = it.col();
      if (i <= j) band(kd + i - j, j) = 0.5 * (it.value() + hs.coeff(j, i));
    }
  }
  return detail::band_eigenvalues(std::move(band), static_cast<int>(kd));
}

std::vector<double> unfold(std::span<const double> levels, const UnfoldOptions& opts) {
  if (opts.poly_degree < 1) throw InvalidArgument("unfold: poly_degree must be >= 1");
  if (!(opts.edge_fraction >= 0.0 && opts.edge_fraction < 0.5)) {
    throw InvalidArgument("unfold: edge_fraction must be in [0, 0.5)");
  }
  const auto n = static_cast<Eigen::Index>(levels.size());
  if (!std::is_sorted(levels.begin(), levels.end())) throw InvalidArgument("unfold: levels must be ascending");
  const auto cut = static_cast<Eigen::Index>(std::floor(opts.edge_fraction * static_cast<double>(n)));
  const Eigen::Index lo = cut, hi = n - cut;  // retained [lo, hi)
  if (hi - lo < opts.poly_degree + 2) throw InvalidArgument("unfold: too few levels for the fit");
  const double mid = 0.5 * (levels[static_cast<std::size_t>(lo)] + levels[static_cast<std::size_t>(hi - 1)]);
  const double half = 0.5 * (levels[static_cast<std::size_t>(hi - 1)] - levels[static_cast<std::size_t>(lo)]);
  if (!(half > 0.0)) throw InvalidArgument("unfold: degenerate level window");
  auto x_of = [&](Eigen::Index i) { return (levels[static_cast<std::size_t>(i)] - mid) / half; };
  const Eigen::Index m = hi - lo;
  const int deg = opts.poly_degree;
  Eigen::MatrixXd a(m, deg + 1);
  Eigen::VectorXd y(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const double x = x_of(lo + r);
    double p = 1.0;
    for (int c = 0; c <= deg; ++c, p *= x) a(r, c) = p;
    y(r) = static_cast<double>(lo + r) + 0.5;
  }
  const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(y);
  auto staircase = [&](double x) {
    double v = 0.0;
    for (int c = deg; c >= 0; --c) v = v * x + coef(c);
    return v;
  };
  auto slope = [&](double x) {
    double v = 0.0;
    for (int c = deg; c >= 1; --c) v = v * x + c * coef(c);
    return v;
  };
  std::vector<double> s;
  s.reserve(static_cast<std::size_t>(m - 1));
  for (Eigen::Index i = lo; i + 1 < hi; ++i) {
    if (!(slope(x_of(i)) > 0.0)) {
      std::ostringstream os;
      os << "unfold: fitted staircase not increasing at level " << i << "; reduce poly_degree";
      throw ConvergenceError(os.str());
    }
    s.push_back(staircase(x_of(i + 1)) - staircase(x_of(i)));
  }
  return s;
}

double SpacingHistogram::integral() const {
  double total = 0.0;
  for (std::size_t i = 0; i < densities.size(); ++i) total += densities[i] * (bin_edges[i + 1] - bin_edges[i]);
  return total;
}

SpacingHistogram spacing_histogram(std::span<const double> spacings, int bins, double s_max) {
  if (bins < 1 || !(s_max > 0.0)) throw InvalidArgument("histogram: need bins >= 1 and s_max > 0");
  if (spacings.empty()) throw InvalidArgument("histogram: no spacings");
  SpacingHistogram h;
  h.n_spacings = static_cast<long>(spacings.size());
  const double w = s_max / bins;
  for (int i = 0; i <= bins; ++i) h.bin_edges.push_back(i * w);
  std::vector<long> counts(static_cast<std::size_t>(bins), 0);
  for (double s : spacings) {
    if (s < 0.0) throw InvalidArgument("histogram: negative spacing");
    const auto b = static_cast<long>(s / w);
    if (b < bins) ++counts[static_cast<std::size_t>(b)];
  }
  for (long c : counts) h.densities.push_back(static_cast<double>(c) / (static_cast<double>(h.n_spacings) * w));
  return h;
}

double wigner_surmise(double s) {
  const double pi = std::numbers::pi;
  return 0.5 * pi * s * std::exp(-0.25 * pi * s * s);
}

double poisson_spacing(double s) { return std::exp(-s); }

double delta_parameter(std::span<const double> spacings, int bins, double s_max) {
  if (spacings.size() < 100) {
    warn("delta_parameter: only " + std::to_string(spacings.size()) +
         " spacings; statistical error is large");
  }
  const SpacingHistogram h = spacing_histogram(spacings, bins, s_max);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < h.densities.size(); ++i) {
    const double w = h.bin_edges[i + 1] - h.bin_edges[i];
    const double s = 0.5 * (h.bin_edges[i] + h.bin_edges[i + 1]);
    num += std::abs(h.densities[i] - wigner_surmise(s)) * w;
    den += std::abs(poisson_spacing(s) - wigner_surmise(s)) * w;
  }
  return num / den;
}

std::vector<double> sample_poisson_spacings(int n, Rng& rng) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> s(static_cast<std::size_t>(n));
  for (auto& x : s) x = e(rng);
  return s;
}

std::vector<double> sample_wigner_spacings(int n, Rng& rng) {
  // Inverse of the cumulative 1 - exp(-pi s^2 / 4).
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> s(static_cast<std::size_t>(n));
  for (auto& x : s) x = std::sqrt(-4.0 * std::log1p(-u(rng)) / std::numbers::pi);
  return s;
}

std::vector<double> sample_goe_levels(int n, Rng& rng) {
  if (n < 1) throw InvalidArgument("goe: n must be positive");
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd a(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i <= j; ++i) {
      const double v = i == j ? g(rng) * std::sqrt(2.0) : g(rng);
      a(i, j) = a(j, i) = v;
    }
  }
  const Eigen::VectorXd w = detail::symmetric_eigen(a, false);
  return {w.data(), w.data() + w.size()};
}

namespace {

// Contiguous low-lying block of levels that agree between two cutoffs.
std::vector<double> converged_levels(const Eigen::VectorXd& fine, const Eigen::VectorXd& coarse,
                                     double tol) {
  const Eigen::Index n = std::min(fine.size(), coarse.size());
  const int half_window = 10;
  std::vector<double> out;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index a = std::max<Eigen::Index>(0, i - half_window);
    const Eigen::Index b = std::min<Eigen::Index>(fine.size() - 1, i + half_window);
    if (b <= a) break;
    const double spacing = (fine(b) - fine(a)) / static_cast<double>(b - a);
    if (std::abs(fine(i) - coarse(i)) > tol * spacing) break;
    out.push_back(fine(i));
  }
  return out;
}

}  // namespace

LevelStats level_statistics(const ModelParams& params, double hbar, const LevelStatsOptions& opts,
                            int threads) {
  params.validate();
  if (opts.sectors.empty()) throw InvalidArgument("level_statistics: no sectors");
  if (opts.convergence_step < 2 || opts.convergence_step % 2 != 0 || opts.convergence_step >= opts.n_max) {
    throw InvalidArgument("level_statistics: convergence_step must be even and below n_max");
  }
  if (!(opts.convergence_tol > 0.0)) throw InvalidArgument("level_statistics: convergence_tol must be positive");
  const FockBasis fine(hbar, opts.n_max), coarse(hbar, opts.n_max - opts.convergence_step);
  const std::size_t ns = opts.sectors.size();
  std::vector<Eigen::VectorXd> spectra(2 * ns);
  std::vector<long> dims(ns);
  {
    const OperatorMatrix hf = hamiltonian_matrix(params, fine);
    const OperatorMatrix hc = hamiltonian_matrix(params, coarse);
    parallel_for(2 * ns, threads, [&](std::size_t job) {
      const bool is_fine = job < ns;
      const auto& sec = opts.sectors[job % ns];
      const auto proj = sector_project(is_fine ? fine : coarse, sec);
      if (is_fine) dims[job] = static_cast<long>(proj.dimension());
      spectra[job] = sector_eigenvalues(is_fine ? hf : hc, proj);
    });
  }
  LevelStats out;
  std::vector<std::vector<double>> per_sector(ns);
  double e_cap = 1e300;
  for (std::size_t s = 0; s < ns; ++s) {
    per_sector[s] = converged_levels(spectra[s], spectra[ns + s], opts.convergence_tol);
    if (per_sector[s].empty()) {
      throw ConvergenceError("level_statistics: no converged levels in sector " + opts.sectors[s].label());
    }
    e_cap = std::min(e_cap, per_sector[s].back());
    out.sector_dimension += dims[s];
  }
  // Pooled spectra stop at the lowest per-sector convergence edge.
  for (const auto& lv : per_sector) {
    for (double e : lv) {
      if (ns == 1 || e <= e_cap) out.levels.push_back(e);
    }
  }
  std::sort(out.levels.begin(), out.levels.end());
  out.spacings = unfold(out.levels, opts.unfold);
  out.histogram = spacing_histogram(out.spacings, opts.bins, opts.s_max);
  out.delta = delta_parameter(out.spacings, opts.bins, opts.s_max);
  return out;
}

}  // namespace qchaos
