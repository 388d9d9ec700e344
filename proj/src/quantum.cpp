// Copyright 2026 The qchaos Authors
// SPDX-License-Identifier: Apache-2.0
#include "qchaos/quantum.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "lapack.hpp"
#include "qchaos/error.hpp"

namespace qchaos {

StateVector::StateVector(std::shared_ptr<const FockBasis> basis, Eigen::VectorXcd amplitudes)
    : basis_(std::move(basis)), amps_(std::move(amplitudes)) {
  if (!basis_) throw InvalidArgument("state: null basis");
  if (static_cast<std::size_t>(amps_.size()) != basis_->size()) {
    throw InvalidArgument("state: amplitude length does not match basis size");
  }
}

// ---------------------------------------------------------------------------
// Krylov

KrylovPropagator::KrylovPropagator(const OperatorMatrix& h, double hbar, const PropagatorSpec& spec)
    : h_(h.entries), hbar_(hbar), spec_(spec) {
  if (!h.hermitian) throw InvalidArgument("krylov: Hamiltonian must be Hermitian");
  if (!(spec.dt > 0.0) || spec.krylov_dim < 2 || !(spec.tol > 0.0)) {
    throw InvalidArgument("krylov: need dt > 0, krylov_dim >= 2, tol > 0");
  }
}

bool KrylovPropagator::try_step(Eigen::VectorXcd& psi, double tau) const {
  const double beta0 = psi.norm();
  if (beta0 == 0.0) return true;
  const Eigen::Index n = psi.size();
  const int m_max = static_cast<int>(std::min<Eigen::Index>(spec_.krylov_dim, n));
  Eigen::MatrixXcd v(n, m_max);
  std::vector<double> alpha, beta;
  v.col(0) = psi / beta0;
  Eigen::VectorXcd w;
  int m = 0;
  double beta_last = 0.0;
  for (int j = 0; j < m_max; ++j) {
    w = h_ * v.col(j);
    const double a = v.col(j).dot(w).real();
    alpha.push_back(a);
    w -= a * v.col(j);
    if (j > 0) w -= beta[static_cast<std::size_t>(j - 1)] * v.col(j - 1);
    // Full reorthogonalization keeps the small basis orthonormal.
    for (int k = 0; k <= j; ++k) w -= v.col(k).dot(w) * v.col(k);
    const double b = w.norm();
    m = j + 1;
    beta_last = b;
    if (b < 1e-13 * (std::abs(a) + 1.0)) {
      beta_last = 0.0;  // invariant subspace: exact
      break;
    }
    if (j + 1 < m_max) {
      beta.push_back(b);
      v.col(j + 1) = w / b;
    }
  }
  Eigen::VectorXd diag(m), off(std::max(m - 1, 0));
  for (int i = 0; i < m; ++i) diag(i) = alpha[static_cast<std::size_t>(i)];
  for (int i = 0; i + 1 < m; ++i) off(i) = beta[static_cast<std::size_t>(i)];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw PropagationError("krylov: tridiagonal eigensolver failed");
  const Eigen::MatrixXd& s = es.eigenvectors();
  Eigen::VectorXcd phase(m);
  for (int i = 0; i < m; ++i) phase(i) = std::polar(1.0, -es.eigenvalues()(i) * tau / hbar_);
  const Eigen::VectorXcd coef = s * phase.cwiseProduct(s.row(0).transpose().cast<Complex>());
  const double err = beta0 * beta_last * std::abs(coef(m - 1));
  if (beta_last > 0.0 && err > spec_.tol) return false;
  psi = beta0 * (v.leftCols(m) * coef);
  return true;
}

void KrylovPropagator::apply(Eigen::VectorXcd& psi, double t) const {
  if (t == 0.0) return;
  const auto n = static_cast<long>(std::ceil(std::abs(t) / spec_.dt - 1e-9));
  const double tau = t / static_cast<double>(n);
  for (long s = 0; s < n; ++s) {
    // Halve the sub-step until the a-posteriori estimate passes.
    std::vector<std::pair<double, int>> stack{{tau, 0}};
    while (!stack.empty()) {
      auto [dt, depth] = stack.back();
      stack.pop_back();
      const Eigen::VectorXcd backup = psi;
      if (try_step(psi, dt)) continue;
      psi = backup;
      if (depth >= 24) {
        std::ostringstream os;
        os << "krylov: breakdown of the error estimate at sub-step " << dt << "; shrink dt";
        throw PropagationError(os.str());
      }
      stack.push_back({dt / 2, depth + 1});
      stack.push_back({dt / 2, depth + 1});
    }
  }
}

// ---------------------------------------------------------------------------
// Spectral

void Propagator::apply_batch(Eigen::MatrixXcd& psi, double t) const {
  for (Eigen::Index c = 0; c < psi.cols(); ++c) {
    Eigen::VectorXcd col = psi.col(c);
    apply(col, t);
    psi.col(c) = col;
  }
}

namespace {

using Triplet = Eigen::Triplet<double>;

int parity_class(const std::pair<int, int>& s) { return (s.first % 2) * 2 + (s.second % 2); }

bool parity_blocked(const SparseR& h, const FockBasis& basis) {
  for (int k = 0; k < h.outerSize(); ++k) {
    for (SparseR::InnerIterator it(h, k); it; ++it) {
      if (it.value() != 0.0 &&
          parity_class(basis.state(static_cast<std::size_t>(it.row()))) !=
              parity_class(basis.state(static_cast<std::size_t>(it.col())))) {
        return false;
      }
    }
  }
  return true;
}

std::size_t swapped(const FockBasis& basis, std::size_t i) {
  const auto& [a, b] = basis.state(i);
  return basis.index(b, a);
}

bool exchange_invariant(const SparseR& h, const FockBasis& basis) {
  double scale = 0.0;
  for (int k = 0; k < h.outerSize(); ++k) {
    for (SparseR::InnerIterator it(h, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
  }
  for (int k = 0; k < h.outerSize(); ++k) {
    for (SparseR::InnerIterator it(h, k); it; ++it) {
      const auto r = static_cast<Eigen::Index>(swapped(basis, static_cast<std::size_t>(it.row())));
      const auto c = static_cast<Eigen::Index>(swapped(basis, static_cast<std::size_t>(it.col())));
      if (std::abs(h.coeff(r, c) - it.value()) > 1e-13 * scale) return false;
    }
  }
  return true;
}

SparseR sector_map(Eigen::Index dim, Eigen::Index cols, const std::vector<Triplet>& entries) {
  SparseR m(dim, cols);
  m.setFromTriplets(entries.begin(), entries.end());
  return m;
}

}  // namespace

SpectralPropagator::SpectralPropagator(const OperatorMatrix& h, const FockBasis& basis)
    : hbar_(basis.hbar()) {
  if (!h.hermitian || !h.is_real()) {
    throw InvalidArgument("spectral propagator: Hamiltonian must be real symmetric");
  }
  const SparseR hr = h.real_part();
  const auto dim = hr.rows();
  const bool blocked = parity_blocked(hr, basis);
  exchange_ = blocked && exchange_invariant(hr, basis);

  std::vector<std::vector<SparseR>> maps;
  if (!blocked) {
    SparseR id(dim, dim);
    id.setIdentity();
    maps.push_back({id});
  } else if (!exchange_) {
    std::array<std::vector<Triplet>, 4> t;
    std::array<Eigen::Index, 4> n{};
    for (Eigen::Index i = 0; i < dim; ++i) {
      const int c = parity_class(basis.state(static_cast<std::size_t>(i)));
      t[static_cast<std::size_t>(c)].emplace_back(i, n[static_cast<std::size_t>(c)]++, 1.0);
    }
    for (int c = 0; c < 4; ++c) {
      const auto cu = static_cast<std::size_t>(c);
      if (n[cu] > 0) maps.push_back({sector_map(dim, n[cu], t[cu])});
    }
  } else {
    const double r = std::sqrt(0.5);
    // ee+, ee-, oo+, oo-, then (eo, oe) sharing one group.
    for (int par : {0, 1}) {
      std::vector<Triplet> plus, minus;
      Eigen::Index np = 0, nm = 0;
      for (int a = par; a <= basis.n_max(); a += 2) {
        for (int b = a; b <= basis.n_max(); b += 2) {
          const auto ia = static_cast<Eigen::Index>(basis.index(a, b));
          const auto ib = static_cast<Eigen::Index>(basis.index(b, a));
          if (a == b) {
            plus.emplace_back(ia, np++, 1.0);
            continue;
          }
          plus.emplace_back(ia, np, r);
          plus.emplace_back(ib, np++, r);
          minus.emplace_back(ia, nm, r);
          minus.emplace_back(ib, nm++, -r);
        }
      }
      if (np > 0) maps.push_back({sector_map(dim, np, plus)});
      if (nm > 0) maps.push_back({sector_map(dim, nm, minus)});
    }
    std::vector<Triplet> eo, oe;
    Eigen::Index n = 0;
    for (int a = 0; a <= basis.n_max(); a += 2) {
      for (int b = 1; b <= basis.n_max(); b += 2) {
        eo.emplace_back(static_cast<Eigen::Index>(basis.index(a, b)), n, 1.0);
        oe.emplace_back(static_cast<Eigen::Index>(basis.index(b, a)), n++, 1.0);
      }
    }
    if (n > 0) maps.push_back({sector_map(dim, n, eo), sector_map(dim, n, oe)});
  }

  for (auto& m : maps) {
    Group g;
    const SparseR& b = m.front();
    const SparseR hb = hr * b;
    Eigen::MatrixXd dense = Eigen::MatrixXd(SparseR(b.transpose()) * hb);
    dense = 0.5 * (dense + dense.transpose()).eval();
    g.energies = detail::symmetric_eigen(dense, true);
    g.vectors = std::move(dense);
    g.maps = std::move(m);
    groups_.push_back(std::move(g));
  }
}

Eigen::Index SpectralPropagator::largest_block() const noexcept {
  Eigen::Index m = 0;
  for (const auto& g : groups_) m = std::max(m, g.vectors.rows());
  return m;
}

void SpectralPropagator::apply(Eigen::VectorXcd& psi, double t) const {
  Eigen::MatrixXcd m = psi;
  apply_batch(m, t);
  psi = m.col(0);
}

void SpectralPropagator::apply_batch(Eigen::MatrixXcd& psi, double t) const {
  if (t == 0.0 || psi.cols() == 0) return;
  const Eigen::Index k = psi.cols();
  const Eigen::MatrixXd re = psi.real(), im = psi.imag();
  Eigen::MatrixXd out_re = Eigen::MatrixXd::Zero(psi.rows(), k);
  Eigen::MatrixXd out_im = Eigen::MatrixXd::Zero(psi.rows(), k);
  for (const auto& g : groups_) {
    const Eigen::Index d = g.vectors.rows();
    const auto nm = static_cast<Eigen::Index>(g.maps.size());
    // Columns: [re, im] for each member sector.
    Eigen::MatrixXd x(d, 2 * k * nm);
    for (Eigen::Index s = 0; s < nm; ++s) {
      const SparseR bt = g.maps[static_cast<std::size_t>(s)].transpose();
      x.middleCols(2 * k * s, k) = bt * re;
      x.middleCols(2 * k * s + k, k) = bt * im;
    }
    Eigen::MatrixXd c = g.vectors.transpose() * x;
    for (Eigen::Index r = 0; r < d; ++r) {
      const double ph = -g.energies(r) * t / hbar_;
      const double cs = std::cos(ph), sn = std::sin(ph);
      for (Eigen::Index s = 0; s < nm; ++s) {
        for (Eigen::Index j = 0; j < k; ++j) {
          double& a = c(r, 2 * k * s + j);
          double& b = c(r, 2 * k * s + k + j);
          const double a0 = a;
          a = cs * a0 - sn * b;
          b = sn * a0 + cs * b;
        }
      }
    }
    x.noalias() = g.vectors * c;
    for (Eigen::Index s = 0; s < nm; ++s) {
      const SparseR& b = g.maps[static_cast<std::size_t>(s)];
      out_re += b * x.middleCols(2 * k * s, k);
      out_im += b * x.middleCols(2 * k * s + k, k);
    }
  }
  psi.real() = out_re;
  psi.imag() = out_im;
}

Eigen::Index spectral_block_estimate(const FockBasis& basis, bool exchange_symmetric) {
  const Eigen::Index even = basis.n_max() / 2 + 1;
  const Eigen::Index odd = (basis.n_max() + 1) / 2;
  if (!exchange_symmetric) return even * even;
  return std::max(even * odd, even * (even + 1) / 2);
}

std::unique_ptr<Propagator> make_propagator(const OperatorMatrix& h, const FockBasis& basis,
                                            const PropagatorSpec& spec) {
  switch (spec.method) {
    case PropagationMethod::kKrylov:
      return std::make_unique<KrylovPropagator>(h, basis.hbar(), spec);
    case PropagationMethod::kSpectral:
      return std::make_unique<SpectralPropagator>(h, basis);
    case PropagationMethod::kAuto:
      break;
  }
  if (h.is_real()) {
    const SparseR hr = h.real_part();
    if (parity_blocked(hr, basis)) {
      const bool ex = exchange_invariant(hr, basis);
      if (spectral_block_estimate(basis, ex) <= spec.spectral_max_block) {
        return std::make_unique<SpectralPropagator>(h, basis);
      }
    } else if (hr.rows() <= spec.spectral_max_block) {
      return std::make_unique<SpectralPropagator>(h, basis);
    }
  }
  return std::make_unique<KrylovPropagator>(h, basis.hbar(), spec);
}

// ---------------------------------------------------------------------------
// States

namespace {

// log of the Poisson tail sum_{n > n_max} e^{-mu} mu^n / n!
double poisson_tail(double mu, int n_max) {
  if (mu == 0.0) return 0.0;
  double head = 0.0;
  double term = std::exp(-mu);
  for (int n = 0; n <= n_max; ++n) {
    if (n > 0) term *= mu / n;
    head += term;
  }
  // Direct tail sum avoids cancellation when the tail is tiny.
  double tail = 0.0;
  double t = term;
  for (int n = n_max + 1; n < n_max + 100000; ++n) {
    t *= mu / n;
    tail += t;
    if (t < 1e-300 || (n > mu && t < tail * 1e-17)) break;
  }
  if (head + tail == 0.0) return 1.0;  // underflow: mu far above n_max
  return tail / (head + tail);
}

Eigen::VectorXcd coherent_1d(Complex alpha, int n_max) {
  Eigen::VectorXcd a(n_max + 1);
  const double r = std::abs(alpha);
  const double ph = std::arg(alpha);
  for (int n = 0; n <= n_max; ++n) {
    double log_mag = -0.5 * r * r - 0.5 * std::lgamma(n + 1.0);
    if (n > 0) log_mag += r > 0.0 ? n * std::log(r) : -1e300;
    a(n) = r == 0.0 ? Complex(n == 0 ? 1.0 : 0.0) : std::polar(std::exp(log_mag), n * ph);
  }
  return a;
}

}  // namespace

StateVector coherent_state(const PhasePoint& center, std::shared_ptr<const FockBasis> basis,
                           double max_tail) {
  if (!basis) throw InvalidArgument("coherent_state: null basis");
  const double hb = basis->hbar(), om = basis->omega();
  const int n = basis->n_max();
  std::array<Eigen::VectorXcd, 2> modes;
  for (int k = 0; k < 2; ++k) {
    const Complex alpha = Complex(om * center.q[k], center.p[k]) / std::sqrt(2.0 * hb * om);
    const double tail = poisson_tail(std::norm(alpha), n);
    if (tail > max_tail) {
      std::ostringstream os;
      os << "coherent_state: mode " << k + 1 << " tail weight " << tail << " beyond n_max=" << n
         << " exceeds " << max_tail << "; increase n_max";
      throw TruncationError(os.str());
    }
    modes[static_cast<std::size_t>(k)] = coherent_1d(alpha, n);
  }
  Eigen::VectorXcd amps(static_cast<Eigen::Index>(basis->size()));
  for (int n1 = 0; n1 <= n; ++n1) {
    for (int n2 = 0; n2 <= n; ++n2) {
      amps(static_cast<Eigen::Index>(basis->index(n1, n2))) = modes[0](n1) * modes[1](n2);
    }
  }
  amps /= amps.norm();
  return StateVector(std::move(basis), std::move(amps));
}

int coherent_cutoff(std::span<const PhasePoint> centers, double hbar, double omega,
                    double max_tail, int margin) {
  int best = 0;
  for (const auto& c : centers) {
    for (int k = 0; k < 2; ++k) {
      const double mu = (omega * omega * c.q[k] * c.q[k] + c.p[k] * c.p[k]) / (2.0 * hbar * omega);
      int n = static_cast<int>(mu);
      while (poisson_tail(mu, n) > max_tail) ++n;
      best = std::max(best, n);
    }
  }
  return best + margin;
}

StateVector fock_state(int n1, int n2, std::shared_ptr<const FockBasis> basis) {
  if (!basis) throw InvalidArgument("fock_state: null basis");
  if (n1 < 0 || n2 < 0 || n1 > basis->n_max() || n2 > basis->n_max()) {
    throw InvalidArgument("fock_state: occupation outside basis");
  }
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis->size()));
  amps(static_cast<Eigen::Index>(basis->index(n1, n2))) = 1.0;
  return StateVector(std::move(basis), std::move(amps));
}

StateVector evolve(const StateVector& state, const Propagator& prop, double t) {
  Eigen::VectorXcd psi = state.amplitudes();
  prop.apply(psi, t);
  return StateVector(state.basis_ptr(), std::move(psi));
}

StateVector evolve(const StateVector& state, const OperatorMatrix& h, double t,
                   const PropagatorSpec& spec) {
  const auto prop = make_propagator(h, state.basis(), spec);
  return evolve(state, *prop, t);
}

double expectation(const StateVector& state, const OperatorMatrix& op) {
  const Eigen::VectorXcd w = op.entries * state.amplitudes();
  return state.amplitudes().dot(w).real() / state.amplitudes().squaredNorm();
}

namespace {

// Marginal occupation probabilities of each mode.
std::array<Eigen::VectorXd, 2> marginals(const StateVector& state) {
  const int n = state.basis().n_max();
  std::array<Eigen::VectorXd, 2> m{Eigen::VectorXd::Zero(n + 1), Eigen::VectorXd::Zero(n + 1)};
  const auto& a = state.amplitudes();
  const double norm2 = a.squaredNorm();
  for (int n1 = 0; n1 <= n; ++n1) {
    for (int n2 = 0; n2 <= n; ++n2) {
      const double p = std::norm(a(static_cast<Eigen::Index>(state.basis().index(n1, n2)))) / norm2;
      m[0](n1) += p;
      m[1](n2) += p;
    }
  }
  return m;
}

}  // namespace

double number_variance_m2(const StateVector& state) {
  const auto m = marginals(state);
  double total = 0.0;
  for (const auto& pk : m) {
    double mean = 0.0, sq = 0.0;
    for (Eigen::Index n = 0; n < pk.size(); ++n) {
      mean += static_cast<double>(n) * pk(n);
      sq += static_cast<double>(n * n) * pk(n);
    }
    total += 2.0 * (sq - mean * mean);
  }
  return total;
}

double edge_population(const StateVector& state, int shells) {
  const int n = state.basis().n_max();
  const int lo = std::max(0, n - shells + 1);
  const auto m = marginals(state);
  double e = 0.0;
  for (const auto& pk : m) e = std::max(e, pk.segment(lo, n - lo + 1).sum());
  return e;
}

double HarmonicsSpectrum::total() const {
  double s = 0.0;
  for (const auto& [m, w] : weights) s += w;
  return s;
}

double HarmonicsSpectrum::second_moment() const {
  double s = 0.0;
  for (const auto& [m, w] : weights) s += (m.first * m.first + m.second * m.second) * w;
  return s;
}

HarmonicsSpectrum harmonics_distribution(const StateVector& state, double drop_below) {
  const int n = state.basis().n_max();
  const int side = n + 1;
  const auto& a = state.amplitudes();
  const double norm2 = a.squaredNorm();
  Eigen::MatrixXd prob(side, side);
  for (int n1 = 0; n1 <= n; ++n1) {
    for (int n2 = 0; n2 <= n; ++n2) {
      prob(n1, n2) = std::norm(a(static_cast<Eigen::Index>(state.basis().index(n1, n2)))) / norm2;
    }
  }
  // For a pure state |rho_{n+m,n}|^2 = P(n+m) P(n).
  HarmonicsSpectrum hs;
  for (int m1 = -n; m1 <= n; ++m1) {
    for (int m2 = -n; m2 <= n; ++m2) {
      const int r0 = std::max(0, -m1), r1 = std::min(n, n - m1);
      const int c0 = std::max(0, -m2), c1 = std::min(n, n - m2);
      const double w = (prob.block(r0, c0, r1 - r0 + 1, c1 - c0 + 1)
                            .cwiseProduct(prob.block(r0 + m1, c0 + m2, r1 - r0 + 1, c1 - c0 + 1)))
                           .sum();
      if (w > drop_below || (m1 == 0 && m2 == 0)) hs.weights[{m1, m2}] = w;
    }
  }
  const double tot = hs.total();
  for (auto& [m, w] : hs.weights) w /= tot;
  return hs;
}

namespace {

void check_grid(std::span<const double> times) {
  if (times.empty()) throw InvalidArgument("quantum series: empty time grid");
  if (times.front() < 0.0) throw InvalidArgument("quantum series: negative time");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw InvalidArgument("quantum series: times must increase");
  }
}

}  // namespace

QuantumEnsembleSeries quantum_ensemble_series(std::span<const StateVector> states,
                                              const OperatorMatrix& h, const OperatorMatrix& p1,
                                              std::span<const double> times, const Propagator& prop,
                                              const QuantumRunOptions& opts) {
  check_grid(times);
  if (states.empty()) throw InvalidArgument("quantum series: no initial states");
  if (opts.batch < 1) throw InvalidArgument("quantum series: batch must be >= 1");
  const auto basis = states.front().basis_ptr();
  for (const auto& s : states) {
    if (!(s.basis() == *basis)) throw InvalidArgument("quantum series: states must share one basis");
  }
  const double hb = basis->hbar();
  const auto dim = static_cast<Eigen::Index>(basis->size());
  QuantumEnsembleSeries out;
  auto& st = out.stats;
  auto blank = [&](const char* name) {
    TimeSeries ts;
    ts.times.assign(times.begin(), times.end());
    ts.values.reserve(times.size());
    ts.meta["observable"] = name;
    ts.meta["propagator"] = prop.name();
    return ts;
  };

  for (std::size_t b0 = 0; b0 < states.size(); b0 += static_cast<std::size_t>(opts.batch)) {
    const auto k = static_cast<Eigen::Index>(
        std::min(states.size() - b0, static_cast<std::size_t>(opts.batch)));
    // Columns [0, k) hold U psi; columns [k, 2k) hold U p psi.
    Eigen::MatrixXcd fw(dim, opts.otoc ? 2 * k : k);
    std::vector<double> e0(static_cast<std::size_t>(k)), m2_0(static_cast<std::size_t>(k));
    for (Eigen::Index j = 0; j < k; ++j) {
      const auto& s = states[b0 + static_cast<std::size_t>(j)];
      fw.col(j) = s.amplitudes() / s.norm();
      e0[static_cast<std::size_t>(j)] = fw.col(j).dot(h.entries * fw.col(j)).real();
      m2_0[static_cast<std::size_t>(j)] = number_variance_m2(s);
      if (opts.otoc) out.otoc.push_back(blank("quantum_otoc_pp"));
      if (opts.m2) {
        out.m2.push_back(blank("quantum_m2"));
        out.m2.back().meta["subtract_t0"] = opts.subtract_t0 ? "true" : "false";
      }
    }
    if (opts.otoc) fw.rightCols(k) = p1.entries * fw.leftCols(k);
    const std::size_t base = out.otoc.empty() ? out.m2.size() - static_cast<std::size_t>(k)
                                              : out.otoc.size() - static_cast<std::size_t>(k);

    double t_prev = 0.0;
    for (double t : times) {
      prop.apply_batch(fw, t - t_prev);
      t_prev = t;
      if (opts.otoc) {
        // [p U p psi, p U psi] pulled back by U^dag.
        Eigen::MatrixXcd bw(dim, 2 * k);
        bw.leftCols(k) = p1.entries * fw.rightCols(k);
        bw.rightCols(k) = p1.entries * fw.leftCols(k);
        prop.apply_batch(bw, -t);
        const Eigen::MatrixXcd pb = p1.entries * bw.rightCols(k);
        for (Eigen::Index j = 0; j < k; ++j) {
          out.otoc[base + static_cast<std::size_t>(j)].values.push_back(
              (bw.col(j) - pb.col(j)).squaredNorm() / (hb * hb));
        }
      }
      const Eigen::MatrixXcd hpsi = h.entries * fw.leftCols(k);
      for (Eigen::Index j = 0; j < k; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        const StateVector cur(basis, fw.col(j));
        if (opts.m2) {
          const double v = number_variance_m2(cur);
          out.m2[base + ju].values.push_back(opts.subtract_t0 ? v - m2_0[ju] : v);
        }
        st.max_norm_drift = std::max(st.max_norm_drift, std::abs(fw.col(j).norm() - 1.0));
        const double e = fw.col(j).dot(hpsi.col(j)).real();
        const double scale = e0[ju] != 0.0 ? std::abs(e0[ju]) : 1.0;
        st.max_rel_energy_drift = std::max(st.max_rel_energy_drift, std::abs(e - e0[ju]) / scale);
        const double edge = edge_population(cur, opts.edge_shells);
        st.max_edge_population = std::max(st.max_edge_population, edge);
        if (opts.max_edge_population > 0.0 && edge > opts.max_edge_population) {
          std::ostringstream os;
          os << "quantum series: population " << edge << " in the top " << opts.edge_shells
             << " shells at t=" << t << " exceeds " << opts.max_edge_population << " (n_max="
             << basis->n_max() << "); increase n_max";
          throw TruncationError(os.str());
        }
      }
    }
  }
  return out;
}

TimeSeries otoc_pp(const StateVector& state0, const OperatorMatrix& h, const OperatorMatrix& p1,
                   std::span<const double> times, const Propagator& prop, QuantumRunStats* stats) {
  QuantumRunOptions o;
  o.m2 = false;
  o.max_edge_population = 0.0;
  auto r = quantum_ensemble_series(std::span(&state0, 1), h, p1, times, prop, o);
  if (stats) *stats = r.stats;
  return std::move(r.otoc.front());
}

TimeSeries otoc_pp(const StateVector& state0, const OperatorMatrix& h, const OperatorMatrix& p1,
                   std::span<const double> times, const PropagatorSpec& spec, QuantumRunStats* stats) {
  const auto prop = make_propagator(h, state0.basis(), spec);
  return otoc_pp(state0, h, p1, times, *prop, stats);
}

TimeSeries m2_series(const StateVector& state0, const OperatorMatrix& h,
                     std::span<const double> times, const Propagator& prop, bool subtract_t0,
                     QuantumRunStats* stats) {
  QuantumRunOptions o;
  o.otoc = false;
  o.subtract_t0 = subtract_t0;
  o.max_edge_population = 0.0;
  auto r = quantum_ensemble_series(std::span(&state0, 1), h, h, times, prop, o);
  if (stats) *stats = r.stats;
  return std::move(r.m2.front());
}

TimeSeries m2_series(const StateVector& state0, const OperatorMatrix& h,
                     std::span<const double> times, const PropagatorSpec& spec, bool subtract_t0,
                     QuantumRunStats* stats) {
  const auto prop = make_propagator(h, state0.basis(), spec);
  return m2_series(state0, h, times, *prop, subtract_t0, stats);
}

EigenResult eigensolve(const OperatorMatrix& h, int lowest_k, bool want_vectors) {
  if (!h.hermitian || !h.is_real()) throw InvalidArgument("eigensolve: operator must be real symmetric");
  Eigen::MatrixXd dense = Eigen::MatrixXd(h.real_part());
  EigenResult res;
  const auto n = static_cast<int>(dense.rows());
  if (lowest_k > 0 && lowest_k < n && !want_vectors) {
    res.values = detail::symmetric_eigenvalues_range(std::move(dense), 0, lowest_k - 1);
    return res;
  }
  res.values = detail::symmetric_eigen(dense, want_vectors);
  if (want_vectors) res.vectors = std::move(dense);
  if (lowest_k > 0 && lowest_k < n) {
    res.values.conservativeResize(lowest_k);
    if (want_vectors) res.vectors.conservativeResize(Eigen::NoChange, lowest_k);
  }
  return res;
}

}  // namespace qchaos
