// Copyright 2026 The bqt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bqt/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>

#include "bqt/models.hpp"

namespace bqt {

namespace {

using cplx = std::complex<double>;

Eigen::Index dim_of(int n_sites) { return Eigen::Index{1} << n_sites; }

/// Phases of P|b> for every basis index b.
Eigen::VectorXcd phases(const PauliString& p) {
  const Eigen::Index d = dim_of(p.n_sites);
  Eigen::VectorXcd ph(d);
  for (Eigen::Index b = 0; b < d; ++b) ph[b] = pauli_phase(p, static_cast<std::uint64_t>(b));
  return ph;
}

// (P rho)(r, c) = ph(r^x) rho(r^x, c);  (rho P)(r, c) = rho(r, c^x) ph(c).
DensityMatrix left_pauli(const PauliString& p, const DensityMatrix& rho, const Eigen::VectorXcd& ph) {
  DensityMatrix out(rho.rows(), rho.cols());
  for (Eigen::Index r = 0; r < rho.rows(); ++r) {
    const auto src = r ^ static_cast<Eigen::Index>(p.x);
    out.row(r) = ph[src] * rho.row(src);
  }
  return out;
}

DensityMatrix right_pauli(const PauliString& p, const DensityMatrix& rho, const Eigen::VectorXcd& ph) {
  DensityMatrix out(rho.rows(), rho.cols());
  for (Eigen::Index c = 0; c < rho.cols(); ++c) out.col(c) = rho.col(c ^ static_cast<Eigen::Index>(p.x)) * ph[c];
  return out;
}

DensityMatrix sandwich(const PauliString& p, const DensityMatrix& rho, const Eigen::VectorXcd& ph) {
  return right_pauli(p, left_pauli(p, rho, ph), ph);
}

/// rho <- e^{-tau P} rho e^{-tau P}.
void imaginary_sandwich(const PauliString& p, double tau, DensityMatrix& rho) {
  const Eigen::VectorXcd ph = phases(p);
  if (p.is_diagonal()) {
    Eigen::VectorXcd d(ph.size());
    for (Eigen::Index b = 0; b < d.size(); ++b) d[b] = ph[b].real() > 0 ? std::exp(-tau) : std::exp(tau);
    rho = d.asDiagonal() * rho * d.asDiagonal();
    return;
  }
  const double ch = std::cosh(tau);
  const double sh = std::sinh(tau);
  const DensityMatrix pr = left_pauli(p, rho, ph);
  const DensityMatrix rp = right_pauli(p, rho, ph);
  const DensityMatrix prp = right_pauli(p, pr, ph);
  rho = ch * ch * rho - ch * sh * (pr + rp) + sh * sh * prp;
}

DenseOperator<double> dense_heff_propagator(const OperatorSum& terms, double dt) {
  Eigen::SelfAdjointEigenSolver<DenseOperator<double>> solver(to_dense(terms));
  const Eigen::VectorXd decay = (-dt * solver.eigenvalues().array()).exp();
  return solver.eigenvectors() * decay.cast<cplx>().asDiagonal() * solver.eigenvectors().adjoint();
}

}  // namespace

int steps_for(double beta, double dt) {
  if (!(dt > 0) || !(beta >= 0) || !std::isfinite(beta)) throw std::invalid_argument("invalid beta or dt");
  const double ratio = beta / dt;
  const double n = std::round(ratio);
  if (std::abs(ratio - n) > 1e-9)
    throw std::invalid_argument("beta = " + std::to_string(beta) + " is not a multiple of dt = " + std::to_string(dt));
  return static_cast<int>(n);
}

int DimerParams::n_steps() const { return steps_for(beta, dt); }

DensityMatrix pure_density(const StateVector& psi) { return psi * psi.adjoint(); }

DenseOperator<double> superoperator(const DynamicsSpec& dyn) {
  const int n = dyn.n_sites;
  if (n > kMaxGeneratorSites)
    throw SizeLimitExceeded("dense superoperator supports at most " + std::to_string(kMaxGeneratorSites) + " sites");
  const std::uint64_t d = std::uint64_t{1} << n;
  OperatorSum k_op = dyn.h_eff;
  double rate_sum = 0;
  for (const auto& j : dyn.jumps) rate_sum += j.amplitude * j.amplitude;
  k_op.add(0.5 * rate_sum, PauliString::identity(n));

  DenseOperator<double> s = DenseOperator<double>::Zero(static_cast<Eigen::Index>(d * d), static_cast<Eigen::Index>(d * d));
  auto idx = [d](std::uint64_t r, std::uint64_t c) { return static_cast<Eigen::Index>(r + d * c); };
  for (std::uint64_t i = 0; i < d; ++i) {
    for (std::uint64_t j = 0; j < d; ++j) {
      const Eigen::Index col = idx(i, j);
      for (const auto& jump : dyn.jumps)
        s(idx(i ^ jump.op.x, j ^ jump.op.x), col) +=
            jump.amplitude * jump.amplitude * pauli_phase(jump.op, i) * std::conj(pauli_phase(jump.op, j));
      for (const auto& t : k_op.terms()) {
        s(idx(i ^ t.pauli.x, j), col) -= t.coefficient * pauli_phase(t.pauli, i);
        s(idx(i, j ^ t.pauli.x), col) -= t.coefficient * std::conj(pauli_phase(t.pauli, j));
      }
    }
  }
  return s;
}

ChannelOracle::ChannelOracle(const DynamicsSpec& dyn, double dt, OracleMode mode, HeffMethod heff)
    : dyn_(dyn), dt_(dt), mode_(mode), heff_(heff) {
  if (!(dt > 0)) throw std::invalid_argument("time step must be positive");
  if (dyn.n_sites > kMaxOracleSites)
    throw SizeLimitExceeded("density-matrix oracle supports at most " + std::to_string(kMaxOracleSites) + " sites");
  heff_terms_ = dyn.h_eff.without_identity();
  heff_constant_ = dyn.h_eff.identity_coefficient();
  if (mode == OracleMode::generator) {
    propagator_ = (dt * superoperator(dyn)).exp();
  } else if (heff == HeffMethod::dense) {
    heff_dense_ = dense_heff_propagator(heff_terms_, dt);
  }
}

DensityMatrix ChannelOracle::step(const DensityMatrix& rho) const {
  const Eigen::Index d = dim_of(dyn_.n_sites);
  if (rho.rows() != d || rho.cols() != d) throw ShapeMismatch("density matrix has the wrong dimension");
  if (mode_ == OracleMode::generator) {
    DensityMatrix out(d, d);
    Eigen::Map<Eigen::VectorXcd>(out.data(), d * d) =
        propagator_ * Eigen::Map<const Eigen::VectorXcd>(rho.data(), d * d);
    return out;
  }
  DensityMatrix out = rho;
  for (const auto& jump : dyn_.jumps) {
    const Eigen::VectorXcd ph = phases(jump.op);
    const double a2 = jump.amplitude * jump.amplitude;
    double keep, flip;
    if (dyn_.mode == JumpMode::weak) {
      const double theta = std::sqrt(dt_) * jump.amplitude;
      keep = std::cos(theta) * std::cos(theta);
      flip = std::sin(theta) * std::sin(theta);
    } else {
      const double k0 = 1.0 - 0.5 * dt_ * a2;
      keep = k0 * k0;
      flip = dt_ * a2;
    }
    out = keep * out + flip * sandwich(jump.op, out, ph);
  }
  if (heff_ == HeffMethod::dense) {
    out = heff_dense_ * out * heff_dense_;
  } else {
    for (const auto& t : heff_terms_.terms()) imaginary_sandwich(t.pauli, dt_ * t.coefficient, out);
  }
  out *= std::exp(-2.0 * dt_ * heff_constant_);
  return out;
}

double ChannelOracle::step_normalized(DensityMatrix& rho) const {
  const double before = rho.trace().real();
  rho = step(rho);
  const double after = rho.trace().real();
  if (!(after > 0) || !std::isfinite(after)) throw NumericalFailure("density matrix trace vanished");
  rho /= after;
  return std::log(after / before);
}

DensityMatrix channel_step(const DensityMatrix& rho, const DynamicsSpec& dyn, double dt) {
  return ChannelOracle(dyn, dt).step(rho);
}

DensityMatrix apply_left(const OperatorSum& op, const DensityMatrix& rho) {
  const Eigen::Index d = dim_of(op.n_sites());
  if (rho.rows() != d) throw ShapeMismatch("operator and density matrix sizes differ");
  DensityMatrix out = DensityMatrix::Zero(d, d);
  for (const auto& t : op.terms()) out += t.coefficient * left_pauli(t.pauli, rho, phases(t.pauli));
  return out;
}

double renyi2_correlator(const DensityMatrix& rho, const OperatorSum& a, const OperatorSum& b) {
  const double purity = rho.squaredNorm();
  if (!(purity > 0)) throw NumericalFailure("zero purity");
  const DensityMatrix x = apply_left(a, rho);
  const DensityMatrix y = apply_left(b, rho);
  // Tr(A rho B rho) = sum_ij (A rho)_ij (B rho)_ji
  const cplx tr = x.cwiseProduct(y.transpose()).sum();
  return tr.real() / purity;
}

StateVector vectorized_product_state(int n_sites, std::uint64_t bits) {
  if (2 * n_sites > kMaxBilayerSites) throw SizeLimitExceeded("bilayer state too large");
  const std::uint64_t mask = (std::uint64_t{1} << n_sites) - 1;
  return basis_state(2 * n_sites, (bits & mask) | ((~bits & mask) << n_sites));
}

namespace {

OperatorSum lift(const OperatorSum& op, int n_sites, bool right) {
  OperatorSum out(2 * n_sites);
  for (const auto& t : op.terms()) {
    const int shift = right ? n_sites : 0;
    out.add(t.coefficient, PauliString{2 * n_sites, t.pauli.x << shift, t.pauli.z << shift});
  }
  return out;
}

}  // namespace

std::pair<double, double> bilayer_correlators(const StateVector& psi, const OperatorSum& a) {
  const int n = a.n_sites();
  if (psi.size() != dim_of(2 * n)) throw ShapeMismatch("bilayer state and observable sizes differ");
  const OperatorSum al = lift(a, n, false);
  const OperatorSum ar = lift(antiunitary_conjugate(a), n, true);
  const double norm2 = psi.squaredNorm();
  const StateVector a_psi = opsum_apply(psi, al);
  const double c1 = psi.dot(a_psi).real() / norm2;
  const double c2 = opsum_matrix_element(psi, ar, a_psi).real() / norm2;
  return {c1, c2};
}

StateVector bilayer_krylov_evolve(std::span<const BilayerTerm> terms, int n_sites, double beta, double dt,
                                  const StateVector& init, const KrylovOptions& options,
                                  const std::function<void(int, const StateVector&)>& on_step) {
  if (2 * n_sites > kMaxBilayerSites)
    throw SizeLimitExceeded("bilayer Lanczos supports at most " + std::to_string(kMaxBilayerSites) + " sites");
  if (init.size() != dim_of(2 * n_sites)) throw ShapeMismatch("initial bilayer state has the wrong length");
  if (options.subspace < 2) throw std::invalid_argument("Krylov subspace must have dimension at least 2");
  const int n_steps = steps_for(beta, dt);
  const OperatorSum h = bilayer_hamiltonian(terms, n_sites);
  const Eigen::Index d = init.size();
  const int kmax = static_cast<int>(std::min<Eigen::Index>(options.subspace, d));

  StateVector psi = init / init.norm();
  DenseOperator<double> v(d, kmax);
  for (int step = 1; step <= n_steps; ++step) {
    std::vector<double> alpha, beta_k;
    v.col(0) = psi;
    Eigen::VectorXd y;
    int used = 0;
    for (int k = 0; k < kmax; ++k) {
      StateVector w = opsum_apply(StateVector(v.col(k)), h);
      alpha.push_back(v.col(k).dot(w).real());
      // Full reorthogonalization; the subspace is small.
      for (int pass = 0; pass < 2; ++pass) w -= v.leftCols(k + 1) * (v.leftCols(k + 1).adjoint() * w);
      const double b = w.norm();
      used = k + 1;
      Eigen::MatrixXd t = Eigen::MatrixXd::Zero(used, used);
      for (int j = 0; j < used; ++j) {
        t(j, j) = alpha[static_cast<std::size_t>(j)];
        if (j + 1 < used) t(j, j + 1) = t(j + 1, j) = beta_k[static_cast<std::size_t>(j)];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
      const double lo = es.eigenvalues().minCoeff();
      const Eigen::VectorXd decay = (-dt * (es.eigenvalues().array() - lo)).exp();
      y = es.eigenvectors() * decay.asDiagonal() * es.eigenvectors().row(0).transpose();
      const double residual = b * std::abs(y[used - 1]) / y.norm();
      if (b < 1e-14 || residual < options.tolerance) break;
      if (k + 1 == kmax)
        throw KrylovNonConvergence("Lanczos residual " + std::to_string(residual) + " after " +
                                   std::to_string(kmax) + " vectors at step " + std::to_string(step));
      beta_k.push_back(b);
      v.col(k + 1) = w / b;
    }
    psi = v.leftCols(used) * y.cast<cplx>();
    psi /= psi.norm();
    if (on_step) on_step(step, psi);
  }
  return psi;
}

PairSums enumerate_pair_sums(const TrajectoryEngine& engine, int n_steps, const StateVector& init,
                             const OperatorSum& a) {
  const long bits = static_cast<long>(n_steps) * engine.n_jumps();
  if (2 * bits > kMaxEnumerationBits)
    throw SizeLimitExceeded("enumeration needs 2^" + std::to_string(2 * bits) + " label pairs; the limit is 2^" +
                            std::to_string(kMaxEnumerationBits));
  const std::uint64_t n_labels = std::uint64_t{1} << bits;
  const Eigen::Index d = init.size();
  const int m = engine.n_jumps();

  DenseOperator<double> psi(d, static_cast<Eigen::Index>(n_labels));
  std::vector<double> logs(n_labels);
  TrajectoryLabel label(n_steps, m);
  for (std::uint64_t s = 0; s < n_labels; ++s) {
    for (long k = 0; k < bits; ++k) label.data()[k] = static_cast<std::uint8_t>((s >> k) & 1);
    const TrajectoryState traj = engine.propagate(label, init);
    psi.col(static_cast<Eigen::Index>(s)) = traj.state;
    logs[s] = traj.log_weight;
  }
  double top = -std::numeric_limits<double>::infinity();
  for (double l : logs) top = std::max(top, l);
  if (!std::isfinite(top)) throw NumericalFailure("every trajectory has zero weight");
  for (std::uint64_t s = 0; s < n_labels; ++s)
    psi.col(static_cast<Eigen::Index>(s)) *= std::exp(logs[s] - top);

  const DenseOperator<double> a_psi = [&] {
    DenseOperator<double> out(d, psi.cols());
    for (Eigen::Index s = 0; s < psi.cols(); ++s) out.col(s) = opsum_apply(StateVector(psi.col(s)), a);
    return out;
  }();

  PairSums sums;
  sums.log_scale = 4.0 * top;
  sums.n_pairs = n_labels * n_labels;
  const Eigen::Index block = 256;
  for (Eigen::Index c0 = 0; c0 < psi.cols(); c0 += block) {
    const Eigen::Index w = std::min(block, psi.cols() - c0);
    const DenseOperator<double> g = psi.adjoint() * psi.middleCols(c0, w);
    const DenseOperator<double> am = psi.adjoint() * a_psi.middleCols(c0, w);
    sums.sum_ii += g.squaredNorm();
    sums.sum_aa += am.squaredNorm();
    sums.sum_ai += am.cwiseProduct(g.conjugate()).sum();
  }
  return sums;
}

double dimer_transfer_matrix(const DimerParams& p) {
  const int n = p.n_steps();
  if (p.J < 0) throw std::invalid_argument("dimer coupling must be non-negative");
  // Spin +1 is |0>. One step: bond weight (1 - dt J / 2)^2 to stay, dt J to
  // flip, then the squared postselection factor exp(-2 dt h sigma).
  const double k0 = 1.0 - 0.5 * p.dt * p.J;
  const double stay = k0 * k0;
  const double flip = p.dt * p.J;
  const double up = std::exp(-2.0 * p.dt * p.h);
  const double down = std::exp(2.0 * p.dt * p.h);
  double vp = 1.0, vm = 0.0;
  for (int t = 0; t < n; ++t) {
    const double np = (vp * stay + vm * flip) * up;
    const double nm = (vp * flip + vm * stay) * down;
    const double scale = std::max(std::abs(np), std::abs(nm));
    vp = np / scale;
    vm = nm / scale;
  }
  // Gluing two halves pinned to +1 at the ends weights the middle spin by v^2.
  return (vp * vp - vm * vm) / (vp * vp + vm * vm);
}

double dimer_exact(const DimerParams& p) {
  const int n = p.n_steps();
  const auto terms = dimer_terms(p.J, p.h);
  const BilayerSpec spec = decompose_bilayer(terms, 1);
  const DynamicsSpec dyn = build_dynamics(spec, {}, JumpMode::strong);
  const ChannelOracle oracle(dyn, p.dt);
  DensityMatrix rho = pure_density(basis_state(1, 0));
  for (int t = 0; t < n; ++t) oracle.step_normalized(rho);
  return renyi2_correlator(rho, OperatorSum::single(1.0, PauliString::single(1, 0, 'Z')),
                           OperatorSum::single(1.0, PauliString::identity(1)));
}

}  // namespace bqt
