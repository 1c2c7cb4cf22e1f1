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

// Reference engines: dense density-matrix evolution, Renyi-2 correlators,
// Lanczos evolution of the bilayer state, brute-force pair sums and the
// single-site dimer.
//
// Two density-matrix modes:
//   mirror     applies exactly the Kraus pairs and h_eff splitting of the
//              trajectory engine, so label sums reproduce it to rounding;
//   generator  applies e^{dt L} of the continuous-time superoperator, which
//              is what the bilayer imaginary-time evolution corresponds to.

#pragma once

#include <complex>
#include <functional>
#include <span>

#include "bqt/bilayer_map.hpp"
#include "bqt/trajectory.hpp"

namespace bqt {

using DensityMatrix = DenseOperator<double>;

enum class OracleMode { mirror, generator };

inline constexpr int kMaxOracleSites = 10;
inline constexpr int kMaxGeneratorSites = 5;
inline constexpr int kMaxBilayerSites = 16;  // total, both layers
inline constexpr int kMaxEnumerationBits = 24;

DensityMatrix pure_density(const StateVector& psi);

/// Dense superoperator of the compiled dynamics acting on column-major vec(rho).
DenseOperator<double> superoperator(const DynamicsSpec& dyn);

class ChannelOracle {
 public:
  ChannelOracle(const DynamicsSpec& dyn, double dt, OracleMode mode = OracleMode::mirror,
                HeffMethod heff = HeffMethod::term_split);

  /// One time step, without renormalization.
  DensityMatrix step(const DensityMatrix& rho) const;
  /// One time step, rescaled to unit trace. Returns the log of the trace
  /// after the step relative to before.
  double step_normalized(DensityMatrix& rho) const;

  OracleMode mode() const noexcept { return mode_; }

 private:
  DynamicsSpec dyn_;
  double dt_;
  OracleMode mode_;
  HeffMethod heff_;
  OperatorSum heff_terms_;
  double heff_constant_ = 0;
  DenseOperator<double> heff_dense_;
  DenseOperator<double> propagator_;  // generator mode
};

/// Mirror-mode step with term-split h_eff.
DensityMatrix channel_step(const DensityMatrix& rho, const DynamicsSpec& dyn, double dt);

/// Tr(rho A rho B) / Tr(rho^2).
double renyi2_correlator(const DensityMatrix& rho, const OperatorSum& a, const OperatorSum& b);

/// sum_k c_k P_k rho.
DensityMatrix apply_left(const OperatorSum& op, const DensityMatrix& rho);

struct KrylovOptions {
  int subspace = 30;
  double tolerance = 1e-10;
};

/// Applies the normalized e^{-dt H_bilayer} beta/dt times by Lanczos.
/// `on_step(t, psi)` is called after every step t = 1..n.
StateVector bilayer_krylov_evolve(std::span<const BilayerTerm> terms, int n_sites, double beta, double dt,
                                  const StateVector& init, const KrylovOptions& options = {},
                                  const std::function<void(int, const StateVector&)>& on_step = {});

/// Bilayer image of the product state |b><b|: |b>_l |not b>_r (phase dropped).
StateVector vectorized_product_state(int n_sites, std::uint64_t bits);

/// (C1, C2) of a bilayer state: <A_l> and <A_l conj(A)_r>, normalized.
std::pair<double, double> bilayer_correlators(const StateVector& psi, const OperatorSum& a);

/// Exact label-pair sums, scaled: the true sums are the stored values times
/// exp(log_scale).
struct PairSums {
  double log_scale = 0;
  double sum_ii = 0;                  // sum |I_ss'|^2
  std::complex<double> sum_ai{0, 0};  // sum A_ss' conj(I_ss')
  double sum_aa = 0;                  // sum |A_ss'|^2
  std::uint64_t n_pairs = 0;
};

PairSums enumerate_pair_sums(const TrajectoryEngine& engine, int n_steps, const StateVector& init,
                             const OperatorSum& a);

struct DimerParams {
  double J = 1.0;
  double h = 0.0;
  double beta = 1.0;
  double dt = 0.01;
  int n_steps() const;
};

/// <Z> in the classical spin chain picture of the strong-jump dimer.
double dimer_transfer_matrix(const DimerParams& p);
/// Tr(rho^2 Z) / Tr(rho^2) from the strong-jump channel.
double dimer_exact(const DimerParams& p);

/// Number of steps beta / dt, rejecting non-integral ratios.
int steps_for(double beta, double dt);

}  // namespace bqt
