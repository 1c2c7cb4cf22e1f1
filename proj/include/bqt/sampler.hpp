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

// Metropolis sampling of trajectory pairs (s, s') and the Renyi-2 estimators
//
//   C1 = Tr(rho^2 A) / Tr(rho^2)       = E_p[A_ss' / I_ss'],   p ~ |I_ss'|^2
//   C2 = Tr(rho A rho A) / Tr(rho^2)   = C1 / E_q[I_ss' / A_ss'], q ~ |A_ss'|^2
//
// with I_ss' = <psi_s|psi_s'> and A_ss' = <psi_s|A|psi_s'>.

#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "bqt/trajectory.hpp"

namespace bqt {

enum class Target { p, q };

struct McConfig {
  int n_chains = 16;
  long n_updates = 20000;  // proposals per chain, burn-in included
  long burn_in = -1;       // -1: 10% of n_updates
  long thinning = -1;      // -1: one sweep, n * m proposals
  int n_batches = 16;      // per chain
  std::uint64_t seed = 1;
  int threads = 1;

  long resolved_burn_in() const noexcept { return burn_in >= 0 ? burn_in : n_updates / 10; }
  long resolved_thinning(long sweep) const noexcept {
    if (thinning > 0) return thinning;
    return sweep > 0 ? sweep : 1;
  }
};

struct EstimatorResult {
  std::complex<double> mean{0, 0};
  double std_error = 0;       // of the real part
  double std_error_imag = 0;
  long n_samples = 0;      // retained and evaluated
  long n_rejected = 0;     // retained but with a vanishing denominator
  int n_batches = 0;       // pooled over chains
  double acceptance_rate = 0;
  bool reliable = true;
  // Spread of the retained samples, E|x - mean|^2, and its batch-means error.
  double variance = 0;
  double variance_stderr = 0;

  double value() const noexcept { return mean.real(); }
};

struct InterlayerResult {
  EstimatorResult numerator;    // C1 from the p-chains
  EstimatorResult denominator;  // E_q[I / A]
  EstimatorResult combined;     // C2
};

/// Derives a chain's RNG seed from the master seed, a run tag and the chain index.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag, std::uint64_t chain);

struct PairChainState {
  TrajectoryState traj;
  TrajectoryState traj_prime;
  // Log of the current target with full weights: 2l + 2l' + 2 ln|<phi|phi'>|
  // for Target::p, with the matrix element of the operator for Target::q.
  double log_overlap_sq = -std::numeric_limits<double>::infinity();
};

class PairChain {
 public:
  /// `op` is the operator defining the q-target; ignored for Target::p.
  PairChain(const TrajectoryEngine& engine, int n_steps, const StateVector& init, Target target,
            const OperatorSum* op, std::uint64_t seed);

  /// One proposal. Returns true when accepted.
  bool metropolis_step();

  const PairChainState& state() const noexcept { return chain_; }
  /// Log of the (label-dependent part of the) target: |I|^2 or |A|^2.
  double log_target() const noexcept { return log_target_; }
  std::complex<double> overlap() const;
  std::complex<double> matrix_element(const OperatorSum& op) const;
  std::mt19937_64& rng() noexcept { return rng_; }
  long bits() const noexcept { return 2L * n_steps_ * engine_->n_jumps(); }

  /// Replaces both labels and recomputes (used by tests to set a start point).
  void reset(const TrajectoryLabel& s, const TrajectoryLabel& s_prime);

 private:
  double evaluate_log_target(const TrajectoryState& a, const TrajectoryState& b) const;
  double constant_offset() const noexcept { return 4.0 * n_steps_ * engine_->constant_log_per_step(); }

  const TrajectoryEngine* engine_;
  int n_steps_;
  StateVector init_;
  Target target_;
  const OperatorSum* op_;
  std::mt19937_64 rng_;
  PairChainState chain_;
  TrajectoryState scratch_;
  double log_target_;
};

/// Splits `series` into n_batches contiguous equal batches (the remainder is
/// dropped from the front) and returns (mean, standard error of the mean).
std::pair<double, double> batch_means(std::span<const double> series, int n_batches);

/// Per-chain batch means, used for pooling.
std::vector<double> batch_mean_values(std::span<const double> series, int n_batches);

struct ObservableRequest {
  OperatorSum op;
  bool interlayer = false;
};

struct SampleRun {
  std::vector<EstimatorResult> intralayer;    // one per request, C1
  std::vector<InterlayerResult> interlayer;   // one per request; empty entries for intralayer requests
};

/// Runs one p-suite shared by every request and one q-suite per interlayer
/// request. `tag` separates the random streams of different runs.
SampleRun sample_observables(const TrajectoryEngine& engine, int n_steps, const StateVector& init,
                             std::span<const ObservableRequest> requests, const McConfig& cfg,
                             std::uint64_t tag);

EstimatorResult estimate_intralayer(const DynamicsSpec& dyn, const Schedule& sched, const OperatorSum& op,
                                    const StateVector& init, const McConfig& cfg);
InterlayerResult estimate_interlayer(const DynamicsSpec& dyn, const Schedule& sched, const OperatorSum& op,
                                     const StateVector& init, const McConfig& cfg);

/// Threshold below which |I_ss'| (or |A_ss'| for q-samples) counts as zero.
inline constexpr double kOverlapFloor = 1e-14;

}  // namespace bqt
