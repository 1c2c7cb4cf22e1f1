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

// Postselected quantum trajectories
//
//   |psi_s> ~ e^{-dt h_eff} K_{s_n} ... e^{-dt h_eff} K_{s_1} |psi(0)>
//
// stored as a normalized state plus a log-weight. Within a step the jumps act
// in order i = 0..m-1, then h_eff.
//
// The log-weight is split into a label-dependent part and a constant part
// (weak-jump normalization and the identity coefficient of h_eff). Samplers
// only ever look at the label-dependent part, so shifting h_eff by a constant
// changes no state and no sampling decision.

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "bqt/bilayer_map.hpp"
#include "bqt/pauli.hpp"

namespace bqt {

struct Schedule {
  double dt = 0.1;
  int n_steps = 0;
  double beta() const noexcept { return dt * n_steps; }
};

/// n_steps x m bit matrix; entry (t, i) selects the Kraus operator of jump i
/// at step t + 1.
using TrajectoryLabel = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct TrajectoryState {
  TrajectoryLabel label;
  StateVector state;
  double log_weight = 0;
  double log_weight_varying = 0;
  /// checkpoints[k] is the normalized state after k * stride steps, together
  /// with the label-dependent log-weight accumulated so far.
  std::vector<StateVector> checkpoints;
  std::vector<double> checkpoint_logs;
};

enum class HeffMethod { term_split, dense };

inline constexpr int kMaxDenseHeffSites = 10;

class TrajectoryEngine {
 public:
  TrajectoryEngine(DynamicsSpec dyn, double dt, HeffMethod method = HeffMethod::term_split,
                   int checkpoint_stride = 1);

  const DynamicsSpec& dynamics() const noexcept { return dyn_; }
  double dt() const noexcept { return dt_; }
  int n_jumps() const noexcept { return static_cast<int>(dyn_.jumps.size()); }
  int n_sites() const noexcept { return dyn_.n_sites; }
  int stride() const noexcept { return stride_; }
  HeffMethod heff_method() const noexcept { return method_; }

  /// Applies Kraus operator b of jump i and renormalizes; returns the log of
  /// the norm change.
  double kraus_apply(StateVector& psi, int i, int b) const;
  /// Applies e^{-dt h_eff} and renormalizes; returns the log of the norm
  /// change including the identity part of h_eff.
  double heff_apply(StateVector& psi) const;

  /// Label-independent log-weight per step.
  double constant_log_per_step() const noexcept { return constant_per_step_; }

  TrajectoryState propagate(const TrajectoryLabel& label, const StateVector& init) const;

  /// Replays steps t_star..n (1-based) of `label`, starting from the last
  /// checkpoint of `from` before t_star. Writes the replayed checkpoints and
  /// the final state into `out`, which must have the same shape as `from`.
  /// `out` may alias `from`.
  void replay(const TrajectoryState& from, const TrajectoryLabel& label, int t_star,
              TrajectoryState& out) const;

  /// Moves the replayed suffix of `scratch` into `traj` (cheap buffer swaps).
  void commit(TrajectoryState& traj, TrajectoryState& scratch, int t_star) const;

  TrajectoryState recompute_from(const TrajectoryState& traj, int t_star) const;

  TrajectoryState sequential_sample(int n_steps, const StateVector& init, std::mt19937_64& rng) const;

 private:
  void check_state(const StateVector& psi) const;
  /// One full step without the constant log part.
  double step(StateVector& psi, const std::uint8_t* bits) const;
  double heff_varying(StateVector& psi) const;
  int first_checkpoint(int t_star) const noexcept { return (t_star - 1) / stride_; }

  DynamicsSpec dyn_;
  double dt_;
  HeffMethod method_;
  int stride_;
  std::vector<double> angle_;       // weak: sqrt(dt) a_i
  std::vector<double> log_k0_;      // strong: log(1 - dt a_i^2 / 2)
  std::vector<double> log_k1_;      // strong: log(sqrt(dt) a_i)
  OperatorSum heff_terms_;          // h_eff without its identity part
  double heff_constant_ = 0;
  double constant_per_step_ = 0;
  DenseOperator<double> heff_dense_;  // e^{-dt (h_eff - c I)} for HeffMethod::dense
};

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n) by multiply-shift.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

// Free-function forms.
double kraus_apply(StateVector& psi, const DynamicsSpec& dyn, int i, int b, double dt);
double heff_apply(StateVector& psi, const DynamicsSpec& dyn, double dt,
                  HeffMethod method = HeffMethod::term_split);
TrajectoryState propagate(const DynamicsSpec& dyn, const Schedule& sched, const TrajectoryLabel& label,
                          const StateVector& init);
TrajectoryState recompute_from(const TrajectoryState& traj, const DynamicsSpec& dyn, const Schedule& sched,
                               int t_star);
TrajectoryState sequential_sample(const DynamicsSpec& dyn, const Schedule& sched, const StateVector& init,
                                  std::mt19937_64& rng);

}  // namespace bqt
