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

#include "bqt/trajectory.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bqt {

namespace {

constexpr double kHalfLog2 = 0.34657359027997264;  // ln(2) / 2
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double v) { return v > 0 ? std::log(v) : kNegInf; }

}  // namespace

TrajectoryEngine::TrajectoryEngine(DynamicsSpec dyn, double dt, HeffMethod method, int checkpoint_stride)
    : dyn_(std::move(dyn)), dt_(dt), method_(method), stride_(checkpoint_stride) {
  if (!(dt > 0) || !std::isfinite(dt)) throw std::invalid_argument("time step must be positive and finite");
  if (stride_ < 1) throw std::invalid_argument("checkpoint stride must be at least 1");
  if (dyn_.n_sites < 1 || dyn_.n_sites > kMaxSites) throw ShapeMismatch("unsupported site count");
  for (const auto& j : dyn_.jumps) {
    if (j.op.n_sites != dyn_.n_sites) throw ShapeMismatch("jump operator on the wrong number of sites");
    const double a2 = j.amplitude * j.amplitude;
    angle_.push_back(std::sqrt(dt) * j.amplitude);
    log_k0_.push_back(safe_log(std::abs(1.0 - 0.5 * dt * a2)));
    log_k1_.push_back(safe_log(std::sqrt(dt) * j.amplitude));
  }
  heff_terms_ = dyn_.h_eff.without_identity();
  heff_constant_ = dyn_.h_eff.identity_coefficient();
  constant_per_step_ = -dt * heff_constant_;
  if (dyn_.mode == JumpMode::weak) constant_per_step_ -= kHalfLog2 * static_cast<double>(dyn_.jumps.size());

  if (method_ == HeffMethod::dense) {
    if (dyn_.n_sites > kMaxDenseHeffSites)
      throw SizeLimitExceeded("dense h_eff exponential supports at most " + std::to_string(kMaxDenseHeffSites) +
                              " sites");
    Eigen::SelfAdjointEigenSolver<DenseOperator<double>> solver(to_dense(heff_terms_));
    const Eigen::VectorXd decay = (-dt * solver.eigenvalues().array()).exp();
    heff_dense_ = solver.eigenvectors() * decay.cast<std::complex<double>>().asDiagonal() *
                  solver.eigenvectors().adjoint();
  }
}

void TrajectoryEngine::check_state(const StateVector& psi) const {
  if (psi.size() != (Eigen::Index{1} << dyn_.n_sites))
    throw ShapeMismatch("state of length " + std::to_string(psi.size()) + " for " +
                        std::to_string(dyn_.n_sites) + " sites");
}

double TrajectoryEngine::kraus_apply(StateVector& psi, int i, int b) const {
  if (i < 0 || i >= n_jumps()) throw std::out_of_range("jump index " + std::to_string(i) + " out of range");
  check_state(psi);
  const auto& jump = dyn_.jumps[static_cast<std::size_t>(i)];
  if (dyn_.mode == JumpMode::weak) {
    pauli_rotation_inplace(jump.op, angle_[i], b ? -1 : 1, psi);
    return -kHalfLog2;
  }
  if (b == 0) {
    if (1.0 - 0.5 * dt_ * jump.amplitude * jump.amplitude < 0) psi = -psi;
    return log_k0_[i];
  }
  pauli_apply_inplace(jump.op, psi);
  return log_k1_[i];
}

double TrajectoryEngine::heff_varying(StateVector& psi) const {
  if (method_ == HeffMethod::dense) {
    psi = heff_dense_ * psi;
  } else {
    for (const auto& t : heff_terms_.terms()) imaginary_term_inplace(t.pauli, dt_ * t.coefficient, psi);
  }
  const double norm = psi.norm();
  if (!(norm > 0) || !std::isfinite(norm)) throw NumericalFailure("h_eff step produced a vanishing state");
  psi /= norm;
  return std::log(norm);
}

double TrajectoryEngine::heff_apply(StateVector& psi) const {
  check_state(psi);
  return heff_varying(psi) - dt_ * heff_constant_;
}

double TrajectoryEngine::step(StateVector& psi, const std::uint8_t* bits) const {
  double log = 0;
  for (int i = 0; i < n_jumps(); ++i) {
    const auto& jump = dyn_.jumps[static_cast<std::size_t>(i)];
    if (dyn_.mode == JumpMode::weak) {
      pauli_rotation_inplace(jump.op, angle_[i], bits[i] ? -1 : 1, psi);
    } else if (bits[i]) {
      pauli_apply_inplace(jump.op, psi);
      log += log_k1_[i];
    } else {
      if (1.0 - 0.5 * dt_ * jump.amplitude * jump.amplitude < 0) psi = -psi;
      log += log_k0_[i];
    }
  }
  return log + heff_varying(psi);
}

TrajectoryState TrajectoryEngine::propagate(const TrajectoryLabel& label, const StateVector& init) const {
  check_state(init);
  if (label.cols() != n_jumps() && label.rows() > 0)
    throw ShapeMismatch("label has " + std::to_string(label.cols()) + " columns for " +
                        std::to_string(n_jumps()) + " jumps");
  if (std::abs(init.norm() - 1.0) > 1e-10) throw std::invalid_argument("initial state is not normalized");
  const int n = static_cast<int>(label.rows());
  TrajectoryState traj;
  traj.label = label;
  traj.checkpoints.assign(static_cast<std::size_t>(n / stride_ + 1), init);
  traj.checkpoint_logs.assign(traj.checkpoints.size(), 0.0);
  traj.state = init;
  if (n > 0) {
    replay(traj, label, 1, traj);
  } else {
    traj.log_weight = traj.log_weight_varying = 0;
  }
  return traj;
}

void TrajectoryEngine::replay(const TrajectoryState& from, const TrajectoryLabel& label, int t_star,
                              TrajectoryState& out) const {
  const int n = static_cast<int>(label.rows());
  if (t_star < 1 || t_star > n)
    throw std::out_of_range("step " + std::to_string(t_star) + " outside 1.." + std::to_string(n));
  if (label.cols() != n_jumps()) throw ShapeMismatch("label width does not match the jump count");
  const int k0 = first_checkpoint(t_star);
  if (from.checkpoints.size() != static_cast<std::size_t>(n / stride_ + 1) ||
      out.checkpoints.size() != from.checkpoints.size())
    throw ShapeMismatch("checkpoint buffers do not match the label length");
  out.state = from.checkpoints[static_cast<std::size_t>(k0)];
  double log = from.checkpoint_logs[static_cast<std::size_t>(k0)];
  for (int t = k0 * stride_ + 1; t <= n; ++t) {
    log += step(out.state, label.data() + static_cast<Eigen::Index>(t - 1) * label.cols());
    if (t % stride_ == 0) {
      const auto k = static_cast<std::size_t>(t / stride_);
      out.checkpoints[k] = out.state;
      out.checkpoint_logs[k] = log;
    }
  }
  out.log_weight_varying = log;
  out.log_weight = log + n * constant_per_step_;
}

void TrajectoryEngine::commit(TrajectoryState& traj, TrajectoryState& scratch, int t_star) const {
  const std::size_t first = static_cast<std::size_t>(first_checkpoint(t_star)) + 1;
  for (std::size_t k = first; k < traj.checkpoints.size(); ++k) {
    traj.checkpoints[k].swap(scratch.checkpoints[k]);
    traj.checkpoint_logs[k] = scratch.checkpoint_logs[k];
  }
  traj.state.swap(scratch.state);
  traj.log_weight = scratch.log_weight;
  traj.log_weight_varying = scratch.log_weight_varying;
}

TrajectoryState TrajectoryEngine::recompute_from(const TrajectoryState& traj, int t_star) const {
  TrajectoryState out = traj;
  replay(traj, traj.label, t_star, out);
  return out;
}

TrajectoryState TrajectoryEngine::sequential_sample(int n_steps, const StateVector& init,
                                                    std::mt19937_64& rng) const {
  check_state(init);
  if (n_steps < 0) throw std::invalid_argument("negative step count");
  TrajectoryLabel label = TrajectoryLabel::Zero(n_steps, n_jumps());
  StateVector psi = init;
  StateVector trial;
  for (int t = 0; t < n_steps; ++t) {
    for (int i = 0; i < n_jumps(); ++i) {
      double p[2];
      for (int b = 0; b < 2; ++b) {
        trial = psi;
        p[b] = std::exp(2.0 * kraus_apply(trial, i, b));
      }
      // Strong Kraus pairs are complete only to first order in dt.
      const int b = uniform01(rng) * (p[0] + p[1]) < p[0] ? 0 : 1;
      label(t, i) = static_cast<std::uint8_t>(b);
      kraus_apply(psi, i, b);
    }
    heff_varying(psi);
  }
  return propagate(label, init);
}

double kraus_apply(StateVector& psi, const DynamicsSpec& dyn, int i, int b, double dt) {
  return TrajectoryEngine(dyn, dt).kraus_apply(psi, i, b);
}

double heff_apply(StateVector& psi, const DynamicsSpec& dyn, double dt, HeffMethod method) {
  return TrajectoryEngine(dyn, dt, method).heff_apply(psi);
}

TrajectoryState propagate(const DynamicsSpec& dyn, const Schedule& sched, const TrajectoryLabel& label,
                          const StateVector& init) {
  if (label.rows() != sched.n_steps) throw ShapeMismatch("label rows do not match the schedule");
  return TrajectoryEngine(dyn, sched.dt).propagate(label, init);
}

TrajectoryState recompute_from(const TrajectoryState& traj, const DynamicsSpec& dyn, const Schedule& sched,
                               int t_star) {
  if (traj.label.rows() != sched.n_steps) throw ShapeMismatch("label rows do not match the schedule");
  return TrajectoryEngine(dyn, sched.dt).recompute_from(traj, t_star);
}

TrajectoryState sequential_sample(const DynamicsSpec& dyn, const Schedule& sched, const StateVector& init,
                                  std::mt19937_64& rng) {
  return TrajectoryEngine(dyn, sched.dt).sequential_sample(sched.n_steps, init, rng);
}

}  // namespace bqt
