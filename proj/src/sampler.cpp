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

#include "bqt/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace bqt {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

TrajectoryLabel random_label(int n_steps, int m, std::mt19937_64& rng) {
  TrajectoryLabel label(n_steps, m);
  std::uint64_t word = 0;
  int left = 0;
  for (Eigen::Index k = 0; k < label.size(); ++k) {
    if (left == 0) {
      word = rng();
      left = 64;
    }
    label.data()[k] = static_cast<std::uint8_t>(word & 1);
    word >>= 1;
    --left;
  }
  return label;
}

/// Samples of one chain: one series per evaluated quantity.
struct ChainOutput {
  std::vector<std::vector<std::complex<double>>> values;
  long rejected = 0;
  long retained = 0;
  long accepted = 0;
  long proposed = 0;
};

struct SuiteOutput {
  std::vector<ChainOutput> chains;
};

/// Runs cfg.n_chains independent chains. For Target::p every op in `evaluate`
/// yields A_ss'/I_ss'; for Target::q the single series is I_ss'/A_ss'.
SuiteOutput run_suite(const TrajectoryEngine& engine, int n_steps, const StateVector& init, Target target,
                      const OperatorSum* q_op, std::span<const ObservableRequest> evaluate, const McConfig& cfg,
                      std::uint64_t tag) {
  SuiteOutput out;
  out.chains.resize(static_cast<std::size_t>(cfg.n_chains));
  const long sweep = static_cast<long>(n_steps) * engine.n_jumps();
  const long burn_in = cfg.resolved_burn_in();
  const long thinning = cfg.resolved_thinning(sweep);

  auto run_chain = [&](int c) {
    PairChain chain(engine, n_steps, init, target, q_op, derive_seed(cfg.seed, tag, static_cast<std::uint64_t>(c)));
    ChainOutput& res = out.chains[static_cast<std::size_t>(c)];
    const std::size_t n_series = target == Target::p ? evaluate.size() : 1;
    res.values.assign(n_series, {});
    for (long p = 1; p <= cfg.n_updates; ++p) {
      res.accepted += chain.metropolis_step() ? 1 : 0;
      ++res.proposed;
      if (p <= burn_in || (p - burn_in) % thinning != 0) continue;
      ++res.retained;
      const std::complex<double> overlap = chain.overlap();
      if (target == Target::p) {
        if (std::abs(overlap) < kOverlapFloor) {
          ++res.rejected;
          continue;
        }
        for (std::size_t k = 0; k < evaluate.size(); ++k)
          res.values[k].push_back(chain.matrix_element(evaluate[k].op) / overlap);
      } else {
        const std::complex<double> a = chain.matrix_element(*q_op);
        if (std::abs(a) < kOverlapFloor) {
          ++res.rejected;
          continue;
        }
        res.values[0].push_back(overlap / a);
      }
    }
  };

  const int threads = std::max(1, std::min(cfg.threads, cfg.n_chains));
  if (threads == 1) {
    for (int c = 0; c < cfg.n_chains; ++c) run_chain(c);
    return out;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (int c = next++; c < cfg.n_chains; c = next++) {
        try {
          run_chain(c);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Pools per-chain batch means of series `k` into one estimate.
EstimatorResult aggregate(const SuiteOutput& suite, std::size_t k, int n_batches, const std::string& what) {
  EstimatorResult r;
  long retained = 0;
  long accepted = 0;
  long proposed = 0;
  for (const auto& c : suite.chains) {
    retained += c.retained;
    r.n_rejected += c.rejected;
    accepted += c.accepted;
    proposed += c.proposed;
  }
  r.acceptance_rate = proposed > 0 ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0;
  if (retained > 0 && 2 * r.n_rejected > retained)
    throw DegenerateChain(what + ": " + std::to_string(r.n_rejected) + " of " + std::to_string(retained) +
                          " retained samples have a vanishing denominator");

  std::vector<double> re, im;
  for (const auto& c : suite.chains) {
    const auto& s = c.values[k];
    std::vector<double> x(s.size()), y(s.size());
    for (std::size_t j = 0; j < s.size(); ++j) {
      x[j] = s[j].real();
      y[j] = s[j].imag();
    }
    auto bx = batch_mean_values(x, n_batches);
    auto by = batch_mean_values(y, n_batches);
    re.insert(re.end(), bx.begin(), bx.end());
    im.insert(im.end(), by.begin(), by.end());
    r.n_samples += static_cast<long>(s.size());
  }
  r.n_batches = static_cast<int>(re.size());
  const double count = static_cast<double>(re.size());
  r.mean = {mean_of(re), mean_of(im)};
  r.std_error = sample_std(re) / std::sqrt(count);
  r.std_error_imag = sample_std(im) / std::sqrt(count);

  std::vector<double> spread;
  for (const auto& c : suite.chains) {
    std::vector<double> d(c.values[k].size());
    for (std::size_t j = 0; j < d.size(); ++j) d[j] = std::norm(c.values[k][j] - r.mean);
    auto b = batch_mean_values(d, n_batches);
    spread.insert(spread.end(), b.begin(), b.end());
  }
  r.variance = mean_of(spread);
  r.variance_stderr = sample_std(spread) / std::sqrt(count);

  if (!std::isfinite(r.mean.real()) || !std::isfinite(r.mean.imag()) || !std::isfinite(r.std_error))
    throw NumericalFailure(what + ": non-finite estimate");
  if (std::abs(r.mean.imag()) > 5.0 * r.std_error_imag + 1e-12)
    throw NumericalFailure(what + ": imaginary part " + std::to_string(r.mean.imag()) +
                           " exceeds five standard errors");
  return r;
}

void check_config(const McConfig& cfg, long sweep) {
  if (cfg.n_chains < 1) throw ConfigError("n_chains must be at least 1");
  if (cfg.n_batches < 2) throw ConfigError("n_batches must be at least 2");
  if (cfg.n_updates < 0 || cfg.burn_in > cfg.n_updates) throw ConfigError("burn_in exceeds n_updates");
  const long kept = (cfg.n_updates - cfg.resolved_burn_in()) / cfg.resolved_thinning(sweep);
  if (kept < 2L * cfg.n_batches)
    throw ConfigError("each chain keeps " + std::to_string(kept) + " samples, fewer than 2 * n_batches = " +
                      std::to_string(2 * cfg.n_batches));
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag, std::uint64_t chain) {
  return splitmix64(master ^ splitmix64(tag ^ splitmix64(chain + 0x632be59bd9b4e019ULL)));
}

PairChain::PairChain(const TrajectoryEngine& engine, int n_steps, const StateVector& init, Target target,
                     const OperatorSum* op, std::uint64_t seed)
    : engine_(&engine), n_steps_(n_steps), init_(init), target_(target), op_(op), rng_(seed) {
  if (target == Target::q && op == nullptr) throw std::invalid_argument("q-target needs an operator");
  if (n_steps < 0) throw std::invalid_argument("negative step count");
  const int m = engine.n_jumps();
  TrajectoryLabel s = random_label(n_steps, m, rng_);
  TrajectoryLabel s_prime = random_label(n_steps, m, rng_);
  reset(s, s_prime);
}

void PairChain::reset(const TrajectoryLabel& s, const TrajectoryLabel& s_prime) {
  chain_.traj = engine_->propagate(s, init_);
  chain_.traj_prime = engine_->propagate(s_prime, init_);
  scratch_ = chain_.traj;
  log_target_ = evaluate_log_target(chain_.traj, chain_.traj_prime);
  chain_.log_overlap_sq = log_target_ + constant_offset();
}

double PairChain::evaluate_log_target(const TrajectoryState& a, const TrajectoryState& b) const {
  const std::complex<double> v =
      target_ == Target::p ? a.state.dot(b.state) : opsum_matrix_element(a.state, *op_, b.state);
  const double mag = std::abs(v);
  if (mag == 0.0) return kNegInf;
  return 2.0 * (a.log_weight_varying + b.log_weight_varying) + 2.0 * std::log(mag);
}

std::complex<double> PairChain::overlap() const { return chain_.traj.state.dot(chain_.traj_prime.state); }

std::complex<double> PairChain::matrix_element(const OperatorSum& op) const {
  return opsum_matrix_element(chain_.traj.state, op, chain_.traj_prime.state);
}

bool PairChain::metropolis_step() {
  const long n_bits = bits();
  if (n_bits == 0) return true;
  const int m = engine_->n_jumps();
  const long half = n_bits / 2;
  const auto k = static_cast<long>(uniform_below(rng_, static_cast<std::uint64_t>(n_bits)));
  const bool second = k >= half;
  const long r = k % half;
  const int t = static_cast<int>(r / m);
  const int i = static_cast<int>(r % m);

  TrajectoryState& cur = second ? chain_.traj_prime : chain_.traj;
  cur.label(t, i) ^= 1;
  engine_->replay(cur, cur.label, t + 1, scratch_);
  const double proposed = second ? evaluate_log_target(chain_.traj, scratch_)
                                 : evaluate_log_target(scratch_, chain_.traj_prime);
  const double u = uniform01(rng_);

  bool accept;
  if (log_target_ == kNegInf) {
    // A chain started on a zero-weight pair walks freely until it finds support.
    accept = true;
  } else if (proposed == kNegInf) {
    accept = false;
  } else {
    const double delta = proposed - log_target_;
    accept = delta >= 0 || u < std::exp(delta);
  }
  if (accept) {
    engine_->commit(cur, scratch_, t + 1);
    log_target_ = proposed;
    chain_.log_overlap_sq = proposed + constant_offset();
  } else {
    cur.label(t, i) ^= 1;
  }
  return accept;
}

std::vector<double> batch_mean_values(std::span<const double> series, int n_batches) {
  if (n_batches < 1) throw std::invalid_argument("n_batches must be positive");
  if (series.size() < 2 * static_cast<std::size_t>(n_batches))
    throw std::invalid_argument("series of length " + std::to_string(series.size()) + " is too short for " +
                                std::to_string(n_batches) + " batches");
  const std::size_t size = series.size() / static_cast<std::size_t>(n_batches);
  const std::size_t skip = series.size() - size * static_cast<std::size_t>(n_batches);
  std::vector<double> means(static_cast<std::size_t>(n_batches));
  for (std::size_t b = 0; b < means.size(); ++b) {
    const auto first = series.begin() + static_cast<std::ptrdiff_t>(skip + b * size);
    means[b] = std::accumulate(first, first + static_cast<std::ptrdiff_t>(size), 0.0) / static_cast<double>(size);
  }
  return means;
}

std::pair<double, double> batch_means(std::span<const double> series, int n_batches) {
  if (n_batches < 2) throw std::invalid_argument("batch means needs at least 2 batches");
  const auto means = batch_mean_values(series, n_batches);
  return {mean_of(means), sample_std(means) / std::sqrt(static_cast<double>(n_batches))};
}

SampleRun sample_observables(const TrajectoryEngine& engine, int n_steps, const StateVector& init,
                             std::span<const ObservableRequest> requests, const McConfig& cfg,
                             std::uint64_t tag) {
  check_config(cfg, static_cast<long>(n_steps) * engine.n_jumps());
  for (const auto& req : requests) {
    if (req.op.n_sites() != engine.n_sites()) throw ShapeMismatch("observable on the wrong number of sites");
    if (req.interlayer) {
      const auto& terms = req.op.terms();
      if (terms.size() != 1 || std::abs(terms.front().coefficient) != 1.0)
        throw std::invalid_argument("interlayer observable must be a single Pauli string with unit coefficient");
    }
  }

  SampleRun run;
  const SuiteOutput p = run_suite(engine, n_steps, init, Target::p, nullptr, requests, cfg, splitmix64(tag));
  for (std::size_t k = 0; k < requests.size(); ++k)
    run.intralayer.push_back(aggregate(p, k, cfg.n_batches, "C1 of " + to_string(requests[k].op)));

  run.interlayer.resize(requests.size());
  for (std::size_t k = 0; k < requests.size(); ++k) {
    if (!requests[k].interlayer) continue;
    const std::string name = to_string(requests[k].op);
    const SuiteOutput q = run_suite(engine, n_steps, init, Target::q, &requests[k].op, {}, cfg,
                                    splitmix64(tag ^ splitmix64(k + 1)));
    InterlayerResult& res = run.interlayer[k];
    res.numerator = run.intralayer[k];
    res.denominator = aggregate(q, 0, cfg.n_batches, "q-average of " + name);
    const double c1 = res.numerator.value();
    const double d = res.denominator.value();
    const double s1 = res.numerator.std_error;
    const double sd = res.denominator.std_error;
    res.combined = res.denominator;
    res.combined.mean = c1 / d;
    res.combined.std_error = std::hypot(s1 / d, c1 * sd / (d * d));
    res.combined.std_error_imag = 0;
    res.combined.reliable = std::abs(c1) >= 3.0 * s1;
    if (!std::isfinite(res.combined.mean.real()) || !std::isfinite(res.combined.std_error))
      throw NumericalFailure("C2 of " + name + ": non-finite ratio (denominator " + std::to_string(d) + ")");
  }
  return run;
}

EstimatorResult estimate_intralayer(const DynamicsSpec& dyn, const Schedule& sched, const OperatorSum& op,
                                    const StateVector& init, const McConfig& cfg) {
  const TrajectoryEngine engine(dyn, sched.dt);
  const ObservableRequest req{op, false};
  return sample_observables(engine, sched.n_steps, init, std::span(&req, 1), cfg,
                            static_cast<std::uint64_t>(sched.n_steps))
      .intralayer.front();
}

InterlayerResult estimate_interlayer(const DynamicsSpec& dyn, const Schedule& sched, const OperatorSum& op,
                                     const StateVector& init, const McConfig& cfg) {
  const TrajectoryEngine engine(dyn, sched.dt);
  const ObservableRequest req{op, true};
  return sample_observables(engine, sched.n_steps, init, std::span(&req, 1), cfg,
                            static_cast<std::uint64_t>(sched.n_steps))
      .interlayer.front();
}

}  // namespace bqt
