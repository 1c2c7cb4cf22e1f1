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

// Compiler from bilayer spin Hamiltonians of the form
//
//   H_bilayer = H (x) I + I (x) conj(H) - sum_i J_i O_i (x) conj(O_i),  J_i >= 0,
//
// to monolayer dynamics with jump operators sqrt(J_i) O_i and a postselected
// part generating imaginary-time evolution under h_eff. The antiunitary map is
// time reversal K (iY)^{(x)N}, which sends every Pauli string P of weight w to
// (-1)^w P.
//
// Bilayer layout: layer l occupies sites 0..N-1, layer r sites N..2N-1, so a
// bilayer basis index is i + 2^N j with i the layer-l and j the layer-r index.

#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bqt/pauli.hpp"

namespace bqt {

enum class Layer { l, r };

struct BilayerFactor {
  int site = 0;
  Layer layer = Layer::l;
  char letter = 'Z';
  bool operator==(const BilayerFactor&) const = default;
};

struct BilayerTerm {
  double coefficient = 0;
  std::vector<BilayerFactor> factors;
  int source_line = 0;  // 0 when not parsed from a file
};

struct Coupling {
  double strength = 0;  // J_i >= 0
  PauliString op;
  bool operator==(const Coupling&) const = default;
};

struct BilayerSpec {
  int n_sites = 0;
  OperatorSum intralayer;
  std::vector<Coupling> couplings;  // sorted by op
  bool operator==(const BilayerSpec&) const = default;
};

enum class JumpMode { weak, strong };

struct Jump {
  double amplitude = 0;  // sqrt(J_i)
  PauliString op;
};

/// How the per-coupling constants kappa_i are chosen.
struct KappaPolicy {
  enum class Kind {
    one_norm,  // kappa_i = |2 h_i|_1 + J_i
    tight,     // kappa_i = -lambda_min(2 h_i - J_i) by diagonalization on supp(h_i); may be negative
    explicit_values,
  };
  Kind kind = Kind::one_norm;
  double offset = 0;           // added to every kappa_i after the rule above
  std::vector<double> values;  // explicit_values: one per coupling plus the catch-all
};

/// Compiled monolayer dynamics.
struct DynamicsSpec {
  int n_sites = 0;
  std::vector<Jump> jumps;
  OperatorSum h_eff;
  double kappa_total = 0;
  JumpMode mode = JumpMode::weak;
  /// Local pieces h_i of the intralayer Hamiltonian, one per coupling and a
  /// final catch-all entry, together with their kappa_i.
  std::vector<OperatorSum> partition;
  std::vector<double> kappas;

  std::size_t n_jumps() const noexcept { return jumps.size(); }
};

/// (c, P) -> ((-1)^{weight(P)} c, P).
OperatorSum antiunitary_conjugate(const OperatorSum& op);

BilayerSpec decompose_bilayer(std::span<const BilayerTerm> terms, int n_sites);

/// Inverse of decompose_bilayer: canonical term list of a spec.
std::vector<BilayerTerm> bilayer_terms(const BilayerSpec& spec);

/// The full bilayer Hamiltonian as a sum on 2N sites.
OperatorSum bilayer_hamiltonian(std::span<const BilayerTerm> terms, int n_sites);

DynamicsSpec build_dynamics(const BilayerSpec& spec, const KappaPolicy& policy = {},
                            JumpMode mode = JumpMode::weak);

struct MappingReport {
  double max_deviation = 0;
  std::size_t dimension = 0;
};

inline constexpr int kMaxValidateSites = 6;

/// Compares the superoperator of the compiled dynamics with -kappa_total - H_bilayer.
MappingReport validate_mapping(const DynamicsSpec& dyn, std::span<const BilayerTerm> terms);

/// Reads the text term format, one term per line:
///   <coefficient> <letter><site><layer> ...      e.g.  -0.5 Z0l Z1l Z0r Z1r
/// '#' starts a comment. Returns the terms and sets `n_sites` to one more
/// than the largest site index seen.
std::vector<BilayerTerm> parse_bilayer_terms(std::istream& in, int& n_sites);
std::string to_string(const BilayerTerm& term);

}  // namespace bqt
