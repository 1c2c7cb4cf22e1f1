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

#include "bqt/bilayer_map.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <sstream>

namespace bqt {

namespace {

constexpr double kMatchTolerance = 1e-12;
constexpr int kMaxExactSupport = 10;

std::string describe(const PauliString& l, const PauliString& r) {
  std::string out;
  auto append = [&](const PauliString& p, char layer) {
    for (int s = 0; s < p.n_sites; ++s) {
      const char c = p.letter(s);
      if (c == 'I') continue;
      if (!out.empty()) out += ' ';
      out += c;
      out += std::to_string(s);
      out += layer;
    }
  };
  append(l, 'l');
  append(r, 'r');
  return out.empty() ? "(constant)" : out;
}

std::string where(int line) { return line > 0 ? "line " + std::to_string(line) + ": " : ""; }

struct SplitTerm {
  PauliString left;
  PauliString right;
};

SplitTerm split(const BilayerTerm& term, int n_sites) {
  std::vector<std::pair<int, char>> left, right;
  for (const auto& f : term.factors) {
    if (f.site < 0 || f.site >= n_sites)
      throw ShapeMismatch(where(term.source_line) + "site " + std::to_string(f.site) +
                          " outside a layer of " + std::to_string(n_sites) + " sites");
    (f.layer == Layer::l ? left : right).emplace_back(f.site, f.letter);
  }
  try {
    return {PauliString::from_letters(n_sites, left), PauliString::from_letters(n_sites, right)};
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(where(term.source_line) + e.what());
  }
}

/// Smallest eigenvalue of a sum, diagonalized on its support only.
double min_eigenvalue_on_support(const OperatorSum& op) {
  std::uint64_t support = 0;
  for (const auto& t : op.terms()) support |= t.pauli.support();
  const int k = std::popcount(support);
  std::vector<int> sites;
  for (int s = 0; s < op.n_sites(); ++s)
    if ((support >> s) & 1) sites.push_back(s);
  auto compress = [&](std::uint64_t mask) {
    std::uint64_t out = 0;
    for (int i = 0; i < k; ++i)
      if ((mask >> sites[i]) & 1) out |= std::uint64_t{1} << i;
    return out;
  };
  OperatorSum local(k);
  for (const auto& t : op.terms())
    local.add(t.coefficient, PauliString{k, compress(t.pauli.x), compress(t.pauli.z)});
  if (k == 0) return local.identity_coefficient();
  Eigen::SelfAdjointEigenSolver<DenseOperator<double>> solver(to_dense(local), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

int support_size(const OperatorSum& op) {
  std::uint64_t support = 0;
  for (const auto& t : op.terms()) support |= t.pauli.support();
  return std::popcount(support);
}

}  // namespace

OperatorSum antiunitary_conjugate(const OperatorSum& op) {
  std::vector<OperatorSum::Term> terms = op.terms();
  for (auto& t : terms)
    if (t.pauli.weight() % 2 == 1) t.coefficient = -t.coefficient;
  return OperatorSum(op.n_sites(), std::move(terms));
}

BilayerSpec decompose_bilayer(std::span<const BilayerTerm> terms, int n_sites) {
  if (n_sites < 1 || 2 * n_sites > kMaxSites) throw ShapeMismatch("layer size out of range");

  struct Entry {
    double coefficient = 0;
    int line = 0;
  };
  std::map<std::pair<PauliString, PauliString>, Entry> merged;
  for (const auto& term : terms) {
    if (!std::isfinite(term.coefficient))
      throw std::invalid_argument(where(term.source_line) + "non-finite coefficient");
    const auto [left, right] = split(term, n_sites);
    auto& e = merged[{left, right}];
    e.coefficient += term.coefficient;
    if (e.line == 0) e.line = term.source_line;
  }

  BilayerSpec spec{n_sites, OperatorSum(n_sites), {}};
  OperatorSum right_part(n_sites);
  for (const auto& [key, e] : merged) {
    const auto& [left, right] = key;
    if (e.coefficient == 0.0) continue;
    if (left.is_identity() && right.is_identity()) {
      // A constant splits evenly between the layers (the identity is self-conjugate).
      spec.intralayer.add(0.5 * e.coefficient, left);
    } else if (right.is_identity()) {
      spec.intralayer.add(e.coefficient, left);
    } else if (left.is_identity()) {
      right_part.add(e.coefficient, right);
    } else {
      if (left != right)
        throw NonFactorizable(where(e.line) + "interlayer term " + describe(left, right) +
                              " is not of the form O_l conj(O)_r");
      const double sign = (left.weight() % 2 == 1) ? -1.0 : 1.0;
      const double strength = -e.coefficient * sign;
      if (strength < 0)
        throw SignViolation(where(e.line) + "interlayer term " + describe(left, right) +
                            " has coupling J = " + std::to_string(strength) + " < 0");
      spec.couplings.push_back({strength, left});
    }
  }

  const OperatorSum expected = antiunitary_conjugate(spec.intralayer.without_identity());
  auto mismatch = [&](const PauliString& p, double want, double got) {
    int line = 0;
    if (auto it = merged.find({PauliString::identity(n_sites), p}); it != merged.end()) line = it->second.line;
    std::ostringstream msg;
    msg.precision(17);
    msg << where(line) << "layer-r term " << describe(PauliString::identity(n_sites), p)
        << " has coefficient " << got << " but the conjugate of the layer-l part requires " << want;
    throw SymmetryViolation(msg.str());
  };
  for (const auto& t : expected.terms()) {
    const double got = right_part.coefficient(t.pauli);
    if (std::abs(got - t.coefficient) > kMatchTolerance) mismatch(t.pauli, t.coefficient, got);
  }
  for (const auto& t : right_part.terms())
    if (expected.coefficient(t.pauli) == 0.0) mismatch(t.pauli, 0.0, t.coefficient);

  std::sort(spec.couplings.begin(), spec.couplings.end(),
            [](const Coupling& a, const Coupling& b) { return a.op < b.op; });
  return spec;
}

std::vector<BilayerTerm> bilayer_terms(const BilayerSpec& spec) {
  const int n = spec.n_sites;
  auto factors_of = [n](const PauliString& p, Layer layer) {
    std::vector<BilayerFactor> out;
    for (int s = 0; s < n; ++s)
      if (p.letter(s) != 'I') out.push_back({s, layer, p.letter(s)});
    return out;
  };
  std::vector<BilayerTerm> out;
  for (const auto& t : spec.intralayer.terms()) {
    if (t.pauli.is_identity()) {
      out.push_back({2.0 * t.coefficient, {}, 0});
      continue;
    }
    out.push_back({t.coefficient, factors_of(t.pauli, Layer::l), 0});
    const double sign = (t.pauli.weight() % 2 == 1) ? -1.0 : 1.0;
    out.push_back({sign * t.coefficient, factors_of(t.pauli, Layer::r), 0});
  }
  for (const auto& c : spec.couplings) {
    const double sign = (c.op.weight() % 2 == 1) ? -1.0 : 1.0;
    auto f = factors_of(c.op, Layer::l);
    auto fr = factors_of(c.op, Layer::r);
    f.insert(f.end(), fr.begin(), fr.end());
    out.push_back({-c.strength * sign, std::move(f), 0});
  }
  return out;
}

OperatorSum bilayer_hamiltonian(std::span<const BilayerTerm> terms, int n_sites) {
  OperatorSum h(2 * n_sites);
  for (const auto& term : terms) {
    std::vector<std::pair<int, char>> letters;
    for (const auto& f : term.factors) {
      if (f.site < 0 || f.site >= n_sites) throw ShapeMismatch(where(term.source_line) + "site out of range");
      letters.emplace_back(f.layer == Layer::l ? f.site : n_sites + f.site, f.letter);
    }
    h.add(term.coefficient, PauliString::from_letters(2 * n_sites, letters));
  }
  return h;
}

DynamicsSpec build_dynamics(const BilayerSpec& spec, const KappaPolicy& policy, JumpMode mode) {
  const int n = spec.n_sites;
  const std::size_t m = spec.couplings.size();
  DynamicsSpec dyn;
  dyn.n_sites = n;
  dyn.mode = mode;
  dyn.partition.assign(m + 1, OperatorSum(n));

  // Each intralayer term is shared equally among the couplings whose support
  // it touches; terms touching none (and constants) go to the catch-all slot.
  for (const auto& t : spec.intralayer.terms()) {
    std::vector<std::size_t> owners;
    if (!t.pauli.is_identity())
      for (std::size_t i = 0; i < m; ++i)
        if (t.pauli.support() & spec.couplings[i].op.support()) owners.push_back(i);
    if (owners.empty()) {
      dyn.partition[m].add(t.coefficient, t.pauli);
      continue;
    }
    const double share = t.coefficient / static_cast<double>(owners.size());
    for (auto i : owners) dyn.partition[i].add(share, t.pauli);
  }

  if (policy.kind == KappaPolicy::Kind::explicit_values && policy.values.size() != m + 1)
    throw std::invalid_argument("explicit kappa policy needs " + std::to_string(m + 1) + " values");

  dyn.kappas.resize(m + 1);
  double coupling_sum = 0;
  for (std::size_t i = 0; i <= m; ++i) {
    const double strength = i < m ? spec.couplings[i].strength : 0.0;
    coupling_sum += strength;
    // The operator that must be positive semidefinite, minus kappa_i.
    OperatorSum shifted = 2.0 * dyn.partition[i];
    shifted.add(-strength, PauliString::identity(n));
    double kappa = 0;
    switch (policy.kind) {
      case KappaPolicy::Kind::one_norm:
        kappa = (2.0 * dyn.partition[i]).one_norm() + strength;
        break;
      case KappaPolicy::Kind::tight:
        if (support_size(shifted) > kMaxExactSupport)
          throw PositivityFailure("tight kappa policy needs exact diagonalization on at most " +
                                  std::to_string(kMaxExactSupport) + " sites");
        kappa = -min_eigenvalue_on_support(shifted);
        break;
      case KappaPolicy::Kind::explicit_values:
        kappa = policy.values[i];
        break;
    }
    kappa += policy.offset;
    dyn.kappas[i] = kappa;

    OperatorSum certified = shifted;
    certified.add(kappa, PauliString::identity(n));
    double lower = 0;
    if (support_size(certified) <= kMaxExactSupport) {
      lower = min_eigenvalue_on_support(certified);
    } else {
      lower = certified.identity_coefficient() - certified.without_identity().one_norm();
    }
    if (lower < -1e-10 * std::max(1.0, certified.one_norm())) {
      const std::string which = i < m ? "coupling " + to_string(spec.couplings[i].op) : "catch-all term";
      throw PositivityFailure("kappa = " + std::to_string(kappa) + " does not make the postselected rate of " +
                              which + " positive semidefinite (lowest eigenvalue " + std::to_string(lower) + ")");
    }
  }

  for (std::size_t i = 0; i < m; ++i)
    dyn.jumps.push_back({std::sqrt(spec.couplings[i].strength), spec.couplings[i].op});
  dyn.kappa_total = 0;
  for (double k : dyn.kappas) dyn.kappa_total += k;

  // sum_i h_i is the intralayer Hamiltonian itself; only the constant depends on kappa.
  dyn.h_eff = spec.intralayer;
  dyn.h_eff.add(0.5 * (dyn.kappa_total - coupling_sum), PauliString::identity(n));
  return dyn;
}

MappingReport validate_mapping(const DynamicsSpec& dyn, std::span<const BilayerTerm> terms) {
  const int n = dyn.n_sites;
  if (n > kMaxValidateSites)
    throw SizeLimitExceeded("validate_mapping supports at most " + std::to_string(kMaxValidateSites) +
                            " sites per layer, got " + std::to_string(n));
  const std::uint64_t d = std::uint64_t{1} << n;
  const std::uint64_t dim = d * d;
  const OperatorSum bilayer = bilayer_hamiltonian(terms, n);

  // Anticommutator part K = h_eff + (1/2) sum_i L_i^dag L_i.
  OperatorSum k_op = dyn.h_eff;
  double rate_sum = 0;
  for (const auto& j : dyn.jumps) rate_sum += j.amplitude * j.amplitude;
  k_op.add(0.5 * rate_sum, PauliString::identity(n));

  // U_r = (iY)^{(x)N} on layer r equals Y_r up to a global phase.
  const std::uint64_t r_mask = (d - 1) << n;
  const PauliString y_r{2 * n, r_mask, r_mask};

  std::vector<std::complex<double>> column(dim);
  double worst = 0;
  for (std::uint64_t col = 0; col < dim; ++col) {
    std::fill(column.begin(), column.end(), std::complex<double>{0, 0});
    const std::uint64_t i = col & (d - 1);
    const std::uint64_t j = col >> n;
    auto at = [&](std::uint64_t row, std::uint64_t c) -> std::complex<double>& { return column[row + d * c]; };

    // Monolayer superoperator applied to |i><j|, vectorized column-major.
    for (const auto& jump : dyn.jumps) {
      const double rate = jump.amplitude * jump.amplitude;
      at(i ^ jump.op.x, j ^ jump.op.x) +=
          rate * pauli_phase(jump.op, i) * std::conj(pauli_phase(jump.op, j));
    }
    for (const auto& t : k_op.terms()) {
      at(i ^ t.pauli.x, j) -= t.coefficient * pauli_phase(t.pauli, i);
      at(i, j ^ t.pauli.x) -= t.coefficient * std::conj(pauli_phase(t.pauli, j));
    }

    // Subtract Y_r (-kappa_total - H_bilayer) Y_r |col>.
    const std::uint64_t mid = col ^ y_r.x;
    const auto ph_in = pauli_phase(y_r, col);
    auto subtract = [&](std::uint64_t q, std::complex<double> v) {
      column[q ^ y_r.x] -= pauli_phase(y_r, q) * v;
    };
    subtract(mid, -dyn.kappa_total * ph_in);
    for (const auto& t : bilayer.terms())
      subtract(mid ^ t.pauli.x, -t.coefficient * pauli_phase(t.pauli, mid) * ph_in);

    for (const auto& v : column) worst = std::max(worst, std::abs(v));
  }
  return {worst, static_cast<std::size_t>(dim)};
}

std::vector<BilayerTerm> parse_bilayer_terms(std::istream& in, int& n_sites) {
  std::vector<BilayerTerm> terms;
  std::string line;
  int line_no = 0;
  int max_site = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string tok;
    if (!(tokens >> tok)) continue;
    BilayerTerm term;
    term.source_line = line_no;
    {
      const char* first = tok.data();
      const char* last = tok.data() + tok.size();
      if (*first == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, last, term.coefficient);
      if (ec != std::errc{} || ptr != last)
        throw ConfigError("line " + std::to_string(line_no) + ": expected a coefficient, got '" + tok + "'");
    }
    while (tokens >> tok) {
      if (tok.size() < 3) throw ConfigError("line " + std::to_string(line_no) + ": malformed factor '" + tok + "'");
      BilayerFactor f;
      f.letter = static_cast<char>(std::toupper(static_cast<unsigned char>(tok.front())));
      const char layer = static_cast<char>(std::tolower(static_cast<unsigned char>(tok.back())));
      auto [ptr, ec] = std::from_chars(tok.data() + 1, tok.data() + tok.size() - 1, f.site);
      if ((f.letter != 'X' && f.letter != 'Y' && f.letter != 'Z') || (layer != 'l' && layer != 'r') ||
          ec != std::errc{} || ptr != tok.data() + tok.size() - 1 || f.site < 0)
        throw ConfigError("line " + std::to_string(line_no) + ": malformed factor '" + tok + "'");
      f.layer = layer == 'l' ? Layer::l : Layer::r;
      for (const auto& g : term.factors)
        if (g.site == f.site && g.layer == f.layer)
          throw ConfigError("line " + std::to_string(line_no) + ": site " + std::to_string(f.site) + layer +
                            " appears twice");
      max_site = std::max(max_site, f.site);
      term.factors.push_back(f);
    }
    terms.push_back(std::move(term));
  }
  n_sites = max_site + 1;
  return terms;
}

std::string to_string(const BilayerTerm& term) {
  std::ostringstream out;
  out.precision(17);
  out << term.coefficient;
  for (const auto& f : term.factors) out << ' ' << f.letter << f.site << (f.layer == Layer::l ? 'l' : 'r');
  return out.str();
}

}  // namespace bqt
