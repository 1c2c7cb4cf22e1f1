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

#include "bqt/pauli.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

namespace bqt {

namespace {

void check_site(int n_sites, int site) {
  if (n_sites < 0 || n_sites > kMaxSites)
    throw ShapeMismatch("unsupported site count " + std::to_string(n_sites));
  if (site < 0 || site >= n_sites)
    throw ShapeMismatch("site " + std::to_string(site) + " out of range for " +
                        std::to_string(n_sites) + " sites");
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

PauliString PauliString::identity(int n_sites) {
  if (n_sites < 0 || n_sites > kMaxSites)
    throw ShapeMismatch("unsupported site count " + std::to_string(n_sites));
  return PauliString{n_sites, 0, 0};
}

PauliString PauliString::single(int n_sites, int site, char letter) {
  check_site(n_sites, site);
  const std::uint64_t bit = std::uint64_t{1} << site;
  switch (letter) {
    case 'I': return PauliString{n_sites, 0, 0};
    case 'X': return PauliString{n_sites, bit, 0};
    case 'Y': return PauliString{n_sites, bit, bit};
    case 'Z': return PauliString{n_sites, 0, bit};
    default: throw std::invalid_argument(std::string("unknown Pauli letter '") + letter + "'");
  }
}

PauliString PauliString::from_letters(int n_sites, std::span<const std::pair<int, char>> letters) {
  PauliString p = identity(n_sites);
  for (const auto& [site, letter] : letters) {
    const PauliString s = single(n_sites, site, letter);
    if (p.support() & s.support())
      throw std::invalid_argument("site " + std::to_string(site) + " appears twice");
    p.x |= s.x;
    p.z |= s.z;
  }
  return p;
}

char PauliString::letter(int site) const noexcept {
  const bool bx = (x >> site) & 1;
  const bool bz = (z >> site) & 1;
  if (bx && bz) return 'Y';
  if (bx) return 'X';
  if (bz) return 'Z';
  return 'I';
}

std::pair<int, PauliString> PauliString::multiply(const PauliString& other) const {
  if (n_sites != other.n_sites) throw ShapeMismatch("multiplying Pauli strings of different size");
  PauliString r{n_sites, x ^ other.x, z ^ other.z};
  const int k = y_count() + other.y_count() - r.y_count() + 2 * std::popcount(z & other.x);
  return {((k % 4) + 4) % 4, r};
}

PauliString parse_pauli(std::string_view text, int n_sites) {
  std::vector<std::pair<int, char>> letters;
  std::istringstream in{std::string(text)};
  std::string tok;
  bool saw_identity = false;
  while (in >> tok) {
    if (tok == "I") {
      saw_identity = true;
      continue;
    }
    const char letter = static_cast<char>(std::toupper(static_cast<unsigned char>(tok[0])));
    int site = -1;
    const auto* first = tok.data() + 1;
    const auto* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, site);
    if (tok.size() < 2 || ec != std::errc{} || ptr != last || (letter != 'X' && letter != 'Y' && letter != 'Z'))
      throw std::invalid_argument("malformed Pauli token '" + tok + "'");
    letters.emplace_back(site, letter);
  }
  if (letters.empty() && !saw_identity) throw std::invalid_argument("empty Pauli string");
  return PauliString::from_letters(n_sites, letters);
}

std::string to_string(const PauliString& p) {
  if (p.is_identity()) return "I";
  std::string out;
  for (int s = 0; s < p.n_sites; ++s) {
    const char c = p.letter(s);
    if (c == 'I') continue;
    if (!out.empty()) out += ' ';
    out += c;
    out += std::to_string(s);
  }
  return out;
}

OperatorSum::OperatorSum(int n_sites, std::vector<Term> terms) : n_sites_(n_sites) {
  for (const auto& t : terms) add(t.coefficient, t.pauli);
}

OperatorSum OperatorSum::single(double coefficient, const PauliString& p) {
  OperatorSum op(p.n_sites);
  op.add(coefficient, p);
  return op;
}

void OperatorSum::check(const PauliString& p) const {
  if (p.n_sites != n_sites_)
    throw ShapeMismatch("term on " + std::to_string(p.n_sites) + " sites added to a sum on " +
                        std::to_string(n_sites_));
}

OperatorSum& OperatorSum::add(double coefficient, const PauliString& p) {
  check(p);
  if (!std::isfinite(coefficient)) throw std::invalid_argument("non-finite coefficient");
  auto it = std::lower_bound(terms_.begin(), terms_.end(), p,
                             [](const Term& t, const PauliString& q) { return t.pauli < q; });
  if (it != terms_.end() && it->pauli == p) {
    it->coefficient += coefficient;
    if (it->coefficient == 0.0) terms_.erase(it);
  } else if (coefficient != 0.0) {
    terms_.insert(it, Term{coefficient, p});
  }
  return *this;
}

OperatorSum& OperatorSum::operator+=(const OperatorSum& other) {
  for (const auto& t : other.terms_) add(t.coefficient, t.pauli);
  return *this;
}

OperatorSum& OperatorSum::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& t : terms_) t.coefficient *= s;
  return *this;
}

OperatorSum operator+(OperatorSum a, const OperatorSum& b) { return a += b; }
OperatorSum operator*(double s, OperatorSum a) { return a *= s; }

double OperatorSum::coefficient(const PauliString& p) const {
  for (const auto& t : terms_)
    if (t.pauli == p) return t.coefficient;
  return 0.0;
}

double OperatorSum::identity_coefficient() const {
  return (!terms_.empty() && terms_.front().pauli.is_identity()) ? terms_.front().coefficient : 0.0;
}

double OperatorSum::one_norm() const {
  double s = 0;
  for (const auto& t : terms_) s += std::abs(t.coefficient);
  return s;
}

OperatorSum OperatorSum::without_identity() const {
  OperatorSum out(n_sites_);
  for (const auto& t : terms_)
    if (!t.pauli.is_identity()) out.terms_.push_back(t);
  return out;
}

bool OperatorSum::is_diagonal() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const Term& t) { return t.pauli.is_diagonal(); });
}

OperatorSum parse_operator_sum(std::string_view text, int n_sites) {
  OperatorSum op(n_sites);
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t plus = text.find('+', start);
    // A '+' directly after an exponent marker belongs to the number.
    while (plus != std::string_view::npos && plus > 0 && (text[plus - 1] == 'e' || text[plus - 1] == 'E'))
      plus = text.find('+', plus + 1);
    const auto piece = trim(text.substr(start, plus == std::string_view::npos ? text.npos : plus - start));
    if (piece.empty()) throw std::invalid_argument("empty term in operator sum '" + std::string(text) + "'");
    double coefficient = 1.0;
    std::string_view rest = piece;
    const auto space = piece.find_first_of(" \t");
    const auto head = piece.substr(0, space);
    double value = 0;
    auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), value);
    if (ec == std::errc{} && ptr == head.data() + head.size()) {
      coefficient = value;
      rest = space == std::string_view::npos ? std::string_view{"I"} : trim(piece.substr(space));
    }
    op.add(coefficient, parse_pauli(rest, n_sites));
    if (plus == std::string_view::npos) break;
    start = plus + 1;
  }
  return op;
}

std::string to_string(const OperatorSum& op) {
  if (op.empty()) return "0";
  std::ostringstream out;
  out.precision(17);
  bool first = true;
  for (const auto& t : op.terms()) {
    if (!first) out << " + ";
    first = false;
    out << t.coefficient << ' ' << to_string(t.pauli);
  }
  return out.str();
}

DenseOperator<double> to_dense(const PauliString& p) {
  const Eigen::Index dim = Eigen::Index{1} << p.n_sites;
  DenseOperator<double> m = DenseOperator<double>::Zero(dim, dim);
  for (std::uint64_t b = 0; b < static_cast<std::uint64_t>(dim); ++b)
    m(static_cast<Eigen::Index>(b ^ p.x), static_cast<Eigen::Index>(b)) = pauli_phase(p, b);
  return m;
}

DenseOperator<double> to_dense(const OperatorSum& op) {
  const Eigen::Index dim = Eigen::Index{1} << op.n_sites();
  DenseOperator<double> m = DenseOperator<double>::Zero(dim, dim);
  for (const auto& t : op.terms())
    for (std::uint64_t b = 0; b < static_cast<std::uint64_t>(dim); ++b)
      m(static_cast<Eigen::Index>(b ^ t.pauli.x), static_cast<Eigen::Index>(b)) +=
          t.coefficient * pauli_phase(t.pauli, b);
  return m;
}

StateVector basis_state(std::string_view bits) {
  const int n = static_cast<int>(bits.size());
  if (n == 0 || n > kMaxSites) throw ShapeMismatch("bitstring length must be in [1, 32]");
  std::uint64_t index = 0;
  for (int k = 0; k < n; ++k) {
    if (bits[k] == '1') index |= std::uint64_t{1} << k;
    else if (bits[k] != '0') throw std::invalid_argument("bitstring may contain only 0 and 1");
  }
  return basis_state(n, index);
}

StateVector basis_state(int n_sites, std::uint64_t index) {
  const Eigen::Index dim = Eigen::Index{1} << n_sites;
  if (index >= static_cast<std::uint64_t>(dim)) throw ShapeMismatch("basis index out of range");
  StateVector psi = StateVector::Zero(dim);
  psi[static_cast<Eigen::Index>(index)] = 1.0;
  return psi;
}

}  // namespace bqt
