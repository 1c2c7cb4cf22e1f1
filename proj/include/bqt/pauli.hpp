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

// Pauli-string algebra and dense statevector kernels.
//
// Bit ordering: site k is bit k of the basis index (site 0 is the least
// significant bit). A Pauli string is stored as an (x, z) mask pair and
// represents the Hermitian operator i^{|x & z|} X^x Z^z, so every site letter
// is one of I, X, Y, Z with the usual phases and P * P = I.

#pragma once

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <complex>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bqt/errors.hpp"

namespace bqt {

template <typename Scalar>
using State = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;
using StateVector = State<double>;

template <typename Scalar>
using DenseOperator =
    Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr int kMaxSites = 32;

struct PauliString {
  int n_sites = 0;
  std::uint64_t x = 0;
  std::uint64_t z = 0;

  static PauliString identity(int n_sites);
  /// Single-site operator; `letter` is one of I, X, Y, Z.
  static PauliString single(int n_sites, int site, char letter);
  static PauliString from_letters(int n_sites, std::span<const std::pair<int, char>> letters);

  int weight() const noexcept { return std::popcount(x | z); }
  bool is_identity() const noexcept { return (x | z) == 0; }
  bool is_diagonal() const noexcept { return x == 0; }
  std::uint64_t support() const noexcept { return x | z; }
  char letter(int site) const noexcept;

  /// Number of Y letters, which fixes the global phase i^{n_y}.
  int y_count() const noexcept { return std::popcount(x & z); }

  /// Product of two strings, returned as (phase exponent k, string) meaning
  /// i^k * result.
  std::pair<int, PauliString> multiply(const PauliString& other) const;

  bool commutes_with(const PauliString& other) const noexcept {
    return (std::popcount((x & other.z) ^ (z & other.x)) & 1) == 0;
  }

  auto operator<=>(const PauliString&) const = default;
};

/// Parses "X3 Z0 Y7" (or "I" for the identity) into a string on `n_sites`.
PauliString parse_pauli(std::string_view text, int n_sites);
std::string to_string(const PauliString& p);

namespace detail {

template <typename Scalar>
inline std::complex<Scalar> i_power(int k) {
  switch (k & 3) {
    case 0: return {1, 0};
    case 1: return {0, 1};
    case 2: return {-1, 0};
    default: return {0, -1};
  }
}

inline bool odd_parity(std::uint64_t v) noexcept { return (std::popcount(v) & 1) != 0; }

inline std::uint64_t insert_zero_bit(std::uint64_t k, int bit) noexcept {
  const std::uint64_t low = k & ((std::uint64_t{1} << bit) - 1);
  return ((k >> bit) << (bit + 1)) | low;
}

inline void check_length(const PauliString& p, Eigen::Index size) {
  if (p.n_sites < 0 || p.n_sites > kMaxSites ||
      size != (Eigen::Index{1} << p.n_sites)) {
    throw ShapeMismatch("pauli string on " + std::to_string(p.n_sites) +
                        " sites applied to a vector of length " + std::to_string(size));
  }
}

}  // namespace detail

/// Amplitude of P|b>: P|b> = pauli_phase(P, b) |b ^ x>.
template <typename Scalar = double>
inline std::complex<Scalar> pauli_phase(const PauliString& p, std::uint64_t b) {
  auto ph = detail::i_power<Scalar>(p.y_count());
  return detail::odd_parity(p.z & b) ? -ph : ph;
}

template <typename Scalar>
void pauli_apply_inplace(const PauliString& p, State<Scalar>& psi) {
  detail::check_length(p, psi.size());
  const auto base = detail::i_power<Scalar>(p.y_count());
  const auto n = static_cast<std::uint64_t>(psi.size());
  if (p.x == 0) {
    if (p.z == 0) return;
    for (std::uint64_t b = 0; b < n; ++b)
      if (detail::odd_parity(p.z & b)) psi[b] = -psi[b];
    return;
  }
  const int pivot = std::countr_zero(p.x);
  for (std::uint64_t k = 0; k < n / 2; ++k) {
    const std::uint64_t b = detail::insert_zero_bit(k, pivot);
    const std::uint64_t b2 = b ^ p.x;
    const auto ph_b = detail::odd_parity(p.z & b) ? -base : base;
    const auto ph_b2 = detail::odd_parity(p.z & b2) ? -base : base;
    const auto a = psi[b];
    psi[b] = ph_b2 * psi[b2];
    psi[b2] = ph_b * a;
  }
}

template <typename Scalar>
State<Scalar> pauli_apply(const State<Scalar>& psi, const PauliString& p) {
  State<Scalar> out = psi;
  pauli_apply_inplace(p, out);
  return out;
}

/// psi <- exp(i * sign * angle * P) psi = cos(angle) psi + i sign sin(angle) P psi.
template <typename Scalar>
void pauli_rotation_inplace(const PauliString& p, Scalar angle, int sign, State<Scalar>& psi) {
  detail::check_length(p, psi.size());
  const Scalar c = std::cos(angle);
  const std::complex<Scalar> is{0, sign >= 0 ? std::sin(angle) : -std::sin(angle)};
  const auto base = detail::i_power<Scalar>(p.y_count());
  const auto n = static_cast<std::uint64_t>(psi.size());
  if (p.x == 0) {
    const auto plus = c + is * base;
    const auto minus = c - is * base;
    for (std::uint64_t b = 0; b < n; ++b)
      psi[b] *= detail::odd_parity(p.z & b) ? minus : plus;
    return;
  }
  const int pivot = std::countr_zero(p.x);
  for (std::uint64_t k = 0; k < n / 2; ++k) {
    const std::uint64_t b = detail::insert_zero_bit(k, pivot);
    const std::uint64_t b2 = b ^ p.x;
    const auto ph_b = detail::odd_parity(p.z & b) ? -base : base;
    const auto ph_b2 = detail::odd_parity(p.z & b2) ? -base : base;
    const auto a = psi[b];
    const auto a2 = psi[b2];
    psi[b] = c * a + is * ph_b2 * a2;
    psi[b2] = c * a2 + is * ph_b * a;
  }
}

template <typename Scalar>
State<Scalar> pauli_rotation_apply(const State<Scalar>& psi, const PauliString& p,
                                   Scalar angle, int sign) {
  State<Scalar> out = psi;
  pauli_rotation_inplace(p, angle, sign, out);
  return out;
}

/// psi <- exp(-tau * P) psi = cosh(tau) psi - sinh(tau) P psi. Not normalized.
template <typename Scalar>
void imaginary_term_inplace(const PauliString& p, Scalar tau, State<Scalar>& psi) {
  detail::check_length(p, psi.size());
  const auto n = static_cast<std::uint64_t>(psi.size());
  if (p.is_identity()) {
    psi *= std::exp(-tau);
    return;
  }
  const Scalar ch = std::cosh(tau);
  const Scalar sh = std::sinh(tau);
  const auto base = detail::i_power<Scalar>(p.y_count());
  if (p.x == 0) {
    // Diagonal strings have no Y letters, so the phase is real.
    const Scalar plus = std::exp(-tau);
    const Scalar minus = std::exp(tau);
    for (std::uint64_t b = 0; b < n; ++b)
      psi[b] *= detail::odd_parity(p.z & b) ? minus : plus;
    return;
  }
  const int pivot = std::countr_zero(p.x);
  for (std::uint64_t k = 0; k < n / 2; ++k) {
    const std::uint64_t b = detail::insert_zero_bit(k, pivot);
    const std::uint64_t b2 = b ^ p.x;
    const auto ph_b = detail::odd_parity(p.z & b) ? -base : base;
    const auto ph_b2 = detail::odd_parity(p.z & b2) ? -base : base;
    const auto a = psi[b];
    const auto a2 = psi[b2];
    psi[b] = ch * a - sh * ph_b2 * a2;
    psi[b2] = ch * a2 - sh * ph_b * a;
  }
}

template <typename Scalar>
State<Scalar> imaginary_term_apply(const State<Scalar>& psi, const PauliString& p, Scalar tau) {
  State<Scalar> out = psi;
  imaginary_term_inplace(p, tau, out);
  return out;
}

/// <a|b>, conjugate-linear in the first argument.
template <typename Scalar>
std::complex<Scalar> inner_product(const State<Scalar>& a, const State<Scalar>& b) {
  if (a.size() != b.size()) throw ShapeMismatch("inner product of vectors of different length");
  return a.dot(b);
}

/// <a|P|b> without materializing P|b>.
template <typename Scalar>
std::complex<Scalar> pauli_matrix_element(const State<Scalar>& a, const PauliString& p,
                                          const State<Scalar>& b) {
  detail::check_length(p, a.size());
  detail::check_length(p, b.size());
  const auto base = detail::i_power<Scalar>(p.y_count());
  std::complex<Scalar> acc{0, 0};
  const auto n = static_cast<std::uint64_t>(a.size());
  for (std::uint64_t k = 0; k < n; ++k) {
    const auto term = std::conj(a[k ^ p.x]) * b[k];
    acc += detail::odd_parity(p.z & k) ? -term : term;
  }
  return base * acc;
}

/// A real-coefficient sum of Pauli strings in canonical form: terms sorted by
/// (x, z) mask, no repeated strings, no exact-zero coefficients. The identity
/// term, when present, is therefore always first.
class OperatorSum {
 public:
  struct Term {
    double coefficient = 0;
    PauliString pauli;
    bool operator==(const Term&) const = default;
  };

  OperatorSum() = default;
  explicit OperatorSum(int n_sites) : n_sites_(n_sites) {}
  OperatorSum(int n_sites, std::vector<Term> terms);

  static OperatorSum single(double coefficient, const PauliString& p);

  int n_sites() const noexcept { return n_sites_; }
  const std::vector<Term>& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }

  OperatorSum& add(double coefficient, const PauliString& p);
  OperatorSum& operator+=(const OperatorSum& other);
  OperatorSum& operator*=(double s);

  double coefficient(const PauliString& p) const;
  double identity_coefficient() const;
  /// Sum of |c| over every term, identity included.
  double one_norm() const;
  OperatorSum without_identity() const;
  bool is_diagonal() const;

  bool operator==(const OperatorSum&) const = default;

 private:
  void check(const PauliString& p) const;
  int n_sites_ = 0;
  std::vector<Term> terms_;
};

OperatorSum operator+(OperatorSum a, const OperatorSum& b);
OperatorSum operator*(double s, OperatorSum a);

/// Parses "0.5 X0 X1 + -1 Z2" style sums: terms separated by '+', each an
/// optional leading coefficient followed by a Pauli string.
OperatorSum parse_operator_sum(std::string_view text, int n_sites);
std::string to_string(const OperatorSum& op);

template <typename Scalar>
State<Scalar> opsum_apply(const State<Scalar>& psi, const OperatorSum& op) {
  State<Scalar> out = State<Scalar>::Zero(psi.size());
  for (const auto& t : op.terms()) {
    State<Scalar> tmp = psi;
    pauli_apply_inplace(t.pauli, tmp);
    out += static_cast<Scalar>(t.coefficient) * tmp;
  }
  return out;
}

/// sum_k c_k <a|P_k|b>.
template <typename Scalar>
std::complex<Scalar> opsum_matrix_element(const State<Scalar>& a, const OperatorSum& op,
                                          const State<Scalar>& b) {
  if (a.size() != b.size()) throw ShapeMismatch("matrix element between vectors of different length");
  std::complex<Scalar> acc{0, 0};
  for (const auto& t : op.terms())
    acc += static_cast<Scalar>(t.coefficient) * pauli_matrix_element(a, t.pauli, b);
  return acc;
}

/// Dense 2^N x 2^N matrix of a Pauli string or a sum.
DenseOperator<double> to_dense(const PauliString& p);
DenseOperator<double> to_dense(const OperatorSum& op);

/// Product state |b_0 b_1 ...> from a bitstring whose k-th character is site k.
StateVector basis_state(std::string_view bits);
StateVector basis_state(int n_sites, std::uint64_t index);

}  // namespace bqt
