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

#include <cmath>
#include <random>

#include "bqt/pauli.hpp"
#include "dense_reference.hpp"
#include "doctest.h"

using namespace bqt;
using cd = std::complex<double>;

namespace {

PauliString random_pauli(std::mt19937_64& rng, int n) {
  PauliString p = PauliString::identity(n);
  const std::uint64_t mask = (std::uint64_t{1} << n) - 1;
  p.x = rng() & mask;
  p.z = rng() & mask;
  return p;
}

StateVector random_state(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  StateVector v(1 << n);
  for (auto& a : v) a = cd(g(rng), g(rng));
  return v / v.norm();
}

std::string letters_of(const PauliString& p) {
  std::string s(p.n_sites, 'I');
  for (int k = 0; k < p.n_sites; ++k) s[k] = p.letter(k);
  return s;
}

double max_abs(const StateVector& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("pauli_apply on single qubits") {
  const auto x = parse_pauli("X0", 1), y = parse_pauli("Y0", 1), z = parse_pauli("Z0", 1);
  CHECK(max_abs(pauli_apply(basis_state("0"), x) - basis_state("1")) == 0.0);
  CHECK(max_abs(pauli_apply(basis_state("1"), z) + basis_state("1")) == 0.0);
  CHECK(max_abs(pauli_apply(basis_state("0"), y) - cd(0, 1) * basis_state("1")) == 0.0);
  CHECK(max_abs(pauli_apply(basis_state("1"), y) + cd(0, 1) * basis_state("0")) == 0.0);
}

TEST_CASE("pauli_apply matches Kronecker products") {
  std::mt19937_64 rng(11);
  for (int n = 1; n <= 5; ++n) {
    for (int rep = 0; rep < 20; ++rep) {
      const auto p = random_pauli(rng, n);
      const auto psi = random_state(rng, n);
      const StateVector expect = ref::pauli(letters_of(p)) * psi;
      CHECK(max_abs(pauli_apply(psi, p) - expect) < 1e-14);
      CHECK(std::abs(pauli_matrix_element(psi, p, psi) - psi.dot(expect)) < 1e-13);
      CHECK(to_dense(p).isApprox(ref::pauli(letters_of(p)), 1e-15));
    }
  }
}

TEST_CASE("P squared is the identity") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 1 + static_cast<int>(rng() % 6);
    const auto p = random_pauli(rng, n);
    const auto psi = random_state(rng, n);
    CHECK(max_abs(pauli_apply(pauli_apply(psi, p), p) - psi) <= 1e-15);
  }
}

TEST_CASE("pauli_rotation_apply") {
  const double th = 0.3;
  const auto x = parse_pauli("X0", 1);
  SUBCASE("zero angle") {
    std::mt19937_64 rng(5);
    const auto psi = random_state(rng, 3);
    CHECK(max_abs(pauli_rotation_apply(psi, parse_pauli("X0 Y1 Z2", 3), 0.0, 1) - psi) == 0.0);
  }
  SUBCASE("X rotation of |0>") {
    StateVector expect(2);
    expect << std::cos(th), cd(0, std::sin(th));
    CHECK(max_abs(pauli_rotation_apply(basis_state("0"), x, th, 1) - expect) < 1e-15);
  }
  SUBCASE("ZZ eigenstate phase") {
    // |01> has site 0 in 0 and site 1 in 1: ZZ eigenvalue -1.
    const auto psi = basis_state("01");
    const auto out = pauli_rotation_apply(psi, parse_pauli("Z0 Z1", 2), th, 1);
    CHECK(max_abs(out - std::exp(cd(0, -th)) * psi) < 1e-15);
  }
  SUBCASE("matches the dense exponential, preserves norm, inverts") {
    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 30; ++rep) {
      const int n = 1 + static_cast<int>(rng() % 4);
      const auto p = random_pauli(rng, n);
      const auto psi = random_state(rng, n);
      const int sign = (rep & 1) ? 1 : -1;
      const ref::Mat gen = cd(0, sign * 0.7) * ref::pauli(letters_of(p));
      const StateVector expect = gen.exp() * psi;
      const auto out = pauli_rotation_apply(psi, p, 0.7, sign);
      CHECK(max_abs(out - expect) < 1e-13);
      CHECK(std::abs(out.norm() - 1.0) < 1e-12);
      CHECK(max_abs(pauli_rotation_apply(out, p, 0.7, -sign) - psi) < 1e-12);
    }
  }
}

TEST_CASE("imaginary_term_apply") {
  const double tau = 0.1;
  CHECK(max_abs(imaginary_term_apply(basis_state("0"), parse_pauli("Z0", 1), tau) -
                std::exp(-tau) * basis_state("0")) < 1e-15);
  std::mt19937_64 rng(9);
  const auto psi = random_state(rng, 2);
  CHECK(max_abs(imaginary_term_apply(psi, PauliString::identity(2), tau) - std::exp(-tau) * psi) < 1e-15);
  StateVector expect(2);
  expect << std::cosh(tau), -std::sinh(tau);
  CHECK(max_abs(imaginary_term_apply(basis_state("0"), parse_pauli("X0", 1), tau) - expect) < 1e-15);

  SUBCASE("matches dense exponential and composes additively") {
    for (int rep = 0; rep < 30; ++rep) {
      const int n = 1 + static_cast<int>(rng() % 4);
      const auto p = random_pauli(rng, n);
      const auto v = random_state(rng, n);
      const StateVector expect_d = ref::expm_hermitian(ref::pauli(letters_of(p)), 0.35) * v;
      CHECK(max_abs(imaginary_term_apply(v, p, 0.35) - expect_d) < 1e-13);
      const auto two = imaginary_term_apply(imaginary_term_apply(v, p, 0.2), p, 0.15);
      CHECK(max_abs(two - imaginary_term_apply(v, p, 0.35)) < 1e-12);
    }
  }
}

TEST_CASE("inner products and matrix elements") {
  StateVector plus(2);
  plus << M_SQRT1_2, M_SQRT1_2;
  CHECK(std::abs(inner_product(basis_state("0"), basis_state("0")) - 1.0) == 0.0);
  CHECK(std::abs(inner_product(basis_state("0"), basis_state("1"))) == 0.0);
  CHECK(std::abs(inner_product(plus, basis_state("0")) - M_SQRT1_2) < 1e-16);
  // conjugate-linear in the first slot
  StateVector ipsi = cd(0, 1) * basis_state("0");
  CHECK(std::abs(inner_product(ipsi, basis_state("0")) - cd(0, -1)) == 0.0);

  CHECK(std::abs(opsum_matrix_element(basis_state("0"), parse_operator_sum("1 Z0", 1), basis_state("0")) - 1.0) == 0.0);
  CHECK(std::abs(opsum_matrix_element(basis_state("0"), parse_operator_sum("0.5 X0", 1), basis_state("1")) - 0.5) == 0.0);
  CHECK(std::abs(opsum_matrix_element(plus, parse_operator_sum("1 Z0", 1), plus)) < 1e-16);
  CHECK_THROWS_AS(inner_product(basis_state("0"), basis_state("00")), ShapeMismatch);
  CHECK_THROWS_AS(pauli_apply(basis_state("00"), parse_pauli("X0", 3)), ShapeMismatch);
}

TEST_CASE("diagonal matrix elements of Hermitian sums are real") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int rep = 0; rep < 30; ++rep) {
    const int n = 1 + static_cast<int>(rng() % 5);
    OperatorSum op(n);
    for (int k = 0; k < 6; ++k) op.add(u(rng), random_pauli(rng, n));
    const auto a = random_state(rng, n);
    CHECK(std::abs(opsum_matrix_element(a, op, a).imag()) < 1e-12);
  }
}

TEST_CASE("OperatorSum is canonical") {
  OperatorSum op(3);
  op.add(1.0, parse_pauli("Z0 Z1", 3)).add(0.5, parse_pauli("X2", 3)).add(2.0, parse_pauli("Z1 Z0", 3));
  op.add(0.25, PauliString::identity(3));
  CHECK(op.size() == 3);
  CHECK(op.coefficient(parse_pauli("Z0 Z1", 3)) == 3.0);
  CHECK(op.identity_coefficient() == 0.25);
  CHECK(op.terms().front().pauli.is_identity());
  CHECK(op.one_norm() == doctest::Approx(3.75));
  CHECK(op.without_identity().size() == 2);
  CHECK(!op.is_diagonal());

  // Cancelling a term removes it.
  op.add(-0.5, parse_pauli("X2", 3));
  CHECK(op.size() == 2);
  CHECK(op.is_diagonal());

  const auto dense = to_dense(op);
  const ref::Mat expect = 3.0 * ref::pauli("ZZI") + 0.25 * ref::pauli("III");
  CHECK(dense.isApprox(expect, 1e-15));
}

TEST_CASE("text round trip") {
  const auto p = parse_pauli("X3 Z0 Y7", 8);
  CHECK(p.letter(3) == 'X');
  CHECK(p.letter(0) == 'Z');
  CHECK(p.letter(7) == 'Y');
  CHECK(parse_pauli(to_string(p), 8) == p);
  CHECK(to_string(PauliString::identity(4)) == "I");
  CHECK(parse_pauli("I", 4).is_identity());
  CHECK_THROWS(parse_pauli("Q1", 2));
  CHECK_THROWS(parse_pauli("X5", 2));
  CHECK_THROWS(parse_pauli("X0 Z0", 2));

  const auto op = parse_operator_sum("0.5 X0 X1 + -1.25 Z1 + 0.75", 2);
  CHECK(op.coefficient(parse_pauli("X0 X1", 2)) == 0.5);
  CHECK(op.coefficient(parse_pauli("Z1", 2)) == -1.25);
  CHECK(op.identity_coefficient() == 0.75);
  CHECK(parse_operator_sum(to_string(op), 2) == op);
}

TEST_CASE("basis states follow the site-0-is-LSB convention") {
  const auto b = basis_state("110");
  CHECK(b.size() == 8);
  CHECK(b[3] == cd(1, 0));
  CHECK(b.norm() == 1.0);
  CHECK(basis_state(3, 3) == b);
  // Z on site 2 of |110> is +1, on site 0 is -1
  CHECK(std::abs(pauli_matrix_element(b, parse_pauli("Z2", 3), b) - 1.0) == 0.0);
  CHECK(std::abs(pauli_matrix_element(b, parse_pauli("Z0", 3), b) + 1.0) == 0.0);
}

TEST_CASE("multiply and commutation agree with dense matrices") {
  std::mt19937_64 rng(33);
  for (int rep = 0; rep < 40; ++rep) {
    const int n = 1 + static_cast<int>(rng() % 4);
    const auto a = random_pauli(rng, n), b = random_pauli(rng, n);
    const auto [k, c] = a.multiply(b);
    const ref::Mat prod = ref::pauli(letters_of(a)) * ref::pauli(letters_of(b));
    const cd phase = std::pow(cd(0, 1), k);
    CHECK(prod.isApprox(phase * ref::pauli(letters_of(c)), 1e-14));
    const ref::Mat comm = ref::pauli(letters_of(a)) * ref::pauli(letters_of(b)) -
                          ref::pauli(letters_of(b)) * ref::pauli(letters_of(a));
    CHECK(a.commutes_with(b) == (comm.norm() < 1e-12));
  }
}

TEST_CASE("single-precision kernels") {
  State<float> psi = State<float>::Zero(4);
  psi[0] = 1;
  pauli_rotation_inplace(parse_pauli("X1", 2), 0.25f, 1, psi);
  CHECK(std::abs(psi[2] - std::complex<float>(0, std::sin(0.25f))) < 1e-7f);
}
