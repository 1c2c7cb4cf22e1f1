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

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "bqt/bilayer_map.hpp"
#include "bqt/models.hpp"
#include "bqt/oracle.hpp"
#include "dense_reference.hpp"
#include "doctest.h"

using namespace bqt;

namespace {

std::vector<BilayerTerm> parse_terms(const std::string& text, int& n) {
  std::istringstream in(text);
  return parse_bilayer_terms(in, n);
}

BilayerSpec decompose_text(const std::string& text) {
  int n = 0;
  const auto terms = parse_terms(text, n);
  return decompose_bilayer(terms, n);
}

std::string letters_of(const PauliString& p) {
  std::string s(p.n_sites, 'I');
  for (int k = 0; k < p.n_sites; ++k) s[k] = p.letter(k);
  return s;
}

// The monolayer model as seen by the reference, read back from a DynamicsSpec.
ref::Model to_ref(const DynamicsSpec& dyn) {
  ref::Model m;
  m.n = dyn.n_sites;
  for (const auto& t : dyn.h_eff.terms()) m.h_eff.push_back({t.coefficient, letters_of(t.pauli)});
  for (const auto& j : dyn.jumps) m.jumps.push_back({j.amplitude, letters_of(j.op)});
  m.strong = dyn.mode == JumpMode::strong;
  return m;
}

// The bilayer Hamiltonian straight from the raw terms; layer l on sites
// 0..n-1, layer r on n..2n-1.
ref::Mat dense_bilayer(const std::vector<BilayerTerm>& terms, int n) {
  std::vector<ref::Term> out;
  for (const auto& t : terms) {
    std::string s(2 * n, 'I');
    for (const auto& f : t.factors) s[f.site + (f.layer == Layer::r ? n : 0)] = f.letter;
    out.push_back({t.coefficient, s});
  }
  return ref::dense(out, 2 * n);
}

std::vector<double> sorted_real(const Eigen::VectorXcd& ev) {
  std::vector<double> out;
  for (auto z : ev) out.push_back(z.real());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("antiunitary_conjugate") {
  const auto x = parse_operator_sum("1.0 X0", 1);
  CHECK(antiunitary_conjugate(x) == parse_operator_sum("-1.0 X0", 1));
  const auto zz = parse_operator_sum("1.0 Z0 Z1", 2);
  CHECK(antiunitary_conjugate(zz) == zz);
  const auto yxz = parse_operator_sum("0.5 Y0 X1 Z2", 3);
  CHECK(antiunitary_conjugate(yxz) == parse_operator_sum("-0.5 Y0 X1 Z2", 3));

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int rep = 0; rep < 20; ++rep) {
    OperatorSum op(4);
    for (int k = 0; k < 5; ++k) {
      PauliString p = PauliString::identity(4);
      p.x = rng() & 15;
      p.z = rng() & 15;
      op.add(u(rng), p);
    }
    CHECK(antiunitary_conjugate(antiunitary_conjugate(op)) == op);
  }
}

TEST_CASE("decompose Ashkin-Teller L = 2") {
  const double J = 1.0, h = 0.3, lJ = 0.5, lh = 0.25;
  const auto terms = ashkin_teller_terms({2, J, h, lJ, lh, Boundary::open});
  const BilayerSpec spec = decompose_bilayer(terms, 2);
  CHECK(spec.n_sites == 2);
  CHECK(spec.intralayer == parse_operator_sum("1 Z0 Z1 + 0.3 X0 + 0.3 X1", 2));
  REQUIRE(spec.couplings.size() == 3);
  auto find = [&](const char* text) {
    const auto p = parse_pauli(text, 2);
    for (const auto& c : spec.couplings)
      if (c.op == p) return c.strength;
    return -1.0;
  };
  CHECK(find("Z0 Z1") == doctest::Approx(J * lJ).epsilon(1e-15));
  CHECK(find("X0") == doctest::Approx(h * lh).epsilon(1e-15));
  CHECK(find("X1") == doctest::Approx(h * lh).epsilon(1e-15));
}

TEST_CASE("decompose the dimer") {
  const BilayerSpec spec = decompose_bilayer(dimer_terms(1.0, 0.3), 1);
  CHECK(spec.intralayer == parse_operator_sum("0.3 Z0", 1));
  REQUIRE(spec.couplings.size() == 1);
  CHECK(spec.couplings[0].strength == 1.0);
  CHECK(spec.couplings[0].op == parse_pauli("X0", 1));
}

TEST_CASE("decomposition errors") {
  int n = 0;
  SUBCASE("negative coupling") {
    const auto terms = parse_terms("-0.2 X0l X0r\n", n);
    CHECK_THROWS_AS(decompose_bilayer(terms, n), SignViolation);
    try {
      decompose_bilayer(terms, n);
    } catch (const SignViolation& e) {
      CHECK(std::string(e.what()).find("line 1") != std::string::npos);
      CHECK(std::string(e.what()).find("X0l X0r") != std::string::npos);
    }
  }
  SUBCASE("layer r does not mirror layer l") {
    CHECK_THROWS_AS(decompose_text("0.3 Z0l\n0.3 Z0r\n"), SymmetryViolation);
    CHECK_THROWS_AS(decompose_text("0.3 X0l\n"), SymmetryViolation);
    CHECK_THROWS_AS(decompose_text("0.3 X0l\n-0.3000001 X0r\n"), SymmetryViolation);
  }
  SUBCASE("cross term that is not O Obar") {
    CHECK_THROWS_AS(decompose_text("1.0 X0l Z0r\n"), NonFactorizable);
    CHECK_THROWS_AS(decompose_text("1.0 Z0l Z1l Z0r\n"), NonFactorizable);
  }
}

TEST_CASE("decompose inverts bilayer_terms") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 1 + static_cast<int>(rng() % 4);
    const std::uint64_t mask = (std::uint64_t{1} << n) - 1;
    BilayerSpec spec;
    spec.n_sites = n;
    spec.intralayer = OperatorSum(n);
    for (int k = 0; k < 4; ++k) {
      PauliString p = PauliString::identity(n);
      p.x = rng() & mask;
      p.z = rng() & mask;
      spec.intralayer.add(u(rng), p);
    }
    for (int k = 0; k < 3; ++k) {
      PauliString p = PauliString::identity(n);
      p.x = rng() & mask;
      p.z = rng() & mask;
      if (p.is_identity()) continue;
      if (std::any_of(spec.couplings.begin(), spec.couplings.end(), [&](const Coupling& c) { return c.op == p; }))
        continue;
      spec.couplings.push_back({std::abs(u(rng)), p});
    }
    std::sort(spec.couplings.begin(), spec.couplings.end(),
              [](const Coupling& a, const Coupling& b) { return a.op < b.op; });
    const auto back = decompose_bilayer(bilayer_terms(spec), n);
    CHECK(back.couplings == spec.couplings);
    CHECK(back.intralayer.without_identity() == spec.intralayer.without_identity());
    CHECK(back.intralayer.identity_coefficient() == doctest::Approx(spec.intralayer.identity_coefficient()));
  }
}

TEST_CASE("build_dynamics for Ashkin-Teller") {
  const AshkinTellerParams p{4, 1.0, 0.3, 0.5, 0.5, Boundary::open};
  const auto spec = decompose_bilayer(ashkin_teller_terms(p), 4);
  const auto dyn = build_dynamics(spec);
  REQUIRE(dyn.jumps.size() == 7);
  int zz = 0, x = 0;
  for (const auto& j : dyn.jumps) {
    if (j.op.weight() == 2) {
      ++zz;
      CHECK(j.amplitude == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
    } else {
      ++x;
      CHECK(j.amplitude == doctest::Approx(std::sqrt(0.15)).epsilon(1e-15));
    }
  }
  CHECK(zz == 3);
  CHECK(x == 4);
  CHECK(dyn.h_eff.without_identity() == spec.intralayer.without_identity());

  // h_eff = sum_i (kappa_i + 2 h_i - J_i) / 2 term by term
  OperatorSum sum(4);
  double coupling_total = 0;
  for (const auto& c : spec.couplings) coupling_total += c.strength;
  for (std::size_t i = 0; i < dyn.partition.size(); ++i) {
    sum += dyn.partition[i];
    sum.add(0.5 * dyn.kappas[i], PauliString::identity(4));
  }
  sum.add(-0.5 * coupling_total, PauliString::identity(4));
  CHECK(sum.identity_coefficient() == doctest::Approx(dyn.h_eff.identity_coefficient()).epsilon(1e-14));
  double kappa_sum = 0;
  for (double k : dyn.kappas) kappa_sum += k;
  CHECK(kappa_sum == doctest::Approx(dyn.kappa_total).epsilon(1e-14));
}

TEST_CASE("every kappa certifies positivity") {
  const auto spec = decompose_bilayer(ashkin_teller_terms({3, 1.0, 0.3, 0.7, 0.2, Boundary::periodic}), 3);
  for (auto kind : {KappaPolicy::Kind::one_norm, KappaPolicy::Kind::tight}) {
    KappaPolicy policy;
    policy.kind = kind;
    const auto dyn = build_dynamics(spec, policy);
    REQUIRE(dyn.partition.size() == spec.couplings.size() + 1);
    for (std::size_t i = 0; i < dyn.partition.size(); ++i) {
      const double J = i < spec.couplings.size() ? spec.couplings[i].strength : 0.0;
      ref::Mat m = 2.0 * to_dense(dyn.partition[i]);
      m.diagonal().array() += dyn.kappas[i] - J;
      Eigen::SelfAdjointEigenSolver<ref::Mat> es(m);
      CHECK(es.eigenvalues().minCoeff() >= -1e-10);
      if (kind == KappaPolicy::Kind::tight) CHECK(es.eigenvalues().minCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("the kappa policy only moves the constant of h_eff") {
  const auto spec = decompose_bilayer(ashkin_teller_terms({4, 1.0, 0.3, 1.0, 0.1, Boundary::open}), 4);
  const auto base = build_dynamics(spec);
  KappaPolicy tight;
  tight.kind = KappaPolicy::Kind::tight;
  KappaPolicy shifted;
  shifted.offset = 1.0;
  KappaPolicy given;
  given.kind = KappaPolicy::Kind::explicit_values;
  given.values.assign(spec.couplings.size() + 1, 10.0);
  for (const auto& policy : {tight, shifted, given}) {
    const auto dyn = build_dynamics(spec, policy);
    CHECK(dyn.h_eff.without_identity() == base.h_eff.without_identity());
    CHECK(dyn.jumps.size() == base.jumps.size());
  }
  CHECK(build_dynamics(spec, shifted).kappa_total ==
        doctest::Approx(base.kappa_total + static_cast<double>(spec.couplings.size() + 1)));

  KappaPolicy too_small;
  too_small.kind = KappaPolicy::Kind::explicit_values;
  too_small.values.assign(spec.couplings.size() + 1, 0.0);
  CHECK_THROWS_AS(build_dynamics(spec, too_small), PositivityFailure);
}

TEST_CASE("locked and noiseless limits") {
  int n = 0;
  // H = 1/2 J O^2 = 1/2 J I: no postselection at all.
  const auto locked = parse_terms("1.0 X0l X0r\n1.0\n", n);
  KappaPolicy tight;
  tight.kind = KappaPolicy::Kind::tight;
  const auto dyn = build_dynamics(decompose_bilayer(locked, n), tight);
  CHECK(dyn.h_eff.without_identity().empty());
  CHECK(std::abs(dyn.h_eff.identity_coefficient()) < 1e-15);
  CHECK(std::abs(dyn.kappa_total) < 1e-15);

  const auto free = parse_terms("0.4 Z0l\n-0.4 Z0r\n", n);
  const auto dyn2 = build_dynamics(decompose_bilayer(free, n));
  CHECK(dyn2.jumps.empty());
  CHECK(dyn2.h_eff.without_identity() == parse_operator_sum("0.4 Z0", 1));
}

TEST_CASE("validate_mapping") {
  SUBCASE("dimer") {
    const auto terms = dimer_terms(1.0, 0.3);
    for (auto mode : {JumpMode::weak, JumpMode::strong}) {
      const auto dyn = build_dynamics(decompose_bilayer(terms, 1), {}, mode);
      const auto rep = validate_mapping(dyn, terms);
      CHECK(rep.dimension == 4);
      CHECK(rep.max_deviation < 1e-10);
    }
  }
  SUBCASE("Ashkin-Teller L = 2 and L = 3") {
    for (int L : {2, 3}) {
      const auto terms = ashkin_teller_terms({L, 1.0, 0.3, 0.5, 0.5, Boundary::open});
      const auto dyn = build_dynamics(decompose_bilayer(terms, L));
      CHECK(validate_mapping(dyn, terms).max_deviation < 1e-10);
    }
  }
  SUBCASE("kappa perturbation shows up as a diagonal shift") {
    const auto terms = ashkin_teller_terms({2, 1.0, 0.3, 0.5, 0.5, Boundary::open});
    auto dyn = build_dynamics(decompose_bilayer(terms, 2));
    dyn.kappa_total += 0.1;
    CHECK(validate_mapping(dyn, terms).max_deviation == doctest::Approx(0.1).epsilon(1e-9));
  }
  SUBCASE("size limit") {
    const auto terms = ashkin_teller_terms({7, 1.0, 0.3, 0.5, 0.5, Boundary::open});
    const auto dyn = build_dynamics(decompose_bilayer(terms, 7));
    CHECK_THROWS_AS(validate_mapping(dyn, terms), SizeLimitExceeded);
  }
}

TEST_CASE("superoperator against Kronecker products and the bilayer spectrum") {
  for (int L : {1, 2, 3}) {
    const auto terms = L == 1 ? dimer_terms(0.7, 0.4) : ashkin_teller_terms({L, 1.0, 0.3, 0.6, 0.4, Boundary::open});
    const auto dyn = build_dynamics(decompose_bilayer(terms, L));
    const ref::Mat s_ref = ref::generator(to_ref(dyn));
    CHECK((superoperator(dyn) - s_ref).cwiseAbs().maxCoeff() < 1e-12);

    // Similar matrices: same spectrum as -kappa_tot - bilayer H, no convention needed.
    ref::Mat target = -dense_bilayer(terms, L);
    target.diagonal().array() -= dyn.kappa_total;
    const auto a = sorted_real(Eigen::ComplexEigenSolver<ref::Mat>(s_ref).eigenvalues());
    const auto b = sorted_real(Eigen::ComplexEigenSolver<ref::Mat>(target).eigenvalues());
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-9));
  }
}

TEST_CASE("bilayer_hamiltonian matches the raw terms") {
  const auto terms = ashkin_teller_terms({2, 1.0, 0.3, 0.5, 0.5, Boundary::open});
  const auto h = bilayer_hamiltonian(terms, 2);
  CHECK(h.n_sites() == 4);
  CHECK((to_dense(h) - dense_bilayer(terms, 2)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("term file parsing") {
  int n = 0;
  const auto terms = parse_terms("# dimer\n1.0 X0l X0r\n\n0.3 Z0l   # field\n-0.3 Z0r\n", n);
  CHECK(n == 1);
  REQUIRE(terms.size() == 3);
  CHECK(terms[0].source_line == 2);
  CHECK(terms[1].source_line == 4);
  CHECK(to_string(terms[0]) == "1 X0l X0r");

  auto message = [](const std::string& text) {
    int m = 0;
    try {
      parse_terms(text, m);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("1.0 X0l\nabc Z0l\n").find("line 2") != std::string::npos);
  CHECK(message("1.0 Q0l\n").find("line 1") != std::string::npos);
  CHECK(message("1.0 X0q\n").find("line 1") != std::string::npos);
  CHECK(message("1.0 X0l Z0l\n").find("twice") != std::string::npos);
}
