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

// Built-in bilayer models.

#pragma once

#include <vector>

#include "bqt/bilayer_map.hpp"

namespace bqt {

enum class Boundary { open, periodic };

/// Two transverse-field Ising chains coupled through ZZ-ZZ and X-X terms:
///
///   J sum_<ij> (Z_il Z_jl + Z_ir Z_jr - lambda_J Z_il Z_jl Z_ir Z_jr)
///     + h sum_i (X_il - X_ir + lambda_h X_il X_ir)
struct AshkinTellerParams {
  int L = 8;
  double J = 1.0;
  double h = 0.3;
  double lambda_J = 0.5;
  double lambda_h = 0.5;
  Boundary boundary = Boundary::open;
};

std::vector<BilayerTerm> ashkin_teller_terms(const AshkinTellerParams& p);

/// Single-site bilayer J X_l X_r + h Z_l - h Z_r.
std::vector<BilayerTerm> dimer_terms(double J, double h);

}  // namespace bqt
