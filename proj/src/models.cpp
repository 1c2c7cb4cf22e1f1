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

#include "bqt/models.hpp"

#include <stdexcept>

namespace bqt {

std::vector<BilayerTerm> ashkin_teller_terms(const AshkinTellerParams& p) {
  if (p.L < 1 || 2 * p.L > kMaxSites) throw std::invalid_argument("chain length out of range");
  std::vector<std::pair<int, int>> bonds;
  for (int i = 0; i + 1 < p.L; ++i) bonds.emplace_back(i, i + 1);
  // A ring of two sites would repeat its only bond.
  if (p.boundary == Boundary::periodic && p.L > 2) bonds.emplace_back(p.L - 1, 0);

  std::vector<BilayerTerm> terms;
  for (auto [i, j] : bonds) {
    terms.push_back({p.J, {{i, Layer::l, 'Z'}, {j, Layer::l, 'Z'}}, 0});
    terms.push_back({p.J, {{i, Layer::r, 'Z'}, {j, Layer::r, 'Z'}}, 0});
    terms.push_back({-p.J * p.lambda_J, {{i, Layer::l, 'Z'}, {j, Layer::l, 'Z'}, {i, Layer::r, 'Z'}, {j, Layer::r, 'Z'}}, 0});
  }
  for (int i = 0; i < p.L; ++i) {
    terms.push_back({p.h, {{i, Layer::l, 'X'}}, 0});
    terms.push_back({-p.h, {{i, Layer::r, 'X'}}, 0});
    terms.push_back({p.h * p.lambda_h, {{i, Layer::l, 'X'}, {i, Layer::r, 'X'}}, 0});
  }
  return terms;
}

std::vector<BilayerTerm> dimer_terms(double J, double h) {
  return {
      {J, {{0, Layer::l, 'X'}, {0, Layer::r, 'X'}}, 0},
      {h, {{0, Layer::l, 'Z'}}, 0},
      {-h, {{0, Layer::r, 'Z'}}, 0},
  };
}

}  // namespace bqt
