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

// Prints the reference values frozen into the unit tests. Not run by ctest;
// rerun by hand (takes a minute or two) if a model convention ever changes.

#include <cstdio>

#include "dense_reference.hpp"

namespace {

void at_row(int L, double lambda, const char* init, std::initializer_list<int> steps) {
  const auto m = ref::ashkin_teller(L, 1.0, 0.3, lambda, lambda);
  int last = 0;
  for (int s : steps) last = std::max(last, s);
  const auto c = ref::correlators(m, 0.1, last, ref::basis(L, ref::index_of(init)), ref::letters_at(L, {{0, 'Z'}, {1, 'Z'}}));
  for (int s : steps)
    std::printf("AT L=%d lambda=%g step=%d  C1 %.17g  C2 %.17g\n", L, lambda, s, c[s].first, c[s].second);
}

}  // namespace

int main() {
  at_row(4, 0.5, "1100", {5, 10, 20});
  at_row(2, 0.5, "11", {2});
  at_row(8, 1.0, "11000000", {5});
  at_row(8, 0.5, "11000000", {10, 20});
  at_row(8, 0.1, "11000000", {20});

  for (double beta : {0.25, 0.5, 1.0}) {
    const int n = static_cast<int>(std::lround(beta / 0.05));
    std::printf("dimer J=1 h=0.3 dt=0.05 beta=%g  %.17g\n", beta, ref::dimer_brute_force(1.0, 0.3, 0.05, n));
  }
  return 0;
}
