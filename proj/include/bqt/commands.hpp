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

// Command implementations behind the bqt executable. Each returns its rows
// and manifest and, when the config names an output directory, writes them.

#pragma once

#include <exception>
#include <iosfwd>
#include <string>
#include <vector>

#include "bqt/config.hpp"
#include "json.hpp"

namespace bqt {

inline constexpr const char* kVersion = "bqt 1.0.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitModel = 3,
  kExitUnreliable = 4,
  kExitNumerical = 5,
};

/// Maps an exception thrown by a command to the process exit code.
int exit_code_for(const std::exception& e);

struct ResultRow {
  double beta = 0;
  std::string observable;
  bool interlayer = false;
  double mean = 0;
  double std_error = 0;
  long n_samples = 0;
  int n_batches = 0;
  double acceptance_rate = 0;
  bool reliable = true;
  // Not written to the CSV; kept for diagnostics.
  double variance = 0;
  double variance_stderr = 0;
};

inline constexpr const char* kResultsHeader =
    "beta,observable,kind,mean,stderr,n_samples,n_batches,acceptance_rate,reliable";

std::string format_results_csv(const std::vector<ResultRow>& rows);

struct CompiledModel {
  std::vector<BilayerTerm> terms;
  BilayerSpec spec;
  DynamicsSpec dyn;
};

CompiledModel compile_model(const RunConfig& cfg);

struct RunOutput {
  std::vector<ResultRow> rows;
  nlohmann::ordered_json manifest;
  int exit_code = kExitOk;
};

RunOutput cmd_map(const RunConfig& cfg, std::ostream& log);
RunOutput cmd_exact(const RunConfig& cfg, std::ostream& log);
RunOutput cmd_sample(const RunConfig& cfg, std::ostream& log);

struct DimerOptions {
  double J = 1.0;
  double h = 0.3;
  std::vector<double> betas{1.0};
  double dt = 0.05;
  McConfig mc{.n_chains = 16, .n_updates = 200000};  // the weak-jump dimer mixes slowly
  std::string output_dir;
};

struct DimerRow {
  double beta = 0;
  double transfer_matrix = 0;
  double exact = 0;
  double sampled = 0;
  double std_error = 0;
  EstimatorResult estimate;
};

std::vector<DimerRow> cmd_dimer(const DimerOptions& opts, std::ostream& out);

struct EnumerateRow {
  double beta = 0;
  std::string observable;
  std::uint64_t n_pairs = 0;
  double purity_deviation = 0;  // relative, sum |I|^2 vs Tr(rho^2)
  double c1_enumerated = 0, c1_oracle = 0;
  double c2_enumerated = 0, c2_oracle = 0;
  double max_deviation = 0;
};

struct EnumerateOutput {
  std::vector<EnumerateRow> rows;
  double max_deviation = 0;
  int exit_code = kExitOk;
};

inline constexpr double kEnumerateTolerance = 1e-10;

EnumerateOutput cmd_enumerate(const RunConfig& cfg, std::ostream& out);

}  // namespace bqt
