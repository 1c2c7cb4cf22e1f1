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

// Run configuration, read from INI-style text:
//
//   schema_version = 1
//
//   [model]
//   kind = ashkin_teller        ; or: generic
//   L = 8
//   J = 1.0
//   h = 0.3
//   lambda = 0.5                ; sets lambda_J and lambda_h; either may be given separately
//   boundary = open             ; or: periodic
//   terms_file = dimer.terms    ; generic only, relative to the config file
//   init = 11000000             ; character k is site k
//
//   [schedule]
//   dt = 0.1
//   beta = 0.1:2.0              ; inclusive range in steps of dt, or a list "0, 0.5, 1"
//
//   [sampler]
//   mode = weak                 ; or: strong
//   heff = term_split           ; or: dense
//   n_chains = 128
//   n_updates = 200000
//   burn_in = 20000             ; default 10% of n_updates
//   thinning = 300              ; default one sweep (n_steps * n_jumps)
//   n_batches = 16
//   seed = 1
//   threads = 1
//
//   [kappa]
//   policy = one_norm           ; tight, explicit
//   offset = 0
//   values = 1, 1, 0            ; explicit: one per coupling plus the catch-all
//
//   [exact]
//   oracle = mirror             ; or: generator
//
//   [observables]
//   zz = intralayer Z0 Z1
//   zz_inter = interlayer Z0 Z1
//
//   [output]
//   dir = out

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "bqt/bilayer_map.hpp"
#include "bqt/models.hpp"
#include "bqt/oracle.hpp"
#include "bqt/sampler.hpp"

namespace bqt {

inline constexpr int kSchemaVersion = 1;

enum class ModelKind { ashkin_teller, generic };

struct ObservableSpec {
  std::string name;
  bool interlayer = false;
  std::string text;  // Pauli string as written
  OperatorSum op;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  ModelKind model = ModelKind::ashkin_teller;
  AshkinTellerParams ashkin_teller;
  std::filesystem::path terms_file;
  std::vector<BilayerTerm> generic_terms;
  int n_sites = 0;
  std::string init;

  double dt = 0.1;
  std::vector<double> betas;

  JumpMode mode = JumpMode::weak;
  HeffMethod heff = HeffMethod::term_split;
  McConfig mc;
  KappaPolicy kappa;
  OracleMode oracle = OracleMode::mirror;

  std::vector<ObservableSpec> observables;
  std::filesystem::path output_dir;

  std::vector<BilayerTerm> terms() const;
  std::uint64_t init_index() const;
};

/// Parses configuration text; relative paths resolve against `base_dir`.
RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

const char* to_string(JumpMode mode);
const char* to_string(HeffMethod method);
const char* to_string(KappaPolicy::Kind kind);
const char* to_string(OracleMode mode);

}  // namespace bqt
