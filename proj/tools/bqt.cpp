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

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "bqt/commands.hpp"

namespace {

struct Common {
  std::string config;
  std::string output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Run configuration file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--output-dir", c.output_dir, "Overrides [output] dir");
  cmd->add_option("--seed", c.seed, "Overrides the master seed");
  cmd->add_option("--threads", c.threads, "Worker threads for independent chains")->check(CLI::PositiveNumber);
}

bqt::RunConfig resolve(const Common& c) {
  bqt::RunConfig cfg = bqt::load_config(c.config);
  if (!c.output_dir.empty()) cfg.output_dir = c.output_dir;
  if (c.seed) cfg.mc.seed = *c.seed;
  if (c.threads) cfg.mc.threads = *c.threads;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bilayer Hamiltonians as postselected quantum trajectories"};
  app.set_version_flag("--version", bqt::kVersion);
  app.require_subcommand(1);

  Common map_args, exact_args, sample_args, enum_args;
  auto* map = app.add_subcommand("map", "Compile the bilayer model and write the dynamics manifest");
  add_common(map, map_args);
  auto* exact = app.add_subcommand("exact", "Evolve the density matrix and write exact correlators");
  add_common(exact, exact_args);
  auto* sample = app.add_subcommand("sample", "Estimate correlators by trajectory-pair Monte Carlo");
  add_common(sample, sample_args);
  auto* enumerate = app.add_subcommand("enumerate", "Check exhaustive pair sums against the density matrix");
  add_common(enumerate, enum_args);

  bqt::DimerOptions dimer_opts;
  std::optional<std::uint64_t> dimer_seed;
  auto* dimer = app.add_subcommand("dimer", "Compare the three dimer calculations");
  dimer->set_help_flag("--help", "Print this help message and exit");  // frees -h for the field
  dimer->add_option("-J,--J", dimer_opts.J, "Interlayer coupling")->capture_default_str();
  dimer->add_option("-h,--h", dimer_opts.h, "Field")->capture_default_str();
  dimer->add_option("--beta", dimer_opts.betas, "Inverse temperatures")->capture_default_str();
  dimer->add_option("--dt", dimer_opts.dt, "Time step")->capture_default_str();
  dimer->add_option("--chains", dimer_opts.mc.n_chains, "Markov chains")->capture_default_str();
  dimer->add_option("--samples", dimer_opts.mc.n_updates, "Proposals per chain")->capture_default_str();
  dimer->add_option("--seed", dimer_seed, "Master seed");
  dimer->add_option("--threads", dimer_opts.mc.threads, "Worker threads")->check(CLI::PositiveNumber);
  dimer->add_option("--output-dir", dimer_opts.output_dir, "Directory for dimer.csv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*map) return bqt::cmd_map(resolve(map_args), std::cout).exit_code;
    if (*exact) return bqt::cmd_exact(resolve(exact_args), std::cout).exit_code;
    if (*sample) return bqt::cmd_sample(resolve(sample_args), std::cout).exit_code;
    if (*enumerate) return bqt::cmd_enumerate(resolve(enum_args), std::cout).exit_code;
    if (*dimer) {
      if (dimer_seed) dimer_opts.mc.seed = *dimer_seed;
      bqt::cmd_dimer(dimer_opts, std::cout);
      return bqt::kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return bqt::exit_code_for(e);
  }
  return bqt::kExitOk;
}
