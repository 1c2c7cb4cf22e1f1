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

#include "bqt/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>

namespace bqt {

namespace {

using json = nlohmann::ordered_json;

std::string fmt(double v, const char* spec = "%.17g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string beta_text(double beta) { return fmt(beta, "%.10g"); }

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

json config_json(const RunConfig& cfg) {
  json j;
  j["schema_version"] = cfg.schema_version;
  json model;
  if (cfg.model == ModelKind::ashkin_teller) {
    const auto& at = cfg.ashkin_teller;
    model["kind"] = "ashkin_teller";
    model["L"] = at.L;
    model["J"] = at.J;
    model["h"] = at.h;
    model["lambda_J"] = at.lambda_J;
    model["lambda_h"] = at.lambda_h;
    model["boundary"] = at.boundary == Boundary::open ? "open" : "periodic";
  } else {
    model["kind"] = "generic";
    model["terms_file"] = cfg.terms_file.string();
    json terms = json::array();
    for (const auto& t : cfg.generic_terms) terms.push_back(to_string(t));
    model["terms"] = terms;
  }
  model["init"] = cfg.init;
  j["model"] = model;
  j["schedule"] = {{"dt", cfg.dt}, {"beta", cfg.betas}};
  j["sampler"] = {{"mode", to_string(cfg.mode)},
                  {"heff", to_string(cfg.heff)},
                  {"n_chains", cfg.mc.n_chains},
                  {"n_updates", cfg.mc.n_updates},
                  {"burn_in", cfg.mc.resolved_burn_in()},
                  {"thinning", cfg.mc.thinning > 0 ? json(cfg.mc.thinning) : json("sweep")},
                  {"n_batches", cfg.mc.n_batches},
                  {"seed", cfg.mc.seed},
                  {"threads", cfg.mc.threads}};
  j["kappa"] = {{"policy", to_string(cfg.kappa.kind)}, {"offset", cfg.kappa.offset}, {"values", cfg.kappa.values}};
  j["exact"] = {{"oracle", to_string(cfg.oracle)}};
  json obs = json::array();
  for (const auto& o : cfg.observables)
    obs.push_back({{"name", o.name}, {"kind", o.interlayer ? "interlayer" : "intralayer"}, {"pauli", o.text}});
  j["observables"] = obs;
  j["output_dir"] = cfg.output_dir.string();
  return j;
}

json dynamics_json(const CompiledModel& model) {
  const auto& dyn = model.dyn;
  json j;
  j["n_sites"] = dyn.n_sites;
  j["mode"] = to_string(dyn.mode);
  json jumps = json::array();
  for (const auto& jump : dyn.jumps) jumps.push_back({{"amplitude", jump.amplitude}, {"pauli", to_string(jump.op)}});
  j["jumps"] = jumps;
  json heff = json::array();
  for (const auto& t : dyn.h_eff.terms()) heff.push_back({{"coefficient", t.coefficient}, {"pauli", to_string(t.pauli)}});
  j["h_eff"] = heff;
  j["kappa_total"] = dyn.kappa_total;
  j["kappas"] = dyn.kappas;
  json partition = json::array();
  for (const auto& h : dyn.partition) partition.push_back(to_string(h));
  j["partition"] = partition;
  return j;
}

json base_manifest(const RunConfig& cfg, const CompiledModel& model, const char* command) {
  json j;
  j["tool"] = kVersion;
  j["command"] = command;
  j["config"] = config_json(cfg);
  j["dynamics"] = dynamics_json(model);
  return j;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<ObservableRequest> requests_of(const RunConfig& cfg) {
  std::vector<ObservableRequest> out;
  for (const auto& o : cfg.observables) out.push_back({o.op, o.interlayer});
  return out;
}

const OperatorSum& identity_op(int n) {
  static thread_local std::map<int, OperatorSum> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, OperatorSum::single(1.0, PauliString::identity(n))).first;
  return it->second;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ModelError*>(&e)) return kExitModel;
  if (dynamic_cast<const NumericalFailure*>(&e)) return kExitNumerical;
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const SizeLimitExceeded*>(&e) ||
      dynamic_cast<const ShapeMismatch*>(&e) || dynamic_cast<const std::invalid_argument*>(&e) ||
      dynamic_cast<const std::out_of_range*>(&e))
    return kExitConfig;
  return 1;
}

std::string format_results_csv(const std::vector<ResultRow>& rows) {
  std::string out = std::string(kResultsHeader) + "\n";
  for (const auto& r : rows) {
    out += beta_text(r.beta) + "," + r.observable + "," + (r.interlayer ? "interlayer" : "intralayer") + "," +
           fmt(r.mean) + "," + fmt(r.std_error) + "," + std::to_string(r.n_samples) + "," +
           std::to_string(r.n_batches) + "," + fmt(r.acceptance_rate) + "," + (r.reliable ? "true" : "false") + "\n";
  }
  return out;
}

CompiledModel compile_model(const RunConfig& cfg) {
  CompiledModel m;
  m.terms = cfg.terms();
  m.spec = decompose_bilayer(m.terms, cfg.n_sites);
  m.dyn = build_dynamics(m.spec, cfg.kappa, cfg.mode);
  return m;
}

RunOutput cmd_map(const RunConfig& cfg, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const CompiledModel model = compile_model(cfg);
  RunOutput out;
  out.manifest = base_manifest(cfg, model, "map");
  log << "compiled " << model.dyn.jumps.size() << " jumps, " << model.dyn.h_eff.size()
      << " h_eff terms, kappa_total = " << fmt(model.dyn.kappa_total, "%.10g") << "\n";
  for (const auto& j : model.dyn.jumps) log << "  jump " << fmt(j.amplitude, "%.10g") << " * " << to_string(j.op) << "\n";
  if (cfg.n_sites <= kMaxValidateSites) {
    const MappingReport report = validate_mapping(model.dyn, model.terms);
    out.manifest["mapping_validation"] = {{"dimension", report.dimension}, {"max_deviation", report.max_deviation}};
    log << "superoperator check: max deviation " << fmt(report.max_deviation, "%.3g") << " over "
        << report.dimension << " x " << report.dimension << "\n";
    if (!(report.max_deviation < 1e-10)) out.exit_code = kExitNumerical;
  } else {
    out.manifest["mapping_validation"] = nullptr;
  }
  out.manifest["wall_clock_seconds"] = seconds_since(start);
  if (!cfg.output_dir.empty()) write_file(cfg.output_dir / "dynamics.json", out.manifest.dump(2) + "\n");
  return out;
}

RunOutput cmd_exact(const RunConfig& cfg, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const CompiledModel model = compile_model(cfg);
  const ChannelOracle oracle(model.dyn, cfg.dt, cfg.oracle, cfg.heff);
  const int n = cfg.n_sites;

  std::vector<int> steps;
  for (double beta : cfg.betas) steps.push_back(steps_for(beta, cfg.dt));
  const int last = *std::max_element(steps.begin(), steps.end());

  // Correlators at every needed step, from one pass.
  std::map<int, std::vector<double>> values;
  DensityMatrix rho = pure_density(basis_state(n, cfg.init_index()));
  auto record = [&](int t) {
    if (std::find(steps.begin(), steps.end(), t) == steps.end()) return;
    auto& v = values[t];
    for (const auto& o : cfg.observables)
      v.push_back(renyi2_correlator(rho, o.op, o.interlayer ? o.op : identity_op(n)));
  };
  record(0);
  for (int t = 1; t <= last; ++t) {
    oracle.step_normalized(rho);
    record(t);
  }

  RunOutput out;
  for (std::size_t b = 0; b < cfg.betas.size(); ++b) {
    const auto& v = values.at(steps[b]);
    for (std::size_t k = 0; k < cfg.observables.size(); ++k) {
      ResultRow row;
      row.beta = cfg.betas[b];
      row.observable = cfg.observables[k].text;
      row.interlayer = cfg.observables[k].interlayer;
      row.mean = v[k];
      if (!std::isfinite(row.mean)) throw NumericalFailure("non-finite oracle value");
      out.rows.push_back(row);
    }
  }
  log << "exact: " << out.rows.size() << " rows, " << last << " steps, oracle " << to_string(cfg.oracle) << "\n";
  out.manifest = base_manifest(cfg, model, "exact");
  out.manifest["wall_clock_seconds"] = seconds_since(start);
  if (!cfg.output_dir.empty()) {
    write_file(cfg.output_dir / "exact.csv", format_results_csv(out.rows));
    write_file(cfg.output_dir / "exact_manifest.json", out.manifest.dump(2) + "\n");
  }
  return out;
}

RunOutput cmd_sample(const RunConfig& cfg, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const CompiledModel model = compile_model(cfg);
  const TrajectoryEngine engine(model.dyn, cfg.dt, cfg.heff);
  const StateVector init = basis_state(cfg.n_sites, cfg.init_index());
  const auto requests = requests_of(cfg);

  RunOutput out;
  json acceptance = json::array();
  for (double beta : cfg.betas) {
    const int n_steps = steps_for(beta, cfg.dt);
    const SampleRun run =
        sample_observables(engine, n_steps, init, requests, cfg.mc, static_cast<std::uint64_t>(n_steps));
    for (std::size_t k = 0; k < requests.size(); ++k) {
      const auto& o = cfg.observables[k];
      const EstimatorResult& r = o.interlayer ? run.interlayer[k].combined : run.intralayer[k];
      ResultRow row;
      row.beta = beta;
      row.observable = o.text;
      row.interlayer = o.interlayer;
      row.mean = r.value();
      row.std_error = r.std_error;
      row.n_samples = r.n_samples;
      row.n_batches = r.n_batches;
      row.acceptance_rate = r.acceptance_rate;
      row.reliable = r.reliable;
      row.variance = r.variance;
      row.variance_stderr = r.variance_stderr;
      if (!std::isfinite(row.mean) || !std::isfinite(row.std_error))
        throw NumericalFailure("non-finite estimate at beta = " + beta_text(beta));
      if (!row.reliable) out.exit_code = kExitUnreliable;
      acceptance.push_back({{"beta", beta}, {"observable", o.name}, {"acceptance_rate", r.acceptance_rate}});
      out.rows.push_back(row);
      log << "beta " << beta_text(beta) << "  " << (o.interlayer ? "C2 " : "C1 ") << o.text << " = "
          << fmt(row.mean, "%.6f") << " +- " << fmt(row.std_error, "%.6f") << (row.reliable ? "" : "  (unreliable)")
          << "\n";
    }
  }
  out.manifest = base_manifest(cfg, model, "sample");
  out.manifest["acceptance"] = acceptance;
  out.manifest["wall_clock_seconds"] = seconds_since(start);
  if (!cfg.output_dir.empty()) {
    write_file(cfg.output_dir / "results.csv", format_results_csv(out.rows));
    write_file(cfg.output_dir / "manifest.json", out.manifest.dump(2) + "\n");
  }
  return out;
}

std::vector<DimerRow> cmd_dimer(const DimerOptions& opts, std::ostream& out) {
  const auto terms = dimer_terms(opts.J, opts.h);
  const BilayerSpec spec = decompose_bilayer(terms, 1);
  // Single-bit updates cannot move between strong-jump labels of equal
  // overlap parity, so the sampled column uses weak jumps.
  const DynamicsSpec weak = build_dynamics(spec, {}, JumpMode::weak);
  const OperatorSum z = OperatorSum::single(1.0, PauliString::single(1, 0, 'Z'));
  const StateVector init = basis_state(1, 0);

  std::vector<DimerRow> rows;
  char line[160];
  std::snprintf(line, sizeof line, "%8s %16s %16s %16s %12s\n", "beta", "transfer_matrix", "exact_channel",
                "sampled", "stderr");
  out << line;
  for (double beta : opts.betas) {
    DimerRow row;
    row.beta = beta;
    const DimerParams p{opts.J, opts.h, beta, opts.dt};
    row.transfer_matrix = dimer_transfer_matrix(p);
    row.exact = dimer_exact(p);
    row.estimate = estimate_intralayer(weak, Schedule{opts.dt, p.n_steps()}, z, init, opts.mc);
    row.sampled = row.estimate.value();
    row.std_error = row.estimate.std_error;
    std::snprintf(line, sizeof line, "%8.4g %16.10f %16.10f %16.10f %12.3g\n", beta, row.transfer_matrix, row.exact,
                  row.sampled, row.std_error);
    out << line;
    rows.push_back(row);
  }
  if (!opts.output_dir.empty()) {
    std::string csv = "beta,transfer_matrix,exact_channel,sampled,stderr\n";
    for (const auto& r : rows)
      csv += beta_text(r.beta) + "," + fmt(r.transfer_matrix) + "," + fmt(r.exact) + "," + fmt(r.sampled) + "," +
             fmt(r.std_error) + "\n";
    write_file(std::filesystem::path(opts.output_dir) / "dimer.csv", csv);
  }
  return rows;
}

EnumerateOutput cmd_enumerate(const RunConfig& cfg, std::ostream& out) {
  const CompiledModel model = compile_model(cfg);
  const TrajectoryEngine engine(model.dyn, cfg.dt, cfg.heff);
  const ChannelOracle oracle(model.dyn, cfg.dt, OracleMode::mirror, cfg.heff);
  const int n = cfg.n_sites;
  const StateVector init = basis_state(n, cfg.init_index());

  EnumerateOutput result;
  char line[200];
  std::snprintf(line, sizeof line, "%6s %-12s %10s %12s %12s %12s %12s\n", "beta", "observable", "pairs",
                "purity_dev", "C1", "C2", "max_dev");
  out << line;
  for (double beta : cfg.betas) {
    const int steps = steps_for(beta, cfg.dt);
    const long bits = static_cast<long>(steps) * engine.n_jumps();
    if (2 * bits > kMaxEnumerationBits)
      throw SizeLimitExceeded("beta = " + beta_text(beta) + " needs 2^" + std::to_string(2 * bits) +
                              " label pairs; enumeration is limited to 2^" + std::to_string(kMaxEnumerationBits));
    DensityMatrix rho = pure_density(init);
    double log_trace = 0;
    for (int t = 0; t < steps; ++t) log_trace += oracle.step_normalized(rho);
    const double log_purity = std::log(rho.squaredNorm()) + 2.0 * log_trace;

    for (const auto& o : cfg.observables) {
      const PairSums sums = enumerate_pair_sums(engine, steps, init, o.op);
      EnumerateRow row;
      row.beta = beta;
      row.observable = o.text;
      row.n_pairs = sums.n_pairs;
      row.purity_deviation = std::abs(std::expm1(std::log(sums.sum_ii) + sums.log_scale - log_purity));
      row.c1_enumerated = sums.sum_ai.real() / sums.sum_ii;
      row.c2_enumerated = sums.sum_aa / sums.sum_ii;
      row.c1_oracle = renyi2_correlator(rho, o.op, identity_op(n));
      row.c2_oracle = renyi2_correlator(rho, o.op, o.op);
      row.max_deviation = std::max({row.purity_deviation, std::abs(row.c1_enumerated - row.c1_oracle),
                                    std::abs(row.c2_enumerated - row.c2_oracle)});
      if (!std::isfinite(row.max_deviation)) row.max_deviation = std::numeric_limits<double>::infinity();
      result.max_deviation = std::max(result.max_deviation, row.max_deviation);
      std::snprintf(line, sizeof line, "%6.3g %-12s %10llu %12.3g %12.8f %12.8f %12.3g\n", beta, o.text.c_str(),
                    static_cast<unsigned long long>(row.n_pairs), row.purity_deviation, row.c1_enumerated,
                    row.c2_enumerated, row.max_deviation);
      out << line;
      result.rows.push_back(row);
    }
  }
  out << "max deviation " << fmt(result.max_deviation, "%.3g") << " (tolerance " << fmt(kEnumerateTolerance, "%.0e")
      << ")\n";
  if (!(result.max_deviation <= kEnumerateTolerance)) result.exit_code = kExitNumerical;
  return result;
}

}  // namespace bqt
