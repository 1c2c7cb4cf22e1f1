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

#include "bqt/config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace bqt {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>> kAllowedKeys = {
    {"model", {"kind", "L", "J", "h", "lambda", "lambda_J", "lambda_h", "boundary", "terms_file", "init"}},
    {"schedule", {"dt", "beta"}},
    {"sampler", {"mode", "heff", "n_chains", "n_updates", "burn_in", "thinning", "n_batches", "seed", "threads"}},
    {"kappa", {"policy", "offset", "values"}},
    {"exact", {"oracle"}},
    {"observables", {}},
    {"output", {"dir"}},
};

template <typename T>
T number(const std::string& section, const std::string& key, const std::string& text) {
  T value{};
  const std::string s = boost::trim_copy(text);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
    throw ConfigError("[" + section + "] " + key + ": cannot parse '" + text + "' as a number");
  return value;
}

class Section {
 public:
  Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  bool has(const std::string& key) const { return tree_ && tree_->find(key) != tree_->not_found(); }
  std::string text(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    return boost::trim_copy(tree_->get<std::string>(pt::ptree::path_type(key, '\0')));
  }
  template <typename T>
  T get(const std::string& key, T fallback) const {
    return has(key) ? number<T>(name_, key, text(key, "")) : fallback;
  }
  std::vector<double> list(const std::string& key) const {
    std::vector<std::string> parts;
    const std::string raw = text(key, "");
    boost::split(parts, raw, boost::is_any_of(","));
    std::vector<double> out;
    for (const auto& p : parts)
      if (!boost::trim_copy(p).empty()) out.push_back(number<double>(name_, key, p));
    return out;
  }
  template <typename E>
  E choice(const std::string& key, E fallback, const std::map<std::string, E>& options) const {
    if (!has(key)) return fallback;
    const std::string v = text(key, "");
    auto it = options.find(v);
    if (it == options.end()) throw ConfigError("[" + name_ + "] " + key + ": unknown value '" + v + "'");
    return it->second;
  }

 private:
  const pt::ptree* tree_;
  std::string name_;
};

/// Strips ';' and '#' comments, which the INI reader would keep inside values.
std::string strip_comments(std::istream& in) {
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const auto pos = line.find_first_of(";#");
    if (pos != std::string::npos) line.erase(pos);
    out << line << '\n';
  }
  return out.str();
}

std::vector<double> parse_betas(const std::string& text, double dt) {
  std::vector<double> betas;
  auto to_step = [&](const std::string& s) {
    const double v = number<double>("schedule", "beta", s);
    try {
      return steps_for(v, dt);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("[schedule] beta: ") + e.what());
    }
  };
  if (const auto colon = text.find(':'); colon != std::string::npos) {
    const int first = to_step(text.substr(0, colon));
    const int last = to_step(text.substr(colon + 1));
    if (last < first) throw ConfigError("[schedule] beta: empty range '" + text + "'");
    for (int k = first; k <= last; ++k) betas.push_back(k * dt);
  } else {
    std::vector<std::string> parts;
    boost::split(parts, text, boost::is_any_of(","));
    for (const auto& p : parts)
      if (!boost::trim_copy(p).empty()) betas.push_back(to_step(p) * dt);
  }
  if (betas.empty()) throw ConfigError("[schedule] beta: no values");
  return betas;
}

}  // namespace

std::vector<BilayerTerm> RunConfig::terms() const {
  return model == ModelKind::ashkin_teller ? ashkin_teller_terms(ashkin_teller) : generic_terms;
}

std::uint64_t RunConfig::init_index() const {
  std::uint64_t index = 0;
  for (std::size_t k = 0; k < init.size(); ++k)
    if (init[k] == '1') index |= std::uint64_t{1} << k;
  return index;
}

RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  {
    std::istringstream clean(strip_comments(in));
    try {
      pt::read_ini(clean, tree);
    } catch (const pt::ini_parser_error& e) {
      throw ConfigError(std::string("malformed configuration: ") + e.message() + " (line " +
                        std::to_string(e.line()) + ")");
    }
  }

  RunConfig cfg;
  for (const auto& [name, child] : tree) {
    if (child.empty()) {
      if (name != "schema_version") throw ConfigError("unknown top-level key '" + name + "'");
      continue;
    }
    auto allowed = kAllowedKeys.find(name);
    if (allowed == kAllowedKeys.end()) throw ConfigError("unknown section [" + name + "]");
    if (name == "observables") continue;
    for (const auto& [key, value] : child)
      if (!allowed->second.count(key)) throw ConfigError("unknown key '" + key + "' in [" + name + "]");
  }
  cfg.schema_version = Section(&tree, "").get<int>("schema_version", -1);
  if (cfg.schema_version != kSchemaVersion)
    throw ConfigError("schema_version must be " + std::to_string(kSchemaVersion));

  auto section = [&](const std::string& name) {
    auto it = tree.find(name);
    return Section(it == tree.not_found() ? nullptr : &it->second, name);
  };

  const Section model = section("model");
  cfg.model = model.choice<ModelKind>("kind", ModelKind::ashkin_teller,
                                      {{"ashkin_teller", ModelKind::ashkin_teller}, {"generic", ModelKind::generic}});
  if (cfg.model == ModelKind::ashkin_teller) {
    auto& at = cfg.ashkin_teller;
    at.L = model.get<int>("L", at.L);
    at.J = model.get<double>("J", at.J);
    at.h = model.get<double>("h", at.h);
    const double lambda = model.get<double>("lambda", at.lambda_J);
    at.lambda_J = model.get<double>("lambda_J", lambda);
    at.lambda_h = model.get<double>("lambda_h", model.has("lambda") ? lambda : at.lambda_h);
    at.boundary = model.choice<Boundary>("boundary", Boundary::open,
                                         {{"open", Boundary::open}, {"periodic", Boundary::periodic}});
    if (at.L < 1 || at.L > 16) throw ConfigError("[model] L must be in 1..16");
    cfg.n_sites = at.L;
  } else {
    if (!model.has("terms_file")) throw ConfigError("[model] generic models need terms_file");
    cfg.terms_file = base_dir / model.text("terms_file", "");
    std::ifstream file(cfg.terms_file);
    if (!file) throw ConfigError("cannot open terms file " + cfg.terms_file.string());
    cfg.generic_terms = parse_bilayer_terms(file, cfg.n_sites);
    if (cfg.n_sites < 1) throw ConfigError("terms file " + cfg.terms_file.string() + " names no sites");
  }
  cfg.init = model.text("init", std::string(static_cast<std::size_t>(cfg.n_sites), '0'));
  if (cfg.init.size() != static_cast<std::size_t>(cfg.n_sites) ||
      cfg.init.find_first_not_of("01") != std::string::npos)
    throw ConfigError("[model] init must be a bitstring of length " + std::to_string(cfg.n_sites));

  const Section schedule = section("schedule");
  cfg.dt = schedule.get<double>("dt", cfg.dt);
  if (!(cfg.dt > 0)) throw ConfigError("[schedule] dt must be positive");
  cfg.betas = parse_betas(schedule.text("beta", "0"), cfg.dt);

  const Section sampler = section("sampler");
  cfg.mode = sampler.choice<JumpMode>("mode", JumpMode::weak, {{"weak", JumpMode::weak}, {"strong", JumpMode::strong}});
  cfg.heff = sampler.choice<HeffMethod>("heff", HeffMethod::term_split,
                                        {{"term_split", HeffMethod::term_split}, {"dense", HeffMethod::dense}});
  auto& mc = cfg.mc;
  mc.n_chains = sampler.get<int>("n_chains", mc.n_chains);
  mc.n_updates = sampler.get<long>("n_updates", mc.n_updates);
  mc.burn_in = sampler.get<long>("burn_in", mc.burn_in);
  mc.thinning = sampler.get<long>("thinning", mc.thinning);
  mc.n_batches = sampler.get<int>("n_batches", mc.n_batches);
  mc.seed = sampler.get<std::uint64_t>("seed", mc.seed);
  mc.threads = sampler.get<int>("threads", mc.threads);
  if (mc.n_chains < 1) throw ConfigError("[sampler] n_chains must be at least 1");
  if (mc.n_batches < 2) throw ConfigError("[sampler] n_batches must be at least 2");
  if (mc.n_updates < 0) throw ConfigError("[sampler] n_updates must be non-negative");
  if (mc.threads < 1) throw ConfigError("[sampler] threads must be at least 1");

  const Section kappa = section("kappa");
  cfg.kappa.kind = kappa.choice<KappaPolicy::Kind>("policy", KappaPolicy::Kind::one_norm,
                                                   {{"one_norm", KappaPolicy::Kind::one_norm},
                                                    {"tight", KappaPolicy::Kind::tight},
                                                    {"explicit", KappaPolicy::Kind::explicit_values}});
  cfg.kappa.offset = kappa.get<double>("offset", 0.0);
  if (kappa.has("values")) cfg.kappa.values = kappa.list("values");

  cfg.oracle = section("exact").choice<OracleMode>("oracle", OracleMode::mirror,
                                                  {{"mirror", OracleMode::mirror}, {"generator", OracleMode::generator}});

  if (auto it = tree.find("observables"); it != tree.not_found()) {
    for (const auto& [name, value] : it->second) {
      const std::string text = boost::trim_copy(value.data());
      const auto space = text.find_first_of(" \t");
      const std::string kind = text.substr(0, space);
      if ((kind != "intralayer" && kind != "interlayer") || space == std::string::npos)
        throw ConfigError("[observables] " + name + ": expected 'intralayer <pauli>' or 'interlayer <pauli>'");
      ObservableSpec obs{name, kind == "interlayer", boost::trim_copy(text.substr(space)), {}};
      try {
        obs.op = OperatorSum::single(1.0, parse_pauli(obs.text, cfg.n_sites));
      } catch (const std::exception& e) {
        throw ConfigError("[observables] " + name + ": " + e.what());
      }
      cfg.observables.push_back(std::move(obs));
    }
  }
  if (cfg.observables.empty()) throw ConfigError("[observables] lists nothing to measure");

  if (auto dir = section("output").text("dir", ""); !dir.empty()) cfg.output_dir = base_dir / dir;
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration " + path.string());
  return parse_config(in, path.parent_path());
}

const char* to_string(JumpMode mode) { return mode == JumpMode::weak ? "weak" : "strong"; }
const char* to_string(HeffMethod method) { return method == HeffMethod::dense ? "dense" : "term_split"; }
const char* to_string(OracleMode mode) { return mode == OracleMode::mirror ? "mirror" : "generator"; }

const char* to_string(KappaPolicy::Kind kind) {
  switch (kind) {
    case KappaPolicy::Kind::one_norm: return "one_norm";
    case KappaPolicy::Kind::tight: return "tight";
    case KappaPolicy::Kind::explicit_values: return "explicit";
  }
  return "?";
}

}  // namespace bqt
