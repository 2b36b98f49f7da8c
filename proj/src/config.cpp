#include "mlcdf/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace mlcdf::config {

namespace pt = boost::property_tree;

std::string to_string(Method method) {
  switch (method) {
    case Method::mc: return "mc";
    case Method::mlmc: return "mlmc";
    case Method::mlmc_giles: return "mlmc_giles";
    case Method::mlmc_kde: return "mlmc_kde";
    case Method::smlmc: return "smlmc";
    case Method::smlmc_kde: return "smlmc_kde";
  }
  return "unknown";
}

Method method_from_string(const std::string& name) {
  for (Method m : {Method::mc, Method::mlmc, Method::mlmc_giles, Method::mlmc_kde, Method::smlmc,
                   Method::smlmc_kde}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown method '" + name + "'");
}

ExperimentConfig preset(models::ModelId id) {
  ExperimentConfig c;
  if (id == models::ModelId::burgers) {
    c.model = models::ModelSpec::burgers();
    c.hierarchy.m0 = 32;
    c.input = {1.5, 1.0, 0.0, 2.0};
    c.grid = {15.0, 65.0, 100};
  }
  return c;
}

ExperimentConfig preset(const std::string& name) {
  try {
    return preset(models::model_id_from_string(name));
  } catch (const std::exception&) {
    throw ConfigError("unknown preset '" + name + "'");
  }
}

void ExperimentConfig::validate() const {
  if (epsilons.empty()) throw ConfigError("experiment.epsilons: empty");
  for (double e : epsilons) {
    if (!(e > 0.0 && e < 1.0)) throw ConfigError(fmt::format("experiment.epsilons: {} not in (0, 1)", e));
  }
  if (methods.empty()) throw ConfigError("experiment.methods: empty");
  const auto has = [&](Method m) { return std::find(methods.begin(), methods.end(), m) != methods.end(); };
  if (has(Method::mc) && !has(Method::mlmc)) {
    throw ConfigError("experiment.methods: mc reuses the mlmc run and needs mlmc");
  }
  if ((has(Method::smlmc) || has(Method::smlmc_kde)) && strata.empty()) {
    throw ConfigError("experiment.strata: empty while stratified methods are selected");
  }
  for (std::size_t r : strata) {
    if (r < 1) throw ConfigError("experiment.strata: values must be >= 1");
  }
  if (runs < 1) throw ConfigError("experiment.runs: must be >= 1");
  if (hierarchy.m0 < 1) throw ConfigError("model.m0: must be >= 1");
  if (hierarchy.factor < 2) throw ConfigError("model.factor: must be >= 2");
  if (hierarchy.l_star < 0 || hierarchy.l_star > 16) throw ConfigError("model.l_star: must be in [0, 16]");
  if (!(model.final_time > 0.0)) throw ConfigError("model.final_time: must be positive");
  if (!(model.cfl > 0.0 && model.cfl <= 1.0)) throw ConfigError("model.cfl: must be in (0, 1]");
  if (!(input.sigma > 0.0)) throw ConfigError("input.sigma: must be positive");
  if (!(input.upper > input.lower) || input.lower < 0.0) {
    throw ConfigError("input: need 0 <= lower < upper");
  }
  if (model.id == models::ModelId::diffusion && !(input.lower > 0.0)) {
    throw ConfigError("input.lower: the diffusion coefficient must be positive");
  }
  if (!(grid.b > grid.a) || grid.s_count < 3) throw ConfigError("grid: need a < b and s >= 3");
  for (std::size_t w : {mlmc_warmup, mlmc_smooth_warmup, smlmc_warmup, smlmc_smooth_warmup}) {
    if (w < 2) throw ConfigError("warmup counts must be >= 2");
  }
  if (min_stratum_warmup < 2) throw ConfigError("smlmc.min_stratum_warmup: must be >= 2");
  if (giles_degree < 0 || giles_degree > 8) throw ConfigError("mlmc_smooth.giles_degree: must be in [0, 8]");
  if (reference.mesh_cells < 4) throw ConfigError("reference.mesh_cells: must be >= 4");
  if (reference.w_intervals < 2 || reference.w_intervals % 2 != 0) {
    throw ConfigError("reference.w_intervals: must be even and >= 2");
  }
}

namespace {

template <class T>
T convert(const std::string& key, const std::string& raw) {
  std::istringstream in(raw);
  T value{};
  in >> value;
  if (in.fail() || !(in >> std::ws).eof()) throw ConfigError(fmt::format("{}: cannot parse '{}'", key, raw));
  return value;
}

std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(raw);
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

bool convert_bool(const std::string& key, const std::string& raw) {
  if (raw == "true" || raw == "1" || raw == "yes") return true;
  if (raw == "false" || raw == "0" || raw == "no") return false;
  throw ConfigError(fmt::format("{}: expected true or false, got '{}'", key, raw));
}

using Setter = void (*)(ExperimentConfig&, const std::string&, const std::string&);

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"experiment.epsilons",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.epsilons.clear();
         for (const auto& item : split_list(v)) c.epsilons.push_back(convert<double>(k, item));
       }},
      {"experiment.strata",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.strata.clear();
         for (const auto& item : split_list(v)) c.strata.push_back(convert<std::size_t>(k, item));
       }},
      {"experiment.methods",
       [](ExperimentConfig& c, const std::string&, const std::string& v) {
         c.methods.clear();
         for (const auto& item : split_list(v)) c.methods.push_back(method_from_string(item));
       }},
      {"experiment.runs",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.runs = convert<std::size_t>(k, v); }},
      {"experiment.seed",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.seed = convert<std::uint64_t>(k, v); }},
      {"experiment.work_model",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         try {
           c.work_model = cost::work_model_from_string(v);
         } catch (const std::exception&) {
           throw ConfigError(fmt::format("{}: unknown work model '{}'", k, v));
         }
       }},
      {"experiment.threads",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.threads = convert<unsigned>(k, v); }},
      {"experiment.compare_reference",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.compare_reference = convert_bool(k, v); }},
      {"model.m0",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.hierarchy.m0 = convert<int>(k, v); }},
      {"model.factor",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.hierarchy.factor = convert<int>(k, v); }},
      {"model.l_star",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.hierarchy.l_star = convert<int>(k, v); }},
      {"model.final_time",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.model.final_time = convert<double>(k, v); }},
      {"model.cfl",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.model.cfl = convert<double>(k, v); }},
      {"input.mu",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.input.mu = convert<double>(k, v); }},
      {"input.sigma",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.input.sigma = convert<double>(k, v); }},
      {"input.lower",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.input.lower = convert<double>(k, v); }},
      {"input.upper",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.input.upper = convert<double>(k, v); }},
      {"grid.a", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.grid.a = convert<double>(k, v); }},
      {"grid.b", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.grid.b = convert<double>(k, v); }},
      {"grid.s",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.grid.s_count = convert<int>(k, v); }},
      {"mlmc.warmup",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.mlmc_warmup = convert<std::size_t>(k, v); }},
      {"mlmc_smooth.warmup",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.mlmc_smooth_warmup = convert<std::size_t>(k, v);
       }},
      {"mlmc_smooth.giles_degree",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.giles_degree = convert<int>(k, v); }},
      {"smlmc.warmup",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.smlmc_warmup = convert<std::size_t>(k, v); }},
      {"smlmc.min_stratum_warmup",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.min_stratum_warmup = convert<std::size_t>(k, v);
       }},
      {"smlmc_smooth.warmup",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.smlmc_smooth_warmup = convert<std::size_t>(k, v);
       }},
      {"reference.mesh_cells",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.reference.mesh_cells = convert<int>(k, v); }},
      {"reference.w_intervals",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.reference.w_intervals = convert<int>(k, v); }},
  };
  return table;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

}  // namespace

ExperimentConfig parse(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("line {}: {}", e.line(), e.message()));
  }

  std::string model = "diffusion";
  if (auto exp = tree.get_child_optional("experiment")) {
    if (auto name = exp->get_optional<std::string>("model")) model = *name;
  }
  ExperimentConfig c = preset(model);

  static const std::set<std::string> known{"experiment", "model", "input", "grid", "mlmc",
                                           "mlmc_smooth", "smlmc", "smlmc_smooth", "reference"};
  const auto& table = setters();
  for (const auto& [section, keys] : tree) {
    if (keys.empty() && !keys.data().empty()) {
      throw ConfigError(fmt::format("key '{}' outside any section", section));
    }
    if (!known.contains(section)) throw ConfigError(fmt::format("unknown section '{}'", section));
    for (const auto& [key, value] : keys) {
      const std::string full = section + "." + key;
      if (full == "experiment.model") continue;
      const auto it = table.find(full);
      if (it == table.end()) throw ConfigError(fmt::format("unknown key '{}'", full));
      it->second(c, full, value.data());
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

std::string serialize(const ExperimentConfig& c) {
  std::vector<std::string> eps, strata, methods;
  for (double e : c.epsilons) eps.push_back(fmt::format("{}", e));
  for (std::size_t r : c.strata) strata.push_back(std::to_string(r));
  for (Method m : c.methods) methods.push_back(to_string(m));
  std::string out;
  out += "[experiment]\n";
  out += fmt::format("model = {}\n", models::to_string(c.model.id));
  out += fmt::format("epsilons = {}\n", join(eps));
  out += fmt::format("strata = {}\n", join(strata));
  out += fmt::format("methods = {}\n", join(methods));
  out += fmt::format("runs = {}\nseed = {}\n", c.runs, c.seed);
  out += fmt::format("work_model = {}\nthreads = {}\n", cost::to_string(c.work_model), c.threads);
  out += fmt::format("compare_reference = {}\n\n", c.compare_reference);
  out += fmt::format("[model]\nm0 = {}\nfactor = {}\nl_star = {}\nfinal_time = {}\ncfl = {}\n\n",
                     c.hierarchy.m0, c.hierarchy.factor, c.hierarchy.l_star, c.model.final_time, c.model.cfl);
  out += fmt::format("[input]\nmu = {}\nsigma = {}\nlower = {}\nupper = {}\n\n", c.input.mu, c.input.sigma,
                     c.input.lower, c.input.upper);
  out += fmt::format("[grid]\na = {}\nb = {}\ns = {}\n\n", c.grid.a, c.grid.b, c.grid.s_count);
  out += fmt::format("[mlmc]\nwarmup = {}\n\n", c.mlmc_warmup);
  out += fmt::format("[mlmc_smooth]\nwarmup = {}\ngiles_degree = {}\n\n", c.mlmc_smooth_warmup, c.giles_degree);
  out += fmt::format("[smlmc]\nwarmup = {}\nmin_stratum_warmup = {}\n\n", c.smlmc_warmup, c.min_stratum_warmup);
  out += fmt::format("[smlmc_smooth]\nwarmup = {}\n\n", c.smlmc_smooth_warmup);
  out += fmt::format("[reference]\nmesh_cells = {}\nw_intervals = {}\n", c.reference.mesh_cells,
                     c.reference.w_intervals);
  return out;
}

}  // namespace mlcdf::config
