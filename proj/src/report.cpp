#include "mlcdf/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace mlcdf::report {

namespace {

nlohmann::json level_json(const estimators::LevelState& level, bool stratified) {
  nlohmann::json out;
  out["level"] = level.level;
  out["samples"] = level.n_current();
  out["delta"] = level.delta;
  out["delta_per_node"] = level.delta_per_node;
  out["average_work"] = level.average_work();
  out["max_variance_smoothed"] = level.max_variance_smoothed();
  out["max_variance_indicator"] = level.max_variance_indicator();
  out["max_variance_fine_indicator"] = level.max_variance_fine_indicator();
  const std::size_t nodes = level.strata.empty() ? 0 : level.strata.front().smoothed.nodes();
  std::vector<double> mean(nodes), var_smoothed(nodes), var_indicator(nodes);
  for (std::size_t n = 0; n < nodes; ++n) {
    mean[n] = level.mean_smoothed(n);
    var_smoothed[n] = level.estimator_variance_smoothed(n);
    var_indicator[n] = level.estimator_variance_indicator(n);
  }
  out["mean_smoothed"] = mean;
  out["estimator_variance_smoothed"] = var_smoothed;
  out["estimator_variance_indicator"] = var_indicator;
  if (stratified) {
    nlohmann::json strata = nlohmann::json::array();
    for (const auto& s : level.strata) {
      strata.push_back({{"stratum", s.stratum},
                        {"probability", s.probability},
                        {"samples", s.count()},
                        {"average_work", s.average_work()},
                        {"max_variance_smoothed", s.smoothed.max_variance()}});
    }
    out["strata"] = std::move(strata);
  }
  return out;
}

nlohmann::json estimate_json(const cdf::CdfEstimate& estimate) {
  return {{"nodes", estimate.grid().nodes()},
          {"raw", estimate.raw()},
          {"processed", estimate.values()},
          {"clipping_adjustment", estimate.clipping_adjustment()}};
}

}  // namespace

nlohmann::json multilevel_json(const estimators::MultilevelResult& result) {
  nlohmann::json out;
  const bool stratified = !result.levels.empty() && result.levels.front().strata.size() > 1;
  out["method"] = result.method;
  out["epsilon"] = result.estimate.metadata().epsilon;
  out["seed"] = result.estimate.metadata().seed;
  out["l_max"] = result.l_max;
  out["converged"] = result.converged;
  nlohmann::json warnings = nlohmann::json::array();
  if (!result.converged) warnings.push_back("l_star reached before the bias test passed");
  out["warnings"] = std::move(warnings);
  out["budget_factor"] = result.factor;
  out["sampling_error_bound"] = result.sampling_error_bound();
  out["max_node_sampling_variance"] = result.max_node_sampling_variance();
  out["n_history"] = result.n_history;
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& level : result.levels) levels.push_back(level_json(level, stratified));
  out["levels"] = std::move(levels);
  out["cost"] = result.ledger.total();
  out["ledger"] = result.ledger.to_json();
  out["estimate"] = estimate_json(result.estimate);
  return out;
}

nlohmann::json monte_carlo_json(const estimators::MonteCarloResult& result) {
  nlohmann::json out;
  out["method"] = "mc";
  out["epsilon"] = result.estimate.metadata().epsilon;
  out["seed"] = result.estimate.metadata().seed;
  out["level"] = result.level;
  out["samples"] = result.n_mc;
  out["reused"] = result.reused;
  out["max_variance"] = result.max_variance;
  out["warnings"] = nlohmann::json::array();
  out["cost"] = result.ledger.total();
  out["ledger"] = result.ledger.to_json();
  out["estimate"] = estimate_json(result.estimate);
  return out;
}

std::string cdf_csv(const cdf::CdfEstimate& estimate, const cdf::CdfEstimate* reference) {
  std::string out = reference ? "q,raw,processed,reference,abs_error\n" : "q,raw,processed\n";
  const auto nodes = estimate.grid().nodes();
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    out += fmt::format("{:.10g},{:.17g},{:.17g}", nodes[n], estimate.raw()[n], estimate.values()[n]);
    if (reference) {
      const double ref = reference->values()[n];
      out += fmt::format(",{:.17g},{:.17g}", ref, std::abs(estimate.raw()[n] - ref));
    }
    out += "\n";
  }
  return out;
}

std::string reference_csv(const cdf::ReferenceCdf& reference) {
  std::string out = "q,value\n";
  const auto nodes = reference.estimate.grid().nodes();
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    out += fmt::format("{:.10g},{:.17g}\n", nodes[n], reference.estimate.raw()[n]);
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace mlcdf::report
