#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "mlcdf/cdf.hpp"
#include "mlcdf/estimators.hpp"

namespace mlcdf::report {

/// Per-run report: levels reached, N_l trajectories, bandwidths, per-node
/// variances, cost ledger and warning flags. No wall-clock fields, so the
/// output is reproducible under the deterministic work model.
nlohmann::json multilevel_json(const estimators::MultilevelResult& result);
nlohmann::json monte_carlo_json(const estimators::MonteCarloResult& result);

/// q,raw,processed[,reference,abs_error] at the grid nodes.
std::string cdf_csv(const cdf::CdfEstimate& estimate, const cdf::CdfEstimate* reference = nullptr);

/// q,value at the grid nodes.
std::string reference_csv(const cdf::ReferenceCdf& reference);

/// Writes `text` with LF line endings, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace mlcdf::report
