#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mlcdf/cdf.hpp"
#include "mlcdf/config.hpp"
#include "mlcdf/cost.hpp"
#include "mlcdf/estimators.hpp"

namespace mlcdf::experiment {

/// One method execution inside the run matrix.
struct PlannedRun {
  double epsilon = 0.0;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  config::Method method = config::Method::mlmc;
  std::optional<std::size_t> strata;

  /// Column label: mc, mlmc, mlmc_giles, mlmc_kde, smlmc_r8, smlmc_kde_r8, ...
  std::string label() const;
};

/// Per tolerance and run: mlmc, mc, mlmc_giles, mlmc_kde, then smlmc and
/// smlmc_kde for every configured r, restricted to the selected methods.
/// Run k uses seed + k.
std::vector<PlannedRun> plan(const config::ExperimentConfig& config);

struct RunRecord {
  PlannedRun planned;
  bool failed = false;
  std::string error;
  bool converged = true;
  int l_max = 0;
  double cost = 0.0;
  std::optional<double> sup_error;
};

struct Summary {
  std::vector<RunRecord> records;
  std::vector<cost::CostCell> cells;
  std::size_t failures = 0;
  std::size_t warnings = 0;
};

struct Options {
  std::filesystem::path out = "out";
  /// directory of the reference cache, `out/reference` when empty
  std::filesystem::path reference_cache;
  bool plot_data = false;
  /// per-run JSON and CDF CSV files
  bool write_runs = true;
};

/// Engine settings of one planned run (warmups and smoother per method).
estimators::RunConfig run_config(const config::ExperimentConfig& config, const PlannedRun& planned);

/// FNV-1a over everything the reference CDF depends on.
std::uint64_t reference_checksum(const config::ExperimentConfig& config);

/// Loads the reference from `cache_dir` when the checksum matches,
/// otherwise computes and stores it. `hit` reports which happened.
cdf::ReferenceCdf cached_reference(const config::ExperimentConfig& config,
                                   const std::filesystem::path& cache_dir, bool* hit = nullptr);

/// Executes the run matrix and writes runs/, tables/cost.csv,
/// tables/cost.json, tables/accuracy.csv and (optionally)
/// tables/plot_data.csv below options.out.
Summary run(const config::ExperimentConfig& config, const Options& options, std::ostream* log = nullptr);

/// Mean cost per (epsilon, label) in plan order.
std::vector<cost::CostCell> mean_costs(const std::vector<RunRecord>& records);

}  // namespace mlcdf::experiment
