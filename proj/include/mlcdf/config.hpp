#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlcdf/cdf.hpp"
#include "mlcdf/cost.hpp"
#include "mlcdf/inputs.hpp"
#include "mlcdf/models.hpp"

namespace mlcdf::config {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Method { mc, mlmc, mlmc_giles, mlmc_kde, smlmc, smlmc_kde };

std::string to_string(Method method);
Method method_from_string(const std::string& name);

struct InputParams {
  double mu = 3.0;
  double sigma = 3.0;
  double lower = 1.0;
  double upper = 4.0;

  inputs::TruncatedLognormal distribution() const { return {mu, sigma, lower, upper}; }
};

struct ExperimentConfig {
  models::ModelSpec model = models::ModelSpec::diffusion();
  models::MeshHierarchy hierarchy;
  InputParams input;
  cdf::NodeGrid grid{14.0, 28.0, 28};

  std::vector<double> epsilons{0.01, 0.008, 0.005};
  std::vector<std::size_t> strata{8, 16};
  std::vector<Method> methods{Method::mlmc,  Method::mc,    Method::mlmc_giles,
                              Method::mlmc_kde, Method::smlmc, Method::smlmc_kde};
  std::size_t runs = 50;
  std::uint64_t seed = 1;
  cost::WorkModel work_model = cost::WorkModel::deterministic;
  unsigned threads = 0;
  /// compare every estimate with the (cached) reference CDF
  bool compare_reference = true;

  std::size_t mlmc_warmup = 200;
  std::size_t mlmc_smooth_warmup = 50;
  int giles_degree = 3;
  std::size_t smlmc_warmup = 100;
  std::size_t smlmc_smooth_warmup = 25;
  std::size_t min_stratum_warmup = 2;

  cdf::ReferenceOptions reference;

  /// Throws ConfigError on the first inconsistent value.
  void validate() const;
};

ExperimentConfig preset(models::ModelId id);
ExperimentConfig preset(const std::string& name);

/// INI-style text: sections [experiment] [model] [input] [grid] [mlmc]
/// [mlmc_smooth] [smlmc] [smlmc_smooth] [reference]. `model` in
/// [experiment] selects the preset the other keys override. Unknown
/// sections or keys are rejected.
ExperimentConfig parse(const std::string& text);
ExperimentConfig load(const std::filesystem::path& path);

/// Canonical INI text; parse(serialize(c)) reproduces c.
std::string serialize(const ExperimentConfig& config);

}  // namespace mlcdf::config
