#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mlcdf/cdf.hpp"
#include "mlcdf/cost.hpp"
#include "mlcdf/inputs.hpp"
#include "mlcdf/models.hpp"
#include "mlcdf/rng.hpp"
#include "mlcdf/smoothing.hpp"

namespace mlcdf::estimators {

struct RunConfig {
  double epsilon = 0.01;
  /// Highest level the run may add (L*_max).
  int l_star = 7;
  /// N_l^0, the warmup count at every new level. For stratified runs it is
  /// split over the strata proportionally, with at least
  /// `min_stratum_warmup` per stratum.
  std::size_t warmup = 200;
  std::size_t min_stratum_warmup = 2;
  smoothing::SmootherKind smoother = smoothing::SmootherKind::none;
  int giles_degree = 3;
  std::uint64_t seed = 1;
  std::uint64_t run = 0;
  cost::WorkModel work_model = cost::WorkModel::deterministic;
  unsigned threads = 0;
};

/// Budget constant c in N_l = ceil(c eps^-2 ...): 2 without smoothing,
/// 4 with smoothing (half the MSE budget goes to the smoothing bias).
double budget_factor(smoothing::SmootherKind kind);

/// Running per-node mean and biased (1/N) variance, Welford updates in
/// sample order.
class NodeMoments {
 public:
  explicit NodeMoments(std::size_t nodes = 0) : mean_(nodes, 0.0), m2_(nodes, 0.0) {}

  void add(std::span<const double> values);

  std::size_t count() const { return count_; }
  std::size_t nodes() const { return mean_.size(); }
  double mean(std::size_t n) const { return mean_[n]; }
  double variance(std::size_t n) const {
    return count_ == 0 ? 0.0 : m2_[n] / static_cast<double>(count_);
  }
  double max_variance() const;

 private:
  std::size_t count_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

/// Samples of one stratum at one level (the whole level when unstratified).
struct StratumSamples {
  StratumSamples(std::size_t index, double probability, const StreamKey& key, std::size_t nodes)
      : stratum(index), probability(probability), stream(key), smoothed(nodes), indicator(nodes),
        fine_indicator(nodes) {}

  std::size_t stratum;
  double probability;
  Substream stream;
  std::vector<models::LevelPair> pairs;
  /// g_n(Y_l), I_n(Y_l) and I_n(Q_{M_l}) per node
  NodeMoments smoothed;
  NodeMoments indicator;
  NodeMoments fine_indicator;
  double work_total = 0.0;

  std::size_t count() const { return pairs.size(); }
  double average_work() const;
};

struct LevelState {
  int level = 0;
  double delta = 0.0;
  std::vector<double> delta_per_node;
  std::vector<StratumSamples> strata;

  std::size_t n_current() const;
  /// sum_i p_i * mean_i, i.e. g^sMC_n(Y_l) (plain mean when unstratified)
  double mean_smoothed(std::size_t node) const;
  double mean_indicator(std::size_t node) const;
  double max_abs_mean_indicator() const;
  /// sum_i p_i^2 V_i / n_i, the variance of the level estimator
  double estimator_variance_smoothed(std::size_t node) const;
  double estimator_variance_indicator(std::size_t node) const;
  /// Per-sample variances; only meaningful for unstratified levels.
  /// max_n variance of the per-sample term over the whole input law (strata pooled)
  double max_variance_smoothed() const;
  double max_variance_indicator() const;
  double max_variance_fine_indicator() const;
  double average_work() const;
};

/// N_l = ceil(max_n c eps^-2 sqrt(V_{n,l}/w_l) sum_k sqrt(V_{n,k} w_k)).
/// `variance[l][n]`; throws std::domain_error for non-positive work.
std::vector<std::size_t> required_samples_mlmc(const std::vector<std::vector<double>>& variance,
                                               std::span<const double> work, double epsilon,
                                               double factor);

/// n_{i,l} = ceil(max_n c eps^-2 sqrt(V_{n,l,i} p_i^2 / w_{i,l})
///                 sum_k sum_i' sqrt(V_{n,k,i'} p_i'^2 w_{i',k})).
/// `variance[l][i][n]`, `work[l][i]`; result is [l][i].
std::vector<std::vector<std::size_t>> required_samples_smlmc(
    const std::vector<std::vector<std::vector<double>>>& variance, std::span<const double> probs,
    const std::vector<std::vector<double>>& work, double epsilon, double factor);

/// true = stop adding levels.
bool stopping_check(int level, std::span<const double> mean_indicator_difference, double epsilon,
                    int l_star);

/// N_MC = max(1, ceil(2 eps^-2 max_n V[I_n(Q)])).
std::size_t monte_carlo_samples(double max_variance, double epsilon);

struct MultilevelResult {
  std::string method;
  cdf::CdfEstimate estimate;
  std::vector<LevelState> levels;
  cost::CostLedger ledger;
  int l_max = 0;
  /// false when the run hit l_star before the bias test passed
  bool converged = true;
  double factor = 2.0;
  /// N_l of every level after each completed level iteration
  std::vector<std::vector<std::size_t>> n_history;

  /// sum_l max_n V[level-l estimator]
  double sampling_error_bound() const;
  /// max_n sum_l V[level-l estimator], the quantity the sample-size
  /// formula keeps below eps^2 / factor
  double max_node_sampling_variance() const;
};

struct MonteCarloResult {
  cdf::CdfEstimate estimate;
  cost::CostLedger ledger;
  int level = 0;
  std::size_t n_mc = 0;
  std::size_t reused = 0;
  double max_variance = 0.0;
};

/// Multilevel Monte Carlo for the CDF at the grid nodes, with optional
/// indicator smoothing (config.smoother).
MultilevelResult run_mlmc(const models::ModelSpec& model, const models::MeshHierarchy& hierarchy,
                          const inputs::TruncatedLognormal& dist, const cdf::NodeGrid& grid,
                          const RunConfig& config);

/// Stratified MLMC: stratified sampling with per-stratum sample counts
/// inside every level.
MultilevelResult run_smlmc(const models::ModelSpec& model, const models::MeshHierarchy& hierarchy,
                           const inputs::TruncatedLognormal& dist,
                           const inputs::Stratification& strat, const cdf::NodeGrid& grid,
                           const RunConfig& config);

/// Standard MC on the finest mesh of an unstratified, unsmoothed MLMC run,
/// reusing that level's fine samples. Cost is charged for all N_MC samples
/// at the single-solve work of that mesh.
MonteCarloResult run_mc(const models::ModelSpec& model, const models::MeshHierarchy& hierarchy,
                        const inputs::TruncatedLognormal& dist, const cdf::NodeGrid& grid,
                        const RunConfig& config, const MultilevelResult& mlmc);

std::string method_name(smoothing::SmootherKind kind, std::optional<std::size_t> strata);

}  // namespace mlcdf::estimators
