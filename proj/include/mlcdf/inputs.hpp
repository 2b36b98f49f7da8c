#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mlcdf/rng.hpp"

namespace mlcdf::inputs {

/// Lognormal law of the random input, truncated to [w_lo, w_hi] and
/// renormalised. mu and sigma are the location and scale of ln W.
///
/// A lower bound of zero is allowed; the support is then (0, w_hi].
class TruncatedLognormal {
 public:
  TruncatedLognormal(double mu, double sigma, double w_lo, double w_hi);

  double mu() const { return mu_; }
  double sigma() const { return sigma_; }
  double w_lo() const { return w_lo_; }
  double w_hi() const { return w_hi_; }

  double pdf(double w) const;
  double cdf(double w) const;
  /// Throws std::domain_error for u outside [0,1].
  double inverse_cdf(double u) const;
  double sample(Substream& stream) const { return inverse_cdf(stream.uniform()); }

 private:
  double erf_of(double w) const;
  double bisect(double u) const;

  double mu_;
  double sigma_;
  double w_lo_;
  double w_hi_;
  double erf_lo_;
  double erf_hi_;
};

/// Partition of [w_lo, w_hi] into r cells (b_{i-1}, b_i] with their
/// probabilities. Strata are indexed from zero.
struct Stratification {
  std::vector<double> boundaries;
  std::vector<double> probs;

  std::size_t size() const { return probs.size(); }
};

Stratification build_equal_width_strata(const TruncatedLognormal& dist, int r);

/// Draws from the law of W conditioned on stratum i.
double sample_stratum(const TruncatedLognormal& dist, const Stratification& strat,
                      std::size_t i, Substream& stream);

struct StratumStats {
  double mean = 0.0;
  double var = 0.0;
  std::size_t count = 0;
};

/// Mean and biased (1/n) variance of a sample; var is 0 for n <= 1.
StratumStats stratum_stats(std::span<const double> values);

/// Splits N samples over strata in proportion to p_i. Uses floor plus
/// largest remainder, then lifts empty strata to one sample by taking from
/// the currently largest stratum. Throws std::domain_error if N < r.
std::vector<std::size_t> proportional_allocation(std::size_t total, const Stratification& strat);

/// Allocation proportional to sigma_i * p_i with the same rounding rule.
/// Falls back to proportional allocation when every sigma is zero.
std::vector<std::size_t> optimal_allocation(std::size_t total, const Stratification& strat,
                                            std::span<const double> sigmas);

/// Rounds N * weights_i / sum(weights) to integers with the rule above.
std::vector<std::size_t> allocate(std::size_t total, std::span<const double> weights);

/// Variance of the proportional-allocation stratified mean with N samples.
double proportional_stratified_variance(std::span<const double> probs,
                                        std::span<const StratumStats> stats, std::size_t total);

/// Variance of the plain MC mean with N samples, with V[Q] rebuilt from the
/// stratum statistics by the law of total variance.
double plain_mc_variance(std::span<const double> probs, std::span<const StratumStats> stats,
                         std::size_t total);

}  // namespace mlcdf::inputs
