#include "mlcdf/inputs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <boost/math/special_functions/erf.hpp>

namespace mlcdf::inputs {

TruncatedLognormal::TruncatedLognormal(double mu, double sigma, double w_lo, double w_hi)
    : mu_(mu), sigma_(sigma), w_lo_(w_lo), w_hi_(w_hi) {
  if (!(sigma > 0.0) || !std::isfinite(mu)) {
    throw std::domain_error("truncated lognormal: sigma must be positive and mu finite");
  }
  if (!(w_lo >= 0.0) || !(w_hi > w_lo) || !std::isfinite(w_hi)) {
    throw std::domain_error("truncated lognormal: need 0 <= w_lo < w_hi < inf");
  }
  erf_lo_ = erf_of(w_lo_);
  erf_hi_ = erf_of(w_hi_);
  if (!(erf_hi_ > erf_lo_)) {
    throw std::domain_error("truncated lognormal: truncation interval carries no mass");
  }
}

double TruncatedLognormal::erf_of(double w) const {
  // erf((ln 0 - mu) / (sqrt(2) sigma)) taken as its limit -1.
  if (w <= 0.0) return -1.0;
  return std::erf((std::log(w) - mu_) / (std::numbers::sqrt2 * sigma_));
}

double TruncatedLognormal::pdf(double w) const {
  if (w < w_lo_ || w > w_hi_ || w <= 0.0) return 0.0;
  const double z = (std::log(w) - mu_) / sigma_;
  return std::numbers::sqrt2 / (std::sqrt(std::numbers::pi) * sigma_ * w) *
         std::exp(-0.5 * z * z) / (erf_hi_ - erf_lo_);
}

double TruncatedLognormal::cdf(double w) const {
  if (w <= w_lo_) return 0.0;
  if (w >= w_hi_) return 1.0;
  const double value = (erf_of(w) - erf_lo_) / (erf_hi_ - erf_lo_);
  return std::clamp(value, 0.0, 1.0);
}

double TruncatedLognormal::inverse_cdf(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) {
    throw std::domain_error("truncated lognormal: inverse cdf needs u in [0,1]");
  }
  if (u == 0.0) return w_lo_;
  if (u == 1.0) return w_hi_;

  const double target = erf_lo_ + u * (erf_hi_ - erf_lo_);
  double w = std::numeric_limits<double>::quiet_NaN();
  if (target > -1.0 && target < 1.0) {
    const double z = boost::math::erf_inv(target);
    w = std::exp(mu_ + std::numbers::sqrt2 * sigma_ * z);
  }
  if (!std::isfinite(w) || std::abs(cdf(w) - u) > 1e-12) return bisect(u);
  return std::clamp(w, w_lo_, w_hi_);
}

double TruncatedLognormal::bisect(double u) const {
  double lo = w_lo_ > 0.0 ? w_lo_ : std::numeric_limits<double>::min();
  double hi = w_hi_;
  for (int it = 0; it < 2000 && hi > lo; ++it) {
    const double mid = w_lo_ > 0.0 ? 0.5 * (lo + hi) : std::sqrt(lo) * std::sqrt(hi);
    if (mid <= lo || mid >= hi) break;
    if (cdf(mid) < u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

Stratification build_equal_width_strata(const TruncatedLognormal& dist, int r) {
  if (r < 1) throw std::domain_error("stratification needs at least one stratum");
  Stratification strat;
  strat.boundaries.resize(static_cast<std::size_t>(r) + 1);
  const double width = (dist.w_hi() - dist.w_lo()) / r;
  for (int i = 0; i <= r; ++i) strat.boundaries[i] = dist.w_lo() + i * width;
  strat.boundaries.back() = dist.w_hi();

  strat.probs.resize(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) {
    strat.probs[i] = dist.cdf(strat.boundaries[i + 1]) - dist.cdf(strat.boundaries[i]);
    if (!(strat.probs[i] > 0.0)) {
      throw std::domain_error("stratification: stratum with zero probability");
    }
  }
  return strat;
}

double sample_stratum(const TruncatedLognormal& dist, const Stratification& strat, std::size_t i,
                      Substream& stream) {
  if (i >= strat.size()) throw std::domain_error("sample_stratum: stratum index out of range");
  const double lo = strat.boundaries[i];
  const double hi = strat.boundaries[i + 1];
  const double u_lo = dist.cdf(lo);
  const double u_hi = dist.cdf(hi);
  const double u = std::min(u_lo + stream.uniform() * (u_hi - u_lo), 1.0);
  double w = dist.inverse_cdf(u);
  if (w <= lo) w = std::nextafter(lo, hi);
  return std::min(w, hi);
}

StratumStats stratum_stats(std::span<const double> values) {
  StratumStats stats;
  stats.count = values.size();
  if (values.empty()) return stats;
  stats.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - stats.mean) * (v - stats.mean);
    stats.var = ss / static_cast<double>(values.size());
  }
  return stats;
}

std::vector<std::size_t> allocate(std::size_t total, std::span<const double> weights) {
  const std::size_t r = weights.size();
  if (r == 0) throw std::domain_error("allocation: no strata");
  if (total < r) throw std::domain_error("allocation: fewer samples than strata");
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(sum > 0.0)) throw std::domain_error("allocation: weights must have a positive sum");

  std::vector<std::size_t> counts(r);
  std::vector<double> fraction(r);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < r; ++i) {
    const double exact = static_cast<double>(total) * weights[i] / sum;
    const double whole = std::floor(exact);
    counts[i] = static_cast<std::size_t>(whole);
    fraction[i] = exact - whole;
    assigned += counts[i];
  }

  std::vector<std::size_t> order(r);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return fraction[a] > fraction[b]; });
  for (std::size_t k = 0; assigned < total && k < r; ++k, ++assigned) ++counts[order[k]];

  for (std::size_t i = 0; i < r; ++i) {
    while (counts[i] == 0) {
      const auto largest = std::max_element(counts.begin(), counts.end());
      --*largest;
      ++counts[i];
    }
  }
  return counts;
}

std::vector<std::size_t> proportional_allocation(std::size_t total, const Stratification& strat) {
  return allocate(total, strat.probs);
}

std::vector<std::size_t> optimal_allocation(std::size_t total, const Stratification& strat,
                                            std::span<const double> sigmas) {
  if (sigmas.size() != strat.size()) {
    throw std::domain_error("optimal allocation: one sigma per stratum required");
  }
  std::vector<double> weights(strat.size());
  bool any_positive = false;
  for (std::size_t i = 0; i < strat.size(); ++i) {
    if (sigmas[i] < 0.0) throw std::domain_error("optimal allocation: negative sigma");
    weights[i] = sigmas[i] * strat.probs[i];
    any_positive = any_positive || weights[i] > 0.0;
  }
  if (!any_positive) return proportional_allocation(total, strat);
  return allocate(total, weights);
}

double proportional_stratified_variance(std::span<const double> probs,
                                        std::span<const StratumStats> stats, std::size_t total) {
  double v = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) v += stats[i].var * probs[i];
  return v / static_cast<double>(total);
}

double plain_mc_variance(std::span<const double> probs, std::span<const StratumStats> stats,
                         std::size_t total) {
  double mean = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) mean += probs[i] * stats[i].mean;
  double within = 0.0;
  double between = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    within += probs[i] * stats[i].var;
    between += probs[i] * (stats[i].mean - mean) * (stats[i].mean - mean);
  }
  return (within + between) / static_cast<double>(total);
}

}  // namespace mlcdf::inputs
