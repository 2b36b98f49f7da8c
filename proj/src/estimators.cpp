#include "mlcdf/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mlcdf/parallel.hpp"

namespace mlcdf::estimators {

double budget_factor(smoothing::SmootherKind kind) {
  return kind == smoothing::SmootherKind::none ? 2.0 : 4.0;
}

void NodeMoments::add(std::span<const double> values) {
  ++count_;
  const double n = static_cast<double>(count_);
  for (std::size_t k = 0; k < mean_.size(); ++k) {
    const double delta = values[k] - mean_[k];
    mean_[k] += delta / n;
    m2_[k] += delta * (values[k] - mean_[k]);
  }
}

double NodeMoments::max_variance() const {
  double worst = 0.0;
  for (std::size_t n = 0; n < nodes(); ++n) worst = std::max(worst, variance(n));
  return worst;
}

double StratumSamples::average_work() const {
  return pairs.empty() ? 0.0 : work_total / static_cast<double>(pairs.size());
}

std::size_t LevelState::n_current() const {
  std::size_t total = 0;
  for (const auto& s : strata) total += s.count();
  return total;
}

double LevelState::mean_smoothed(std::size_t node) const {
  double sum = 0.0;
  for (const auto& s : strata) sum += s.probability * s.smoothed.mean(node);
  return sum;
}

double LevelState::mean_indicator(std::size_t node) const {
  double sum = 0.0;
  for (const auto& s : strata) sum += s.probability * s.indicator.mean(node);
  return sum;
}

double LevelState::max_abs_mean_indicator() const {
  if (strata.empty()) return 0.0;
  double worst = 0.0;
  for (std::size_t n = 0; n < strata.front().indicator.nodes(); ++n) {
    worst = std::max(worst, std::abs(mean_indicator(n)));
  }
  return worst;
}

double LevelState::estimator_variance_smoothed(std::size_t node) const {
  double sum = 0.0;
  for (const auto& s : strata) {
    if (s.count() > 0) {
      sum += s.probability * s.probability * s.smoothed.variance(node) / static_cast<double>(s.count());
    }
  }
  return sum;
}

double LevelState::estimator_variance_indicator(std::size_t node) const {
  double sum = 0.0;
  for (const auto& s : strata) {
    if (s.count() > 0) {
      sum += s.probability * s.probability * s.indicator.variance(node) / static_cast<double>(s.count());
    }
  }
  return sum;
}

namespace {

// Variance of the stratum mixture: sum_i p_i (V_i + m_i^2) - (sum_i p_i m_i)^2.
double pooled_max_variance(const std::vector<StratumSamples>& strata,
                           const NodeMoments StratumSamples::*field) {
  if (strata.empty()) return 0.0;
  if (strata.size() == 1) return (strata.front().*field).max_variance();
  double worst = 0.0;
  for (std::size_t n = 0; n < (strata.front().*field).nodes(); ++n) {
    double second = 0.0;
    double first = 0.0;
    for (const auto& s : strata) {
      const auto& m = s.*field;
      second += s.probability * (m.variance(n) + m.mean(n) * m.mean(n));
      first += s.probability * m.mean(n);
    }
    worst = std::max(worst, second - first * first);
  }
  return worst;
}

}  // namespace

double LevelState::max_variance_smoothed() const {
  return pooled_max_variance(strata, &StratumSamples::smoothed);
}

double LevelState::max_variance_indicator() const {
  return pooled_max_variance(strata, &StratumSamples::indicator);
}

double LevelState::max_variance_fine_indicator() const {
  return pooled_max_variance(strata, &StratumSamples::fine_indicator);
}

double LevelState::average_work() const {
  double total = 0.0;
  for (const auto& s : strata) total += s.work_total;
  const std::size_t n = n_current();
  return n == 0 ? 0.0 : total / static_cast<double>(n);
}

std::vector<std::size_t> required_samples_mlmc(const std::vector<std::vector<double>>& variance,
                                               std::span<const double> work, double epsilon,
                                               double factor) {
  if (variance.size() != work.size()) throw std::invalid_argument("required_samples: size mismatch");
  for (double w : work) {
    if (!(w > 0.0)) throw std::domain_error("required_samples: work must be positive");
  }
  const std::size_t levels = variance.size();
  std::vector<std::size_t> out(levels, 0);
  if (levels == 0) return out;
  const std::size_t nodes = variance.front().size();
  const double scale = factor / (epsilon * epsilon);
  for (std::size_t n = 0; n < nodes; ++n) {
    double total = 0.0;
    for (std::size_t k = 0; k < levels; ++k) total += std::sqrt(variance[k][n] * work[k]);
    for (std::size_t l = 0; l < levels; ++l) {
      const double value = scale * std::sqrt(variance[l][n] / work[l]) * total;
      out[l] = std::max(out[l], static_cast<std::size_t>(std::ceil(value)));
    }
  }
  return out;
}

std::vector<std::vector<std::size_t>> required_samples_smlmc(
    const std::vector<std::vector<std::vector<double>>>& variance, std::span<const double> probs,
    const std::vector<std::vector<double>>& work, double epsilon, double factor) {
  const std::size_t levels = variance.size();
  const std::size_t strata = probs.size();
  if (work.size() != levels) throw std::invalid_argument("required_samples: size mismatch");
  for (std::size_t l = 0; l < levels; ++l) {
    if (variance[l].size() != strata || work[l].size() != strata) {
      throw std::invalid_argument("required_samples: one entry per stratum required");
    }
    for (double w : work[l]) {
      if (!(w > 0.0)) throw std::domain_error("required_samples: work must be positive");
    }
  }
  std::vector<std::vector<std::size_t>> out(levels, std::vector<std::size_t>(strata, 0));
  if (levels == 0 || strata == 0) return out;
  const std::size_t nodes = variance.front().front().size();
  const double scale = factor / (epsilon * epsilon);
  for (std::size_t n = 0; n < nodes; ++n) {
    double total = 0.0;
    for (std::size_t k = 0; k < levels; ++k) {
      for (std::size_t i = 0; i < strata; ++i) {
        total += std::sqrt(variance[k][i][n] * probs[i] * probs[i] * work[k][i]);
      }
    }
    for (std::size_t l = 0; l < levels; ++l) {
      for (std::size_t i = 0; i < strata; ++i) {
        const double value =
            scale * std::sqrt(variance[l][i][n] * probs[i] * probs[i] / work[l][i]) * total;
        out[l][i] = std::max(out[l][i], static_cast<std::size_t>(std::ceil(value)));
      }
    }
  }
  return out;
}

bool stopping_check(int level, std::span<const double> mean_indicator_difference, double epsilon,
                    int l_star) {
  if (level >= l_star) return true;
  if (level < 1) return false;
  double worst = 0.0;
  for (double v : mean_indicator_difference) worst = std::max(worst, std::abs(v));
  return worst <= epsilon / std::numbers::sqrt2;
}

std::size_t monte_carlo_samples(double max_variance, double epsilon) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(2.0 / (epsilon * epsilon) * max_variance)));
}

double MultilevelResult::sampling_error_bound() const {
  double total = 0.0;
  for (const auto& level : levels) {
    double worst = 0.0;
    for (std::size_t n = 0; n < estimate.grid().size(); ++n) {
      worst = std::max(worst, level.estimator_variance_smoothed(n));
    }
    total += worst;
  }
  return total;
}

double MultilevelResult::max_node_sampling_variance() const {
  double worst = 0.0;
  for (std::size_t n = 0; n < estimate.grid().size(); ++n) {
    double total = 0.0;
    for (const auto& level : levels) total += level.estimator_variance_smoothed(n);
    worst = std::max(worst, total);
  }
  return worst;
}

std::string method_name(smoothing::SmootherKind kind, std::optional<std::size_t> strata) {
  std::string name = strata ? "smlmc" : "mlmc";
  if (kind != smoothing::SmootherKind::none) name += "_" + smoothing::to_string(kind);
  if (strata) name += "_r" + std::to_string(*strata);
  return name;
}

namespace {

constexpr double kMinSeconds = 1e-9;

class Engine {
 public:
  Engine(const models::ModelSpec& model, const models::MeshHierarchy& hierarchy,
         const inputs::TruncatedLognormal& dist, const inputs::Stratification* strat,
         const cdf::NodeGrid& grid, const RunConfig& config)
      : model_(model), hierarchy_(hierarchy), dist_(dist), strat_(strat), grid_(grid),
        nodes_(grid.nodes()), config_(config),
        smoother_(smoothing::Smoother::make(config.smoother, config.giles_degree)),
        cap_(std::min(config.l_star, hierarchy.l_star)) {
    if (!(config.epsilon > 0.0)) throw std::domain_error("run: epsilon must be positive");
    if (config.warmup < 2) throw std::domain_error("run: warmup must be at least 2");
    if (cap_ < 0) throw std::domain_error("run: l_star must be >= 0");
    probs_ = strat_ ? strat_->probs : std::vector<double>{1.0};
  }

  MultilevelResult run() {
    MultilevelResult result;
    result.method = method_name(config_.smoother,
                                strat_ ? std::optional<std::size_t>(strat_->size()) : std::nullopt);
    result.factor = budget_factor(config_.smoother);
    auto& levels = result.levels;

    for (int level = 0;; ++level) {
      levels.push_back(make_level(level));
      LevelState& current = levels.back();

      const auto warmup = warmup_counts();
      for (std::size_t i = 0; i < current.strata.size(); ++i) top_up(current, i, warmup[i]);
      if (config_.smoother != smoothing::SmootherKind::none) calibrate(current);
      for (auto& s : current.strata) update_stats(current, s);

      auto target = required(levels, result.factor);
      for (std::size_t i = 0; i < current.strata.size(); ++i) {
        top_up(current, i, target[level][i]);
        update_stats(current, current.strata[i]);
      }
      for (int l = 0; l < level; ++l) {
        target = required(levels, result.factor);
        for (std::size_t i = 0; i < levels[l].strata.size(); ++i) {
          top_up(levels[l], i, target[l][i]);
          update_stats(levels[l], levels[l].strata[i]);
        }
      }

      std::vector<std::size_t> counts;
      for (const auto& lv : levels) counts.push_back(lv.n_current());
      result.n_history.push_back(std::move(counts));

      std::vector<double> bias(nodes_.size());
      for (std::size_t n = 0; n < nodes_.size(); ++n) bias[n] = current.mean_indicator(n);
      if (stopping_check(level, bias, config_.epsilon, cap_)) {
        result.l_max = level;
        result.converged = !(level >= cap_ && !(level >= 1 && current.max_abs_mean_indicator() <=
                                                                  config_.epsilon / std::numbers::sqrt2));
        break;
      }
    }

    result.ledger = cost::CostLedger(result.method);
    for (const auto& lv : levels) {
      for (const auto& s : lv.strata) {
        result.ledger.add({lv.level, strat_ ? static_cast<int>(s.stratum) : -1, s.count(),
                           s.average_work()});
      }
    }

    std::vector<double> raw(nodes_.size(), 0.0);
    for (std::size_t n = 0; n < nodes_.size(); ++n) {
      for (const auto& lv : levels) raw[n] += lv.mean_smoothed(n);
    }
    result.estimate = cdf::CdfEstimate::from_raw(
        grid_, std::move(raw), true, cdf::CdfMetadata{result.method, config_.epsilon, config_.seed});
    return result;
  }

 private:
  LevelState make_level(int level) const {
    LevelState state;
    state.level = level;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
      const StreamKey key{config_.seed, config_.run, static_cast<std::uint32_t>(level),
                          static_cast<std::uint32_t>(i)};
      state.strata.emplace_back(i, probs_[i], key, nodes_.size());
    }
    return state;
  }

  std::vector<std::size_t> warmup_counts() const {
    if (!strat_) return {config_.warmup};
    const std::size_t total = std::max(config_.warmup, strat_->size());
    auto counts = inputs::proportional_allocation(total, *strat_);
    for (auto& c : counts) c = std::max(c, config_.min_stratum_warmup);
    return counts;
  }

  // Draws inputs sequentially from the stratum's stream, then solves the
  // pairs (possibly in parallel) into their slots.
  void top_up(LevelState& level, std::size_t index, std::size_t target) {
    StratumSamples& s = level.strata[index];
    if (target <= s.count()) return;
    const std::size_t extra = target - s.count();
    std::vector<double> w(extra);
    for (auto& value : w) {
      value = strat_ ? inputs::sample_stratum(dist_, *strat_, s.stratum, s.stream)
                     : dist_.sample(s.stream);
    }
    std::vector<models::LevelPair> fresh(extra);
    parallel_for(extra, config_.threads, [&](std::size_t j) {
      fresh[j] = models::sample_pair(model_, hierarchy_, w[j], level.level);
    });
    for (const auto& pair : fresh) {
      s.work_total += config_.work_model == cost::WorkModel::deterministic
                          ? static_cast<double>(pair.work)
                          : std::max(pair.seconds, kMinSeconds);
      s.pairs.push_back(pair);
    }
  }

  void calibrate(LevelState& level) const {
    std::vector<double> fine;
    for (const auto& s : level.strata) {
      for (const auto& pair : s.pairs) fine.push_back(pair.fine);
    }
    const auto bandwidth = smoothing::calibrate_bandwidth(fine, nodes_, config_.epsilon, smoother_);
    level.delta = bandwidth.delta;
    level.delta_per_node = bandwidth.per_node;
  }

  void update_stats(const LevelState& level, StratumSamples& s) const {
    const std::size_t nodes = nodes_.size();
    std::vector<double> g(nodes), ind(nodes), fine(nodes);
    const bool smoothing = config_.smoother != smoothing::SmootherKind::none;
    for (std::size_t j = s.smoothed.count(); j < s.pairs.size(); ++j) {
      const auto& pair = s.pairs[j];
      for (std::size_t n = 0; n < nodes; ++n) {
        fine[n] = cdf::indicator(nodes_[n], pair.fine);
        ind[n] = pair.coarse ? fine[n] - cdf::indicator(nodes_[n], *pair.coarse) : fine[n];
        g[n] = smoothing ? smoothing::smoothed_term(smoother_, level.delta, nodes_[n], pair) : ind[n];
      }
      s.smoothed.add(g);
      s.indicator.add(ind);
      s.fine_indicator.add(fine);
    }
  }

  std::vector<std::vector<std::size_t>> required(const std::vector<LevelState>& levels,
                                                 double factor) const {
    std::vector<std::vector<std::vector<double>>> variance(levels.size());
    std::vector<std::vector<double>> work(levels.size());
    for (std::size_t l = 0; l < levels.size(); ++l) {
      for (const auto& s : levels[l].strata) {
        std::vector<double> v(nodes_.size());
        for (std::size_t n = 0; n < nodes_.size(); ++n) v[n] = s.smoothed.variance(n);
        variance[l].push_back(std::move(v));
        work[l].push_back(s.average_work());
      }
    }
    return required_samples_smlmc(variance, probs_, work, config_.epsilon, factor);
  }

  const models::ModelSpec& model_;
  const models::MeshHierarchy& hierarchy_;
  const inputs::TruncatedLognormal& dist_;
  const inputs::Stratification* strat_;
  cdf::NodeGrid grid_;
  std::vector<double> nodes_;
  RunConfig config_;
  smoothing::Smoother smoother_;
  int cap_;
  std::vector<double> probs_;
};

}  // namespace

MultilevelResult run_mlmc(const models::ModelSpec& model, const models::MeshHierarchy& hierarchy,
                          const inputs::TruncatedLognormal& dist, const cdf::NodeGrid& grid,
                          const RunConfig& config) {
  return Engine(model, hierarchy, dist, nullptr, grid, config).run();
}

MultilevelResult run_smlmc(const models::ModelSpec& model, const models::MeshHierarchy& hierarchy,
                           const inputs::TruncatedLognormal& dist,
                           const inputs::Stratification& strat, const cdf::NodeGrid& grid,
                           const RunConfig& config) {
  return Engine(model, hierarchy, dist, &strat, grid, config).run();
}

MonteCarloResult run_mc(const models::ModelSpec& model, const models::MeshHierarchy& hierarchy,
                        const inputs::TruncatedLognormal& dist, const cdf::NodeGrid& grid,
                        const RunConfig& config, const MultilevelResult& mlmc) {
  if (mlmc.levels.empty()) throw std::invalid_argument("run_mc: empty MLMC run");
  const LevelState& top = mlmc.levels.at(static_cast<std::size_t>(mlmc.l_max));
  if (top.strata.size() != 1) throw std::invalid_argument("run_mc: needs an unstratified MLMC run");
  const StratumSamples& source = top.strata.front();

  MonteCarloResult result;
  result.level = mlmc.l_max;
  result.max_variance = top.max_variance_fine_indicator();
  const double eps = config.epsilon;
  result.n_mc = monte_carlo_samples(result.max_variance, eps);
  result.reused = std::min(result.n_mc, source.count());

  std::vector<double> fine;
  std::vector<double> seconds;
  fine.reserve(result.n_mc);
  for (std::size_t j = 0; j < result.reused; ++j) {
    fine.push_back(source.pairs[j].fine);
    seconds.push_back(source.pairs[j].fine_seconds);
  }
  const std::size_t fresh = result.n_mc - result.reused;
  const int cells = hierarchy.cells(result.level);
  std::uint64_t single_work = 0;
  if (!source.pairs.empty()) single_work = source.pairs.front().fine_work;
  if (fresh > 0) {
    Substream stream(StreamKey{config.seed, config.run, static_cast<std::uint32_t>(result.level),
                               kMonteCarloStream});
    std::vector<double> w(fresh);
    for (auto& value : w) value = dist.sample(stream);
    std::vector<models::Evaluation> evals(fresh);
    parallel_for(fresh, config.threads,
                 [&](std::size_t j) { evals[j] = models::evaluate(model, w[j], cells); });
    for (const auto& e : evals) {
      fine.push_back(e.value);
      seconds.push_back(e.seconds);
      single_work = e.work;
    }
  }

  const auto nodes = grid.nodes();
  std::vector<double> raw(nodes.size(), 0.0);
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    std::size_t below = 0;
    for (double q : fine) below += static_cast<std::size_t>(cdf::indicator(nodes[n], q));
    raw[n] = static_cast<double>(below) / static_cast<double>(fine.size());
  }
  result.estimate =
      cdf::CdfEstimate::from_raw(grid, std::move(raw), true, cdf::CdfMetadata{"mc", eps, config.seed});

  double avg_work = static_cast<double>(single_work);
  if (config.work_model == cost::WorkModel::wallclock) {
    double total = 0.0;
    for (double s : seconds) total += std::max(s, kMinSeconds);
    avg_work = total / static_cast<double>(seconds.size());
  }
  result.ledger = cost::CostLedger("mc");
  result.ledger.add({result.level, -1, result.n_mc, avg_work});
  return result;
}

}  // namespace mlcdf::estimators
