#include "mlcdf/experiment.hpp"

#include <cmath>
#include <map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "mlcdf/estimators.hpp"
#include "mlcdf/report.hpp"

namespace mlcdf::experiment {

using config::Method;

std::string PlannedRun::label() const {
  std::string out = config::to_string(method);
  if (strata) out += "_r" + std::to_string(*strata);
  return out;
}

std::vector<PlannedRun> plan(const config::ExperimentConfig& config) {
  const auto selected = [&](Method m) {
    return std::find(config.methods.begin(), config.methods.end(), m) != config.methods.end();
  };
  std::vector<PlannedRun> out;
  for (double eps : config.epsilons) {
    for (std::size_t k = 0; k < config.runs; ++k) {
      const std::uint64_t seed = config.seed + k;
      for (Method m : {Method::mlmc, Method::mc, Method::mlmc_giles, Method::mlmc_kde}) {
        if (selected(m)) out.push_back({eps, k, seed, m, std::nullopt});
      }
      for (std::size_t r : config.strata) {
        for (Method m : {Method::smlmc, Method::smlmc_kde}) {
          if (selected(m)) out.push_back({eps, k, seed, m, r});
        }
      }
    }
  }
  return out;
}

std::uint64_t reference_checksum(const config::ExperimentConfig& c) {
  const std::string key = fmt::format(
      "{}|{}|{}|{}|{}|{}|{}|{}|{}|{}|{}|{}|{}|{}", models::to_string(c.model.id), c.model.final_time,
      c.model.qoi_scale, c.model.domain_length, c.model.cfl, c.input.mu, c.input.sigma, c.input.lower,
      c.input.upper, c.grid.a, c.grid.b, c.grid.s_count, c.reference.mesh_cells, c.reference.w_intervals);
  std::uint64_t hash = 14695981039346656037ULL;
  for (unsigned char ch : key) {
    hash ^= ch;
    hash *= 1099511628211ULL;
  }
  return hash;
}

cdf::ReferenceCdf cached_reference(const config::ExperimentConfig& config,
                                   const std::filesystem::path& cache_dir, bool* hit) {
  const std::uint64_t checksum = reference_checksum(config);
  const auto path =
      cache_dir / fmt::format("{}_{:016x}.json", models::to_string(config.model.id), checksum);
  if (std::filesystem::exists(path)) {
    const auto doc = nlohmann::json::parse(report::read_text(path));
    if (doc.at("checksum").get<std::uint64_t>() == checksum) {
      cdf::ReferenceCdf out;
      out.options = config.reference;
      out.convergence_delta = doc.at("convergence_delta").get<double>();
      out.inputs = doc.at("inputs").get<std::vector<double>>();
      out.qoi_values = doc.at("qoi_values").get<std::vector<double>>();
      out.estimate = cdf::CdfEstimate::from_raw(config.grid, doc.at("values").get<std::vector<double>>(),
                                                false, cdf::CdfMetadata{"reference", 0.0, 0});
      if (hit) *hit = true;
      return out;
    }
  }
  auto options = config.reference;
  options.threads = config.threads;
  auto out = cdf::reference_cdf(config.model, config.input.distribution(), config.grid, options);
  nlohmann::json doc{{"checksum", checksum},
                     {"model", models::to_string(config.model.id)},
                     {"mesh_cells", options.mesh_cells},
                     {"w_intervals", options.w_intervals},
                     {"convergence_delta", out.convergence_delta},
                     {"nodes", config.grid.nodes()},
                     {"values", out.estimate.raw()},
                     {"inputs", out.inputs},
                     {"qoi_values", out.qoi_values}};
  report::write_text(path, doc.dump(1) + "\n");
  report::write_text(cache_dir / fmt::format("{}_{:016x}.csv", models::to_string(config.model.id), checksum),
                     report::reference_csv(out));
  if (hit) *hit = false;
  return out;
}

estimators::RunConfig run_config(const config::ExperimentConfig& c, const PlannedRun& p) {
  estimators::RunConfig rc;
  rc.epsilon = p.epsilon;
  rc.l_star = c.hierarchy.l_star;
  rc.seed = p.seed;
  rc.run = p.run;
  rc.work_model = c.work_model;
  rc.threads = c.threads;
  rc.giles_degree = c.giles_degree;
  rc.min_stratum_warmup = c.min_stratum_warmup;
  switch (p.method) {
    case Method::mc:
    case Method::mlmc:
      rc.warmup = c.mlmc_warmup;
      break;
    case Method::mlmc_giles:
      rc.warmup = c.mlmc_smooth_warmup;
      rc.smoother = smoothing::SmootherKind::giles;
      break;
    case Method::mlmc_kde:
      rc.warmup = c.mlmc_smooth_warmup;
      rc.smoother = smoothing::SmootherKind::kde;
      break;
    case Method::smlmc:
      rc.warmup = c.smlmc_warmup;
      break;
    case Method::smlmc_kde:
      rc.warmup = c.smlmc_smooth_warmup;
      rc.smoother = smoothing::SmootherKind::kde;
      break;
  }
  return rc;
}

std::vector<cost::CostCell> mean_costs(const std::vector<RunRecord>& records) {
  std::vector<std::pair<double, std::string>> order;
  std::map<std::pair<double, std::string>, std::pair<double, std::size_t>> sums;
  for (const auto& r : records) {
    if (r.failed) continue;
    const auto key = std::make_pair(r.planned.epsilon, r.planned.label());
    auto [it, inserted] = sums.try_emplace(key, 0.0, 0);
    if (inserted) order.push_back(key);
    it->second.first += r.cost;
    it->second.second += 1;
  }
  std::vector<cost::CostCell> out;
  for (const auto& key : order) {
    const auto& [sum, count] = sums.at(key);
    out.push_back({key.second, key.first, sum / static_cast<double>(count)});
  }
  return out;
}

namespace {

std::string accuracy_csv(const std::vector<RunRecord>& records) {
  struct Row {
    double epsilon;
    std::string label;
    std::size_t runs = 0;
    std::size_t failures = 0;
    std::size_t warnings = 0;
    std::size_t compared = 0;
    double squared = 0.0;
    double max_error = 0.0;
  };
  std::vector<Row> rows;
  for (const auto& r : records) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const Row& row) {
      return row.epsilon == r.planned.epsilon && row.label == r.planned.label();
    });
    if (it == rows.end()) {
      rows.push_back({r.planned.epsilon, r.planned.label()});
      it = std::prev(rows.end());
    }
    ++it->runs;
    if (r.failed) ++it->failures;
    if (!r.converged) ++it->warnings;
    if (r.sup_error) {
      ++it->compared;
      it->squared += *r.sup_error * *r.sup_error;
      it->max_error = std::max(it->max_error, *r.sup_error);
    }
  }
  std::string out = "epsilon,method,runs,failures,not_converged,rmse_sup_error,max_sup_error\n";
  for (const auto& row : rows) {
    if (row.compared > 0) {
      out += fmt::format("{:.10g},{},{},{},{},{:.10g},{:.10g}\n", row.epsilon, row.label, row.runs,
                         row.failures, row.warnings,
                         std::sqrt(row.squared / static_cast<double>(row.compared)), row.max_error);
    } else {
      out += fmt::format("{:.10g},{},{},{},{},,\n", row.epsilon, row.label, row.runs, row.failures,
                         row.warnings);
    }
  }
  return out;
}

}  // namespace

Summary run(const config::ExperimentConfig& config, const Options& options, std::ostream* log) {
  config.validate();
  const auto dist = config.input.distribution();
  std::optional<cdf::ReferenceCdf> reference;
  if (config.compare_reference) {
    const auto cache = options.reference_cache.empty() ? options.out / "reference" : options.reference_cache;
    bool hit = false;
    reference = cached_reference(config, cache, &hit);
    if (log) {
      *log << fmt::format("reference: {} (convergence delta {:.3g})\n", hit ? "cache hit" : "computed",
                          reference->convergence_delta);
    }
  }
  std::map<std::size_t, inputs::Stratification> strata;
  for (std::size_t r : config.strata) strata.emplace(r, inputs::build_equal_width_strata(dist, r));

  Summary summary;
  std::optional<estimators::MultilevelResult> mlmc;
  std::pair<double, std::size_t> mlmc_key{-1.0, 0};
  for (const auto& planned : plan(config)) {
    RunRecord record;
    record.planned = planned;
    const auto rc = run_config(config, planned);
    nlohmann::json doc;
    cdf::CdfEstimate estimate;
    try {
      if (planned.method == Method::mc) {
        if (!mlmc || mlmc_key != std::make_pair(planned.epsilon, planned.run)) {
          throw std::runtime_error("the mlmc run of this realization failed");
        }
        auto result = estimators::run_mc(config.model, config.hierarchy, dist, config.grid, rc, *mlmc);
        record.l_max = result.level;
        record.cost = result.ledger.total();
        doc = report::monte_carlo_json(result);
        estimate = std::move(result.estimate);
      } else {
        estimators::MultilevelResult result =
            planned.strata ? estimators::run_smlmc(config.model, config.hierarchy, dist,
                                                   strata.at(*planned.strata), config.grid, rc)
                           : estimators::run_mlmc(config.model, config.hierarchy, dist, config.grid, rc);
        record.l_max = result.l_max;
        record.converged = result.converged;
        record.cost = result.ledger.total();
        doc = report::multilevel_json(result);
        estimate = result.estimate;
        if (planned.method == Method::mlmc) {
          mlmc = std::move(result);
          mlmc_key = {planned.epsilon, planned.run};
        }
      }
      if (reference) record.sup_error = cdf::sup_distance(estimate.raw_estimate(), reference->estimate);
    } catch (const std::exception& e) {
      record.failed = true;
      record.error = e.what();
      if (planned.method == Method::mlmc) mlmc.reset();
    }

    doc["run"] = planned.run;
    doc["label"] = planned.label();
    doc["failed"] = record.failed;
    if (record.failed) doc["error"] = record.error;
    if (record.sup_error) doc["sup_error"] = *record.sup_error;
    if (options.write_runs) {
      const auto dir = options.out / "runs" / fmt::format("eps_{:g}", planned.epsilon) /
                       fmt::format("run_{:03d}", planned.run);
      report::write_text(dir / (planned.label() + ".json"), doc.dump(1) + "\n");
      if (!record.failed) {
        report::write_text(dir / (planned.label() + "_cdf.csv"),
                           report::cdf_csv(estimate, reference ? &reference->estimate : nullptr));
      }
    }
    if (log) {
      *log << fmt::format("eps={:g} run={} {:<14} ", planned.epsilon, planned.run, planned.label());
      if (record.failed) {
        *log << "FAILED: " << record.error << "\n";
      } else {
        *log << fmt::format("L={} cost={:.4e}", record.l_max, record.cost);
        if (record.sup_error) *log << fmt::format(" sup_err={:.4g}", *record.sup_error);
        if (!record.converged) *log << " (l_star reached)";
        *log << "\n";
      }
    }
    if (record.failed) ++summary.failures;
    if (!record.converged) ++summary.warnings;
    summary.records.push_back(std::move(record));
  }

  summary.cells = mean_costs(summary.records);
  const auto tables = options.out / "tables";
  if (!summary.cells.empty()) {
    const cost::ComparisonTable table(summary.cells);
    report::write_text(tables / "cost.csv", table.to_csv());
    report::write_text(tables / "cost.json", table.to_json().dump(1) + "\n");
    if (options.plot_data) report::write_text(tables / "plot_data.csv", table.plot_data_csv());
  }
  report::write_text(tables / "accuracy.csv", accuracy_csv(summary.records));
  return summary;
}

}  // namespace mlcdf::experiment
