#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "mlcdf/config.hpp"
#include "mlcdf/experiment.hpp"
#include "mlcdf/report.hpp"
#include "mlcdf/smoothing.hpp"

using namespace mlcdf;

namespace {

struct Common {
  std::string preset = "diffusion";
  std::string config_path;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> work_model;
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("--preset", common.preset, "Built-in experiment: diffusion or burgers")
      ->check(CLI::IsMember({"diffusion", "burgers"}));
  cmd->add_option("--config", common.config_path, "INI config file (overrides --preset)");
  cmd->add_option("--out", common.out, "Output directory");
  cmd->add_option("--seed", common.seed, "Base seed; run k uses seed + k");
  cmd->add_option("--work-model", common.work_model, "wallclock or deterministic")
      ->check(CLI::IsMember({"wallclock", "deterministic"}));
}

config::ExperimentConfig resolve(const Common& common) {
  auto c = common.config_path.empty() ? config::preset(common.preset) : config::load(common.config_path);
  if (common.seed) c.seed = *common.seed;
  if (common.work_model) c.work_model = cost::work_model_from_string(*common.work_model);
  c.validate();
  return c;
}

int cmd_run(const Common& common, bool dry_run, bool plot_data, std::optional<std::size_t> runs) {
  auto c = resolve(common);
  if (runs) c.runs = *runs;
  c.validate();
  const auto planned = experiment::plan(c);
  if (dry_run) {
    std::cout << "epsilon,run,seed,method\n";
    for (const auto& p : planned) {
      std::cout << fmt::format("{:g},{},{},{}\n", p.epsilon, p.run, p.seed, p.label());
    }
    std::cerr << fmt::format("{} planned runs, model {}, {} nodes on [{:g}, {:g}]\n", planned.size(),
                             models::to_string(c.model.id), c.grid.size(), c.grid.a, c.grid.b);
    return 0;
  }
  experiment::Options options;
  options.out = common.out;
  options.plot_data = plot_data;
  report::write_text(options.out / std::filesystem::path("config.ini"), config::serialize(c));
  const auto summary = experiment::run(c, options, &std::cerr);
  std::cout << report::read_text(options.out / std::filesystem::path("tables/cost.csv"));
  if (summary.warnings > 0) {
    std::cerr << fmt::format("{} runs reached l_star before the bias test passed\n", summary.warnings);
  }
  if (summary.failures > 0) {
    std::cerr << fmt::format("{} runs failed\n", summary.failures);
    return 1;
  }
  return 0;
}

int cmd_reference(const Common& common) {
  const auto c = resolve(common);
  const auto cache = std::filesystem::path(common.out) / "reference";
  bool hit = false;
  const auto ref = experiment::cached_reference(c, cache, &hit);
  std::cerr << fmt::format("{} reference: checksum {:016x}, mesh {} cells, {} input intervals, "
                           "convergence delta {:.3g}\n",
                           hit ? "cached" : "computed", experiment::reference_checksum(c),
                           c.reference.mesh_cells, c.reference.w_intervals, ref.convergence_delta);
  std::cout << report::reference_csv(ref);
  return 0;
}

int cmd_inspect(const std::string& subject, const Common& common, int degree, double input, int cells,
                std::size_t strata) {
  if (subject == "giles-poly") {
    const auto poly = smoothing::GilesPolynomial::build(degree);
    std::cout << "power,coefficient\n";
    for (std::size_t k = 0; k < poly.coeffs().size(); ++k) {
      std::cout << fmt::format("{},{:.17g}\n", k, poly.coeffs()[k]);
    }
    return 0;
  }
  const auto c = resolve(common);
  if (subject == "solver-field") {
    const auto field = models::solve(c.model, input, cells);
    const bool nodes = c.model.id == models::ModelId::diffusion;
    std::cout << "x,u\n";
    for (std::size_t j = 0; j < field.u.size(); ++j) {
      const double x = nodes ? j * field.dx : (j + 0.5) * field.dx;
      std::cout << fmt::format("{:.10g},{:.17g}\n", x, field.u[j]);
    }
    std::cerr << fmt::format("{} at w={:g}: {} cells, {} steps, work {}\n", models::to_string(c.model.id),
                             input, cells, field.steps, field.work);
    return 0;
  }
  if (subject == "strata") {
    const auto dist = c.input.distribution();
    const auto strat = inputs::build_equal_width_strata(dist, strata);
    std::cout << "stratum,lower,upper,probability\n";
    for (std::size_t i = 0; i < strat.size(); ++i) {
      std::cout << fmt::format("{},{:.17g},{:.17g},{:.17g}\n", i, strat.boundaries[i], strat.boundaries[i + 1],
                               strat.probs[i]);
    }
    return 0;
  }
  throw CLI::ValidationError("inspect", "unknown subject '" + subject + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multilevel Monte Carlo estimation of cumulative distribution functions"};
  app.require_subcommand(1);

  Common common;
  bool dry_run = false;
  bool plot_data = false;
  std::optional<std::size_t> runs;
  auto* run = app.add_subcommand("run", "Run the experiment matrix and write reports and tables");
  add_common(run, common);
  run->add_flag("--dry-run", dry_run, "Print the planned run matrix without solving");
  run->add_flag("--plot-data", plot_data, "Also write tables/plot_data.csv (method, epsilon, cost)");
  run->add_option("--runs", runs, "Override the number of realizations per tolerance");

  auto* reference = app.add_subcommand("reference", "Compute or load the cached reference CDF");
  add_common(reference, common);

  std::string subject;
  int degree = 3;
  double input = 1.0;
  int cells = 64;
  std::size_t strata = 8;
  auto* inspect = app.add_subcommand("inspect", "Dump polynomial coefficients, a solution or strata");
  inspect->add_option("subject", subject, "giles-poly | solver-field | strata")->required();
  add_common(inspect, common);
  inspect->add_option("--degree", degree, "Giles polynomial parameter d");
  inspect->add_option("--input", input, "Random input value (D or U1)");
  inspect->add_option("--cells", cells, "Mesh cells");
  inspect->add_option("--strata", strata, "Number of equal-width strata");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run) return cmd_run(common, dry_run, plot_data, runs);
    if (*reference) return cmd_reference(common);
    if (*inspect) return cmd_inspect(subject, common, degree, input, cells, strata);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const config::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
