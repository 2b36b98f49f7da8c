// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [cache_dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "mlcdf/config.hpp"
#include "mlcdf/estimators.hpp"
#include "mlcdf/experiment.hpp"
#include "mlcdf/report.hpp"

using namespace mlcdf;
using config::Method;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report_line(int id, const std::string& title, const Outcome& o, double seconds) {
  std::printf("[%s] criterion %d: %s (%.0f s) %s\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), seconds,
              o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

void run_criterion(int id, const std::string& title, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  report_line(id, title, o, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
}

// Runs every planned entry of `c` and keeps the engine results.
struct MatrixResult {
  std::map<std::string, std::vector<estimators::MultilevelResult>> multilevel;
  std::map<std::string, std::vector<estimators::MonteCarloResult>> monte_carlo;

  double mean_cost(const std::string& label) const {
    double sum = 0.0;
    std::size_t n = 0;
    if (auto it = multilevel.find(label); it != multilevel.end()) {
      for (const auto& r : it->second) sum += r.ledger.total(), ++n;
    }
    if (auto it = monte_carlo.find(label); it != monte_carlo.end()) {
      for (const auto& r : it->second) sum += r.ledger.total(), ++n;
    }
    return sum / static_cast<double>(n);
  }
};

MatrixResult run_matrix(const config::ExperimentConfig& c) {
  MatrixResult out;
  const auto dist = c.input.distribution();
  std::map<std::size_t, inputs::Stratification> strata;
  for (std::size_t r : c.strata) strata.emplace(r, inputs::build_equal_width_strata(dist, r));
  for (const auto& p : experiment::plan(c)) {
    const auto rc = experiment::run_config(c, p);
    if (p.method == Method::mc) {
      const auto& source = out.multilevel.at("mlmc").back();
      out.monte_carlo[p.label()].push_back(
          estimators::run_mc(c.model, c.hierarchy, dist, c.grid, rc, source));
    } else if (p.strata) {
      out.multilevel[p.label()].push_back(
          estimators::run_smlmc(c.model, c.hierarchy, dist, strata.at(*p.strata), c.grid, rc));
    } else {
      out.multilevel[p.label()].push_back(estimators::run_mlmc(c.model, c.hierarchy, dist, c.grid, rc));
    }
  }
  return out;
}

config::ExperimentConfig base(const std::string& preset, double eps, std::size_t runs, std::vector<Method> methods) {
  auto c = config::preset(preset);
  c.epsilons = {eps};
  c.runs = runs;
  c.strata = {8};
  c.methods = std::move(methods);
  c.work_model = cost::WorkModel::deterministic;
  c.validate();
  return c;
}

Outcome accuracy(const std::filesystem::path& cache) {
  auto c = base("diffusion", 0.01, 10,
                {Method::mlmc, Method::mc, Method::mlmc_giles, Method::mlmc_kde, Method::smlmc, Method::smlmc_kde});
  const auto reference = experiment::cached_reference(c, cache);
  const auto m = run_matrix(c);
  std::vector<std::pair<std::string, double>> rmse;
  const auto add = [&](const std::string& label, const std::vector<const cdf::CdfEstimate*>& estimates) {
    double sq = 0.0;
    for (const auto* e : estimates) {
      const double d = cdf::sup_distance(e->raw_estimate(), reference.estimate);
      sq += d * d;
    }
    rmse.emplace_back(label, std::sqrt(sq / static_cast<double>(estimates.size())));
  };
  for (const auto& label : {"mc"}) {
    std::vector<const cdf::CdfEstimate*> e;
    for (const auto& r : m.monte_carlo.at(label)) e.push_back(&r.estimate);
    add(label, e);
  }
  for (const auto& label : {"mlmc", "mlmc_giles", "mlmc_kde", "smlmc_r8", "smlmc_kde_r8"}) {
    std::vector<const cdf::CdfEstimate*> e;
    for (const auto& r : m.multilevel.at(label)) e.push_back(&r.estimate);
    add(label, e);
  }
  Outcome o;
  o.detail = fmt::format("reference delta {:.2g}; rmse:", reference.convergence_delta);
  for (const auto& [label, value] : rmse) {
    const bool ok = value <= c.epsilons[0];
    o.pass = o.pass && ok;
    o.detail += fmt::format(" {}={:.4f}{}", label, value, ok ? "" : "(>eps)");
  }
  return o;
}

Outcome cost_ordering(const MatrixResult& m) {
  const double mc = m.mean_cost("mc");
  const double mlmc = m.mean_cost("mlmc");
  const double kde = m.mean_cost("mlmc_kde");
  const double skde = m.mean_cost("smlmc_kde_r8");
  const bool a = mlmc <= mc / 3.0;
  const bool b = kde <= mlmc / 2.0;
  const bool c = skde <= mlmc / 5.0;
  return {a && b && c,
          fmt::format("MC/MLMC={:.2f} (>=3 {}), MLMC/MLMC+KDE={:.2f} (>=2 {}), MLMC/sMLMC+KDE={:.2f} (>=5 {})",
                      mc / mlmc, a ? "ok" : "no", mlmc / kde, b ? "ok" : "no", mlmc / skde, c ? "ok" : "no")};
}

Outcome kde_vs_giles(const MatrixResult& diffusion) {
  const auto burgers = run_matrix(base("burgers", 0.005, 10, {Method::mlmc_giles, Method::mlmc_kde}));
  const double dg = diffusion.mean_cost("mlmc_giles"), dk = diffusion.mean_cost("mlmc_kde");
  const double bg = burgers.mean_cost("mlmc_giles"), bk = burgers.mean_cost("mlmc_kde");
  return {dk <= dg && bk <= bg,
          fmt::format("diffusion KDE {:.4e} vs Giles {:.4e}; burgers KDE {:.4e} vs Giles {:.4e}", dk, dg, bk, bg)};
}

Outcome variance_decay(const MatrixResult& m) {
  const auto& single = m.multilevel.at("mlmc").front();
  const auto& levels = single.levels;
  const double v0 = levels.front().max_variance_indicator();
  const double vl = levels.back().max_variance_indicator();
  double fine_lo = 1.0, fine_hi = 0.0;
  for (const auto& l : levels) {
    fine_lo = std::min(fine_lo, l.max_variance_fine_indicator());
    fine_hi = std::max(fine_hi, l.max_variance_fine_indicator());
  }
  const bool decay = vl <= v0 / 10.0;
  const bool flat = fine_hi < 2.0 * fine_lo;

  std::size_t compared = 0, reduced = 0;
  const auto& plain = m.multilevel.at("mlmc");
  const auto& strat = m.multilevel.at("smlmc_r8");
  for (std::size_t k = 0; k < std::min(plain.size(), strat.size()); ++k) {
    const std::size_t depth = std::min(plain[k].levels.size(), strat[k].levels.size());
    for (std::size_t l = 0; l < depth; ++l) {
      const auto& s = strat[k].levels[l];
      double scaled = 0.0;
      for (std::size_t n = 0; n < s.strata.front().indicator.nodes(); ++n) {
        scaled = std::max(scaled, static_cast<double>(s.n_current()) * s.estimator_variance_indicator(n));
      }
      ++compared;
      if (scaled <= plain[k].levels[l].max_variance_indicator()) ++reduced;
    }
  }
  const bool stratified = 2 * reduced > compared;
  return {decay && flat && stratified,
          fmt::format("V[I(Y_L)]/V[I(Y_0)]={:.3g} (<=0.1 {}), max/min V[I(Q_l)]={:.3g} (<2 {}), "
                      "stratified reduction on {}/{} levels ({})",
                      vl / v0, decay ? "ok" : "no", fine_hi / fine_lo, flat ? "ok" : "no", reduced, compared,
                      stratified ? "ok" : "no")};
}

Outcome exactness() {
  std::vector<std::string> bad;
  const auto expect = [&](bool ok, const std::string& what) {
    if (!ok) bad.push_back(what);
  };
  for (int d = 0; d <= 3; ++d) {
    const auto g = smoothing::GilesPolynomial::build(d);
    expect(std::abs(g(-1.0) - 1.0) < 1e-10 && std::abs(g(1.0)) < 1e-10, fmt::format("giles endpoints d={}", d));
    for (int k = 0; k < d; ++k) {
      double m = 0.0;
      for (std::size_t j = 0; j < g.coeffs().size(); ++j) {
        const int p = static_cast<int>(j) + k + 1;
        m += g.coeffs()[j] * (1.0 - std::pow(-1.0, p)) / p;
      }
      expect(std::abs(m - std::pow(-1.0, k) / (k + 1)) < 1e-10, fmt::format("giles moment d={} k={}", d, k));
    }
  }
  const auto g1 = smoothing::GilesPolynomial::build(1);
  for (double s = -1.0; s <= 1.0; s += 0.0625) expect(g1(s) == (1.0 - s) / 2.0, "g_1 = (1-s)/2");
  expect(smoothing::gaussian_cdf(0.0) == 0.5, "Phi(0)");

  const int n = 64;
  std::vector<double> lo(n - 1, -1.0), di(n), up(n - 1, -0.7), rhs(n);
  for (int i = 0; i < n; ++i) {
    di[i] = 3.0 + std::cos(i);
    rhs[i] = std::sin(1.7 * i);
  }
  const auto x = models::thomas_solve(lo, di, up, rhs);
  for (int i = 0; i < n; ++i) {
    double r = di[i] * x[i] - rhs[i];
    if (i > 0) r += lo[i - 1] * x[i - 1];
    if (i + 1 < n) r += up[i] * x[i + 1];
    expect(std::abs(r) < 1e-12, "thomas residual");
  }

  expect(models::godunov_flux(1.5, 1.5) == 1.125 && models::godunov_flux(-0.5, -0.5) == 0.125, "flux consistency");
  expect(models::godunov_flux(2.0, 0.0) == 2.0 && models::godunov_flux(0.5, -1.0) == 0.5, "flux shock");
  expect(models::godunov_flux(-1.0, 2.0) == 0.0, "flux transonic");

  const inputs::TruncatedLognormal dist(3.0, 3.0, 1.0, 4.0);
  for (int r : {1, 8, 16}) {
    const auto s = inputs::build_equal_width_strata(dist, r);
    expect(std::abs(std::accumulate(s.probs.begin(), s.probs.end(), 0.0) - 1.0) < 1e-12, "strata sum");
  }
  const auto s8 = inputs::build_equal_width_strata(dist, 8);
  expect(inputs::proportional_allocation(100, s8) == std::vector<std::size_t>{20, 16, 14, 12, 11, 10, 9, 8},
         "proportional allocation");

  const std::vector<std::vector<double>> v{{0.25}, {0.01}};
  const std::vector<double> w{1.0, 4.0};
  expect(estimators::required_samples_mlmc(v, w, 0.01, 4.0) == std::vector<std::size_t>{14000, 1400},
         "required samples");
  const std::vector<std::vector<std::vector<double>>> vs{{{0.04}, {0.01}}};
  const std::vector<double> p{0.3, 0.7};
  const std::vector<std::vector<double>> ws{{1.0, 2.0}};
  expect(estimators::required_samples_smlmc(vs, p, ws, 0.01, 2.0).at(0) == std::vector<std::size_t>{191, 158},
         "stratified required samples");

  const std::vector<double> small{0.003}, large{0.004};
  expect(!estimators::stopping_check(0, small, 0.005, 7) && estimators::stopping_check(1, small, 0.005, 7) &&
             !estimators::stopping_check(1, large, 0.005, 7) && estimators::stopping_check(7, large, 0.005, 7),
         "stopping truth table");

  const auto c = config::preset("diffusion");
  const auto one = inputs::build_equal_width_strata(dist, 1);
  for (auto kind : {smoothing::SmootherKind::none, smoothing::SmootherKind::kde}) {
    estimators::RunConfig rc;
    rc.epsilon = 0.02;
    rc.seed = 17;
    rc.smoother = kind;
    rc.warmup = kind == smoothing::SmootherKind::none ? 200 : 50;
    const auto a = estimators::run_mlmc(c.model, c.hierarchy, dist, c.grid, rc);
    const auto b = estimators::run_smlmc(c.model, c.hierarchy, dist, one, c.grid, rc);
    expect(a.estimate.raw() == b.estimate.raw() && a.n_history == b.n_history, "r=1 sMLMC == MLMC");
  }
  std::string detail = bad.empty() ? "all checks exact" : "failed:";
  for (const auto& b : bad) detail += " " + b + ";";
  return {bad.empty(), detail};
}

double burgers_l1_difference(double u1, int cells) {
  const auto coarse = models::solve_burgers(u1, cells);
  const auto fine = models::solve_burgers(u1, 2 * cells);
  double sum = 0.0;
  for (int i = 0; i < cells; ++i) sum += std::abs(coarse.u[i] - 0.5 * (fine.u[2 * i] + fine.u[2 * i + 1])) * coarse.dx;
  return sum;
}

Outcome solver_orders() {
  const auto model = models::ModelSpec::diffusion();
  double diffusion_order = 10.0;
  for (double d : {1.0, 2.5, 4.0}) {
    const double q1 = models::evaluate(model, d, 256).value;
    const double q2 = models::evaluate(model, d, 512).value;
    const double q3 = models::evaluate(model, d, 1024).value;
    diffusion_order = std::min(diffusion_order, std::log2(std::abs(q1 - q2) / std::abs(q2 - q3)));
  }
  double lo = 10.0, hi = 0.0, residual = 0.0;
  for (double u : {0.0, 0.5, 1.0, 1.5, 2.0}) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int k = 0;
    for (int m = 64; m <= 1024; m *= 2, ++k) {
      const double xv = std::log2(m), yv = std::log2(burgers_l1_difference(u, m));
      sx += xv, sy += yv, sxx += xv * xv, sxy += xv * yv;
    }
    const double order = -(k * sxy - sx * sy) / (k * sxx - sx * sx);
    lo = std::min(lo, order);
    hi = std::max(hi, order);
    models::BurgersDiagnostics diag;
    models::solve_burgers(u, 512, 0.5, 0.9, 2.0, &diag);
    residual = std::max(residual, diag.max_conservation_residual);
  }
  const bool a = diffusion_order >= 1.9, b = lo >= 0.6 && hi <= 1.1, c = residual < 1e-10;
  return {a && b && c, fmt::format("diffusion order min {:.3f}; burgers L1 order [{:.3f}, {:.3f}]; "
                                   "conservation residual {:.2g}",
                                   diffusion_order, lo, hi, residual)};
}

Outcome statistics() {
  const inputs::TruncatedLognormal dist(3.0, 3.0, 1.0, 4.0);
  Substream stream(StreamKey{2024, 0, 0, 0});
  std::vector<double> draws(100000);
  for (auto& x : draws) x = dist.sample(stream);
  std::sort(draws.begin(), draws.end());
  double ks = 0.0;
  const double n = static_cast<double>(draws.size());
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const double f = dist.cdf(draws[i]);
    ks = std::max({ks, std::abs((i + 1) / n - f), std::abs(f - i / n)});
  }

  const auto strat = inputs::build_equal_width_strata(dist, 8);
  std::vector<inputs::StratumStats> stats;
  for (std::size_t i = 0; i < strat.size(); ++i) {
    Substream s(StreamKey{2024, 0, 0, static_cast<std::uint32_t>(i + 1)});
    std::vector<double> q(500);
    for (auto& v : q) v = models::evaluate(models::ModelSpec::diffusion(), inputs::sample_stratum(dist, strat, i, s), 32).value;
    stats.push_back(inputs::stratum_stats(q));
  }
  const std::size_t budget = 1000;
  const double within = inputs::proportional_stratified_variance(strat.probs, stats, budget);
  const double plain = inputs::plain_mc_variance(strat.probs, stats, budget);
  double mean = 0.0, between = 0.0;
  for (std::size_t i = 0; i < strat.size(); ++i) mean += strat.probs[i] * stats[i].mean;
  for (std::size_t i = 0; i < strat.size(); ++i) between += strat.probs[i] * std::pow(stats[i].mean - mean, 2);
  const double identity = std::abs(plain - within - between / budget);
  const bool a = ks < 0.01, b = within <= plain, c = identity < 1e-10;
  return {a && b && c, fmt::format("KS distance {:.4f}; stratified/plain variance {:.3g}; identity residual {:.2g}",
                                   ks, within / plain, identity)};
}

Outcome determinism() {
  auto c = base("diffusion", 0.02, 2,
                {Method::mlmc, Method::mc, Method::mlmc_giles, Method::mlmc_kde, Method::smlmc, Method::smlmc_kde});
  c.reference.mesh_cells = 256;
  c.reference.w_intervals = 64;
  const auto root = std::filesystem::temp_directory_path() / "mlcdf_acceptance_determinism";
  std::filesystem::remove_all(root);
  experiment::Options first, second;
  first.out = root / "a";
  second.out = root / "b";
  first.plot_data = second.plot_data = true;
  experiment::run(c, first);
  experiment::run(c, second);
  std::size_t files = 0, differing = 0;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(first.out)) {
    if (entry.path().extension() != ".csv") continue;
    ++files;
    const auto other = second.out / std::filesystem::relative(entry.path(), first.out);
    if (!std::filesystem::exists(other) || report::read_text(entry.path()) != report::read_text(other)) ++differing;
  }
  std::filesystem::remove_all(root);
  return {files > 0 && differing == 0, fmt::format("{} CSV files compared, {} differ", files, differing)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path cache = argc > 1 ? argv[1] : "acceptance_cache";

  run_criterion(5, "exactness suite", exactness);
  run_criterion(6, "solver orders", solver_orders);
  run_criterion(7, "statistical soundness", statistics);
  run_criterion(8, "determinism", determinism);
  run_criterion(1, "accuracy vs reference, diffusion, eps=0.01, 10 runs", [&] { return accuracy(cache); });

  MatrixResult diffusion;
  bool have = false;
  const auto diffusion_runs = [&]() -> const MatrixResult& {
    if (!have) {
      diffusion = run_matrix(base("diffusion", 0.005, 10,
                                  {Method::mlmc, Method::mc, Method::mlmc_giles, Method::mlmc_kde, Method::smlmc,
                                   Method::smlmc_kde}));
      have = true;
    }
    return diffusion;
  };
  run_criterion(2, "cost ordering, diffusion, eps=0.005, 10 runs", [&] { return cost_ordering(diffusion_runs()); });
  run_criterion(3, "KDE cost <= Giles cost at eps=0.005, both presets",
                [&] { return kde_vs_giles(diffusion_runs()); });
  run_criterion(4, "variance decay and stratified reduction, eps=0.005",
                [&] { return variance_decay(diffusion_runs()); });

  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
