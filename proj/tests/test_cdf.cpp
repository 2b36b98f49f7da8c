#include <doctest.h>

#include <cmath>
#include <vector>

#include "mlcdf/cdf.hpp"

using namespace mlcdf;
using namespace mlcdf::cdf;

TEST_SUITE("cdf") {
  TEST_CASE("node grids of the presets") {
    const NodeGrid diffusion{14.0, 28.0, 28};
    CHECK(diffusion.size() == 29);
    CHECK(diffusion.h() == 0.5);
    CHECK(diffusion.node(0) == 14.0);
    CHECK(diffusion.node(28) == 28.0);
    const NodeGrid burgers{15.0, 65.0, 100};
    CHECK(burgers.size() == 101);
    CHECK(burgers.nodes()[50] == 40.0);
  }

  TEST_CASE("indicator") {
    CHECK(indicator(1.0, 1.0) == 1);
    CHECK(indicator(1.0, 1.0000001) == 0);
  }

  TEST_CASE("natural spline interpolates and reproduces lines") {
    const NodeGrid grid{0.0, 4.0, 8};
    std::vector<double> line, wiggle;
    for (double q : grid.nodes()) {
      line.push_back(2.0 * q - 1.0);
      wiggle.push_back(std::sin(q));
    }
    const NaturalCubicSpline s_line(grid, line);
    for (double q = 0.0; q <= 4.0; q += 0.05) CHECK(s_line(q) == doctest::Approx(2.0 * q - 1.0).epsilon(1e-12));
    const NaturalCubicSpline s_wiggle(grid, wiggle);
    for (int n = 0; n <= 8; ++n) CHECK(s_wiggle(grid.node(n)) == doctest::Approx(std::sin(grid.node(n))));
    CHECK(s_wiggle(-1.0) == s_wiggle(0.0));
    CHECK(s_wiggle(5.0) == s_wiggle(4.0));
    const NodeGrid tiny{0.0, 1.0, 2};
    const std::vector<double> three{0.0, 0.5, 1.0};
    CHECK_THROWS_AS(NaturalCubicSpline(tiny, three), std::domain_error);
  }

  TEST_CASE("monotone projection") {
    const std::vector<double> raw{-0.02, 0.1, 0.3, 0.25, 0.6, 1.03, 1.01};
    const auto p = monotone_projection(raw);
    for (std::size_t i = 1; i < p.size(); ++i) CHECK(p[i] >= p[i - 1]);
    CHECK(p.front() == 0.0);
    CHECK(p.back() == 1.0);
    CHECK(p[2] == doctest::Approx(0.275));
    CHECK(p[3] == doctest::Approx(0.275));
    const std::vector<double> sorted{0.0, 0.2, 0.7, 1.0};
    CHECK(monotone_projection(sorted) == sorted);
  }

  TEST_CASE("estimate keeps raw values and records the clipping") {
    const NodeGrid grid{0.0, 3.0, 3};
    const auto e = CdfEstimate::from_raw(grid, {-0.01, 0.4, 0.35, 1.0}, true, {"mlmc", 0.01, 4});
    CHECK(e.raw()[0] == -0.01);
    CHECK(e.values()[0] == 0.0);
    CHECK(e.clipping_adjustment() == doctest::Approx(0.025));
    CHECK(e.metadata().method == "mlmc");
    const auto raw = e.raw_estimate();
    CHECK(raw.values() == raw.raw());
  }

  TEST_CASE("sup distance") {
    const NodeGrid grid{0.0, 3.0, 3};
    const auto a = CdfEstimate::from_raw(grid, {0.0, 0.3, 0.6, 1.0}, false);
    const auto b = CdfEstimate::from_raw(grid, {0.0, 0.3, 0.7, 1.0}, false);
    CHECK(sup_distance(a, a) == 0.0);
    CHECK(sup_distance(a, b) >= 0.1 - 1e-15);
    CHECK(sup_distance(a, b) == sup_distance(b, a));
    const auto c = CdfEstimate::from_raw(NodeGrid{0.0, 4.0, 3}, {0.0, 0.3, 0.6, 1.0}, false);
    CHECK_THROWS_AS(sup_distance(a, c), std::domain_error);
  }

  TEST_CASE("piecewise linear cdf with the identity map is the input cdf") {
    const inputs::TruncatedLognormal d(3.0, 3.0, 1.0, 4.0);
    std::vector<double> w, q;
    for (int k = 0; k <= 16; ++k) {
      w.push_back(1.0 + 3.0 * k / 16.0);
      q.push_back(w.back());
    }
    for (double x : {1.0, 1.3, 2.0, 3.99, 4.0}) CHECK(piecewise_linear_cdf(d, w, q, x) == doctest::Approx(d.cdf(x)).epsilon(1e-12));
    CHECK(piecewise_linear_cdf(d, w, q, 0.5) == 0.0);
    CHECK(piecewise_linear_cdf(d, w, q, 5.0) == doctest::Approx(1.0));
  }

  TEST_CASE("piecewise linear cdf with a decreasing map") {
    const inputs::TruncatedLognormal d(3.0, 3.0, 1.0, 4.0);
    std::vector<double> w, q;
    for (int k = 0; k <= 8; ++k) {
      w.push_back(1.0 + 3.0 * k / 8.0);
      q.push_back(10.0 - w.back());
    }
    CHECK(piecewise_linear_cdf(d, w, q, 8.0) == doctest::Approx(1.0 - d.cdf(2.0)).epsilon(1e-12));
  }

  TEST_CASE("reference cdf is monotone with endpoints near 0 and 1") {
    const auto model = models::ModelSpec::diffusion();
    const inputs::TruncatedLognormal d(3.0, 3.0, 1.0, 4.0);
    const NodeGrid grid{14.0, 28.0, 28};
    ReferenceOptions options;
    options.mesh_cells = 256;
    options.w_intervals = 64;
    const auto ref = reference_cdf(model, d, grid, options);
    const auto& v = ref.estimate.raw();
    for (std::size_t n = 1; n < v.size(); ++n) CHECK(v[n] >= v[n - 1]);
    CHECK(v.front() == 0.0);
    CHECK(v.back() == doctest::Approx(1.0));
    CHECK(ref.convergence_delta < 1e-3);
    CHECK(ref.inputs.size() == 65);
    options.w_intervals = 63;
    CHECK_THROWS_AS(reference_cdf(model, d, grid, options), std::domain_error);
  }
}
