#include "mlcdf/cdf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mlcdf/parallel.hpp"

namespace mlcdf::cdf {

std::vector<double> NodeGrid::nodes() const {
  std::vector<double> out(size());
  for (int n = 0; n <= s_count; ++n) out[n] = node(n);
  return out;
}

NaturalCubicSpline::NaturalCubicSpline(const NodeGrid& grid, std::span<const double> values)
    : grid_(grid), values_(values.begin(), values.end()) {
  if (values_.size() != grid.size()) throw std::domain_error("spline: one value per node required");
  if (values_.size() < 4) throw std::domain_error("spline: at least 4 nodes required");

  const std::size_t n = values_.size();
  const double h = grid.h();
  second_.assign(n, 0.0);
  const std::size_t interior = n - 2;
  std::vector<double> off(interior - 1, 1.0);
  std::vector<double> diag(interior, 4.0);
  std::vector<double> rhs(interior);
  for (std::size_t k = 0; k < interior; ++k) {
    rhs[k] = 6.0 / (h * h) * (values_[k + 2] - 2.0 * values_[k + 1] + values_[k]);
  }
  const auto inner = models::thomas_solve(off, diag, off, rhs);
  std::copy(inner.begin(), inner.end(), second_.begin() + 1);
}

double NaturalCubicSpline::operator()(double q) const {
  if (values_.empty()) return 0.0;
  if (q <= grid_.a) return values_.front();
  if (q >= grid_.b) return values_.back();
  const double h = grid_.h();
  const double pos = (q - grid_.a) / h;
  const auto i = std::min(static_cast<std::size_t>(pos), values_.size() - 2);
  const double t = pos - static_cast<double>(i);
  const double u = 1.0 - t;
  return u * values_[i] + t * values_[i + 1] +
         h * h / 6.0 * ((u * u * u - u) * second_[i] + (t * t * t - t) * second_[i + 1]);
}

std::vector<double> monotone_projection(std::span<const double> raw) {
  // Blocks of pooled values: (mean, weight).
  std::vector<double> mean;
  std::vector<std::size_t> weight;
  for (double v : raw) {
    mean.push_back(v);
    weight.push_back(1);
    while (mean.size() > 1 && mean[mean.size() - 2] > mean.back()) {
      const std::size_t w = weight[weight.size() - 2] + weight.back();
      const double m =
          (mean[mean.size() - 2] * weight[weight.size() - 2] + mean.back() * weight.back()) / w;
      mean.pop_back();
      weight.pop_back();
      mean.back() = m;
      weight.back() = w;
    }
  }
  std::vector<double> out;
  out.reserve(raw.size());
  for (std::size_t b = 0; b < mean.size(); ++b) {
    out.insert(out.end(), weight[b], std::clamp(mean[b], 0.0, 1.0));
  }
  return out;
}

CdfEstimate CdfEstimate::from_raw(const NodeGrid& grid, std::vector<double> raw, bool post_process,
                                  CdfMetadata metadata) {
  CdfEstimate est;
  est.grid_ = grid;
  est.raw_ = std::move(raw);
  est.values_ = post_process ? monotone_projection(est.raw_) : est.raw_;
  est.metadata_ = std::move(metadata);
  for (std::size_t n = 0; n < est.raw_.size(); ++n) {
    est.adjustment_ = std::max(est.adjustment_, std::abs(est.values_[n] - est.raw_[n]));
  }
  est.spline_ = NaturalCubicSpline(grid, est.values_);
  return est;
}

double sup_distance(const CdfEstimate& lhs, const CdfEstimate& rhs) {
  const auto& ga = lhs.grid();
  const auto& gb = rhs.grid();
  if (ga.a != gb.a || ga.b != gb.b) throw std::domain_error("sup_distance: different intervals");
  const int points = 10 * std::max(ga.s_count, gb.s_count);
  const double step = (ga.b - ga.a) / points;
  double worst = 0.0;
  for (int k = 0; k <= points; ++k) {
    const double q = k == points ? ga.b : ga.a + k * step;
    worst = std::max(worst, std::abs(lhs(q) - rhs(q)));
  }
  return worst;
}

double piecewise_linear_cdf(const inputs::TruncatedLognormal& dist, std::span<const double> inputs,
                            std::span<const double> qoi_values, double q, std::size_t stride) {
  double mass = 0.0;
  for (std::size_t k = 0; k + stride < inputs.size(); k += stride) {
    const double w0 = inputs[k];
    const double w1 = inputs[k + stride];
    const double q0 = qoi_values[k];
    const double q1 = qoi_values[k + stride];
    const bool below0 = q0 <= q;
    const bool below1 = q1 <= q;
    if (below0 && below1) {
      mass += dist.cdf(w1) - dist.cdf(w0);
    } else if (below0 != below1) {
      const double crossing = w0 + (q - q0) / (q1 - q0) * (w1 - w0);
      mass += below0 ? dist.cdf(crossing) - dist.cdf(w0) : dist.cdf(w1) - dist.cdf(crossing);
    }
  }
  return mass;
}

ReferenceCdf reference_cdf(const models::ModelSpec& model, const inputs::TruncatedLognormal& dist,
                           const NodeGrid& grid, const ReferenceOptions& options) {
  if (options.w_intervals < 2 || options.w_intervals % 2 != 0) {
    throw std::domain_error("reference_cdf: w_intervals must be even and >= 2");
  }
  ReferenceCdf out;
  out.options = options;
  const std::size_t count = static_cast<std::size_t>(options.w_intervals) + 1;
  out.inputs.resize(count);
  out.qoi_values.resize(count);
  const double width = (dist.w_hi() - dist.w_lo()) / options.w_intervals;
  for (std::size_t k = 0; k < count; ++k) out.inputs[k] = dist.w_lo() + k * width;
  out.inputs.back() = dist.w_hi();

  parallel_for(count, options.threads, [&](std::size_t k) {
    out.qoi_values[k] = models::evaluate(model, out.inputs[k], options.mesh_cells).value;
  });

  std::vector<double> values(grid.size());
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const double q = grid.node(static_cast<int>(n));
    values[n] = piecewise_linear_cdf(dist, out.inputs, out.qoi_values, q);
    const double coarse = piecewise_linear_cdf(dist, out.inputs, out.qoi_values, q, 2);
    out.convergence_delta = std::max(out.convergence_delta, std::abs(values[n] - coarse));
  }
  out.estimate = CdfEstimate::from_raw(grid, std::move(values), false, CdfMetadata{"reference", 0.0, 0});
  return out;
}

}  // namespace mlcdf::cdf
