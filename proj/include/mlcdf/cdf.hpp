#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mlcdf/inputs.hpp"
#include "mlcdf/models.hpp"

namespace mlcdf::cdf {

/// S+1 equidistant interpolation nodes q_n = a + n h on [a, b].
struct NodeGrid {
  double a = 0.0;
  double b = 1.0;
  int s_count = 1;

  double h() const { return (b - a) / s_count; }
  double node(int n) const { return n == s_count ? b : a + n * h(); }
  std::size_t size() const { return static_cast<std::size_t>(s_count) + 1; }
  std::vector<double> nodes() const;
};

/// 1{Q <= q_n}
inline int indicator(double node, double q_value) { return q_value <= node ? 1 : 0; }

/// Natural cubic spline through (q_n, y_n) on a NodeGrid, held constant at
/// the end values outside [a, b].
class NaturalCubicSpline {
 public:
  NaturalCubicSpline() = default;
  /// Throws std::domain_error with fewer than 4 nodes.
  NaturalCubicSpline(const NodeGrid& grid, std::span<const double> values);

  double operator()(double q) const;

 private:
  NodeGrid grid_;
  std::vector<double> values_;
  std::vector<double> second_;
};

struct CdfMetadata {
  std::string method;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
};

/// Monotone nondecreasing least-squares projection (pool adjacent
/// violators) followed by clipping to [0, 1].
std::vector<double> monotone_projection(std::span<const double> raw);

/// CDF values at the nodes plus the spline through them. `raw` keeps the
/// estimator output; `values` are the post-processed ones the spline uses.
class CdfEstimate {
 public:
  CdfEstimate() = default;
  static CdfEstimate from_raw(const NodeGrid& grid, std::vector<double> raw,
                              bool post_process = true, CdfMetadata metadata = {});

  const NodeGrid& grid() const { return grid_; }
  const std::vector<double>& raw() const { return raw_; }
  const std::vector<double>& values() const { return values_; }
  const CdfMetadata& metadata() const { return metadata_; }
  /// max_n |values_n - raw_n|
  double clipping_adjustment() const { return adjustment_; }

  double operator()(double q) const { return spline_(q); }

  /// The same estimate without post-processing.
  CdfEstimate raw_estimate() const { return from_raw(grid_, raw_, false, metadata_); }

 private:
  NodeGrid grid_;
  std::vector<double> raw_;
  std::vector<double> values_;
  NaturalCubicSpline spline_;
  CdfMetadata metadata_;
  double adjustment_ = 0.0;
};

/// max |A(q) - B(q)| over a grid ten times denser than the finer of the two
/// node grids. Throws std::domain_error when the intervals differ.
double sup_distance(const CdfEstimate& lhs, const CdfEstimate& rhs);

struct ReferenceOptions {
  int mesh_cells = 8192;
  int w_intervals = 1024;
  unsigned threads = 0;
};

struct ReferenceCdf {
  CdfEstimate estimate;
  /// max over nodes of the change when every other input point is dropped
  double convergence_delta = 0.0;
  std::vector<double> inputs;
  std::vector<double> qoi_values;
  ReferenceOptions options;
};

/// Noise-free CDF of Q at the nodes: Q is evaluated on an equidistant
/// input grid at a fine mesh and interpolated linearly in w; the input
/// mass of {w : Q(w) <= q_n} is then integrated exactly with the input cdf.
ReferenceCdf reference_cdf(const models::ModelSpec& model, const inputs::TruncatedLognormal& dist,
                           const NodeGrid& grid, const ReferenceOptions& options);

/// Input mass of {w : Q(w) <= q} for the piecewise-linear Q through
/// (inputs, qoi_values), skipping every `stride`-th point.
double piecewise_linear_cdf(const inputs::TruncatedLognormal& dist, std::span<const double> inputs,
                            std::span<const double> qoi_values, double q, std::size_t stride = 1);

}  // namespace mlcdf::cdf
