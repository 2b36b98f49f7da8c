#include "mlcdf/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

namespace mlcdf::smoothing {

GilesPolynomial GilesPolynomial::build(int degree_d) {
  if (degree_d < 0) throw std::domain_error("Giles polynomial: d must be >= 0");
  const int n = degree_d + 2;
  Eigen::MatrixXd system = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);

  // g(1) = 0 and g(-1) = 1
  for (int m = 0; m < n; ++m) {
    system(0, m) = 1.0;
    system(1, m) = (m % 2 == 0) ? 1.0 : -1.0;
  }
  rhs(1) = 1.0;
  // int_{-1}^{1} s^(k+m) ds = 2/(k+m+1) for even k+m, else 0
  for (int k = 0; k < degree_d; ++k) {
    for (int m = 0; m < n; ++m) {
      system(2 + k, m) = ((k + m) % 2 == 0) ? 2.0 / (k + m + 1) : 0.0;
    }
    rhs(2 + k) = ((k % 2 == 0) ? 1.0 : -1.0) / (k + 1);
  }

  const auto lu = system.fullPivLu();
  if (!lu.isInvertible()) throw std::runtime_error("Giles polynomial: singular moment system");
  const Eigen::VectorXd solution = lu.solve(rhs);
  if ((system * solution - rhs).lpNorm<Eigen::Infinity>() > 1e-12) {
    throw std::runtime_error("Giles polynomial: moment conditions not satisfied");
  }
  return GilesPolynomial(degree_d, std::vector<double>(solution.data(), solution.data() + n));
}

double GilesPolynomial::operator()(double s) const {
  if (s < -1.0) return 1.0;
  if (s > 1.0) return 0.0;
  double value = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) value = value * s + *it;
  return value;
}

double gaussian_cdf(double s) { return 0.5 * std::erfc(-s / std::numbers::sqrt2); }

std::string to_string(SmootherKind kind) {
  switch (kind) {
    case SmootherKind::none: return "none";
    case SmootherKind::giles: return "giles";
    case SmootherKind::kde: return "kde";
  }
  return "none";
}

SmootherKind smoother_kind_from_string(const std::string& name) {
  if (name == "none") return SmootherKind::none;
  if (name == "giles") return SmootherKind::giles;
  if (name == "kde") return SmootherKind::kde;
  throw std::invalid_argument("unknown smoother '" + name + "'");
}

Smoother Smoother::make(SmootherKind kind, int degree_d) {
  switch (kind) {
    case SmootherKind::giles: return giles(degree_d);
    case SmootherKind::kde: return kde();
    case SmootherKind::none: break;
  }
  return indicator();
}

double Smoother::value(double q_value, double node, double delta) const {
  switch (kind_) {
    case SmootherKind::giles:
      return giles_((q_value - node) / delta);
    case SmootherKind::kde: {
      // Phi saturates to within 1e-15 of 0 or 1 beyond |s| = 8.
      const double s = (node - q_value) / delta;
      if (s > 8.0) return 1.0;
      if (s < -8.0) return 0.0;
      return gaussian_cdf(s);
    }
    case SmootherKind::none:
      break;
  }
  return q_value <= node ? 1.0 : 0.0;
}

double smoothed_term(const Smoother& smoother, double delta, double node,
                     const models::LevelPair& pair) {
  const double fine = smoother.value(pair.fine, node, delta);
  if (!pair.coarse) return fine;
  return fine - smoother.value(*pair.coarse, node, delta);
}

double discrepancy(const Smoother& smoother, std::span<const double> samples, double node,
                   double delta) {
  double sum = 0.0;
  for (double q : samples) sum += smoother.value(q, node, delta) - (q <= node ? 1.0 : 0.0);
  return std::abs(sum / static_cast<double>(samples.size()));
}

Bandwidth calibrate_bandwidth(std::span<const double> samples, std::span<const double> nodes,
                              double epsilon, const Smoother& smoother) {
  if (samples.empty()) throw std::domain_error("calibrate_bandwidth: no samples");
  if (!(epsilon > 0.0)) throw std::domain_error("calibrate_bandwidth: epsilon must be positive");
  if (nodes.empty()) throw std::domain_error("calibrate_bandwidth: no nodes");

  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  double range = *hi_it - *lo_it;
  if (!(range > 0.0)) {
    const auto [a, b] = std::minmax_element(nodes.begin(), nodes.end());
    range = std::max(*b - *a, 1.0);
  }
  const double target = 0.5 * epsilon;
  const double bracket_lo = 1e-6 * range;
  const double bracket_hi = range;
  constexpr int kScanPoints = 120;
  const double step = std::log(bracket_hi / bracket_lo) / kScanPoints;

  Bandwidth out;
  out.per_node.reserve(nodes.size());
  out.crossed.reserve(nodes.size());
  for (double node : nodes) {
    const auto excess = [&](double delta) {
      return discrepancy(smoother, samples, node, delta) - target;
    };
    // Smallest root: scan upward for the first bracket, then bisect it.
    double log_lo = std::log(bracket_lo);
    double log_hi = log_lo;
    bool crossed = excess(bracket_lo) > 0.0;
    for (int k = 1; k <= kScanPoints && !crossed; ++k) {
      log_lo = log_hi;
      log_hi = std::log(bracket_lo) + k * step;
      crossed = excess(std::exp(log_hi)) > 0.0;
    }
    double delta = bracket_hi;
    if (crossed && log_hi > log_lo) {
      while (std::exp(log_hi - log_lo) - 1.0 > 1e-3) {
        const double mid = 0.5 * (log_lo + log_hi);
        if (excess(std::exp(mid)) <= 0.0) {
          log_lo = mid;
        } else {
          log_hi = mid;
        }
      }
      delta = std::exp(log_lo);
    } else if (crossed) {
      delta = bracket_lo;
    }
    out.per_node.push_back(delta);
    out.crossed.push_back(crossed);
  }
  double widest = 0.0;
  bool any = false;
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    if (out.crossed[n]) {
      widest = std::max(widest, out.per_node[n]);
      any = true;
    }
  }
  out.delta = any ? widest : bracket_hi;
  return out;
}

}  // namespace mlcdf::smoothing
