#pragma once

#include <span>
#include <string>
#include <vector>

#include "mlcdf/models.hpp"

namespace mlcdf::smoothing {

/// Polynomial g of degree <= d+1 with g(-1) = 1, g(1) = 0 and
/// int_{-1}^{1} s^k g(s) ds = (-1)^k/(k+1) for k < d, extended by 1 left of
/// -1 and by 0 right of 1. Coefficients are in increasing powers of s.
class GilesPolynomial {
 public:
  /// Throws std::domain_error for d < 0 and std::runtime_error when the
  /// moment system is singular or the solved polynomial misses its
  /// conditions.
  static GilesPolynomial build(int degree_d);

  int degree_d() const { return degree_d_; }
  const std::vector<double>& coeffs() const { return coeffs_; }

  double operator()(double s) const;

 private:
  GilesPolynomial(int d, std::vector<double> coeffs) : degree_d_(d), coeffs_(std::move(coeffs)) {}

  int degree_d_;
  std::vector<double> coeffs_;
};

/// Standard normal CDF.
double gaussian_cdf(double s);

enum class SmootherKind { none, giles, kde };

std::string to_string(SmootherKind kind);
SmootherKind smoother_kind_from_string(const std::string& name);

/// Replacement for the indicator 1{Q <= q_n}: either the indicator itself,
/// g_G((Q - q_n)/delta) or Phi((q_n - Q)/delta).
class Smoother {
 public:
  static Smoother indicator() { return Smoother(SmootherKind::none, GilesPolynomial::build(0)); }
  static Smoother giles(int degree_d) {
    return Smoother(SmootherKind::giles, GilesPolynomial::build(degree_d));
  }
  static Smoother kde() { return Smoother(SmootherKind::kde, GilesPolynomial::build(0)); }
  static Smoother make(SmootherKind kind, int degree_d);

  SmootherKind kind() const { return kind_; }
  const GilesPolynomial& polynomial() const { return giles_; }

  double value(double q_value, double node, double delta) const;

 private:
  Smoother(SmootherKind kind, GilesPolynomial giles) : kind_(kind), giles_(std::move(giles)) {}

  SmootherKind kind_;
  GilesPolynomial giles_;
};

/// g_n(Y_l) for one coupled sample: smoothed fine term minus smoothed coarse
/// term, or the fine term alone at level 0.
double smoothed_term(const Smoother& smoother, double delta, double node,
                     const models::LevelPair& pair);

/// |(1/N) sum_j [g(Q_j; q_n, delta) - 1{Q_j <= q_n}]|
double discrepancy(const Smoother& smoother, std::span<const double> samples, double node,
                   double delta);

struct Bandwidth {
  double delta = 0.0;
  std::vector<double> per_node;
  /// whether the node's discrepancy reached eps/2 inside the bracket
  std::vector<bool> crossed;
};

/// Per node, finds the smallest root of discrepancy(delta) = eps/2 in
/// [1e-6 R, R], R the sample range (node span when all samples coincide):
/// a geometric scan locates the first crossing, bisection on log(delta)
/// refines it to 1e-3 relative width keeping the end still <= eps/2.
/// Nodes without a crossing get R and do not enter the level bandwidth,
/// which is the max over the remaining nodes (R if none remain).
Bandwidth calibrate_bandwidth(std::span<const double> samples, std::span<const double> nodes,
                              double epsilon, const Smoother& smoother);

}  // namespace mlcdf::smoothing
