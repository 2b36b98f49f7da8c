#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlcdf::models {

class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Geometric mesh hierarchy M_l = m0 * factor^l, l = 0..l_star.
struct MeshHierarchy {
  int m0 = 16;
  int factor = 2;
  int l_star = 7;

  int cells(int level) const;
};

enum class ModelId { diffusion, burgers };

std::string to_string(ModelId id);
ModelId model_id_from_string(const std::string& name);

/// Problem definition of one testbed. The defaults returned by diffusion()
/// and burgers() are the shipped problems; final_time and cfl may be tuned.
struct ModelSpec {
  ModelId id = ModelId::diffusion;
  double final_time = 0.2;
  double qoi_scale = 10.0;
  double domain_length = 4.0;
  /// Burgers only: dt = cfl * dx / max(|u|, inflow).
  double cfl = 0.9;

  static ModelSpec diffusion();
  static ModelSpec burgers();
};

/// Solution snapshot. For diffusion, `u` holds node values x_j = j*dx
/// (j = 0..cells) including both boundary nodes; for Burgers it holds the
/// cell averages of the `cells` control volumes.
struct Field {
  std::vector<double> u;
  double dx = 0.0;
  int steps = 0;
  /// cells x time steps, the deterministic work measure of one solve.
  std::uint64_t work = 0;
};

/// Solves the tridiagonal system with sub-diagonal `lower` (n-1 entries),
/// `diag` (n) and super-diagonal `upper` (n-1). Throws NumericalFailure on a
/// zero pivot.
std::vector<double> thomas_solve(std::span<const double> lower, std::span<const double> diag,
                                 std::span<const double> upper, std::span<const double> rhs);

/// u_t = D u_xx on (0, length) with u(0)=-1, u(length)=1 and
/// u(x,0) = tanh((length/2 - x)/0.05), central differences in space and
/// Crank-Nicolson in time with dt <= dx. The first step is replaced by two
/// implicit Euler half steps so the boundary/initial-data mismatch does not
/// leave undamped high-frequency modes.
Field solve_diffusion(double diffusivity, int cells, double final_time = 0.2, double length = 4.0);

/// Godunov flux for f(u) = u^2/2.
double godunov_flux(double u_left, double u_right);

struct BurgersDiagnostics {
  /// max over steps of |mass change - (F_left - F_right) dt|
  double max_conservation_residual = 0.0;
  double min_value = 0.0;
  double max_value = 0.0;
};

/// u_t + (u^2/2)_x = 0 on (0, length) with ghost cells u=2 (left) and
/// u=0 (right), initial data u1 on (0, length/2] and 0 beyond; first-order
/// Godunov with dt = cfl*dx/max(|u|, 2), last step clipped to land on T.
Field solve_burgers(double u1, int cells, double final_time = 0.5, double cfl = 0.9,
                    double length = 2.0, BurgersDiagnostics* diagnostics = nullptr);

enum class Quadrature { trapezoid_nodes, midpoint_cells };

/// scale * integral of u^2, from node values (trapezoid) or cell averages
/// (midpoint).
double qoi(std::span<const double> field, double cell_width, double scale, Quadrature rule);

/// Solves the model at the given resolution for input w.
Field solve(const ModelSpec& model, double w, int cells);

struct Evaluation {
  double value = 0.0;
  std::uint64_t work = 0;
  double seconds = 0.0;
};

/// Q_M(w) for one resolution, with its work and wall-clock time.
Evaluation evaluate(const ModelSpec& model, double w, int cells);

/// One coupled sample of level `level`: Q on M_level and, for level > 0,
/// Q on M_{level-1}, both from the same input w.
struct LevelPair {
  double fine = 0.0;
  std::optional<double> coarse;
  int level = 0;
  double input_w = 0.0;
  std::uint64_t work = 0;
  std::uint64_t fine_work = 0;
  double seconds = 0.0;
  double fine_seconds = 0.0;
};

LevelPair sample_pair(const ModelSpec& model, const MeshHierarchy& hierarchy, double w, int level);

}  // namespace mlcdf::models
