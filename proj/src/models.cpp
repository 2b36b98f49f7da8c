#include "mlcdf/models.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace mlcdf::models {

int MeshHierarchy::cells(int level) const {
  if (level < 0 || level > l_star) throw std::domain_error("mesh hierarchy: level out of range");
  long long m = m0;
  for (int l = 0; l < level; ++l) m *= factor;
  return static_cast<int>(m);
}

std::string to_string(ModelId id) { return id == ModelId::diffusion ? "diffusion" : "burgers"; }

ModelId model_id_from_string(const std::string& name) {
  if (name == "diffusion") return ModelId::diffusion;
  if (name == "burgers") return ModelId::burgers;
  throw std::invalid_argument("unknown model '" + name + "'");
}

ModelSpec ModelSpec::diffusion() { return ModelSpec{ModelId::diffusion, 0.2, 10.0, 4.0, 0.9}; }

ModelSpec ModelSpec::burgers() { return ModelSpec{ModelId::burgers, 0.5, 10.0, 2.0, 0.9}; }

std::vector<double> thomas_solve(std::span<const double> lower, std::span<const double> diag,
                                 std::span<const double> upper, std::span<const double> rhs) {
  const std::size_t n = diag.size();
  if (rhs.size() != n || (n > 0 && (lower.size() != n - 1 || upper.size() != n - 1))) {
    throw std::invalid_argument("thomas_solve: inconsistent system sizes");
  }
  if (n == 0) return {};

  std::vector<double> c(n);
  std::vector<double> x(n);
  double pivot = diag[0];
  if (pivot == 0.0) throw NumericalFailure("thomas_solve: zero pivot");
  c[0] = n > 1 ? upper[0] / pivot : 0.0;
  x[0] = rhs[0] / pivot;
  for (std::size_t i = 1; i < n; ++i) {
    pivot = diag[i] - lower[i - 1] * c[i - 1];
    if (pivot == 0.0) throw NumericalFailure("thomas_solve: zero pivot");
    c[i] = i + 1 < n ? upper[i] / pivot : 0.0;
    x[i] = (rhs[i] - lower[i - 1] * x[i - 1]) / pivot;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= c[i] * x[i + 1];
  return x;
}

namespace {

// One implicit step (I - theta*lambda*A) u_new = (I + (1-theta)*lambda*A) u
// on the interior nodes; boundary nodes are fixed.
void theta_step(std::vector<double>& u, double lambda, double theta) {
  const std::size_t interior = u.size() - 2;
  const double left = u.front();
  const double right = u.back();
  const double implicit = theta * lambda;
  const double explicit_part = (1.0 - theta) * lambda;

  std::vector<double> off(interior - 1, -implicit);
  std::vector<double> diag(interior, 1.0 + 2.0 * implicit);
  std::vector<double> rhs(interior);
  for (std::size_t k = 0; k < interior; ++k) {
    const std::size_t j = k + 1;
    rhs[k] = u[j] + explicit_part * (u[j - 1] - 2.0 * u[j] + u[j + 1]);
  }
  rhs.front() += implicit * left;
  rhs.back() += implicit * right;

  const auto next = thomas_solve(off, diag, off, rhs);
  std::copy(next.begin(), next.end(), u.begin() + 1);
}

}  // namespace

Field solve_diffusion(double diffusivity, int cells, double final_time, double length) {
  if (cells < 2) throw std::domain_error("solve_diffusion: need at least 2 cells");
  if (!(diffusivity > 0.0) || !(final_time > 0.0)) {
    throw std::domain_error("solve_diffusion: diffusivity and final time must be positive");
  }
  Field field;
  field.dx = length / cells;
  field.u.resize(static_cast<std::size_t>(cells) + 1);
  const double centre = 0.5 * length;
  for (int j = 0; j <= cells; ++j) field.u[j] = std::tanh((j * field.dx - centre) / 0.05);
  field.u.front() = -1.0;
  field.u.back() = 1.0;

  // dt = dx, shortened so that an integer number of steps lands on T.
  const int steps = std::max(1, static_cast<int>(std::ceil(final_time / field.dx - 1e-9)));
  const double dt = final_time / steps;
  const double lambda = diffusivity * dt / (field.dx * field.dx);

  theta_step(field.u, 0.5 * lambda, 1.0);
  theta_step(field.u, 0.5 * lambda, 1.0);
  for (int n = 1; n < steps; ++n) theta_step(field.u, lambda, 0.5);

  field.steps = steps + 1;
  field.work = static_cast<std::uint64_t>(cells) * static_cast<std::uint64_t>(field.steps);
  for (double v : field.u) {
    if (!std::isfinite(v)) throw NumericalFailure("solve_diffusion: non-finite solution");
  }
  return field;
}

double godunov_flux(double u_left, double u_right) {
  const auto f = [](double u) { return 0.5 * u * u; };
  if (u_left > u_right) {
    // shock with speed (uL + uR)/2
    return u_left + u_right >= 0.0 ? f(u_left) : f(u_right);
  }
  if (u_left >= 0.0) return f(u_left);
  if (u_right <= 0.0) return f(u_right);
  return 0.0;
}

Field solve_burgers(double u1, int cells, double final_time, double cfl, double length,
                    BurgersDiagnostics* diagnostics) {
  if (cells < 2) throw std::domain_error("solve_burgers: need at least 2 cells");
  if (!(final_time > 0.0) || !(cfl > 0.0 && cfl <= 1.0)) {
    throw std::domain_error("solve_burgers: need T > 0 and 0 < cfl <= 1");
  }
  constexpr double inflow = 2.0;
  constexpr double outflow = 0.0;

  Field field;
  field.dx = length / cells;
  const double dx = field.dx;
  const double jump = 0.5 * length;
  auto& u = field.u;
  u.resize(static_cast<std::size_t>(cells));
  for (int i = 0; i < cells; ++i) {
    const double left = i * dx;
    const double covered = std::clamp(jump - left, 0.0, dx);
    u[i] = u1 * covered / dx;
  }

  BurgersDiagnostics diag;
  diag.min_value = *std::min_element(u.begin(), u.end());
  diag.max_value = *std::max_element(u.begin(), u.end());

  std::vector<double> flux(static_cast<std::size_t>(cells) + 1);
  double t = 0.0;
  int steps = 0;
  while (t < final_time) {
    double speed = inflow;
    for (double v : u) speed = std::max(speed, std::abs(v));
    double dt = cfl * dx / speed;
    if (t + dt >= final_time * (1.0 - 1e-12)) dt = final_time - t;
    if (dt * speed > dx * (1.0 + 1e-12)) throw NumericalFailure("solve_burgers: CFL violated");

    flux.front() = godunov_flux(inflow, u.front());
    for (int i = 1; i < cells; ++i) flux[i] = godunov_flux(u[i - 1], u[i]);
    flux.back() = godunov_flux(u.back(), outflow);

    double mass_before = 0.0;
    if (diagnostics) {
      for (double v : u) mass_before += v;
      mass_before *= dx;
    }
    const double ratio = dt / dx;
    for (int i = 0; i < cells; ++i) u[i] -= ratio * (flux[i + 1] - flux[i]);

    if (diagnostics) {
      double mass_after = 0.0;
      for (double v : u) mass_after += v;
      mass_after *= dx;
      const double expected = (flux.front() - flux.back()) * dt;
      diag.max_conservation_residual =
          std::max(diag.max_conservation_residual, std::abs(mass_after - mass_before - expected));
      diag.min_value = std::min(diag.min_value, *std::min_element(u.begin(), u.end()));
      diag.max_value = std::max(diag.max_value, *std::max_element(u.begin(), u.end()));
    }
    t = (dt == final_time - t) ? final_time : t + dt;
    ++steps;
  }

  for (double v : u) {
    if (!std::isfinite(v)) throw NumericalFailure("solve_burgers: non-finite solution");
  }
  field.steps = steps;
  field.work = static_cast<std::uint64_t>(cells) * static_cast<std::uint64_t>(steps);
  if (diagnostics) *diagnostics = diag;
  return field;
}

double qoi(std::span<const double> field, double cell_width, double scale, Quadrature rule) {
  double sum = 0.0;
  if (rule == Quadrature::midpoint_cells) {
    for (double v : field) sum += v * v;
  } else {
    if (field.size() < 2) return 0.0;
    for (std::size_t j = 1; j + 1 < field.size(); ++j) sum += field[j] * field[j];
    sum += 0.5 * (field.front() * field.front() + field.back() * field.back());
  }
  return scale * cell_width * sum;
}

Field solve(const ModelSpec& model, double w, int cells) {
  if (model.id == ModelId::diffusion) {
    return solve_diffusion(w, cells, model.final_time, model.domain_length);
  }
  return solve_burgers(w, cells, model.final_time, model.cfl, model.domain_length);
}

Evaluation evaluate(const ModelSpec& model, double w, int cells) {
  const auto start = std::chrono::steady_clock::now();
  const Field field = solve(model, w, cells);
  const auto rule =
      model.id == ModelId::diffusion ? Quadrature::trapezoid_nodes : Quadrature::midpoint_cells;
  Evaluation out;
  out.value = qoi(field.u, field.dx, model.qoi_scale, rule);
  out.work = field.work;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

LevelPair sample_pair(const ModelSpec& model, const MeshHierarchy& hierarchy, double w, int level) {
  LevelPair pair;
  pair.level = level;
  pair.input_w = w;
  const Evaluation fine = evaluate(model, w, hierarchy.cells(level));
  pair.fine = fine.value;
  pair.fine_work = fine.work;
  pair.fine_seconds = fine.seconds;
  pair.work = fine.work;
  pair.seconds = fine.seconds;
  if (level > 0) {
    const Evaluation coarse = evaluate(model, w, hierarchy.cells(level - 1));
    pair.coarse = coarse.value;
    pair.work += coarse.work;
    pair.seconds += coarse.seconds;
  }
  return pair;
}

}  // namespace mlcdf::models
