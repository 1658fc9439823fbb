#pragma once

#include "fbethe/diagnostics.hpp"
#include "fbethe/free_energy.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace fbethe {

enum class MinimizeStatus { Converged, Diverged, IterationCap, DomainEscape };

std::string_view to_string(MinimizeStatus s);

struct NewtonOptions {
  double tolerance = 1e-9;  // on ‖∂F/∂log σ‖∞
  int max_iterations = 500;
  double value_floor = -1e12;
  double armijo = 1e-4;
  double shrink = 0.5;
  int max_halvings = 60;
  double max_log_step = 2.0;  // ‖Δ log σ‖∞ cap per iteration
  bool trace = false;

  void check() const;
};

struct TraceEntry {
  int iteration = 0;
  double value = 0.0;
  double grad_norm = 0.0;
};

struct MinimizeResult {
  MinimizeStatus status = MinimizeStatus::IterationCap;
  Moments moments;
  FreeEnergyValue value;
  int iterations = 0;
  double grad_norm = 0.0;
  std::vector<TraceEntry> trace;
};

/// Minimizes f_constrained over σ with m fixed at J⁻¹h. Damped Newton on
/// s = log σ using the exact Hessian, with negative curvature flipped by an
/// eigenvalue modification and an Armijo backtracking line search.
MinimizeResult newton_minimize(const NormalizedModel& model, const AlphaAssignment& alphas,
                               const Vector& init_sigma, const NewtonOptions& opts = {});

/// {t·u_max for each t} followed by σ = 1 and the exact marginal σ.
std::vector<Vector> make_inits(const NormalizedModel& model, const SpectralResult& spectrum,
                               const std::vector<double>& t_values);

struct RayMinimum {
  double t = 0.0;
  double value = 0.0;
};

struct RaySearchOptions {
  double t_min = 1e-2;
  double t_max = 1e3;
  int points = 400;
  double t_tolerance = 1e-10;
};

/// First interior local minimum of g(t) = f_constrained(J⁻¹h, t·direction) on a
/// log-spaced grid, refined by golden-section search in log t.
std::optional<RayMinimum> find_local_minimum_on_ray(const NormalizedModel& model, const AlphaAssignment& alphas,
                                                    const Vector& direction, const RaySearchOptions& opts = {});

/// n points log-spaced from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, int n);

}  // namespace fbethe
