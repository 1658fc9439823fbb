#include "fbethe/minimizer.hpp"

#include "fbethe/exact.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace fbethe {

std::string_view to_string(MinimizeStatus s) {
  switch (s) {
    case MinimizeStatus::Converged: return "Converged";
    case MinimizeStatus::Diverged: return "Diverged";
    case MinimizeStatus::IterationCap: return "IterationCap";
    case MinimizeStatus::DomainEscape: return "DomainEscape";
  }
  return "Unknown";
}

void NewtonOptions::check() const {
  if (!(tolerance > 0.0)) throw UsageError("newton: tolerance must be positive");
  if (max_iterations < 1) throw UsageError("newton: max_iterations must be at least 1");
  if (!(armijo > 0.0 && armijo < 1.0)) throw UsageError("newton: armijo constant must lie in (0, 1)");
  if (!(shrink > 0.0 && shrink < 1.0)) throw UsageError("newton: shrink factor must lie in (0, 1)");
  if (max_halvings < 1) throw UsageError("newton: max_halvings must be at least 1");
  if (!(max_log_step > 0.0)) throw UsageError("newton: max_log_step must be positive");
}

namespace {

// Newton direction with negative/zero curvature replaced by |λ| (floored).
Vector descent_direction(const Matrix& H, const Vector& g) {
  Eigen::LLT<Matrix> llt(H);
  if (llt.info() == Eigen::Success) return -llt.solve(g);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(H);
  const Vector& lam = eig.eigenvalues();
  const double floor = 1e-8 * std::max(1.0, lam.cwiseAbs().maxCoeff());
  const Vector inv = lam.cwiseAbs().cwiseMax(floor).cwiseInverse();
  const Matrix& V = eig.eigenvectors();
  return -(V * inv.asDiagonal() * (V.transpose() * g));
}

}  // namespace

MinimizeResult newton_minimize(const NormalizedModel& model, const AlphaAssignment& alphas,
                               const Vector& init_sigma, const NewtonOptions& opts) {
  opts.check();
  alphas.check_matches(model.base());
  if (init_sigma.size() != model.n()) throw UsageError("newton: init_sigma has the wrong length");
  if (!(init_sigma.array() > 0.0).all()) throw UsageError("newton: init_sigma must be positive");

  const Vector m = optimal_mean(model);
  Vector s = init_sigma.array().log();
  MinimizeResult result;

  auto finish = [&](MinimizeStatus status, const Vector& sigma, double value, double grad_norm, int iterations) {
    result.status = status;
    result.value = {value};
    result.grad_norm = grad_norm;
    result.iterations = iterations;
    if (sigma.allFinite() && (sigma.array() > 0.0).all()) {
      result.moments = constrained_moments(model, alphas, m, sigma);
    } else {
      result.moments = Moments{m, sigma, {}};
    }
    return result;
  };

  for (int it = 0;; ++it) {
    const Vector sigma = s.array().exp();
    if (!sigma.allFinite() || !(sigma.array() > 0.0).all())
      return finish(MinimizeStatus::Diverged, sigma, -std::numeric_limits<double>::infinity(),
                    std::numeric_limits<double>::infinity(), it);

    const LogSigmaDerivatives d = log_sigma_derivatives(model, alphas, m, sigma);
    const double gnorm = d.gradient.lpNorm<Eigen::Infinity>();
    if (opts.trace) result.trace.push_back({it, d.value, gnorm});
    if (!std::isfinite(d.value) || d.value < opts.value_floor)
      return finish(MinimizeStatus::Diverged, sigma, d.value, gnorm, it);
    if (gnorm <= opts.tolerance) return finish(MinimizeStatus::Converged, sigma, d.value, gnorm, it);
    if (it == opts.max_iterations) return finish(MinimizeStatus::IterationCap, sigma, d.value, gnorm, it);

    Vector p = descent_direction(d.hessian, d.gradient);
    const double pmax = p.lpNorm<Eigen::Infinity>();
    if (pmax > opts.max_log_step) p *= opts.max_log_step / pmax;
    const double slope = d.gradient.dot(p);
    // Round-off allowance: near the optimum the predicted decrease drops
    // below the precision of the value itself.
    const double noise = 1e-14 * (1.0 + std::abs(d.value));

    double step = 1.0;
    bool accepted = false;
    for (int k = 0; k < opts.max_halvings; ++k, step *= opts.shrink) {
      const Vector trial_sigma = (s + step * p).array().exp();
      if (!trial_sigma.allFinite()) continue;
      const double f = f_constrained(model, alphas, m, trial_sigma).value;
      if (std::isfinite(f) && f <= d.value + opts.armijo * step * slope + noise) {
        accepted = true;
        break;
      }
    }
    if (!accepted) return finish(MinimizeStatus::IterationCap, sigma, d.value, gnorm, it);
    s += step * p;
  }
}

std::vector<Vector> make_inits(const NormalizedModel& model, const SpectralResult& spectrum,
                               const std::vector<double>& t_values) {
  std::vector<Vector> inits;
  inits.reserve(t_values.size() + 2);
  for (double t : t_values) {
    if (!(t > 0.0)) throw UsageError("make_inits: t values must be positive");
    inits.push_back(t * spectrum.u_max);
  }
  inits.push_back(Vector::Ones(model.n()));
  inits.push_back(exact_marginals(model.base()).sigma);
  return inits;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi >= lo) || n < 1) throw UsageError("log_grid: need 0 < lo <= hi and n >= 1");
  std::vector<double> grid(static_cast<std::size_t>(n));
  if (n == 1) {
    grid[0] = lo;
    return grid;
  }
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int k = 0; k < n; ++k) grid[static_cast<std::size_t>(k)] = std::pow(10.0, a + (b - a) * k / (n - 1));
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

std::optional<RayMinimum> find_local_minimum_on_ray(const NormalizedModel& model, const AlphaAssignment& alphas,
                                                    const Vector& direction, const RaySearchOptions& opts) {
  if (opts.points < 3) throw UsageError("find_local_minimum_on_ray: need at least 3 grid points");
  const std::vector<double> grid = log_grid(opts.t_min, opts.t_max, opts.points);
  const std::vector<RayPoint> scan = ray_scan(model, alphas, direction, grid);
  const Vector m = optimal_mean(model);
  auto g = [&](double t) { return f_constrained(model, alphas, m, t * direction).value; };

  for (std::size_t k = 1; k + 1 < scan.size(); ++k) {
    if (!(scan[k].value < scan[k - 1].value && scan[k + 1].value > scan[k].value)) continue;

    // Golden-section in log t over the bracketing grid cells.
    constexpr double kInvPhi = 0.6180339887498949;
    double a = std::log(scan[k - 1].t);
    double b = std::log(scan[k + 1].t);
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = g(std::exp(c));
    double fd = g(std::exp(d));
    while (std::exp(b) - std::exp(a) > opts.t_tolerance && b - a > 1e-15) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - kInvPhi * (b - a);
        fc = g(std::exp(c));
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + kInvPhi * (b - a);
        fd = g(std::exp(d));
      }
    }
    const double t = std::exp(0.5 * (a + b));
    return RayMinimum{t, g(t)};
  }
  return std::nullopt;
}

}  // namespace fbethe
