#include "fbethe/free_energy.hpp"

#include <cmath>
#include <numbers>

namespace fbethe {

namespace {

constexpr double kRhoSquaredLimit = 1.0 - 1e-14;

double entropy_constant(int n) { return -0.5 * n * (std::log(2.0 * std::numbers::pi) + 1.0); }

void check_sigma(const Vector& sigma, int n, const char* who) {
  if (sigma.size() != n) throw UsageError(std::string(who) + ": sigma has the wrong length");
  for (Eigen::Index k = 0; k < sigma.size(); ++k) {
    if (!(sigma(k) > 0.0) || !std::isfinite(sigma(k)))
      throw DomainError(std::string(who) + ": sigma must be positive (node " + std::to_string(k) + ")");
  }
}

void check_mean(const Vector& m, int n, const char* who) {
  if (m.size() != n) throw UsageError(std::string(who) + ": m has the wrong length");
}

double mean_term(const NormalizedModel& model, const Vector& m) {
  return 0.5 * m.dot(model.J() * m) - model.h().dot(m);
}

// Shared scalar pieces of the constrained edge term: y = 2α|R|σᵢσⱼ,
// q = √(1 + y²), qm1 = q − 1 computed as y²/(1 + q).
struct EdgeScalars {
  double y;
  double q;
  double qm1;
};

EdgeScalars edge_scalars(double alpha, double coupling, double si, double sj) {
  const double y = 2.0 * alpha * std::abs(coupling) * si * sj;
  const double q = std::hypot(1.0, y);
  return {y, q, y * (y / (1.0 + q))};
}

// −(1/2α)[(q − 1) + log(2/(1 + q))]
double constrained_edge_value(double alpha, const EdgeScalars& s) {
  return -(s.qm1 - std::log1p(0.5 * s.qm1)) / (2.0 * alpha);
}

}  // namespace

double sigma_star(double alpha, double coupling, double sigma_i, double sigma_j) {
  const EdgeScalars s = edge_scalars(alpha, coupling, sigma_i, sigma_j);
  const double ss = sigma_i * sigma_j;
  return -2.0 * alpha * coupling * ss * (ss / (1.0 + s.q));
}

Vector optimal_mean(const NormalizedModel& model) {
  Eigen::LLT<Matrix> llt(model.J());
  if (llt.info() != Eigen::Success) throw InvalidModelError("optimal_mean: J is not positive definite");
  return llt.solve(model.h());
}

FreeEnergyValue f_mean_field(const NormalizedModel& model, const Vector& m, const Vector& sigma) {
  check_mean(m, model.n(), "f_mean_field");
  check_sigma(sigma, model.n(), "f_mean_field");
  const double value = mean_term(model, m) + 0.5 * sigma.squaredNorm() - sigma.array().log().sum() +
                       entropy_constant(model.n());
  return {value};
}

FreeEnergyValue f_fractional(const NormalizedModel& model, const AlphaAssignment& alphas,
                             const Moments& moments) {
  check_mean(moments.m, model.n(), "f_fractional");
  check_sigma(moments.sigma, model.n(), "f_fractional");
  alphas.check_matches(model.base());
  const auto& edges = model.edges();
  if (moments.sigma_pair.size() != edges.size()) throw UsageError("f_fractional: sigma_pair size mismatch");

  double value = mean_term(model, moments.m) + 0.5 * moments.sigma.squaredNorm() -
                 moments.sigma.array().log().sum() + entropy_constant(model.n());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double sij = moments.sigma_pair[e];
    const double ss = moments.sigma(edges[e].i) * moments.sigma(edges[e].j);
    const double rho2 = (sij / ss) * (sij / ss);
    if (!(rho2 < kRhoSquaredLimit)) {
      throw DomainError("f_fractional: edge (" + std::to_string(edges[e].i) + "," + std::to_string(edges[e].j) +
                        ") has rho^2 >= 1");
    }
    value += model.coupling(static_cast<int>(e)) * sij - std::log1p(-rho2) / (2.0 * alphas[e]);
  }
  return {value};
}

FreeEnergyValue f_constrained(const NormalizedModel& model, const AlphaAssignment& alphas, const Vector& m,
                              const Vector& sigma) {
  check_mean(m, model.n(), "f_constrained");
  check_sigma(sigma, model.n(), "f_constrained");
  alphas.check_matches(model.base());
  double value = mean_term(model, m) + 0.5 * sigma.squaredNorm() - sigma.array().log().sum() +
                 entropy_constant(model.n());
  const auto& edges = model.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const EdgeScalars s =
        edge_scalars(alphas[e], model.coupling(static_cast<int>(e)), sigma(edges[e].i), sigma(edges[e].j));
    value += constrained_edge_value(alphas[e], s);
  }
  return {value};
}

FreeEnergyValue f_lower_bound(const NormalizedModel& model, const Vector& m, const Vector& sigma) {
  check_mean(m, model.n(), "f_lower_bound");
  check_sigma(sigma, model.n(), "f_lower_bound");
  double value = mean_term(model, m) + 0.5 * sigma.squaredNorm() - sigma.array().log().sum() +
                 entropy_constant(model.n());
  const auto& edges = model.edges();
  for (std::size_t e = 0; e < edges.size(); ++e)
    value -= std::abs(model.coupling(static_cast<int>(e))) * sigma(edges[e].i) * sigma(edges[e].j);
  return {value};
}

Moments constrained_moments(const NormalizedModel& model, const AlphaAssignment& alphas, const Vector& m,
                            const Vector& sigma) {
  check_sigma(sigma, model.n(), "constrained_moments");
  alphas.check_matches(model.base());
  Moments out{m, sigma, {}};
  const auto& edges = model.edges();
  out.sigma_pair.resize(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    out.sigma_pair[e] =
        sigma_star(alphas[e], model.coupling(static_cast<int>(e)), sigma(edges[e].i), sigma(edges[e].j));
  }
  return out;
}

ConstrainedGradient gradient_constrained(const NormalizedModel& model, const AlphaAssignment& alphas,
                                         const Vector& m, const Vector& sigma) {
  check_mean(m, model.n(), "gradient_constrained");
  check_sigma(sigma, model.n(), "gradient_constrained");
  alphas.check_matches(model.base());
  ConstrainedGradient g;
  g.grad_m = model.J() * m - model.h();
  g.grad_sigma = sigma - sigma.cwiseInverse();
  const auto& edges = model.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Edge& ed = edges[e];
    const EdgeScalars s = edge_scalars(alphas[e], model.coupling(static_cast<int>(e)), sigma(ed.i), sigma(ed.j));
    const double c = s.qm1 / (2.0 * alphas[e]);
    g.grad_sigma(ed.i) -= c / sigma(ed.i);
    g.grad_sigma(ed.j) -= c / sigma(ed.j);
  }
  return g;
}

LogSigmaDerivatives log_sigma_derivatives(const NormalizedModel& model, const AlphaAssignment& alphas,
                                          const Vector& m, const Vector& sigma) {
  check_sigma(sigma, model.n(), "log_sigma_derivatives");
  alphas.check_matches(model.base());
  const int n = model.n();
  LogSigmaDerivatives d;
  const Vector s2 = sigma.cwiseProduct(sigma);
  d.value = mean_term(model, m) + 0.5 * s2.sum() - sigma.array().log().sum() + entropy_constant(n);
  d.gradient = s2.array() - 1.0;
  d.hessian = Matrix::Zero(n, n);
  d.hessian.diagonal() = 2.0 * s2;
  const auto& edges = model.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Edge& ed = edges[e];
    const double a = alphas[e];
    const EdgeScalars s = edge_scalars(a, model.coupling(static_cast<int>(e)), sigma(ed.i), sigma(ed.j));
    d.value += constrained_edge_value(a, s);
    const double g = s.qm1 / (2.0 * a);
    d.gradient(ed.i) -= g;
    d.gradient(ed.j) -= g;
    const double h = s.y * (s.y / s.q) / (2.0 * a);
    d.hessian(ed.i, ed.i) -= h;
    d.hessian(ed.j, ed.j) -= h;
    d.hessian(ed.i, ed.j) -= h;
    d.hessian(ed.j, ed.i) -= h;
  }
  return d;
}

std::vector<RayPoint> ray_scan(const NormalizedModel& model, const AlphaAssignment& alphas,
                               const Vector& direction, const std::vector<double>& t_grid) {
  if (direction.size() != model.n()) throw UsageError("ray_scan: direction has the wrong length");
  if (!(direction.array() > 0.0).all()) throw UsageError("ray_scan: direction must be entrywise positive");
  const Vector m = optimal_mean(model);
  std::vector<RayPoint> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    if (!(t > 0.0)) throw UsageError("ray_scan: t values must be positive");
    out.push_back({t, f_constrained(model, alphas, m, t * direction).value});
  }
  return out;
}

}  // namespace fbethe
