#pragma once

#include "fbethe/model.hpp"

#include <vector>

namespace fbethe {

/// How the additive constants of the free energies are fixed. All energies
/// here use the exact Gaussian integrals: energy from the unnormalized
/// density exp(hᵀx − ½xᵀJx), node entropies ½log(2πeσ²), and the pairwise
/// term as the Gaussian mutual information −½log(1 − ρ²). The constant is
/// therefore −(N/2)·log(2πe) for every energy and they compare directly.
enum class ConstantConvention { ExactGaussian };

struct FreeEnergyValue {
  double value = 0.0;
  ConstantConvention convention = ConstantConvention::ExactGaussian;
};

/// Variational parameters of the pairwise Gaussian approximation. sigma_pair
/// is aligned with the model's edge list.
struct Moments {
  Vector m;
  Vector sigma;
  std::vector<double> sigma_pair;
};

/// Stationary pairwise covariance for one edge:
///   −sign(R)·(√(1 + (2αRσᵢσⱼ)²) − 1) / (2α|R|)
/// evaluated in the rationalized form −2αRσᵢ²σⱼ² / (1 + √(1 + (2αRσᵢσⱼ)²)),
/// which has no cancellation for small couplings.
double sigma_star(double alpha, double coupling, double sigma_i, double sigma_j);

FreeEnergyValue f_mean_field(const NormalizedModel& model, const Vector& m, const Vector& sigma);

/// Fractional Bethe free energy in moment parameters. Throws DomainError when
/// an edge has ρ² ≥ 1 − 1e−14.
FreeEnergyValue f_fractional(const NormalizedModel& model, const AlphaAssignment& alphas,
                             const Moments& moments);

/// F_α with every σ_ij replaced by sigma_star.
FreeEnergyValue f_constrained(const NormalizedModel& model, const AlphaAssignment& alphas, const Vector& m,
                              const Vector& sigma);

/// F_MF − ½σᵀ|R|σ, the α → ∞ limit of f_constrained.
FreeEnergyValue f_lower_bound(const NormalizedModel& model, const Vector& m, const Vector& sigma);

/// Moments with sigma_pair filled by sigma_star.
Moments constrained_moments(const NormalizedModel& model, const AlphaAssignment& alphas, const Vector& m,
                            const Vector& sigma);

struct ConstrainedGradient {
  Vector grad_m;
  Vector grad_sigma;
};

ConstrainedGradient gradient_constrained(const NormalizedModel& model, const AlphaAssignment& alphas,
                                         const Vector& m, const Vector& sigma);

/// Value, gradient and exact Hessian of f_constrained in s = log σ at fixed m.
struct LogSigmaDerivatives {
  double value = 0.0;
  Vector gradient;
  Matrix hessian;
};

LogSigmaDerivatives log_sigma_derivatives(const NormalizedModel& model, const AlphaAssignment& alphas,
                                          const Vector& m, const Vector& sigma);

struct RayPoint {
  double t = 0.0;
  double value = 0.0;
};

/// f_constrained at σ = t·direction, m = J⁻¹h, one point per entry of t_grid.
std::vector<RayPoint> ray_scan(const NormalizedModel& model, const AlphaAssignment& alphas,
                               const Vector& direction, const std::vector<double>& t_grid);

/// J⁻¹h for the normalized model.
Vector optimal_mean(const NormalizedModel& model);

}  // namespace fbethe
