#pragma once

#include "fbethe/model.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace fbethe {

struct SpectralOptions {
  double tolerance = 1e-12;  // on ‖|R|u − λu‖, relative to max(1, λ)
  int max_iterations = 100000;
};

/// Perron pair of |R|. Disconnected models are handled per connected
/// component: lambda_max is the largest component eigenvalue and u_max stacks
/// the component Perron vectors (isolated nodes get λ = 0, u ∝ 1), so u_max is
/// entrywise positive in every case.
struct SpectralResult {
  double lambda_max = 0.0;
  Vector u_max;  // unit Euclidean length
  int iterations = 0;
  double residual = 0.0;
  int components = 1;
  std::vector<int> component_of;        // node -> component id
  std::vector<double> component_lambda;  // component id -> λ_max of that block
};

/// Throws ConvergenceError when a component does not converge within the cap.
SpectralResult spectral(const NormalizedModel& model, const SpectralOptions& opts = {});

enum class Boundedness { Bounded, Unbounded, BoundaryBounded, BoundaryUnbounded };

std::string_view to_string(Boundedness b);

/// Width of the band around λ_max = 1 treated as the boundary case.
inline constexpr double kBoundaryBand = 1e-9;

struct BoundednessVerdict {
  Boundedness verdict = Boundedness::Bounded;
  double lambda_max = 0.0;
  double boundary_margin = 0.0;
  bool pairwise_normalizable = true;
};

BoundednessVerdict classify(const NormalizedModel& model, const AlphaAssignment& alphas);
BoundednessVerdict classify(const NormalizedModel& model, const AlphaAssignment& alphas,
                            const SpectralResult& spectrum);

/// ½ Σ_i Σ_{j∈N(i)} 1/α_ij − N.
double boundary_margin(const NormalizedModel& model, const AlphaAssignment& alphas);

/// r_c(K, α) = 1 / (2√(α(K − α))), defined for 0 < α < K.
double critical_r(int K, double alpha);

/// α_c(K, r) = ½K(1 − √(1 − 1/(Kr)²)), defined for Kr ≥ 1.
double critical_alpha(int K, double r);

struct KRegularInfo {
  int K = 0;
  double r = 0.0;
};

/// Detects models whose graph is K-regular (K ≥ 1) with one shared coupling r.
std::optional<KRegularInfo> detect_k_regular(const NormalizedModel& model);

struct DiagnosticsReport {
  SpectralResult spectrum;
  BoundednessVerdict verdict;
  std::optional<KRegularInfo> k_regular;
  std::optional<double> critical_r;
  std::optional<double> critical_alpha;
};

DiagnosticsReport diagnose(const NormalizedModel& model, const AlphaAssignment& alphas);

}  // namespace fbethe
