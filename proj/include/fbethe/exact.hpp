#pragma once

#include "fbethe/model.hpp"

namespace fbethe {

/// Ground-truth marginals from a dense Cholesky factorization of J.
struct ExactMarginals {
  Vector m;      // J⁻¹h
  Vector sigma;  // sqrt(diag(J⁻¹))
  Matrix cov;    // J⁻¹
};

ExactMarginals exact_marginals(const GaussianModel& model);

/// ‖approx − exact.sigma‖₂. Throws UsageError on a length mismatch.
double sigma_error(const Vector& approx_sigma, const ExactMarginals& exact);

/// −log ∫ exp(hᵀx − ½xᵀJx) dx = −½hᵀJ⁻¹h − ½ log det(2π J⁻¹).
double neg_log_partition(const GaussianModel& model);

}  // namespace fbethe
