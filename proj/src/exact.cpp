#include "fbethe/exact.hpp"

#include <cmath>
#include <numbers>

namespace fbethe {

namespace {

Eigen::LLT<Matrix> factorize(const GaussianModel& model) {
  require_valid(model);
  Eigen::LLT<Matrix> llt(model.J());
  if (llt.info() != Eigen::Success) throw InvalidModelError("exact_marginals: Cholesky factorization failed");
  return llt;
}

}  // namespace

ExactMarginals exact_marginals(const GaussianModel& model) {
  const auto llt = factorize(model);
  ExactMarginals out;
  out.m = llt.solve(model.h());
  out.cov = llt.solve(Matrix::Identity(model.n(), model.n()));
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  out.sigma = out.cov.diagonal().cwiseSqrt();
  return out;
}

double sigma_error(const Vector& approx_sigma, const ExactMarginals& exact) {
  if (approx_sigma.size() != exact.sigma.size()) {
    throw UsageError("sigma_error: length mismatch (" + std::to_string(approx_sigma.size()) + " vs " +
                     std::to_string(exact.sigma.size()) + ")");
  }
  return (approx_sigma - exact.sigma).norm();
}

double neg_log_partition(const GaussianModel& model) {
  const auto llt = factorize(model);
  const Vector m = llt.solve(model.h());
  const double log_det_J = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const int n = model.n();
  return -0.5 * model.h().dot(m) - 0.5 * n * std::log(2.0 * std::numbers::pi) + 0.5 * log_det_J;
}

}  // namespace fbethe
