#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace fbethe {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// The model violates a structural requirement (symmetry, positive
/// definiteness, positive diagonal, edge bookkeeping).
class InvalidModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of a formula, e.g. a pairwise
/// correlation with rho^2 >= 1 or alpha >= K in the critical-r formula.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Iterative routine hit its cap without meeting its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : std::runtime_error(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

/// Bad options or mismatched arguments supplied by the caller.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace fbethe
