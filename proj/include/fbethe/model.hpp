#pragma once

#include "fbethe/common.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fbethe {

/// Undirected edge of the model graph, stored with i < j.
struct Edge {
  int i = 0;
  int j = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// One entry of a node's adjacency list.
struct Incidence {
  int neighbor = 0;
  int edge = 0;  // index into GaussianModel::edges()
};

/// Canonical parameters (h, J) of p(x) ∝ exp(hᵀx − ½xᵀJx).
///
/// The edge list is derived from the strict upper triangle of J (row-major
/// order, so edges are sorted by (i, j)). Construction never throws on bad
/// numerics; use validate() to check the invariants.
class GaussianModel {
 public:
  GaussianModel() = default;
  GaussianModel(Vector h, Matrix J);

  int n() const noexcept { return static_cast<int>(h_.size()); }
  const Vector& h() const noexcept { return h_; }
  const Matrix& J() const noexcept { return J_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<std::vector<Incidence>>& adjacency() const noexcept { return adjacency_; }
  int degree(int node) const { return static_cast<int>(adjacency_.at(node).size()); }

 private:
  Vector h_;
  Matrix J_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Incidence>> adjacency_;
};

struct ValidationReport {
  bool shape_ok = true;
  double symmetry_defect = 0.0;  // max |J_ij − J_ji|
  bool diagonal_positive = true;
  bool positive_definite = true;
  bool edges_consistent = true;
  std::string message;

  bool ok() const noexcept {
    return shape_ok && symmetry_defect == 0.0 && diagonal_positive && positive_definite &&
           edges_consistent;
  }
};

ValidationReport validate(const GaussianModel& model);

/// Throws InvalidModelError carrying the report message when validation fails.
void require_valid(const GaussianModel& model);

/// Unit-diagonal form J' = D^(−1/2) J D^(−1/2) = I + R, h' = D^(−1/2) h.
class NormalizedModel {
 public:
  NormalizedModel() = default;
  NormalizedModel(GaussianModel base, Vector scale);

  const GaussianModel& base() const noexcept { return base_; }
  const Matrix& R() const noexcept { return R_; }
  /// d_k = sqrt(J_kk) of the original model.
  const Vector& scale() const noexcept { return scale_; }

  int n() const noexcept { return base_.n(); }
  const Vector& h() const noexcept { return base_.h(); }
  const Matrix& J() const noexcept { return base_.J(); }
  const std::vector<Edge>& edges() const noexcept { return base_.edges(); }
  const std::vector<std::vector<Incidence>>& adjacency() const noexcept { return base_.adjacency(); }
  double coupling(int edge) const {
    const Edge& e = base_.edges()[static_cast<std::size_t>(edge)];
    return R_(e.i, e.j);
  }
  Matrix abs_R() const { return R_.cwiseAbs(); }

  /// Map moments of the normalized model back to the original scale.
  Vector denormalize_mean(const Vector& m) const { return m.cwiseQuotient(scale_); }
  Vector denormalize_sigma(const Vector& sigma) const { return sigma.cwiseQuotient(scale_); }
  GaussianModel denormalize() const;

 private:
  GaussianModel base_;
  Matrix R_;
  Vector scale_;
};

NormalizedModel normalize(const GaussianModel& model);

/// Per-edge fractional weights α_ij > 0, aligned with GaussianModel::edges().
class AlphaAssignment {
 public:
  AlphaAssignment() = default;
  explicit AlphaAssignment(std::vector<double> values);

  static AlphaAssignment uniform(std::size_t edge_count, double alpha);
  static AlphaAssignment uniform(const GaussianModel& model, double alpha) {
    return uniform(model.edges().size(), alpha);
  }
  static AlphaAssignment uniform(const NormalizedModel& model, double alpha) {
    return uniform(model.edges().size(), alpha);
  }

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t edge) const { return values_[edge]; }
  std::span<const double> values() const noexcept { return values_; }

  /// Throws UsageError unless there is exactly one entry per model edge.
  void check_matches(const GaussianModel& model) const;

 private:
  std::vector<double> values_;
};

/// Circulant K-regular graph with unit diagonal and R_ij = r. Node i links to
/// i ± 1, …, i ± ⌊K/2⌋ (mod n), and to i + n/2 when K is odd.
GaussianModel make_k_regular(int n, int K, double r, const Vector& h);
GaussianModel make_k_regular(int n, int K, double r);

/// Adjacency matrix of the circulant graph used by make_k_regular.
Matrix circulant_adjacency(int n, int K);

/// Supremum of r > 0 with I + rA positive definite for the circulant graph.
double r_valid(int n, int K);

/// Seeded random connected model, rescaled so that λ_max(|R|) = target_lambda.
/// Redraws (up to max_attempts) when I + R is not positive definite.
GaussianModel random_model(int n, double density, double target_lambda, std::uint64_t seed,
                           int max_attempts = 1000);

/// Seeded random spanning tree with mixed-sign couplings and λ_max(|R|) =
/// target_lambda (< 1 keeps it positive definite). h is drawn from N(0, 1).
GaussianModel random_tree_model(int n, double target_lambda, std::uint64_t seed);

/// Connected component id per node (ids are 0-based in order of first node).
std::vector<int> connected_components(const GaussianModel& model);

}  // namespace fbethe
