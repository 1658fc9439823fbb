#include "fbethe/model.hpp"

#include "rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace fbethe {

GaussianModel::GaussianModel(Vector h, Matrix J) : h_(std::move(h)), J_(std::move(J)) {
  const int n = static_cast<int>(J_.rows());
  if (J_.cols() != n) return;  // validate() reports the shape error
  adjacency_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (J_(i, j) == 0.0) continue;
      const int e = static_cast<int>(edges_.size());
      edges_.push_back({i, j});
      adjacency_[static_cast<std::size_t>(i)].push_back({j, e});
      adjacency_[static_cast<std::size_t>(j)].push_back({i, e});
    }
  }
}

ValidationReport validate(const GaussianModel& model) {
  ValidationReport report;
  std::ostringstream msg;
  const Matrix& J = model.J();
  const auto n = J.rows();
  if (J.cols() != n || model.h().size() != n || n == 0) {
    report.shape_ok = false;
    msg << "shape mismatch: J is " << J.rows() << "x" << J.cols() << ", h has "
        << model.h().size() << " entries";
    report.message = msg.str();
    report.positive_definite = false;
    return report;
  }
  if (!J.allFinite() || !model.h().allFinite()) {
    report.shape_ok = false;
    msg << "non-finite entries; ";
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      report.symmetry_defect = std::max(report.symmetry_defect, std::abs(J(i, j) - J(j, i)));
      if ((J(i, j) != 0.0) != (J(j, i) != 0.0)) report.edges_consistent = false;
    }
  }
  if (report.symmetry_defect != 0.0) msg << "J not symmetric (defect " << report.symmetry_defect << "); ";

  std::size_t upper_nonzeros = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) upper_nonzeros += J(i, j) != 0.0 ? 1 : 0;
  if (upper_nonzeros != model.edges().size()) report.edges_consistent = false;
  if (!report.edges_consistent) msg << "edge set does not match the off-diagonal pattern; ";

  for (Eigen::Index k = 0; k < n; ++k) {
    if (!(J(k, k) > 0.0)) {
      report.diagonal_positive = false;
      msg << "non-positive diagonal at " << k << "; ";
      break;
    }
  }

  // Factorize the symmetric part so an asymmetric J still gets a PD verdict.
  const Matrix sym = 0.5 * (J + J.transpose());
  Eigen::LLT<Matrix> llt(sym);
  report.positive_definite = report.shape_ok && llt.info() == Eigen::Success;
  if (!report.positive_definite) msg << "J is not positive definite; ";

  report.message = msg.str();
  if (report.message.size() >= 2) report.message.resize(report.message.size() - 2);
  return report;
}

void require_valid(const GaussianModel& model) {
  const ValidationReport report = validate(model);
  if (!report.ok()) throw InvalidModelError("invalid model: " + report.message);
}

NormalizedModel::NormalizedModel(GaussianModel base, Vector scale)
    : base_(std::move(base)), scale_(std::move(scale)) {
  R_ = base_.J();
  R_.diagonal().setZero();
}

GaussianModel NormalizedModel::denormalize() const {
  const auto d = scale_.asDiagonal();
  Matrix J = d * base_.J() * d;
  Vector h = scale_.cwiseProduct(base_.h());
  return GaussianModel(std::move(h), std::move(J));
}

NormalizedModel normalize(const GaussianModel& model) {
  const Matrix& J = model.J();
  const auto n = J.rows();
  if (J.cols() != n || model.h().size() != n) throw InvalidModelError("normalize: shape mismatch");
  for (Eigen::Index k = 0; k < n; ++k) {
    if (!(J(k, k) > 0.0))
      throw InvalidModelError("normalize: non-positive diagonal entry at node " + std::to_string(k));
  }
  require_valid(model);

  Vector scale = J.diagonal().cwiseSqrt();
  const Vector inv = scale.cwiseInverse();
  Matrix Jn = inv.asDiagonal() * J * inv.asDiagonal();
  Jn.diagonal().setOnes();
  // Keep exact symmetry after scaling.
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) Jn(j, i) = Jn(i, j);
  Vector hn = model.h().cwiseProduct(inv);
  return NormalizedModel(GaussianModel(std::move(hn), std::move(Jn)), std::move(scale));
}

AlphaAssignment::AlphaAssignment(std::vector<double> values) : values_(std::move(values)) {
  for (std::size_t e = 0; e < values_.size(); ++e) {
    if (!(values_[e] > 0.0) || !std::isfinite(values_[e]))
      throw UsageError("alpha must be positive and finite (edge " + std::to_string(e) + ")");
  }
}

AlphaAssignment AlphaAssignment::uniform(std::size_t edge_count, double alpha) {
  return AlphaAssignment(std::vector<double>(edge_count, alpha));
}

void AlphaAssignment::check_matches(const GaussianModel& model) const {
  if (values_.size() != model.edges().size()) {
    throw UsageError("alpha assignment has " + std::to_string(values_.size()) +
                     " entries but the model has " + std::to_string(model.edges().size()) + " edges");
  }
}

Matrix circulant_adjacency(int n, int K) {
  if (n <= 0 || K < 0 || K >= std::max(n, 1) || (n * K) % 2 != 0 || (K % 2 == 1 && n % 2 == 1)) {
    throw UsageError("no circulant " + std::to_string(K) + "-regular graph on " + std::to_string(n) +
                     " nodes");
  }
  Matrix A = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int d = 1; d <= K / 2; ++d) {
      A(i, (i + d) % n) = 1.0;
      A(i, (i - d + n) % n) = 1.0;
    }
    if (K % 2 == 1) A(i, (i + n / 2) % n) = 1.0;
  }
  return A;
}

GaussianModel make_k_regular(int n, int K, double r, const Vector& h) {
  if (h.size() != n) throw UsageError("make_k_regular: h must have n entries");
  Matrix J = Matrix::Identity(n, n) + r * circulant_adjacency(n, K);
  return GaussianModel(h, std::move(J));
}

GaussianModel make_k_regular(int n, int K, double r) { return make_k_regular(n, K, r, Vector::Zero(n)); }

double r_valid(int n, int K) {
  const Matrix A = circulant_adjacency(n, K);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(A, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

std::vector<int> connected_components(const GaussianModel& model) {
  const int n = model.n();
  std::vector<int> comp(static_cast<std::size_t>(n), -1);
  int next = 0;
  std::vector<int> stack;
  for (int s = 0; s < n; ++s) {
    if (comp[static_cast<std::size_t>(s)] >= 0) continue;
    comp[static_cast<std::size_t>(s)] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (const Incidence& inc : model.adjacency()[static_cast<std::size_t>(v)]) {
        auto& c = comp[static_cast<std::size_t>(inc.neighbor)];
        if (c < 0) {
          c = next;
          stack.push_back(inc.neighbor);
        }
      }
    }
    ++next;
  }
  return comp;
}

namespace {

double lambda_max_of_abs(const Matrix& R) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(R.cwiseAbs(), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff();
}

bool is_positive_definite(const Matrix& J) { return Eigen::LLT<Matrix>(J).info() == Eigen::Success; }

}  // namespace

GaussianModel random_model(int n, double density, double target_lambda, std::uint64_t seed,
                           int max_attempts) {
  if (n < 2) throw UsageError("random_model: need n >= 2");
  if (!(density > 0.0 && density <= 1.0)) throw UsageError("random_model: density must lie in (0, 1]");
  if (!(target_lambda > 0.0)) throw UsageError("random_model: target_lambda must be positive");

  detail::Rng rng(seed);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Matrix R = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (rng.uniform() >= density) continue;
        const double w = rng.uniform(0.5, 1.0) * (rng.coin() ? 1.0 : -1.0);
        R(i, j) = w;
        R(j, i) = w;
      }
    }
    Vector h(n);
    for (int k = 0; k < n; ++k) h(k) = rng.normal();

    GaussianModel pattern(Vector::Zero(n), Matrix::Identity(n, n) + R);
    const auto comp = connected_components(pattern);
    if (std::any_of(comp.begin(), comp.end(), [](int c) { return c != 0; })) continue;

    R *= target_lambda / lambda_max_of_abs(R);
    Matrix J = Matrix::Identity(n, n) + R;
    if (!is_positive_definite(J)) continue;
    return GaussianModel(std::move(h), std::move(J));
  }
  throw InvalidModelError("random_model: no positive definite draw after " + std::to_string(max_attempts) +
                          " attempts (seed " + std::to_string(seed) + ")");
}

GaussianModel random_tree_model(int n, double target_lambda, std::uint64_t seed) {
  if (n < 1) throw UsageError("random_tree_model: need n >= 1");
  if (!(target_lambda > 0.0 && target_lambda < 1.0))
    throw UsageError("random_tree_model: target_lambda must lie in (0, 1)");
  detail::Rng rng(seed);
  Matrix R = Matrix::Zero(n, n);
  for (int v = 1; v < n; ++v) {
    const int parent = static_cast<int>(rng.below(static_cast<std::uint64_t>(v)));
    const double w = rng.uniform(0.2, 1.0) * (rng.coin() ? 1.0 : -1.0);
    R(v, parent) = w;
    R(parent, v) = w;
  }
  Vector h(n);
  for (int k = 0; k < n; ++k) h(k) = rng.normal();
  if (n > 1) R *= target_lambda / lambda_max_of_abs(R);
  return GaussianModel(std::move(h), Matrix::Identity(n, n) + R);
}

}  // namespace fbethe
