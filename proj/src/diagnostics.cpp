#include "fbethe/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace fbethe {

namespace {

struct PerronPair {
  double lambda = 0.0;
  Vector u;
  int iterations = 0;
  double residual = 0.0;
};

// Power iteration on |R_C| + I. The shift leaves the Perron vector unchanged
// and makes the dominant eigenvalue strictly dominant in modulus, so bipartite
// blocks (spectrum symmetric about 0) converge as well.
PerronPair perron_block(const Matrix& A, const SpectralOptions& opts) {
  const auto n = A.rows();
  PerronPair out;
  out.u = Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  if (n == 1 || A.isZero(0.0)) return out;

  Vector Au = A * out.u;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    Vector next = Au + out.u;
    next /= next.norm();
    out.u = std::move(next);
    Au = A * out.u;
    out.lambda = out.u.dot(Au);
    out.residual = (Au - out.lambda * out.u).norm();
    out.iterations = it;
    if (out.residual <= opts.tolerance * std::max(1.0, out.lambda)) return out;
  }
  throw ConvergenceError("spectral: power iteration reached the iteration cap (residual " +
                             std::to_string(out.residual) + ")",
                         out.residual);
}

Boundedness severity_max(Boundedness a, Boundedness b) {
  auto rank = [](Boundedness v) {
    switch (v) {
      case Boundedness::Bounded: return 0;
      case Boundedness::BoundaryBounded: return 1;
      case Boundedness::BoundaryUnbounded: return 2;
      case Boundedness::Unbounded: return 3;
    }
    return 3;
  };
  return rank(a) >= rank(b) ? a : b;
}

}  // namespace

std::string_view to_string(Boundedness b) {
  switch (b) {
    case Boundedness::Bounded: return "Bounded";
    case Boundedness::Unbounded: return "Unbounded";
    case Boundedness::BoundaryBounded: return "BoundaryBounded";
    case Boundedness::BoundaryUnbounded: return "BoundaryUnbounded";
  }
  return "Unknown";
}

SpectralResult spectral(const NormalizedModel& model, const SpectralOptions& opts) {
  const int n = model.n();
  SpectralResult result;
  result.component_of = connected_components(model.base());
  result.components = n == 0 ? 0 : *std::max_element(result.component_of.begin(), result.component_of.end()) + 1;
  result.component_lambda.assign(static_cast<std::size_t>(result.components), 0.0);
  result.u_max = Vector::Zero(n);

  const Matrix absR = model.abs_R();
  for (int c = 0; c < result.components; ++c) {
    std::vector<int> nodes;
    for (int k = 0; k < n; ++k)
      if (result.component_of[static_cast<std::size_t>(k)] == c) nodes.push_back(k);
    const auto size = static_cast<Eigen::Index>(nodes.size());
    Matrix block(size, size);
    for (Eigen::Index a = 0; a < size; ++a)
      for (Eigen::Index b = 0; b < size; ++b)
        block(a, b) = absR(nodes[static_cast<std::size_t>(a)], nodes[static_cast<std::size_t>(b)]);

    const PerronPair pair = perron_block(block, opts);
    result.component_lambda[static_cast<std::size_t>(c)] = pair.lambda;
    result.lambda_max = std::max(result.lambda_max, pair.lambda);
    result.iterations = std::max(result.iterations, pair.iterations);
    result.residual = std::max(result.residual, pair.residual);
    for (Eigen::Index a = 0; a < size; ++a) result.u_max(nodes[static_cast<std::size_t>(a)]) = pair.u(a);
  }
  if (result.components > 1) result.u_max /= std::sqrt(static_cast<double>(result.components));
  return result;
}

double boundary_margin(const NormalizedModel& model, const AlphaAssignment& alphas) {
  alphas.check_matches(model.base());
  // Each undirected edge appears once from each endpoint in the double sum.
  double sum = 0.0;
  for (std::size_t e = 0; e < alphas.size(); ++e) sum += 1.0 / alphas[e];
  return sum - model.n();
}

BoundednessVerdict classify(const NormalizedModel& model, const AlphaAssignment& alphas) {
  return classify(model, alphas, spectral(model));
}

BoundednessVerdict classify(const NormalizedModel& model, const AlphaAssignment& alphas,
                            const SpectralResult& spectrum) {
  alphas.check_matches(model.base());
  BoundednessVerdict out;
  out.lambda_max = spectrum.lambda_max;
  out.boundary_margin = boundary_margin(model, alphas);
  out.pairwise_normalizable = spectrum.lambda_max < 1.0 - kBoundaryBand;

  std::vector<double> margin(spectrum.component_lambda.size(), 0.0);
  for (int k = 0; k < model.n(); ++k) margin[static_cast<std::size_t>(spectrum.component_of[static_cast<std::size_t>(k)])] -= 1.0;
  const auto& edges = model.edges();
  for (std::size_t e = 0; e < edges.size(); ++e)
    margin[static_cast<std::size_t>(spectrum.component_of[static_cast<std::size_t>(edges[e].i)])] += 1.0 / alphas[e];

  out.verdict = Boundedness::Bounded;
  for (std::size_t c = 0; c < margin.size(); ++c) {
    const double lambda = spectrum.component_lambda[c];
    Boundedness v;
    if (lambda < 1.0 - kBoundaryBand) {
      v = Boundedness::Bounded;
    } else if (lambda > 1.0 + kBoundaryBand) {
      v = Boundedness::Unbounded;
    } else {
      v = margin[c] >= 0.0 ? Boundedness::BoundaryBounded : Boundedness::BoundaryUnbounded;
    }
    out.verdict = severity_max(out.verdict, v);
  }
  return out;
}

double critical_r(int K, double alpha) {
  if (!(alpha > 0.0) || !(alpha < K)) throw DomainError("critical_r: requires 0 < alpha < K");
  return 1.0 / (2.0 * std::sqrt(alpha * (K - alpha)));
}

double critical_alpha(int K, double r) {
  const double kr = K * r;
  if (!(kr >= 1.0)) throw DomainError("critical_alpha: requires K*r >= 1");
  return 0.5 * K * (1.0 - std::sqrt(1.0 - 1.0 / (kr * kr)));
}

std::optional<KRegularInfo> detect_k_regular(const NormalizedModel& model) {
  const auto& edges = model.edges();
  if (edges.empty()) return std::nullopt;
  const int K = model.base().degree(0);
  for (int k = 1; k < model.n(); ++k)
    if (model.base().degree(k) != K) return std::nullopt;
  const double r = model.coupling(0);
  for (std::size_t e = 1; e < edges.size(); ++e) {
    if (std::abs(model.coupling(static_cast<int>(e)) - r) > 1e-12 * std::abs(r)) return std::nullopt;
  }
  return KRegularInfo{K, r};
}

DiagnosticsReport diagnose(const NormalizedModel& model, const AlphaAssignment& alphas) {
  DiagnosticsReport report;
  report.spectrum = spectral(model);
  report.verdict = classify(model, alphas, report.spectrum);
  report.k_regular = detect_k_regular(model);
  if (report.k_regular) {
    const auto [K, r] = *report.k_regular;
    const auto vals = alphas.values();
    const bool uniform =
        !vals.empty() && std::all_of(vals.begin(), vals.end(), [&](double a) { return a == vals.front(); });
    if (uniform && vals.front() < K) report.critical_r = critical_r(K, vals.front());
    if (K * std::abs(r) >= 1.0) report.critical_alpha = critical_alpha(K, std::abs(r));
  }
  return report;
}

}  // namespace fbethe
