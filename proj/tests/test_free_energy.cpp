#include "fbethe/exact.hpp"
#include "fbethe/free_energy.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace fbethe;
using testing::Draw;

namespace {

const double kC = -0.5 * std::log(2 * M_PI * M_E);

NormalizedModel two_node(double r, double h0 = 0.0, double h1 = 0.0) {
  Matrix J(2, 2);
  J << 1, r, r, 1;
  return normalize(GaussianModel((Vector(2) << h0, h1).finished(), J));
}

// Derivative of the edge term in the pair covariance.
double edge_derivative(double alpha, double r, double s, double x) {
  return r + x / (alpha * (s * s - x * x));
}

}  // namespace

TEST_CASE("mean field minimum and quadratic expansion") {
  const NormalizedModel free = normalize(GaussianModel(Vector::Zero(3), Matrix::Identity(3, 3)));
  const double f0 = f_mean_field(free, Vector::Zero(3), Vector::Ones(3)).value;
  CHECK(f0 == doctest::Approx(3 * (0.5 + kC)));
  Draw draw(1);
  for (int k = 0; k < 20; ++k) {
    const Vector dm = 0.1 * draw.normal(3);
    const Vector s = draw.positive(3, 0.5, 2.0);
    CHECK(f_mean_field(free, dm, s).value > f0);
  }

  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const NormalizedModel model = normalize(random_model(6, 0.6, 0.9, seed));
    const Vector mstar = optimal_mean(model);
    const Vector ones = Vector::Ones(6);
    const double fstar = f_mean_field(model, mstar, ones).value;
    const Vector m = draw.normal(6);
    const Vector s = draw.positive(6, 0.3, 3.0);
    const Vector d = m - mstar;
    double expected = 0.5 * d.dot(model.J() * d);
    for (int k = 0; k < 6; ++k) expected += 0.5 * s(k) * s(k) - std::log(s(k)) - 0.5;
    CHECK(f_mean_field(model, m, s).value - fstar == doctest::Approx(expected).epsilon(1e-12));

    // Stationary at (J⁻¹h, 1): the σ part via central differences.
    auto f = [&](const Vector& x) { return f_mean_field(model, mstar, x).value; };
    CHECK(testing::central_gradient(f, ones).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("sigma_star closed-form values") {
  CHECK(sigma_star(1.0, 0.0, 1.3, 0.7) == 0.0);
  CHECK(sigma_star(1.0, 2.0 / 3.0, 1.0, 1.0) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(sigma_star(1.0, -2.0 / 3.0, 1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(edge_derivative(1.0, 2.0 / 3.0, 1.0, -0.5) == doctest::Approx(0.0).epsilon(1e-15));
  // Small coupling: −αRσᵢ²σⱼ² to leading order, no cancellation.
  const double tiny = sigma_star(0.5, 1e-12, 2.0, 3.0);
  CHECK(tiny == doctest::Approx(-0.5 * 1e-12 * 36.0).epsilon(1e-12));
}

TEST_CASE("sigma_star is strictly inside the covariance cone and stationary") {
  Draw draw(2);
  for (int k = 0; k < 2000; ++k) {
    const double alpha = draw.log_uniform(1e-4, 1e4);
    const double r = draw.uniform(-1.5, 1.5);
    const double si = draw.log_uniform(1e-2, 1e2);
    const double sj = draw.log_uniform(1e-2, 1e2);
    const double x = sigma_star(alpha, r, si, sj);
    const double s = si * sj;
    CHECK(std::abs(x) < s);
    if (r != 0.0) CHECK(x * r < 0.0);
    // f(x ± δ) ≥ f(x) in the exact difference form.
    const double delta = 1e-6 * (s - std::abs(x));
    CHECK(testing::edge_term_difference(alpha, r, s, x, x + delta) >= -1e-15 * s);
    CHECK(testing::edge_term_difference(alpha, r, s, x, x - delta) >= -1e-15 * s);
  }
}

TEST_CASE("fractional energy with zero pair covariances equals mean field") {
  Draw draw(3);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const NormalizedModel model = normalize(random_model(7, 0.5, 1.1, seed));
    const Moments mo{draw.normal(7), draw.positive(7, 0.3, 3.0), std::vector<double>(model.edges().size(), 0.0)};
    const AlphaAssignment a = AlphaAssignment::uniform(model, draw.log_uniform(0.01, 100));
    CHECK(f_fractional(model, a, mo).value == f_mean_field(model, mo.m, mo.sigma).value);
  }
}

TEST_CASE("fractional energy is non-increasing in alpha at fixed moments") {
  Draw draw(4);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const NormalizedModel model = normalize(random_model(6, 0.6, 0.95, seed));
    Moments mo{draw.normal(6), draw.positive(6, 0.5, 2.0), {}};
    for (const auto& e : model.edges())
      mo.sigma_pair.push_back(draw.uniform(-0.9, 0.9) * mo.sigma(e.i) * mo.sigma(e.j));
    double prev = INFINITY;
    for (double alpha : {0.01, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0}) {
      const double v = f_fractional(model, AlphaAssignment::uniform(model, alpha), mo).value;
      CHECK(v <= prev + 1e-12);
      prev = v;
    }
  }
}

TEST_CASE("Bethe energy at the true marginals of a two-node tree is -log Z") {
  const NormalizedModel model = two_node(0.6, 0.7, -0.4);
  const ExactMarginals ex = exact_marginals(model.base());
  const Moments mo{ex.m, ex.sigma, {ex.cov(0, 1)}};
  const double det = 1 - 0.36;
  const Vector h = model.h();
  const double quad = (h(0) * h(0) + h(1) * h(1) - 2 * 0.6 * h(0) * h(1)) / det;
  const double ref = -0.5 * quad + 0.5 * std::log(det) - std::log(2 * M_PI);
  CHECK(f_fractional(model, AlphaAssignment::uniform(model, 1.0), mo).value == doctest::Approx(ref).epsilon(1e-13));
}

TEST_CASE("fractional energy rejects the rho^2 = 1 boundary") {
  const NormalizedModel model = two_node(0.3);
  const Moments edge{Vector::Zero(2), Vector::Ones(2), {1.0}};
  CHECK_THROWS_AS(f_fractional(model, AlphaAssignment::uniform(model, 1.0), edge), DomainError);
  const Moments inside{Vector::Zero(2), Vector::Ones(2), {0.999}};
  CHECK_NOTHROW(f_fractional(model, AlphaAssignment::uniform(model, 1.0), inside));
  CHECK_THROWS_AS(f_mean_field(model, Vector::Zero(2), (Vector(2) << 1, 0).finished()), DomainError);
  CHECK_THROWS_AS(f_constrained(model, AlphaAssignment::uniform(model, 1.0), Vector::Zero(2),
                                (Vector(2) << -1, 1).finished()),
                  DomainError);
}

TEST_CASE("constrained energy equals fractional energy at sigma_star") {
  Draw draw(5);
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const NormalizedModel model = normalize(random_model(7, 0.5, draw.uniform(0.5, 1.4), seed));
    std::vector<double> a;
    for (std::size_t e = 0; e < model.edges().size(); ++e) a.push_back(draw.log_uniform(0.01, 100));
    const AlphaAssignment alphas(a);
    const Vector m = draw.normal(7);
    const Vector s = draw.positive(7, 0.2, 5.0);
    const Moments mo = constrained_moments(model, alphas, m, s);
    const double fc = f_constrained(model, alphas, m, s).value;
    CHECK(std::abs(fc - f_fractional(model, alphas, mo).value) <= 1e-10 * (1 + std::abs(fc)));
  }
}

TEST_CASE("uncoupled model: constrained equals mean field, gradient is s - 1/s") {
  const NormalizedModel model = normalize(GaussianModel(Vector::Ones(4), Matrix::Identity(4, 4)));
  const Vector s = (Vector(4) << 0.5, 1, 2, 3).finished();
  const Vector m = Vector::Zero(4);
  const AlphaAssignment none = AlphaAssignment::uniform(model, 1.0);
  CHECK(f_constrained(model, none, m, s).value == f_mean_field(model, m, s).value);
  const ConstrainedGradient g = gradient_constrained(model, none, m, s);
  for (int k = 0; k < 4; ++k) CHECK(g.grad_sigma(k) == doctest::Approx(s(k) - 1 / s(k)));
  CHECK(g.grad_m == -Vector::Ones(4));
}

TEST_CASE("sandwich, monotone alpha grid and limit rates") {
  Draw draw(6);
  const auto grid = [] {
    std::vector<double> g;
    for (int k = 0; k <= 20; ++k) g.push_back(std::pow(10.0, -2.0 + 0.2 * k));
    return g;
  }();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const NormalizedModel model = normalize(random_model(6, 0.5, draw.uniform(0.3, 1.3), seed));
    const Vector m = draw.normal(6);
    const Vector s = draw.positive(6, 0.3, 3.0);
    const double mf = f_mean_field(model, m, s).value;
    const double lb = f_lower_bound(model, m, s).value;
    CHECK(lb == doctest::Approx(mf - 0.5 * s.dot(model.abs_R() * s)).epsilon(1e-13));
    double prev = mf;
    for (double alpha : grid) {
      const double v = f_constrained(model, AlphaAssignment::uniform(model, alpha), m, s).value;
      CHECK(v <= prev + 1e-12);
      CHECK(v >= lb - 1e-12);
      prev = v;
    }
    // Linear rate towards mean field, (log α)/α rate towards the lower bound.
    const double g1 = mf - f_constrained(model, AlphaAssignment::uniform(model, 1e-4), m, s).value;
    const double g2 = mf - f_constrained(model, AlphaAssignment::uniform(model, 1e-5), m, s).value;
    CHECK(g1 / g2 == doctest::Approx(10.0).epsilon(1e-3));
    const double u1 = f_constrained(model, AlphaAssignment::uniform(model, 1e4), m, s).value - lb;
    const double u2 = f_constrained(model, AlphaAssignment::uniform(model, 1e5), m, s).value - lb;
    CHECK(u1 > u2);
    CHECK(u1 * 1e4 < 10.0 * model.edges().size() * (1 + std::log(1e5)));
  }
}

TEST_CASE("fractional energy is convex in the mean and pair covariances") {
  Draw draw(7);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const NormalizedModel model = normalize(random_model(5, 0.7, 1.2, seed));
    const AlphaAssignment alphas = AlphaAssignment::uniform(model, draw.log_uniform(0.1, 10));
    const Vector s = draw.positive(5, 0.5, 2.0);
    auto point = [&] {
      Moments mo{draw.normal(5), s, {}};
      for (const auto& e : model.edges()) mo.sigma_pair.push_back(draw.uniform(-0.95, 0.95) * s(e.i) * s(e.j));
      return mo;
    };
    const Moments a = point();
    const Moments b = point();
    Moments mid{0.5 * (a.m + b.m), s, {}};
    for (std::size_t e = 0; e < a.sigma_pair.size(); ++e) mid.sigma_pair.push_back(0.5 * (a.sigma_pair[e] + b.sigma_pair[e]));
    const double fa = f_fractional(model, alphas, a).value;
    const double fb = f_fractional(model, alphas, b).value;
    CHECK(f_fractional(model, alphas, mid).value <= 0.5 * (fa + fb) + 1e-12);
  }
}

TEST_CASE("log-sigma derivatives match the sigma gradient and finite-difference Hessian") {
  Draw draw(8);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const NormalizedModel model = normalize(random_model(6, 0.6, 1.1, seed));
    const AlphaAssignment alphas = AlphaAssignment::uniform(model, draw.log_uniform(0.05, 20));
    const Vector m = optimal_mean(model);
    const Vector s = draw.positive(6, 0.3, 3.0);
    const LogSigmaDerivatives d = log_sigma_derivatives(model, alphas, m, s);
    CHECK(d.value == doctest::Approx(f_constrained(model, alphas, m, s).value).epsilon(1e-14));
    const ConstrainedGradient g = gradient_constrained(model, alphas, m, s);
    CHECK((d.gradient - g.grad_sigma.cwiseProduct(s)).norm() <= 1e-12 * (1 + d.gradient.norm()));
    auto grad_at = [&](const Vector& logs) {
      return log_sigma_derivatives(model, alphas, m, logs.array().exp().matrix()).gradient;
    };
    const Vector logs = s.array().log().matrix();
    Matrix fd(6, 6);
    for (int k = 0; k < 6; ++k) {
      Vector p = logs, q = logs;
      p(k) += 1e-6;
      q(k) -= 1e-6;
      fd.col(k) = (grad_at(p) - grad_at(q)) / 2e-6;
    }
    CHECK((fd - d.hessian).norm() <= 1e-6 * (1 + d.hessian.norm()));
    CHECK((d.hessian - d.hessian.transpose()).norm() == 0.0);
  }
}

TEST_CASE("ray scans follow the boundedness class") {
  // Descent for λ > 1 starts once 2α|R|t²uᵢuⱼ ≫ 1, hence the later grid.
  const std::vector<double> grid{10, 100, 1000, 10000};
  const std::vector<double> far{1e3, 1e4, 1e5, 1e6};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (double lambda : {0.9, 1.1}) {
      const NormalizedModel model = normalize(random_model(8, 0.5, lambda, seed));
      Eigen::SelfAdjointEigenSolver<Matrix> es(model.abs_R());
      const Vector u = es.eigenvectors().col(7).cwiseAbs();
      for (double alpha : {0.01, 1.0, 100.0}) {
        const auto& ts = lambda < 1 ? grid : far;
        const auto pts = ray_scan(model, AlphaAssignment::uniform(model, alpha), u, ts);
        REQUIRE(pts.size() == ts.size());
        for (std::size_t k = 1; k < pts.size(); ++k) {
          CHECK(pts[k].t == ts[k]);
          if (lambda < 1)
            CHECK(pts[k].value > pts[k - 1].value);
          else
            CHECK(pts[k].value < pts[k - 1].value);
        }
      }
    }
  }
  const NormalizedModel model = two_node(0.2);
  CHECK_THROWS_AS(ray_scan(model, AlphaAssignment::uniform(model, 1), (Vector(2) << 1, 0).finished(), grid), UsageError);
}
