#include "fbethe/exact.hpp"
#include "fbethe/minimizer.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace fbethe;
using testing::Draw;

TEST_CASE("bounded model: every init reaches the same minimum") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const NormalizedModel model = normalize(random_model(8, 0.5, 0.9, seed));
    const SpectralResult spec = spectral(model);
    const auto inits = make_inits(model, spec, log_grid(1e-1, 1e3, 18));
    REQUIRE(inits.size() == 20);
    for (double alpha : {0.1, 1.0, 3.0}) {
      const AlphaAssignment alphas = AlphaAssignment::uniform(model, alpha);
      std::vector<double> values;
      for (const auto& init : inits) {
        const MinimizeResult r = newton_minimize(model, alphas, init);
        REQUIRE(r.status == MinimizeStatus::Converged);
        CHECK(r.grad_norm <= 1e-9);
        CHECK(r.value.value >= f_lower_bound(model, r.moments.m, r.moments.sigma).value);
        values.push_back(r.value.value);
      }
      const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
      CHECK(*hi - *lo <= 1e-8);
    }
  }
}

TEST_CASE("unbounded model: far inits diverge, moderate ones converge") {
  const NormalizedModel model = normalize(random_model(8, 0.5, 1.1, 1));
  const SpectralResult spec = spectral(model);
  const AlphaAssignment alphas = AlphaAssignment::uniform(model, 0.5);
  for (double t : {1e2, 1e3}) CHECK(newton_minimize(model, alphas, t * spec.u_max).status == MinimizeStatus::Diverged);
  const MinimizeResult near = newton_minimize(model, alphas, Vector::Ones(8));
  CHECK(near.status == MinimizeStatus::Converged);
  CHECK(near.value.value > -1e3);
}

TEST_CASE("uncoupled model converges to the mean-field minimum") {
  const Vector h = (Vector(3) << 0.5, -1, 2).finished();
  const NormalizedModel model = normalize(GaussianModel(h, Matrix::Identity(3, 3)));
  const MinimizeResult r =
      newton_minimize(model, AlphaAssignment::uniform(model, 1.0), (Vector(3) << 0.2, 1.0, 5.0).finished());
  REQUIRE(r.status == MinimizeStatus::Converged);
  CHECK(r.iterations <= 8);
  CHECK((r.moments.sigma - Vector::Ones(3)).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(r.moments.m == h);
  CHECK(r.value.value == doctest::Approx(f_mean_field(model, h, Vector::Ones(3)).value).epsilon(1e-14));
  // Starting at the minimizer takes no step.
  CHECK(newton_minimize(model, AlphaAssignment::uniform(model, 1.0), Vector::Ones(3)).iterations == 0);
}

TEST_CASE("converged points are local minima") {
  Draw draw(9);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const NormalizedModel model = normalize(random_model(7, 0.5, seed % 2 ? 0.8 : 1.1, seed));
    const AlphaAssignment alphas = AlphaAssignment::uniform(model, 0.3);
    const MinimizeResult r = newton_minimize(model, alphas, Vector::Ones(7));
    REQUIRE(r.status == MinimizeStatus::Converged);
    const ConstrainedGradient g = gradient_constrained(model, alphas, r.moments.m, r.moments.sigma);
    CHECK(g.grad_sigma.cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(g.grad_m.cwiseAbs().maxCoeff() <= 1e-8);
    const double f0 = r.value.value;
    for (int k = 0; k < 50; ++k) {
      Vector d = draw.normal(7);
      d /= d.norm();
      const double h = 1e-4;
      const double fp = f_constrained(model, alphas, r.moments.m, r.moments.sigma + h * d).value;
      const double fm = f_constrained(model, alphas, r.moments.m, r.moments.sigma - h * d).value;
      CHECK((fp - 2 * f0 + fm) / (h * h) >= -1e-6);
    }
  }
}

TEST_CASE("runs are reproducible") {
  const NormalizedModel model = normalize(random_model(8, 0.5, 1.1, 2));
  const AlphaAssignment alphas = AlphaAssignment::uniform(model, 0.2);
  NewtonOptions opts;
  opts.trace = true;
  const MinimizeResult a = newton_minimize(model, alphas, Vector::Constant(8, 3.0), opts);
  const MinimizeResult b = newton_minimize(model, alphas, Vector::Constant(8, 3.0), opts);
  CHECK(a.trace.size() == b.trace.size());
  CHECK(a.value.value == b.value.value);
  CHECK(a.trace.size() == static_cast<std::size_t>(a.iterations + 1));
}

TEST_CASE("make_inits") {
  const NormalizedModel model = normalize(make_k_regular(8, 4, 0.2));
  const SpectralResult spec = spectral(model);
  const auto inits = make_inits(model, spec, {1.0, 2.0});
  REQUIRE(inits.size() == 4);
  CHECK((inits[0] - Vector::Constant(8, 1 / std::sqrt(8.0))).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(inits[2] == Vector::Ones(8));
  CHECK((inits[3] - exact_marginals(model.base()).sigma).norm() == 0.0);
  CHECK_THROWS_AS(make_inits(model, spec, {0.0}), UsageError);
}

TEST_CASE("K-regular iterates keep the symmetry of the init") {
  const NormalizedModel model = normalize(make_k_regular(8, 4, 0.27));
  const AlphaAssignment alphas = AlphaAssignment::uniform(model, 1.0);
  for (double t : {0.5, 1.0, 1.8}) {
    for (int cap = 1; cap <= 12; ++cap) {
      NewtonOptions opts;
      opts.max_iterations = cap;
      const MinimizeResult r = newton_minimize(model, alphas, Vector::Constant(8, t), opts);
      const Vector& s = r.moments.sigma;
      CHECK(s.maxCoeff() - s.minCoeff() <= 1e-10 * s.maxCoeff());
      if (r.status == MinimizeStatus::Converged) break;
    }
  }
}

TEST_CASE("ray minimum on the 4-regular example") {
  const NormalizedModel model = normalize(make_k_regular(8, 4, 0.27));
  const Vector ones = Vector::Ones(8);
  const auto found = find_local_minimum_on_ray(model, AlphaAssignment::uniform(model, 1.0), ones);
  REQUIRE(found);
  // The ray minimum is a stationary point of F^c along 1.
  const double t = found->t;
  auto g = [&](double x) { return f_constrained(model, AlphaAssignment::uniform(model, 1.0), optimal_mean(model), x * ones).value; };
  CHECK(std::abs(g(t * (1 + 1e-5)) - g(t * (1 - 1e-5))) <= 1e-8);
  CHECK(found->value == doctest::Approx(g(t)).epsilon(1e-14));
  // The Newton minimizer started at the ray minimum stays there.
  const MinimizeResult r = newton_minimize(model, AlphaAssignment::uniform(model, 1.0), t * ones);
  CHECK(r.status == MinimizeStatus::Converged);
  CHECK((r.moments.sigma - t * ones).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK_FALSE(find_local_minimum_on_ray(model, AlphaAssignment::uniform(model, 2.0), ones));
}

TEST_CASE("bounded model: ray minimum exists for all alpha") {
  const NormalizedModel model = normalize(random_model(8, 0.5, 0.9, 3));
  const SpectralResult spec = spectral(model);
  for (double alpha : log_grid(1e-2, 1e2, 9)) {
    CAPTURE(alpha);
    CHECK(find_local_minimum_on_ray(model, AlphaAssignment::uniform(model, alpha), spec.u_max));
  }
}

TEST_CASE("ray minimum continues through r = 1/K") {
  const RaySearchOptions opts;
  const double step = (std::log(opts.t_max) - std::log(opts.t_min)) / (opts.points - 1);
  const double alpha = 0.5;
  const double rc = critical_r(4, alpha);
  double prev = NAN;
  for (double r = 0.15; r < rc - 0.005; r += 0.005) {
    const NormalizedModel model = normalize(make_k_regular(8, 4, r));
    const auto found = find_local_minimum_on_ray(model, AlphaAssignment::uniform(model, alpha), Vector::Ones(8));
    REQUIRE(found);
    const double lt = std::log(found->t);
    if (!std::isnan(prev)) CHECK(std::abs(lt - prev) <= 10 * step);
    prev = lt;
  }
}

TEST_CASE("option and input validation") {
  const NormalizedModel model = normalize(make_k_regular(6, 2, 0.2));
  const AlphaAssignment alphas = AlphaAssignment::uniform(model, 1.0);
  NewtonOptions bad;
  bad.tolerance = 0;
  CHECK_THROWS_AS(newton_minimize(model, alphas, Vector::Ones(6), bad), UsageError);
  bad = {};
  bad.shrink = 1.0;
  CHECK_THROWS_AS(newton_minimize(model, alphas, Vector::Ones(6), bad), UsageError);
  CHECK_THROWS_AS(newton_minimize(model, alphas, -Vector::Ones(6)), UsageError);
  CHECK_THROWS_AS(newton_minimize(model, alphas, Vector::Ones(5)), UsageError);
  CHECK_THROWS_AS(log_grid(0, 1, 3), UsageError);
  const auto g = log_grid(1e-1, 1e3, 5);
  CHECK(g.front() == doctest::Approx(0.1));
  CHECK(g.back() == doctest::Approx(1e3));
  CHECK(g[2] == doctest::Approx(10.0));
}
