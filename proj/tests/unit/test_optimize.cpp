#include <cmath>

#include <doctest.h>

#include "expframe/optimize.hpp"

using namespace expframe;

TEST_CASE("L-BFGS on a shifted quadratic") {
  std::vector<double> x(5, 0.0);
  auto f = [](std::span<const double> p, std::span<double> g) {
    double v = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double w = static_cast<double>(i + 1);
      v += 0.5 * w * (p[i] - 1.0) * (p[i] - 1.0);
      g[i] = w * (p[i] - 1.0);
    }
    return v;
  };
  const auto r = minimize_lbfgs(f, x, {});
  CHECK(r.converged);
  for (double v : x) CHECK(v == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("L-BFGS on Rosenbrock with non-increasing values") {
  std::vector<double> x{-1.2, 1.0};
  std::vector<double> seen;
  LbfgsOptions opts;
  opts.max_iterations = 500;
  opts.gradient_tolerance = 1e-8;
  opts.on_iteration = [&](int, double v) { seen.push_back(v); };
  auto f = [](std::span<const double> p, std::span<double> g) {
    const double a = 1 - p[0], b = p[1] - p[0] * p[0];
    g[0] = -2 * a - 400 * p[0] * b;
    g[1] = 200 * b;
    return a * a + 100 * b * b;
  };
  const auto r = minimize_lbfgs(f, x, opts);
  CHECK(r.converged);
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-5));
  for (std::size_t i = 1; i < seen.size(); ++i) CHECK(seen[i] <= seen[i - 1]);
}

TEST_CASE("already optimal start") {
  std::vector<double> x{0.0};
  auto f = [](std::span<const double> p, std::span<double> g) {
    g[0] = 2 * p[0];
    return p[0] * p[0];
  };
  const auto r = minimize_lbfgs(f, x, {});
  CHECK(r.converged);
  CHECK(r.iterations == 0);
  CHECK(x[0] == 0.0);
}
