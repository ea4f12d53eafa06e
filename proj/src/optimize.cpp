#include "expframe/optimize.hpp"

#include <cmath>
#include <deque>
#include <numeric>

namespace expframe {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct Correction {
  std::vector<double> s;
  std::vector<double> y;
  double rho;
};

}  // namespace

OptimizeResult minimize_lbfgs(const Objective& f, std::vector<double>& x, const LbfgsOptions& options) {
  const std::size_t n = x.size();
  std::vector<double> grad(n), direction(n), x_next(n), grad_next(n);
  std::deque<Correction> history;
  std::vector<double> alpha;

  OptimizeResult result;
  result.value = f(x, grad);
  result.gradient_norm = std::sqrt(dot(grad, grad));
  if (result.gradient_norm <= options.gradient_tolerance) {
    result.converged = true;
    return result;
  }

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    // Two-loop recursion: direction = -H * grad.
    for (std::size_t i = 0; i < n; ++i) direction[i] = -grad[i];
    alpha.assign(history.size(), 0.0);
    for (std::size_t k = history.size(); k-- > 0;) {
      alpha[k] = history[k].rho * dot(history[k].s, direction);
      for (std::size_t i = 0; i < n; ++i) direction[i] -= alpha[k] * history[k].y[i];
    }
    if (!history.empty()) {
      const auto& last = history.back();
      const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
      for (auto& d : direction) d *= gamma;
    }
    for (std::size_t k = 0; k < history.size(); ++k) {
      const double beta = history[k].rho * dot(history[k].y, direction);
      for (std::size_t i = 0; i < n; ++i) direction[i] += history[k].s[i] * (alpha[k] - beta);
    }

    double slope = dot(grad, direction);
    if (!(slope < 0.0)) {
      history.clear();
      for (std::size_t i = 0; i < n; ++i) direction[i] = -grad[i];
      slope = -result.gradient_norm * result.gradient_norm;
    }
    double step = history.empty() ? std::min(1.0, 1.0 / result.gradient_norm) : 1.0;

    // Backtracking until the Armijo condition holds.
    constexpr double c1 = 1e-4;
    double value_next = 0.0;
    bool accepted = false;
    for (int trial = 0; trial < 60; ++trial) {
      for (std::size_t i = 0; i < n; ++i) x_next[i] = x[i] + step * direction[i];
      value_next = f(x_next, grad_next);
      if (std::isfinite(value_next) && value_next <= result.value + c1 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted || !(value_next < result.value)) break;

    Correction c;
    c.s.resize(n);
    c.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      c.s[i] = x_next[i] - x[i];
      c.y[i] = grad_next[i] - grad[i];
    }
    const double sy = dot(c.s, c.y);
    x.swap(x_next);
    grad.swap(grad_next);
    result.value = value_next;
    result.gradient_norm = std::sqrt(dot(grad, grad));
    result.iterations = iter;
    if (options.on_iteration) options.on_iteration(iter, result.value);

    if (sy > 1e-12) {
      c.rho = 1.0 / sy;
      history.push_back(std::move(c));
      if (static_cast<int>(history.size()) > options.memory) history.pop_front();
    }
    if (result.gradient_norm <= options.gradient_tolerance) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace expframe
