#pragma once

#include <functional>
#include <span>
#include <vector>

namespace expframe {

/// Evaluates f(x) and writes its gradient into `grad` (same length as x).
using Objective = std::function<double(std::span<const double> x, std::span<double> grad)>;

struct LbfgsOptions {
  int memory = 6;
  int max_iterations = 300;
  double gradient_tolerance = 1e-6;
  /// Called after every accepted step with (iteration, objective value).
  std::function<void(int, double)> on_iteration;
};

struct OptimizeResult {
  int iterations = 0;
  double value = 0.0;
  double gradient_norm = 0.0;
  bool converged = false;
};

/// Limited-memory BFGS with a backtracking Armijo line search. Every accepted
/// step strictly decreases f, so the reported values are non-increasing.
OptimizeResult minimize_lbfgs(const Objective& f, std::vector<double>& x, const LbfgsOptions& options);

}  // namespace expframe
