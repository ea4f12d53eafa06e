#include "expframe/linear.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "expframe/optimize.hpp"

namespace expframe {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kFormatVersion = 1;

void check_training_set(std::span<const SparseVector> X, std::span<const int> y, std::size_t dim) {
  if (X.empty() || X.size() != y.size()) throw TrainingError("training set is empty or X/y lengths differ");
  bool pos = false, neg = false;
  for (int label : y) {
    if (label != 0 && label != 1) throw TrainingError("labels must be 0 or 1");
    (label ? pos : neg) = true;
  }
  if (!pos || !neg) throw TrainingError("training set contains a single class");
  for (const auto& x : X) {
    for (const auto& [id, v] : x.entries) {
      if (id >= dim) throw TrainingError("feature id exceeds model dimension");
      if (!std::isfinite(v)) throw TrainingError("non-finite feature value");
    }
  }
}

// log(1 + exp(-m)) without overflow.
double log1p_exp_neg(double m) { return m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m)); }

}  // namespace

std::string_view to_string(LossKind kind) { return kind == LossKind::logistic ? "logistic" : "hinge"; }

std::optional<LossKind> parse_loss_kind(std::string_view text) {
  if (text == "logistic") return LossKind::logistic;
  if (text == "hinge" || text == "svm") return LossKind::hinge;
  return std::nullopt;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logistic_objective(std::span<const SparseVector> X, std::span<const int> y, double lambda,
                          std::span<const double> params, std::span<double> grad) {
  const std::size_t dim = params.size() - 1;
  const auto weights = params.first(dim);
  const double bias = params[dim];
  const double inv_n = 1.0 / static_cast<double>(X.size());
  std::fill(grad.begin(), grad.end(), 0.0);
  double loss = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    const double sign = y[i] ? 1.0 : -1.0;
    const double margin = sign * (X[i].dot(weights) + bias);
    loss += log1p_exp_neg(margin);
    const double coef = -sign * sigmoid(-margin) * inv_n;
    for (const auto& [id, v] : X[i].entries) grad[id] += coef * v;
    grad[dim] += coef;
  }
  double reg = 0.0;
  for (std::size_t j = 0; j < dim; ++j) {
    reg += weights[j] * weights[j];
    grad[j] += lambda * weights[j];
  }
  return loss * inv_n + 0.5 * lambda * reg;
}

double hinge_objective(std::span<const SparseVector> X, std::span<const int> y, double lambda,
                       std::span<const double> weights, double bias) {
  double loss = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    const double sign = y[i] ? 1.0 : -1.0;
    loss += std::max(0.0, 1.0 - sign * (X[i].dot(weights) + bias));
  }
  double reg = bias * bias;
  for (double w : weights) reg += w * w;
  return loss / static_cast<double>(X.size()) + 0.5 * lambda * reg;
}

LinearModel train_logistic(std::span<const SparseVector> X, std::span<const int> y, std::size_t dim,
                           const LinearConfig& config) {
  check_training_set(X, y, dim);
  std::vector<double> params(dim + 1, 0.0);
  LbfgsOptions opts;
  opts.max_iterations = config.max_epochs;
  opts.gradient_tolerance = config.tolerance;
  opts.on_iteration = config.on_epoch;
  minimize_lbfgs(
      [&](std::span<const double> p, std::span<double> g) { return logistic_objective(X, y, config.lambda, p, g); },
      params, opts);
  LinearModel model;
  model.kind = LossKind::logistic;
  model.lambda = config.lambda;
  model.bias = params[dim];
  params.pop_back();
  model.weights = std::move(params);
  return model;
}

LinearModel train_linear_svm(std::span<const SparseVector> X, std::span<const int> y, std::size_t dim,
                             const LinearConfig& config) {
  check_training_set(X, y, dim);
  if (!(config.lambda > 0)) throw TrainingError("hinge training needs lambda > 0");
  const double n = static_cast<double>(X.size());
  const double radius = 1.0 / std::sqrt(config.lambda);
  std::vector<double> w(dim, 0.0), step(dim, 0.0);
  double b = 0.0;

  std::vector<double> best_w = w;
  double best_b = 0.0;
  double best = hinge_objective(X, y, config.lambda, w, b);

  for (int t = 1; t <= config.max_epochs; ++t) {
    const double eta = 1.0 / (config.lambda * t);
    std::fill(step.begin(), step.end(), 0.0);
    double step_b = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
      const double sign = y[i] ? 1.0 : -1.0;
      if (sign * (X[i].dot(w) + b) < 1.0) {
        for (const auto& [id, v] : X[i].entries) step[id] += sign * v;
        step_b += sign;
      }
    }
    const double shrink = 1.0 - eta * config.lambda;
    double norm2 = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      w[j] = shrink * w[j] + eta / n * step[j];
      norm2 += w[j] * w[j];
    }
    b = shrink * b + eta / n * step_b;
    norm2 += b * b;
    if (norm2 > radius * radius) {
      const double scale = radius / std::sqrt(norm2);
      for (auto& v : w) v *= scale;
      b *= scale;
    }
    const double value = hinge_objective(X, y, config.lambda, w, b);
    if (value < best) {
      best = value;
      best_w = w;
      best_b = b;
    }
    if (config.on_epoch) config.on_epoch(t, value);
  }
  LinearModel model;
  model.kind = LossKind::hinge;
  model.lambda = config.lambda;
  model.weights = std::move(best_w);
  model.bias = best_b;
  return model;
}

Decision predict(const LinearModel& model, const SparseVector& x) {
  Decision d;
  d.score = x.dot(model.weights) + model.bias;
  d.label = d.score > 0.0 ? 1 : 0;
  if (model.kind == LossKind::logistic) d.probability = sigmoid(d.score);
  return d;
}

ordered_json linear_model_to_json(const LinearModel& model, const FeatureIndex& index) {
  std::vector<std::size_t> order(model.weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return index.name(static_cast<std::uint32_t>(a)) < index.name(static_cast<std::uint32_t>(b));
  });
  ordered_json weights = ordered_json::array();
  for (auto j : order) {
    if (model.weights[j] != 0.0) weights.push_back(ordered_json::array({index.name(static_cast<std::uint32_t>(j)), model.weights[j]}));
  }
  ordered_json out;
  out["format"] = "expframe.linear";
  out["version"] = kFormatVersion;
  out["kind"] = std::string(to_string(model.kind));
  out["lambda"] = model.lambda;
  out["bias"] = model.bias;
  out["weights"] = std::move(weights);
  return out;
}

std::pair<LinearModel, FeatureIndex> linear_model_from_json(const json& j) {
  if (j.value("format", "") != "expframe.linear" || j.value("version", 0) != kFormatVersion) {
    throw TrainingError("not a version " + std::to_string(kFormatVersion) + " linear model");
  }
  LinearModel model;
  auto kind = parse_loss_kind(j.at("kind").get<std::string>());
  if (!kind) throw TrainingError("unknown linear model kind");
  model.kind = *kind;
  model.lambda = j.at("lambda").get<double>();
  model.bias = j.at("bias").get<double>();
  FeatureIndex index;
  for (const auto& w : j.at("weights")) {
    index.insert(w.at(0).get<std::string>());
    model.weights.push_back(w.at(1).get<double>());
  }
  index.freeze();
  return {std::move(model), std::move(index)};
}

}  // namespace expframe
