#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "expframe/features.hpp"

namespace expframe {

enum class LossKind { logistic, hinge };

std::string_view to_string(LossKind kind);
std::optional<LossKind> parse_loss_kind(std::string_view text);

struct LinearConfig {
  double lambda = 1e-4;
  double tolerance = 1e-6;
  int max_epochs = 500;
  std::uint64_t seed = 0;  ///< training is full-batch; kept for interface symmetry
  std::function<void(int, double)> on_epoch;
};

struct LinearModel {
  LossKind kind = LossKind::logistic;
  double lambda = 0.0;
  std::vector<double> weights;
  double bias = 0.0;
};

struct Decision {
  int label = 0;
  double score = 0.0;
  /// Sigmoid of the score for logistic models; unset for hinge models.
  std::optional<double> probability;
};

class TrainingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

double sigmoid(double z);

/// Mean logistic loss + lambda/2 |w|^2 (bias unregularized). `params` holds
/// the weights followed by the bias; `grad` receives the matching gradient.
double logistic_objective(std::span<const SparseVector> X, std::span<const int> y, double lambda,
                          std::span<const double> params, std::span<double> grad);

/// Mean hinge loss + lambda/2 (|w|^2 + b^2); the bias is a regularized
/// constant feature, as in Pegasos.
double hinge_objective(std::span<const SparseVector> X, std::span<const int> y, double lambda,
                       std::span<const double> weights, double bias);

/// Full-batch L-BFGS to gradient norm `tolerance` or `max_epochs` iterations.
/// Labels are 0/1 and both classes must be present.
LinearModel train_logistic(std::span<const SparseVector> X, std::span<const int> y, std::size_t dim,
                           const LinearConfig& config);

/// Full-batch Pegasos subgradient schedule (step 1/(lambda t), projection to
/// the 1/sqrt(lambda) ball). Returns the iterate with the lowest objective,
/// the zero vector included.
LinearModel train_linear_svm(std::span<const SparseVector> X, std::span<const int> y, std::size_t dim,
                             const LinearConfig& config);

/// score = w.x + b; label 1 iff score > 0 (probability > 0.5), so ties go to 0.
Decision predict(const LinearModel& model, const SparseVector& x);

nlohmann::ordered_json linear_model_to_json(const LinearModel& model, const FeatureIndex& index);
std::pair<LinearModel, FeatureIndex> linear_model_from_json(const nlohmann::json& j);

}  // namespace expframe
