#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace expframe {

/// Observation features of one sentence: (feature id, value) pairs per token.
struct FeatureSequence {
  std::vector<std::vector<std::pair<std::uint32_t, double>>> positions;

  std::size_t size() const { return positions.size(); }
};

/// Unary scores s(i, l) for one sentence, row-major (length x labels).
class Lattice {
 public:
  Lattice(std::size_t length, std::size_t num_labels);

  std::size_t length() const { return length_; }
  std::size_t num_labels() const { return num_labels_; }
  double& operator()(std::size_t i, std::size_t label) { return scores_[i * num_labels_ + label]; }
  double operator()(std::size_t i, std::size_t label) const { return scores_[i * num_labels_ + label]; }
  std::span<const double> row(std::size_t i) const { return {scores_.data() + i * num_labels_, num_labels_}; }

 private:
  std::size_t length_;
  std::size_t num_labels_;
  std::vector<double> scores_;
};

/// Linear-chain CRF parameters.
///
/// The parameter vector holds unary weights for the (feature, label) pairs the
/// model was built with, followed by a (K + 2) x K transition block: rows
/// 0..K-1 are label-to-label scores, row K holds start scores and row K + 1
/// holds end scores (indexed by the last label).
class CrfModel {
 public:
  CrfModel() = default;
  /// Dense layout: every feature carries a weight for every label.
  CrfModel(std::vector<std::string> labels, std::size_t num_features);
  /// Sparse layout: feature f carries weights only for labels_per_feature[f] (ascending).
  CrfModel(std::vector<std::string> labels, const std::vector<std::vector<std::uint32_t>>& labels_per_feature);

  std::size_t num_labels() const { return labels_.size(); }
  std::size_t num_features() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t num_unary() const { return pair_labels_.size(); }
  std::size_t num_parameters() const { return params_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  /// Labels with a weight for feature f; weights live at parameter index
  /// unary_offset(f) + position in this span.
  std::span<const std::uint32_t> feature_labels(std::uint32_t f) const {
    return {pair_labels_.data() + offsets_[f], offsets_[f + 1] - offsets_[f]};
  }
  std::size_t unary_offset(std::uint32_t f) const { return offsets_[f]; }

  std::size_t transition_index(std::size_t from, std::size_t to) const { return num_unary() + from * num_labels() + to; }
  std::size_t start_index(std::size_t to) const { return transition_index(num_labels(), to); }
  std::size_t end_index(std::size_t from) const { return transition_index(num_labels() + 1, from); }

  double transition(std::size_t from, std::size_t to) const { return params_[transition_index(from, to)]; }
  double start(std::size_t to) const { return params_[start_index(to)]; }
  double end(std::size_t from) const { return params_[end_index(from)]; }
  double& transition(std::size_t from, std::size_t to) { return params_[transition_index(from, to)]; }
  double& start(std::size_t to) { return params_[start_index(to)]; }
  double& end(std::size_t from) { return params_[end_index(from)]; }

  /// Unary scores from features; ids outside the model are ignored.
  Lattice lattice(const FeatureSequence& features) const;

 private:
  std::vector<std::string> labels_;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> pair_labels_;
  std::vector<double> params_;
};

/// Allowed start labels and label-to-label moves.
struct TransitionMask {
  std::vector<bool> start;    ///< K
  std::vector<bool> allowed;  ///< K x K, row = previous label

  bool allows(std::size_t from, std::size_t to) const { return allowed[from * start.size() + to]; }

  /// BIO validity: I-t only after B-t or I-t, never first.
  static TransitionMask bio(std::span<const std::string> labels);
};

class CrfError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Sum of unary scores, start/end scores and transitions along `labels`.
double score_sequence(const CrfModel& model, const Lattice& lattice, std::span<const std::uint32_t> labels);

struct ForwardBackward {
  double log_z = 0.0;           ///< from the forward recursion
  double log_z_backward = 0.0;  ///< from the backward recursion
  std::size_t length = 0;
  std::size_t num_labels = 0;
  std::vector<double> log_node;  ///< length x K
  std::vector<double> log_edge;  ///< (length - 1) x K x K; entry [i][a][b] is edge (i, i + 1)

  double node(std::size_t i, std::size_t label) const { return log_node[i * num_labels + label]; }
  double edge(std::size_t i, std::size_t from, std::size_t to) const {
    return log_edge[(i * num_labels + from) * num_labels + to];
  }
};

/// Log partition function and log marginals (log-space recursions).
ForwardBackward forward_backward(const CrfModel& model, const Lattice& lattice);

struct ViterbiResult {
  std::vector<std::uint32_t> labels;
  double score = 0.0;
};

/// Highest-scoring sequence; ties go to the lowest label index. With a mask,
/// disallowed starts and moves are excluded.
ViterbiResult viterbi(const CrfModel& model, const Lattice& lattice, const TransitionMask* mask = nullptr);

struct TrainingSequence {
  FeatureSequence features;
  std::vector<std::uint32_t> labels;
};

/// Returns sum over the batch of [score(gold) - log Z] - lambda/2 |theta|^2
/// and writes its gradient (empirical - expected counts - lambda theta).
/// Per-thread partial sums are combined in a fixed order.
double loglik_and_gradient(const CrfModel& model, std::span<const TrainingSequence> batch, double lambda,
                           std::span<double> gradient, int threads = 1);

struct CrfTrainConfig {
  double lambda = 1.0;
  int max_epochs = 300;
  double tolerance = 1e-4;
  int memory = 6;
  int threads = 1;
  std::function<void(int, double)> on_epoch;
};

/// Maximizes the regularized log-likelihood divided by the batch size with
/// L-BFGS, starting from the model's current parameters.
CrfModel fit_crf(CrfModel model, std::span<const TrainingSequence> data, const CrfTrainConfig& config);

}  // namespace expframe
