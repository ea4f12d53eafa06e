#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "expframe/corpus.hpp"
#include "expframe/evaluation.hpp"
#include "expframe/features.hpp"
#include "expframe/linear.hpp"
#include "expframe/tagger.hpp"

namespace expframe {

enum class Task { sentence, entity, slot };

std::string_view to_string(Task task);
std::optional<Task> parse_task(std::string_view text);

struct TaskConfig {
  LossKind loss = LossKind::logistic;
  LinearConfig linear;
  int n_max = 4;
  /// Fraction of non-experiment sentences kept for the sentence task.
  /// Unset means 0.3 for logistic regression and 1.0 for the SVM.
  std::optional<double> keep_rate;
  TaggerConfig tagger;

  double effective_keep_rate() const;
};

struct SentenceClassifier {
  FeatureIndex index;
  int n_max = 4;
  LinearModel model;
};

class TaskModel {
 public:
  TaskModel(Task task, std::variant<SentenceClassifier, CrfTagger> model);

  Task task() const { return task_; }
  const SentenceClassifier& classifier() const { return std::get<SentenceClassifier>(model_); }
  const CrfTagger& tagger() const { return std::get<CrfTagger>(model_); }
  /// Embedding sources the model needs at prediction time, in order.
  std::vector<std::string> embedding_sources() const;

  /// Predictions for one sentence; only the fields of this task are set.
  Prediction predict(const Sentence& sentence, std::span<const EmbeddingTable> tables) const;
  /// Adds this task's predictions to every sentence, keeping other fields of
  /// an existing `predicted` block and all gold annotations.
  void annotate(Sentence& sentence, std::span<const EmbeddingTable> tables) const;
  void annotate(Corpus& corpus, std::span<const EmbeddingTable> tables) const;

  nlohmann::ordered_json to_json() const;
  static TaskModel from_json(const nlohmann::json& j);

 private:
  Task task_;
  std::variant<SentenceClassifier, CrfTagger> model_;
};

/// Trains on the gold annotations of `train`. The sentence task uses all
/// sentences (negatives downsampled with `seed`); the entity and slot tasks
/// train on experiment sentences only.
TaskModel train_task(Task task, const Corpus& train, std::span<const EmbeddingTable> tables,
                     const TaskConfig& config, std::uint64_t seed,
                     const CorpusSchema& schema = CorpusSchema::sofc_exp());

/// Scores the `predicted` blocks of `corpus` against its gold annotations.
/// Sentence task: P/R/F1 of the experiment class over all sentences.
/// Entity/slot tasks: strict span scores on gold experiment sentences, over
/// the mention types or the scored slot types respectively.
EvalReport evaluate_task(Task task, const Corpus& corpus, const CorpusSchema& schema = CorpusSchema::sofc_exp());

/// Per-type and macro scores summarised over several reports of one schema.
struct ReportSummary {
  std::vector<std::string> types;
  std::vector<MeanStd> precision, recall, f1;  ///< parallel to `types`
  MeanStd macro_precision, macro_recall, macro_f1;
};

ReportSummary summarize(std::span<const EvalReport> reports);

struct CrossvalResult {
  Task task = Task::sentence;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<std::string>> dev_documents;  ///< per fold
  std::vector<EvalReport> dev;                         ///< per fold
  std::vector<EvalReport> test;                        ///< per fold model, empty without a test corpus
  ReportSummary dev_summary;                           ///< mean and std over folds
  std::optional<ReportSummary> test_summary;           ///< average of the fold models' scores
};

/// Document-level k-fold cross-validation. Fold i trains with seed + i.
/// With a test corpus, every fold model is also scored on it.
CrossvalResult crossval(Task task, const Corpus& train, const Corpus* test, std::size_t k,
                        std::span<const EmbeddingTable> tables, const TaskConfig& config, std::uint64_t seed,
                        const CorpusSchema& schema = CorpusSchema::sofc_exp());

}  // namespace expframe
