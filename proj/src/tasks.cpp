#include "expframe/tasks.hpp"

#include "expframe/dataset.hpp"

namespace expframe {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kFormatVersion = 1;

Layer layer_of(Task task) { return task == Task::slot ? Layer::slots : Layer::mentions; }

std::vector<Span>& target(Prediction& p, Task task) {
  auto& field = task == Task::slot ? p.slots : p.mentions;
  if (!field) field.emplace();
  return *field;
}

}  // namespace

std::string_view to_string(Task task) {
  switch (task) {
    case Task::sentence: return "sentence";
    case Task::entity: return "entity";
    case Task::slot: return "slot";
  }
  return "sentence";
}

std::optional<Task> parse_task(std::string_view text) {
  if (text == "sentence") return Task::sentence;
  if (text == "entity") return Task::entity;
  if (text == "slot") return Task::slot;
  return std::nullopt;
}

double TaskConfig::effective_keep_rate() const {
  if (keep_rate) return *keep_rate;
  return loss == LossKind::logistic ? 0.3 : 1.0;
}

TaskModel::TaskModel(Task task, std::variant<SentenceClassifier, CrfTagger> model)
    : task_(task), model_(std::move(model)) {
  const bool is_classifier = std::holds_alternative<SentenceClassifier>(model_);
  if (is_classifier != (task == Task::sentence)) throw TrainingError("model kind does not fit the task");
  if (!is_classifier && std::get<CrfTagger>(model_).layer() != layer_of(task)) {
    throw TrainingError("tagger layer does not fit the task");
  }
}

std::vector<std::string> TaskModel::embedding_sources() const {
  if (task_ == Task::sentence) return {};
  return tagger().embedding_sources();
}

Prediction TaskModel::predict(const Sentence& sentence, std::span<const EmbeddingTable> tables) const {
  Prediction p;
  if (task_ == Task::sentence) {
    const auto& c = classifier();
    const Decision d = expframe::predict(c.model, extract_sentence_features(sentence, c.index, c.n_max));
    p.is_experiment = d.label == 1;
    p.score = d.probability ? *d.probability : d.score;
  } else {
    target(p, task_) = tagger().tag(sentence, tables);
  }
  return p;
}

void TaskModel::annotate(Sentence& sentence, std::span<const EmbeddingTable> tables) const {
  Prediction fresh = predict(sentence, tables);
  Prediction& out = sentence.predicted ? *sentence.predicted : sentence.predicted.emplace();
  if (task_ == Task::sentence) {
    out.is_experiment = fresh.is_experiment;
    out.score = fresh.score;
  } else {
    target(out, task_) = std::move(target(fresh, task_));
  }
}

void TaskModel::annotate(Corpus& corpus, std::span<const EmbeddingTable> tables) const {
  for (auto& doc : corpus.documents) {
    for (auto& s : doc.sentences) annotate(s, tables);
  }
}

ordered_json TaskModel::to_json() const {
  ordered_json out;
  out["format"] = "expframe.task";
  out["version"] = kFormatVersion;
  out["task"] = std::string(to_string(task_));
  if (task_ == Task::sentence) {
    const auto& c = classifier();
    out["n_max"] = c.n_max;
    out["model"] = linear_model_to_json(c.model, c.index);
  } else {
    out["model"] = tagger().to_json();
  }
  return out;
}

TaskModel TaskModel::from_json(const json& j) {
  if (j.value("format", "") != "expframe.task" || j.value("version", 0) != kFormatVersion) {
    throw TrainingError("not a version " + std::to_string(kFormatVersion) + " task model");
  }
  auto task = parse_task(j.at("task").get<std::string>());
  if (!task) throw TrainingError("unknown task in model file");
  if (*task == Task::sentence) {
    SentenceClassifier c;
    c.n_max = j.at("n_max").get<int>();
    auto [model, index] = linear_model_from_json(j.at("model"));
    c.model = std::move(model);
    c.index = std::move(index);
    return TaskModel(*task, std::move(c));
  }
  return TaskModel(*task, CrfTagger::from_json(j.at("model")));
}

TaskModel train_task(Task task, const Corpus& train, std::span<const EmbeddingTable> tables,
                     const TaskConfig& config, std::uint64_t seed, const CorpusSchema& schema) {
  if (task == Task::sentence) {
    const double rate = config.effective_keep_rate();
    if (!(rate > 0.0 && rate <= 1.0)) throw TrainingError("keep rate must be in (0, 1]");
    const SentenceList all = all_sentences(train);
    const SentenceList chosen = downsample_negatives(all, rate, seed);
    SentenceClassifier c;
    c.n_max = config.n_max;
    std::vector<std::vector<std::string>> names;
    names.reserve(chosen.size());
    for (const Sentence* s : chosen) {
      names.push_back(sentence_ngram_features(*s, config.n_max));
      for (const auto& n : names.back()) c.index.insert(n);
    }
    c.index.freeze();
    std::vector<SparseVector> X;
    std::vector<int> y;
    for (std::size_t i = 0; i < chosen.size(); ++i) {
      X.push_back(to_sparse(c.index, names[i]));
      y.push_back(chosen[i]->is_experiment ? 1 : 0);
    }
    LinearConfig lc = config.linear;
    lc.seed = seed;
    c.model = config.loss == LossKind::logistic ? train_logistic(X, y, c.index.size(), lc)
                                                : train_linear_svm(X, y, c.index.size(), lc);
    return TaskModel(task, std::move(c));
  }
  const SentenceList sentences = select_experiment_sentences(train);
  if (sentences.empty()) throw TrainingError("training corpus has no experiment sentences");
  return TaskModel(task, train_crf(sentences, layer_of(task), schema, tables, config.tagger));
}

EvalReport evaluate_task(Task task, const Corpus& corpus, const CorpusSchema& schema) {
  auto missing = [](const Sentence& s, std::string_view what) {
    return EvaluationError("document '" + s.doc_id + "' sentence " + std::to_string(s.index) + " has no predicted " +
                           std::string(what));
  };
  if (task == Task::sentence) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (const auto& doc : corpus.documents) {
      for (const auto& s : doc.sentences) {
        if (!s.predicted || !s.predicted->is_experiment) throw missing(s, "is_experiment");
        const bool p = *s.predicted->is_experiment;
        if (p && s.is_experiment) ++tp;
        else if (p) ++fp;
        else if (s.is_experiment) ++fn;
      }
    }
    return make_report({kExperimentClass}, {prf(tp, fp, fn)});
  }
  const Layer layer = layer_of(task);
  std::vector<std::vector<Span>> gold, predicted;
  for (const auto& doc : corpus.documents) {
    for (const auto& s : doc.sentences) {
      if (!s.is_experiment) continue;
      const auto& field = task == Task::slot ? (s.predicted ? s.predicted->slots : std::nullopt)
                                             : (s.predicted ? s.predicted->mentions : std::nullopt);
      if (!field) throw missing(s, task == Task::slot ? "slots" : "mentions");
      gold.push_back(layer_spans(s, layer, schema));
      predicted.push_back(*field);
    }
  }
  return span_prf(gold, predicted, task == Task::slot ? schema.evaluated_slot_types() : schema.mention_types);
}

ReportSummary summarize(std::span<const EvalReport> reports) {
  ReportSummary out;
  if (reports.empty()) return out;
  out.types = reports.front().types;
  auto collect = [&](auto get) {
    std::vector<double> v;
    for (const auto& r : reports) v.push_back(get(r));
    return mean_std(v);
  };
  for (std::size_t t = 0; t < out.types.size(); ++t) {
    for (const auto& r : reports) {
      if (r.types != out.types) throw EvaluationError("reports use different type sets");
    }
    out.precision.push_back(collect([t](const EvalReport& r) { return r.per_type[t].precision; }));
    out.recall.push_back(collect([t](const EvalReport& r) { return r.per_type[t].recall; }));
    out.f1.push_back(collect([t](const EvalReport& r) { return r.per_type[t].f1; }));
  }
  out.macro_precision = collect([](const EvalReport& r) { return r.macro_precision; });
  out.macro_recall = collect([](const EvalReport& r) { return r.macro_recall; });
  out.macro_f1 = collect([](const EvalReport& r) { return r.macro_f1; });
  return out;
}

CrossvalResult crossval(Task task, const Corpus& train, const Corpus* test, std::size_t k,
                        std::span<const EmbeddingTable> tables, const TaskConfig& config, std::uint64_t seed,
                        const CorpusSchema& schema) {
  CrossvalResult result;
  result.task = task;
  result.k = k;
  result.seed = seed;
  const auto folds = split_kfold(train, k, seed);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const Corpus fold_train = subset(train, folds[f].train_documents);
    Corpus fold_dev = subset(train, folds[f].dev_documents);
    std::vector<std::string> ids;
    for (const auto& d : fold_dev.documents) ids.push_back(d.doc_id);
    result.dev_documents.push_back(std::move(ids));

    const TaskModel model = train_task(task, fold_train, tables, config, seed + f, schema);
    model.annotate(fold_dev, tables);
    result.dev.push_back(evaluate_task(task, fold_dev, schema));
    if (test) {
      Corpus scored = *test;
      model.annotate(scored, tables);
      result.test.push_back(evaluate_task(task, scored, schema));
    }
  }
  result.dev_summary = summarize(result.dev);
  if (test) result.test_summary = summarize(result.test);
  return result;
}

}  // namespace expframe
