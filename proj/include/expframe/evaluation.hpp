#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "expframe/bio.hpp"
#include "expframe/corpus.hpp"

namespace expframe {

/// Precision, recall and F1 as fractions in [0, 1]; undefined ratios are 0.
struct PrfScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

PrfScore prf(std::size_t tp, std::size_t fp, std::size_t fn);

struct EvalReport {
  std::vector<std::string> types;
  std::vector<PrfScore> per_type;  ///< parallel to `types`
  PrfScore micro;                  ///< pooled counts
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;  ///< unweighted mean of per-type F1

  const PrfScore& at(std::string_view type) const;
};

/// Builds per-type and macro scores from per-type counts.
EvalReport make_report(std::vector<std::string> types, std::vector<PrfScore> per_type);

/// Strict span scoring: a prediction counts only if begin, end and type all
/// match a gold span. Spans whose type is outside `types` are ignored.
/// `gold` and `predicted` hold one span list per sentence.
EvalReport span_prf(std::span<const std::vector<Span>> gold, std::span<const std::vector<Span>> predicted,
                    const std::vector<std::string>& types);

class EvaluationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct AgreementResult {
  double kappa = 0.0;
  double observed = 0.0;  ///< p_o
  double expected = 0.0;  ///< p_e
  std::size_t items = 0;
  /// Per-class scores with the first sequence as gold, classes sorted.
  std::map<std::string, PrfScore> per_class;
};

/// Cohen's kappa between two label sequences of equal, non-zero length.
/// When p_e = 1 (both annotators constant and equal) kappa is 1.
AgreementResult cohens_kappa(std::span<const std::string> a, std::span<const std::string> b);

/// Class names used for sentence-level agreement.
inline constexpr const char* kExperimentClass = "experiment";
inline constexpr const char* kOtherClass = "other";

struct AgreementReport {
  AgreementResult sentences;  ///< experiment vs. other, A as gold
  std::size_t shared_experiment_sentences = 0;
  EvalReport mentions;  ///< on sentences both annotators marked as experiment
  EvalReport slots;     ///< scored slot types, same sentences
};

/// Compares two annotations of the same documents, A taken as gold.
/// Documents are matched by id; sentence and token counts must agree.
AgreementReport agreement_report(const Corpus& a, const Corpus& b,
                                 const CorpusSchema& schema = CorpusSchema::sofc_exp());

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  ///< population standard deviation
};

MeanStd mean_std(std::span<const double> values);

struct LinkCounts {
  std::size_t total = 0;
  std::size_t cross_sentence = 0;
};

struct CorpusStats {
  std::size_t documents = 0;
  std::size_t sentences = 0;
  std::size_t tokens = 0;
  double tokens_per_sentence = 0.0;
  std::size_t experiment_sentences = 0;
  double experiment_fraction = 0.0;
  std::size_t sentences_with_mentions = 0;
  std::vector<std::pair<std::string, std::size_t>> mentions;  ///< schema order
  std::vector<std::pair<std::string, std::size_t>> slots;     ///< schema order, auxiliary types included
  /// Number of EXPERIMENT mentions in a sentence -> sentences with that many (>= 1).
  std::map<std::size_t, std::size_t> experiments_per_sentence;
  LinkCounts same_exp;
  LinkCounts variation;
  std::size_t tokens_missing_pos = 0;    ///< fallback tagger used for these
  std::size_t tokens_missing_lemma = 0;  ///< fallback lemmatizer used for these
};

CorpusStats corpus_stats(const Corpus& corpus, const CorpusSchema& schema = CorpusSchema::sofc_exp());

}  // namespace expframe
