#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "expframe/corpus.hpp"

namespace expframe {

/// Non-owning list of sentences; the corpus must outlive it.
using SentenceList = std::vector<const Sentence*>;

struct Fold {
  std::vector<std::size_t> train_documents;  ///< indices into Corpus::documents, ascending
  std::vector<std::size_t> dev_documents;
};

class DatasetError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Uniform index in [0, n) drawn from the raw mt19937_64 stream, so results
/// do not depend on the standard library's distribution implementation.
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n);

/// Document-level k-fold partition. Documents are shuffled with `seed`, then
/// dealt into folds whose sizes differ by at most one (larger folds first).
std::vector<Fold> split_kfold(const Corpus& corpus, std::size_t k, std::uint64_t seed);

/// Copies the selected documents into a new corpus, keeping their order.
Corpus subset(const Corpus& corpus, std::span<const std::size_t> documents);

SentenceList all_sentences(const Corpus& corpus);
SentenceList select_experiment_sentences(const Corpus& corpus);

/// Keeps every experiment sentence and round(keep_rate * #negatives)
/// negatives drawn without replacement. Input order is preserved.
SentenceList downsample_negatives(std::span<const Sentence* const> sentences, double keep_rate, std::uint64_t seed);

}  // namespace expframe
