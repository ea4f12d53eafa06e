#include "expframe/dataset.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>

namespace expframe {

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  if (n <= 1) return 0;
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  // Reject the tail so every residue is equally likely.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return static_cast<std::size_t>(draw % bound);
}

namespace {

template <class T>
void shuffle(std::vector<T>& values, std::mt19937_64& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    std::swap(values[i - 1], values[uniform_index(rng, i)]);
  }
}

}  // namespace

std::vector<Fold> split_kfold(const Corpus& corpus, std::size_t k, std::uint64_t seed) {
  const std::size_t n = corpus.documents.size();
  if (k < 2) throw DatasetError("k-fold split needs k >= 2");
  if (k > n) {
    throw DatasetError("k = " + std::to_string(k) + " exceeds the document count " + std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  shuffle(order, rng);

  std::vector<Fold> folds(k);
  std::size_t next = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    folds[f].dev_documents.assign(order.begin() + next, order.begin() + next + size);
    next += size;
    std::sort(folds[f].dev_documents.begin(), folds[f].dev_documents.end());
  }
  for (auto& fold : folds) {
    std::vector<bool> dev(n, false);
    for (auto d : fold.dev_documents) dev[d] = true;
    for (std::size_t d = 0; d < n; ++d) {
      if (!dev[d]) fold.train_documents.push_back(d);
    }
  }
  return folds;
}

Corpus subset(const Corpus& corpus, std::span<const std::size_t> documents) {
  Corpus out;
  out.documents.reserve(documents.size());
  for (auto d : documents) out.documents.push_back(corpus.documents.at(d));
  return out;
}

SentenceList all_sentences(const Corpus& corpus) {
  SentenceList out;
  for (const auto& doc : corpus.documents) {
    for (const auto& s : doc.sentences) out.push_back(&s);
  }
  return out;
}

SentenceList select_experiment_sentences(const Corpus& corpus) {
  SentenceList out;
  for (const auto& doc : corpus.documents) {
    for (const auto& s : doc.sentences) {
      if (s.is_experiment) out.push_back(&s);
    }
  }
  return out;
}

SentenceList downsample_negatives(std::span<const Sentence* const> sentences, double keep_rate, std::uint64_t seed) {
  if (!(keep_rate > 0.0 && keep_rate <= 1.0)) throw DatasetError("keep_rate must be in (0, 1]");
  std::vector<std::size_t> negatives;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (!sentences[i]->is_experiment) negatives.push_back(i);
  }
  const auto keep = static_cast<std::size_t>(std::llround(keep_rate * static_cast<double>(negatives.size())));

  // Partial Fisher-Yates: the first `keep` slots hold the sample.
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < keep; ++i) {
    std::swap(negatives[i], negatives[i + uniform_index(rng, negatives.size() - i)]);
  }
  std::vector<bool> kept(sentences.size(), false);
  for (std::size_t i = 0; i < keep; ++i) kept[negatives[i]] = true;

  SentenceList out;
  out.reserve(sentences.size() - negatives.size() + keep);
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (sentences[i]->is_experiment || kept[i]) out.push_back(sentences[i]);
  }
  return out;
}

}  // namespace expframe
