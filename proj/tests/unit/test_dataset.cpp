#include <algorithm>
#include <set>

#include <doctest.h>

#include "expframe/dataset.hpp"
#include "synthetic.hpp"

using namespace expframe;

namespace {

Corpus empty_docs(std::size_t n) {
  Corpus c;
  for (std::size_t i = 0; i < n; ++i) c.documents.push_back(Document{"d" + std::to_string(i), {}});
  return c;
}

SentenceList fake_sentences(std::vector<Sentence>& storage, std::size_t pos, std::size_t neg) {
  storage.clear();
  for (std::size_t i = 0; i < pos + neg; ++i) {
    Sentence s;
    s.index = i;
    s.is_experiment = i < pos;
    storage.push_back(s);
  }
  SentenceList out;
  for (const auto& s : storage) out.push_back(&s);
  return out;
}

}  // namespace

TEST_CASE("34 documents into 5 folds") {
  const auto folds = split_kfold(empty_docs(34), 5, 7);
  std::vector<std::size_t> sizes;
  for (const auto& f : folds) sizes.push_back(f.dev_documents.size());
  CHECK(sizes == std::vector<std::size_t>{7, 7, 7, 7, 6});
}

TEST_CASE("folds partition the documents") {
  for (std::uint64_t seed : {1u, 2u, 99u}) {
    const auto folds = split_kfold(empty_docs(23), 4, seed);
    std::multiset<std::size_t> dev;
    for (const auto& f : folds) {
      dev.insert(f.dev_documents.begin(), f.dev_documents.end());
      CHECK(f.train_documents.size() + f.dev_documents.size() == 23);
      for (auto d : f.dev_documents) {
        CHECK(std::find(f.train_documents.begin(), f.train_documents.end(), d) == f.train_documents.end());
      }
      CHECK(std::is_sorted(f.train_documents.begin(), f.train_documents.end()));
    }
    CHECK(dev.size() == 23);
    CHECK(std::set<std::size_t>(dev.begin(), dev.end()).size() == 23);
  }
}

TEST_CASE("k = 2 on two documents and determinism") {
  const auto folds = split_kfold(empty_docs(2), 2, 3);
  CHECK(folds[0].dev_documents.size() == 1);
  CHECK(folds[0].dev_documents != folds[1].dev_documents);
  const auto a = split_kfold(empty_docs(34), 5, 7), b = split_kfold(empty_docs(34), 5, 7);
  for (std::size_t i = 0; i < 5; ++i) CHECK(a[i].dev_documents == b[i].dev_documents);
}

TEST_CASE("invalid fold requests") {
  CHECK_THROWS_AS(split_kfold(empty_docs(3), 4, 1), DatasetError);
  CHECK_THROWS_AS(split_kfold(empty_docs(3), 1, 1), DatasetError);
}

TEST_CASE("downsampling keeps round(rate * negatives)") {
  std::vector<Sentence> store;
  auto s = fake_sentences(store, 10, 100);
  auto kept = downsample_negatives(s, 0.3, 4);
  CHECK(kept.size() == 10 + 30);
  CHECK(std::count_if(kept.begin(), kept.end(), [](auto p) { return p->is_experiment; }) == 10);
  CHECK(std::is_sorted(kept.begin(), kept.end(), [](auto a, auto b) { return a->index < b->index; }));
  CHECK(downsample_negatives(s, 1.0, 4) == s);
  CHECK(downsample_negatives(s, 0.3, 4) == kept);

  s = fake_sentences(store, 703, 6927);
  CHECK(downsample_negatives(s, 0.3, 1).size() == 703 + 2078);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CHECK(downsample_negatives(s, 0.55, seed).size() == 703 + 3810);  // 0.55 * 6927 = 3809.85
  }
}

TEST_CASE("uniform_index stays in range and covers it") {
  std::mt19937_64 rng(1);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) hits[uniform_index(rng, 7)]++;
  for (int h : hits) CHECK(h > 800);
}

TEST_CASE("selection helpers") {
  const Corpus c = testing::make_corpus(2);
  const auto exp = select_experiment_sentences(c);
  for (auto* s : exp) CHECK(s->is_experiment);
  std::size_t expected = 0;
  for (auto* s : all_sentences(c)) expected += s->is_experiment;
  CHECK(exp.size() == expected);
  testing::SyntheticOptions none;
  none.experiment_rate = 0.0;
  CHECK(select_experiment_sentences(testing::make_corpus(2, none)).empty());

  const std::vector<std::size_t> pick{2, 0};
  const Corpus sub = subset(c, pick);
  REQUIRE(sub.documents.size() == 2);
  CHECK(sub.documents[0].doc_id == c.documents[2].doc_id);
}
