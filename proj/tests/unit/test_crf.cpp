#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <doctest.h>

#include "expframe/bio.hpp"
#include "expframe/crf.hpp"
#include "synthetic.hpp"

using namespace expframe;
using expframe::testing::all_sequences;
using expframe::testing::random_dense_crf;
using expframe::testing::random_features;

namespace {

// Direct-summation score, independent of score_sequence.
double oracle_score(const CrfModel& m, const Lattice& lat, const std::vector<std::uint32_t>& y) {
  double s = m.start(y.front()) + m.end(y.back());
  for (std::size_t i = 0; i < y.size(); ++i) {
    s += lat(i, y[i]);
    if (i > 0) s += m.transition(y[i - 1], y[i]);
  }
  return s;
}

double oracle_log_z(const CrfModel& m, const Lattice& lat) {
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> scores;
  for (const auto& y : all_sequences(lat.length(), m.num_labels())) {
    scores.push_back(oracle_score(m, lat, y));
    best = std::max(best, scores.back());
  }
  double sum = 0;
  for (double s : scores) sum += std::exp(s - best);
  return best + std::log(sum);
}

}  // namespace

TEST_CASE("score_sequence basics") {
  CrfModel zero({"A", "B", "C"}, std::size_t{2});
  Lattice lat(4, 3);
  const std::vector<std::uint32_t> y{0, 2, 1, 1};
  CHECK(score_sequence(zero, lat, y) == 0.0);
  Lattice one(1, 3);
  one(0, 1) = 2.5;
  CHECK(score_sequence(zero, one, std::vector<std::uint32_t>{1}) == 2.5);
  CHECK_THROWS_AS(score_sequence(zero, lat, std::vector<std::uint32_t>{0}), CrfError);

  const CrfModel m = random_dense_crf(3, 4, 1);
  const Lattice r = m.lattice(random_features(5, 4, 2));
  const std::vector<std::uint32_t> seq{2, 0, 1, 1, 0};
  CHECK(score_sequence(m, r, seq) == doctest::Approx(oracle_score(m, r, seq)).epsilon(1e-12));
}

TEST_CASE("forward-backward closed forms") {
  CrfModel zero({"A", "B"}, std::size_t{0});
  Lattice one(1, 2);
  one(0, 0) = 0.3;
  one(0, 1) = -1.1;
  const auto fb = forward_backward(zero, one);
  CHECK(fb.log_z == doctest::Approx(std::log(std::exp(0.3) + std::exp(-1.1))).epsilon(1e-12));
  CHECK(std::exp(fb.node(0, 0)) == doctest::Approx(std::exp(0.3) / (std::exp(0.3) + std::exp(-1.1))));

  CrfModel z4({"A", "B", "C", "D"}, std::size_t{0});
  const auto u = forward_backward(z4, Lattice(7, 4));
  CHECK(u.log_z == doctest::Approx(7 * std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("brute-force oracles on random models") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t k = 2 + trial % 3, n = 1 + trial % 6;
    const CrfModel m = random_dense_crf(k, 5, 1000 + trial, 2.0);
    const Lattice lat = m.lattice(random_features(n, 5, 2000 + trial));
    const auto fb = forward_backward(m, lat);
    const double truth = oracle_log_z(m, lat);
    REQUIRE(std::abs(fb.log_z - truth) < 1e-9);
    REQUIRE(std::abs(fb.log_z_backward - truth) < 1e-9);

    // Marginals normalize and edges marginalize to nodes.
    for (std::size_t i = 0; i < n; ++i) {
      double total = 0;
      for (std::size_t a = 0; a < k; ++a) total += std::exp(fb.node(i, a));
      REQUIRE(std::abs(total - 1.0) < 1e-9);
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t a = 0; a < k; ++a) {
        double row = 0, col = 0;
        for (std::size_t b = 0; b < k; ++b) {
          row += std::exp(fb.edge(i, a, b));
          col += std::exp(fb.edge(i, b, a));
        }
        REQUIRE(std::abs(row - std::exp(fb.node(i, a))) < 1e-9);
        REQUIRE(std::abs(col - std::exp(fb.node(i + 1, a))) < 1e-9);
      }
    }

    // Viterbi equals the enumerated argmax (lowest index on ties).
    const auto v = viterbi(m, lat);
    double best = -std::numeric_limits<double>::infinity();
    std::vector<std::uint32_t> arg;
    for (const auto& y : all_sequences(n, k)) {
      const double s = oracle_score(m, lat, y);
      if (s > best + 1e-12 || (std::abs(s - best) <= 1e-12 && y < arg)) {
        best = s;
        arg = y;
      }
      REQUIRE(s <= fb.log_z);
    }
    REQUIRE(v.labels == arg);
    REQUIRE(std::abs(v.score - score_sequence(m, lat, v.labels)) < 1e-9);
  }
}

TEST_CASE("ties go to the lowest label index") {
  CrfModel zero({"A", "B", "C"}, std::size_t{0});
  const auto v = viterbi(zero, Lattice(4, 3));
  CHECK(v.labels == std::vector<std::uint32_t>{0, 0, 0, 0});
}

TEST_CASE("zero transitions give per-position argmax") {
  CrfModel zero({"A", "B", "C"}, std::size_t{0});
  Lattice lat(3, 3);
  lat(0, 2) = 1;
  lat(1, 1) = 0.5;
  lat(2, 0) = -1;
  lat(2, 2) = 0.2;
  CHECK(viterbi(zero, lat).labels == std::vector<std::uint32_t>{2, 1, 2});
}

TEST_CASE("adding a constant at one position shifts only log Z") {
  const CrfModel m = random_dense_crf(3, 4, 77);
  const Lattice lat = m.lattice(random_features(5, 4, 78));
  Lattice shifted = lat;
  for (std::size_t l = 0; l < 3; ++l) shifted(2, l) += 3.7;
  const auto a = forward_backward(m, lat), b = forward_backward(m, shifted);
  CHECK(b.log_z - a.log_z == doctest::Approx(3.7).epsilon(1e-12));
  for (std::size_t i = 0; i < a.log_node.size(); ++i) CHECK(std::abs(a.log_node[i] - b.log_node[i]) < 1e-9);
  CHECK(viterbi(m, lat).labels == viterbi(m, shifted).labels);
}

TEST_CASE("BIO mask keeps decoding valid") {
  const LabelSchema schema({"MAT", "VAL"});
  CrfModel m(schema.labels(), std::size_t{0});
  Lattice lat(3, schema.num_labels());
  lat(0, *schema.label_id("I-MAT")) = 10;
  lat(1, *schema.label_id("I-VAL")) = 10;
  const auto mask = TransitionMask::bio(m.labels());
  const auto v = viterbi(m, lat, &mask);
  LabelSequence labels;
  for (auto id : v.labels) labels.push_back(m.labels()[id]);
  CHECK(labels[0] != "I-MAT");
  CHECK(is_valid_bio(labels));

  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    CrfModel r = random_dense_crf(schema.num_labels(), 3, 500 + trial, 4.0);
    const Lattice rl = r.lattice(random_features(1 + trial % 9, 3, 900 + trial));
    LabelSequence out;
    for (auto id : viterbi(r, rl, &mask).labels) out.push_back(schema.labels()[id]);
    REQUIRE(is_valid_bio(out));
  }
}

TEST_CASE("CRF gradient matches central differences") {
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 2 + trial % 3, f = 4;
    CrfModel m = random_dense_crf(k, f, 3000 + trial, 0.5);
    std::vector<TrainingSequence> batch;
    std::mt19937_64 rng(4000 + trial);
    for (int s = 0; s < 3; ++s) {
      TrainingSequence ts;
      const std::size_t n = 1 + (trial + s) % 5;
      ts.features = random_features(n, f, 5000 + trial * 7 + s);
      for (std::size_t i = 0; i < n; ++i) ts.labels.push_back(static_cast<std::uint32_t>(rng() % k));
      batch.push_back(std::move(ts));
    }
    const double lambda = 0.3;
    std::vector<double> grad(m.num_parameters()), scratch(m.num_parameters());
    loglik_and_gradient(m, batch, lambda, grad);
    for (std::size_t j = 0; j < m.num_parameters(); ++j) {
      const double h = 1e-5, saved = m.parameters()[j];
      m.parameters()[j] = saved + h;
      const double up = loglik_and_gradient(m, batch, lambda, scratch);
      m.parameters()[j] = saved - h;
      const double down = loglik_and_gradient(m, batch, lambda, scratch);
      m.parameters()[j] = saved;
      const double fd = (up - down) / (2 * h);
      worst = std::max(worst, std::abs(fd - grad[j]) / std::max(1.0, std::abs(fd)));
    }
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("log-likelihood special cases") {
  CrfModel zero({"A", "B", "C", "D"}, std::size_t{1});
  TrainingSequence one;
  one.features.positions = {{{0, 1.0}}};
  one.labels = {2};
  std::vector<double> grad(zero.num_parameters());
  std::vector<TrainingSequence> batch{one};
  CHECK(loglik_and_gradient(zero, batch, 0.0, grad) == doctest::Approx(-std::log(4.0)).epsilon(1e-12));

  const LabelSchema schema({"MAT"});
  CrfModel bio(schema.labels(), std::size_t{1});
  TrainingSequence invalid;
  invalid.features.positions = {{}, {}};
  invalid.labels = {0, 2};  // O, I-MAT
  std::vector<TrainingSequence> bad{invalid};
  std::vector<double> g(bio.num_parameters());
  CHECK_THROWS_AS(loglik_and_gradient(bio, bad, 1.0, g), CrfError);
}

TEST_CASE("threaded gradient equals the single-threaded one bit for bit") {
  CrfModel m = random_dense_crf(3, 6, 99, 0.5);
  std::vector<TrainingSequence> batch;
  std::mt19937_64 rng(5);
  for (int s = 0; s < 40; ++s) {
    TrainingSequence ts;
    ts.features = random_features(1 + s % 7, 6, 700 + s);
    for (std::size_t i = 0; i < ts.features.size(); ++i) ts.labels.push_back(static_cast<std::uint32_t>(rng() % 3));
    batch.push_back(std::move(ts));
  }
  std::vector<double> g1(m.num_parameters()), g4(m.num_parameters());
  const double v1 = loglik_and_gradient(m, batch, 0.1, g1, 1);
  const double v4 = loglik_and_gradient(m, batch, 0.1, g4, 4);
  const double v4b = loglik_and_gradient(m, batch, 0.1, g4, 4);
  CHECK(v4 == v4b);
  CHECK(std::abs(v1 - v4) < 1e-9);
}

TEST_CASE("training decreases the objective and memorizes distinct sequences") {
  const LabelSchema schema({"MAT", "VAL"});
  std::vector<TrainingSequence> data;
  // Five sentences, every token its own feature.
  const std::vector<std::vector<std::string>> gold{{"B-MAT", "O"},
                                                   {"O", "B-VAL", "I-VAL"},
                                                   {"B-MAT", "I-MAT", "B-VAL"},
                                                   {"O"},
                                                   {"B-VAL", "O", "B-MAT"}};
  std::uint32_t next = 0;
  for (const auto& g : gold) {
    TrainingSequence ts;
    for (const auto& l : g) {
      ts.features.positions.push_back({{next++, 1.0}});
      ts.labels.push_back(*schema.label_id(l));
    }
    data.push_back(std::move(ts));
  }
  CrfModel m(schema.labels(), next);
  std::vector<double> values;
  CrfTrainConfig c;
  c.lambda = 0.01;
  c.on_epoch = [&](int, double v) { values.push_back(v); };
  const CrfModel trained = fit_crf(m, data, c);
  for (std::size_t i = 1; i < values.size(); ++i) CHECK(values[i] <= values[i - 1]);
  const auto mask = TransitionMask::bio(trained.labels());
  for (const auto& ts : data) CHECK(viterbi(trained, trained.lattice(ts.features), &mask).labels == ts.labels);

  std::vector<double> grad(trained.num_parameters());
  loglik_and_gradient(trained, data, c.lambda, grad);
  double norm = 0;
  for (double g : grad) norm += g * g;
  CHECK(std::sqrt(norm) / data.size() < 1e-3);
}

TEST_CASE("sparse layout keeps only declared pairs") {
  const std::vector<std::vector<std::uint32_t>> pairs{{0, 2}, {}, {1}};
  CrfModel m({"A", "B", "C"}, pairs);
  CHECK(m.num_unary() == 3);
  CHECK(m.num_parameters() == 3 + 5 * 3);
  CHECK(m.unary_offset(2) == 2);
  m.parameters()[m.unary_offset(0) + 1] = 4.0;  // feature 0, label C
  FeatureSequence fs;
  fs.positions = {{{0, 0.5}, {7, 1.0}}};
  const Lattice lat = m.lattice(fs);
  CHECK(lat(0, 2) == 2.0);
  CHECK(lat(0, 0) == 0.0);
}
