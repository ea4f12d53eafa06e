#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <doctest.h>

#include "expframe/dataset.hpp"
#include "expframe/linear.hpp"

using namespace expframe;

namespace {

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

SparseVector dense(std::vector<double> values) {
  SparseVector v;
  for (std::uint32_t i = 0; i < values.size(); ++i) {
    if (values[i] != 0.0) v.entries.emplace_back(i, values[i]);
  }
  return v;
}

struct Problem {
  std::vector<SparseVector> X;
  std::vector<int> y;
  std::size_t dim = 0;
};

Problem random_problem(std::uint64_t seed, std::size_t n, std::size_t dim) {
  std::mt19937_64 rng(seed);
  Problem p;
  p.dim = dim;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(dim, 0.0);
    for (auto& v : x) {
      if (unit(rng) < 0.5) v = 2 * unit(rng) - 1;
    }
    p.X.push_back(dense(x));
    p.y.push_back(static_cast<int>(i % 2));
  }
  return p;
}

Problem one_dimensional() {
  Problem p;
  p.dim = 1;
  for (double x : {-3.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 3.0}) {
    p.X.push_back(dense({x}));
    p.y.push_back(x > 0);
  }
  return p;
}

}  // namespace

TEST_CASE("logistic gradient matches central differences") {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Problem p = random_problem(seed, 12, 6);
    std::mt19937_64 rng(seed + 100);
    std::vector<double> params(p.dim + 1);
    for (auto& v : params) v = 2 * unit(rng) - 1;
    std::vector<double> grad(params.size()), scratch(params.size());
    logistic_objective(p.X, p.y, 0.1, params, grad);
    for (std::size_t j = 0; j < params.size(); ++j) {
      const double h = 1e-5;
      auto plus = params, minus = params;
      plus[j] += h;
      minus[j] -= h;
      const double fd = (logistic_objective(p.X, p.y, 0.1, plus, scratch) -
                         logistic_objective(p.X, p.y, 0.1, minus, scratch)) / (2 * h);
      worst = std::max(worst, std::abs(fd - grad[j]) / std::max(1.0, std::abs(fd)));
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("separable 1-D data is fit perfectly") {
  const Problem p = one_dimensional();
  LinearConfig c;
  c.lambda = 1e-4;
  const LinearModel m = train_logistic(p.X, p.y, p.dim, c);
  for (std::size_t i = 0; i < p.X.size(); ++i) CHECK(predict(m, p.X[i]).label == p.y[i]);
  const LinearModel svm = train_linear_svm(p.X, p.y, p.dim, c);
  for (std::size_t i = 0; i < p.X.size(); ++i) CHECK(predict(svm, p.X[i]).label == p.y[i]);
}

TEST_CASE("class-symmetric data gives zero weights") {
  Problem p;
  p.dim = 2;
  for (int label : {0, 1}) {
    p.X.push_back(dense({1.0, 0.0}));
    p.y.push_back(label);
    p.X.push_back(dense({0.0, 1.0}));
    p.y.push_back(label);
  }
  const LinearModel m = train_logistic(p.X, p.y, p.dim, {});
  double norm = 0;
  for (double w : m.weights) norm += w * w;
  CHECK(std::sqrt(norm) < 1e-6);
}

TEST_CASE("logistic loss is non-increasing over epochs") {
  const Problem p = random_problem(3, 40, 10);
  std::vector<double> values;
  LinearConfig c;
  c.on_epoch = [&](int, double v) { values.push_back(v); };
  train_logistic(p.X, p.y, p.dim, c);
  REQUIRE(values.size() > 2);
  for (std::size_t i = 1; i < values.size(); ++i) CHECK(values[i] <= values[i - 1]);
}

TEST_CASE("duplicating examples and permuting them leave the optimum unchanged") {
  const Problem p = random_problem(9, 30, 5);
  LinearConfig c;
  c.lambda = 1e-2;
  const LinearModel base = train_logistic(p.X, p.y, p.dim, c);

  Problem dup = p;
  dup.X.insert(dup.X.end(), p.X.begin(), p.X.end());
  dup.y.insert(dup.y.end(), p.y.begin(), p.y.end());
  const LinearModel twice = train_logistic(dup.X, dup.y, dup.dim, c);

  std::vector<std::size_t> order(p.X.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(1);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
  Problem perm;
  perm.dim = p.dim;
  for (auto i : order) {
    perm.X.push_back(p.X[i]);
    perm.y.push_back(p.y[i]);
  }
  const LinearModel shuffled = train_logistic(perm.X, perm.y, perm.dim, c);
  for (std::size_t j = 0; j < p.dim; ++j) {
    CHECK(twice.weights[j] == doctest::Approx(base.weights[j]).epsilon(1e-4));
    CHECK(shuffled.weights[j] == doctest::Approx(base.weights[j]).epsilon(1e-4));
  }
  const LinearModel svm_a = train_linear_svm(p.X, p.y, p.dim, c), svm_b = train_linear_svm(perm.X, perm.y, perm.dim, c);
  for (const auto& x : p.X) {
    CHECK(predict(shuffled, x).label == predict(base, x).label);
    CHECK(predict(svm_a, x).label == predict(svm_b, x).label);
  }
}

TEST_CASE("hinge objective never exceeds the zero vector's") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Problem p = random_problem(seed, 25, 4);
    LinearConfig c;
    c.lambda = 0.05;
    c.max_epochs = 50;
    const LinearModel m = train_linear_svm(p.X, p.y, p.dim, c);
    const std::vector<double> zero(p.dim, 0.0);
    CHECK(hinge_objective(p.X, p.y, c.lambda, m.weights, m.bias) <= hinge_objective(p.X, p.y, c.lambda, zero, 0.0));
  }
}

TEST_CASE("large lambda shrinks the SVM towards zero") {
  Problem p = one_dimensional();
  p.X.push_back(dense({0.1}));
  p.y.push_back(1);
  p.X.push_back(dense({0.2}));
  p.y.push_back(1);
  LinearConfig c;
  c.lambda = 1e4;
  const LinearModel m = train_linear_svm(p.X, p.y, p.dim, c);
  // The bias is regularized too.
  CHECK(std::abs(m.weights[0]) < 1e-3);
  CHECK(std::abs(m.bias) < 1e-3);
}

TEST_CASE("single-class input is rejected") {
  Problem p = one_dimensional();
  std::fill(p.y.begin(), p.y.end(), 1);
  CHECK_THROWS_AS(train_logistic(p.X, p.y, p.dim, {}), TrainingError);
  CHECK_THROWS_AS(train_linear_svm(p.X, p.y, p.dim, {}), TrainingError);
}

TEST_CASE("prediction properties") {
  LinearModel zero;
  zero.weights = {0.0, 0.0};
  const Decision d = predict(zero, dense({1.0, 2.0}));
  CHECK(d.score == 0.0);
  CHECK(d.label == 0);
  CHECK(*d.probability == 0.5);
  for (double s : {0.1, 1.0, 7.5, 40.0}) CHECK(sigmoid(s) + sigmoid(-s) == doctest::Approx(1.0).epsilon(1e-15));
  LinearModel m;
  m.weights = {0.0, 0.0};
  double last = -1e300;
  for (double w = -2; w <= 2; w += 0.5) {
    m.weights[0] = w;
    const double s = predict(m, dense({1.0, 0.0})).score;
    CHECK(s >= last);
    last = s;
  }
}

TEST_CASE("linear model JSON is keyed by feature name") {
  FeatureIndex index;
  index.insert("w:zeta");
  index.insert("w:alpha");
  index.insert("w:unused");
  index.freeze();
  LinearModel m;
  m.kind = LossKind::hinge;
  m.lambda = 0.5;
  m.weights = {1.5, -2.0, 0.0};
  m.bias = 0.25;
  const auto j = linear_model_to_json(m, index);
  CHECK(j["weights"].size() == 2);
  CHECK(j["weights"][0][0] == "w:alpha");
  auto [back, back_index] = linear_model_from_json(nlohmann::json::parse(j.dump()));
  CHECK(back.kind == LossKind::hinge);
  CHECK(back.bias == 0.25);
  const std::vector<std::string> feats{"w:zeta", "w:alpha"};
  CHECK(predict(back, to_sparse(back_index, feats)).score == doctest::Approx(1.5 - 2.0 + 0.25));
  CHECK_THROWS_AS(linear_model_from_json(nlohmann::json{{"format", "other"}}), TrainingError);
}
