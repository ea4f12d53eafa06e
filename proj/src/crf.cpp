#include "expframe/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "expframe/bio.hpp"
#include "expframe/optimize.hpp"

namespace expframe {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(std::span<const double> v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// Forward/backward tables in log space. Transition sums use exp(T) with a
// per-step max shift, so each step costs K exponentials instead of K^2.
struct Recursions {
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<double> alpha;
  std::vector<double> beta;
  double log_z = 0.0;
  double log_z_backward = 0.0;
};

std::vector<double> exp_transitions(const CrfModel& model) {
  const std::size_t k = model.num_labels();
  std::vector<double> out(k * k);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) out[a * k + b] = std::exp(model.transition(a, b));
  }
  return out;
}

Recursions run_recursions(const CrfModel& model, const Lattice& lat, const std::vector<double>& exp_t) {
  Recursions r;
  r.n = lat.length();
  r.k = lat.num_labels();
  const std::size_t n = r.n, k = r.k;
  r.alpha.assign(n * k, 0.0);
  r.beta.assign(n * k, 0.0);
  std::vector<double> scaled(k), tmp(k);

  for (std::size_t j = 0; j < k; ++j) r.alpha[j] = model.start(j) + lat(0, j);
  for (std::size_t i = 1; i < n; ++i) {
    const double* prev = &r.alpha[(i - 1) * k];
    const double m = *std::max_element(prev, prev + k);
    for (std::size_t a = 0; a < k; ++a) scaled[a] = std::exp(prev[a] - m);
    for (std::size_t b = 0; b < k; ++b) {
      double acc = 0.0;
      for (std::size_t a = 0; a < k; ++a) acc += scaled[a] * exp_t[a * k + b];
      r.alpha[i * k + b] = lat(i, b) + m + std::log(acc);
    }
  }
  for (std::size_t j = 0; j < k; ++j) tmp[j] = r.alpha[(n - 1) * k + j] + model.end(j);
  r.log_z = log_sum_exp(tmp);

  for (std::size_t j = 0; j < k; ++j) r.beta[(n - 1) * k + j] = model.end(j);
  for (std::size_t i = n - 1; i-- > 0;) {
    for (std::size_t b = 0; b < k; ++b) tmp[b] = lat(i + 1, b) + r.beta[(i + 1) * k + b];
    const double m = *std::max_element(tmp.begin(), tmp.end());
    for (std::size_t b = 0; b < k; ++b) scaled[b] = std::exp(tmp[b] - m);
    for (std::size_t a = 0; a < k; ++a) {
      double acc = 0.0;
      for (std::size_t b = 0; b < k; ++b) acc += exp_t[a * k + b] * scaled[b];
      r.beta[i * k + a] = m + std::log(acc);
    }
  }
  for (std::size_t j = 0; j < k; ++j) tmp[j] = model.start(j) + lat(0, j) + r.beta[j];
  r.log_z_backward = log_sum_exp(tmp);
  return r;
}

void check_labels(const CrfModel& model, std::size_t length, std::span<const std::uint32_t> labels) {
  if (labels.size() != length) {
    throw CrfError("label sequence length " + std::to_string(labels.size()) + " does not match lattice length " +
                   std::to_string(length));
  }
  for (auto l : labels) {
    if (l >= model.num_labels()) throw CrfError("label id out of range");
  }
}

// Adds one sequence's log-likelihood gradient (without regularization).
double accumulate_sequence(const CrfModel& model, const TrainingSequence& seq, const std::vector<double>& exp_t,
                           std::span<double> grad) {
  const std::size_t n = seq.features.size();
  const std::size_t k = model.num_labels();
  const Lattice lat = model.lattice(seq.features);
  const Recursions r = run_recursions(model, lat, exp_t);
  const double value = score_sequence(model, lat, seq.labels) - r.log_z;

  std::vector<double> prob(k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < k; ++l) prob[l] = std::exp(r.alpha[i * k + l] + r.beta[i * k + l] - r.log_z);
    const auto gold = seq.labels[i];
    for (const auto& [f, x] : seq.features.positions[i]) {
      if (f >= model.num_features()) continue;
      const auto labels = model.feature_labels(f);
      const std::size_t off = model.unary_offset(f);
      for (std::size_t p = 0; p < labels.size(); ++p) {
        grad[off + p] += x * ((labels[p] == gold ? 1.0 : 0.0) - prob[labels[p]]);
      }
    }
    if (i == 0) {
      for (std::size_t l = 0; l < k; ++l) grad[model.start_index(l)] += (l == gold ? 1.0 : 0.0) - prob[l];
    }
    if (i + 1 == n) {
      for (std::size_t l = 0; l < k; ++l) grad[model.end_index(l)] += (l == gold ? 1.0 : 0.0) - prob[l];
    }
  }

  std::vector<double> u(k), w(k), tmp(k);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double* a_row = &r.alpha[i * k];
    const double a_max = *std::max_element(a_row, a_row + k);
    for (std::size_t a = 0; a < k; ++a) u[a] = std::exp(a_row[a] - a_max);
    for (std::size_t b = 0; b < k; ++b) tmp[b] = lat(i + 1, b) + r.beta[(i + 1) * k + b];
    const double b_max = *std::max_element(tmp.begin(), tmp.end());
    for (std::size_t b = 0; b < k; ++b) w[b] = std::exp(tmp[b] - b_max);
    const double c = std::exp(a_max + b_max - r.log_z);
    for (std::size_t a = 0; a < k; ++a) {
      const double ca = c * u[a];
      double* g = &grad[model.transition_index(a, 0)];
      for (std::size_t b = 0; b < k; ++b) g[b] -= ca * exp_t[a * k + b] * w[b];
    }
    grad[model.transition_index(seq.labels[i], seq.labels[i + 1])] += 1.0;
  }
  return value;
}

}  // namespace

Lattice::Lattice(std::size_t length, std::size_t num_labels)
    : length_(length), num_labels_(num_labels), scores_(length * num_labels, 0.0) {}

CrfModel::CrfModel(std::vector<std::string> labels, std::size_t num_features) : labels_(std::move(labels)) {
  const std::size_t k = labels_.size();
  offsets_.resize(num_features + 1);
  pair_labels_.reserve(num_features * k);
  for (std::size_t f = 0; f < num_features; ++f) {
    offsets_[f] = pair_labels_.size();
    for (std::size_t l = 0; l < k; ++l) pair_labels_.push_back(static_cast<std::uint32_t>(l));
  }
  offsets_[num_features] = pair_labels_.size();
  params_.assign(pair_labels_.size() + (k + 2) * k, 0.0);
}

CrfModel::CrfModel(std::vector<std::string> labels, const std::vector<std::vector<std::uint32_t>>& labels_per_feature)
    : labels_(std::move(labels)) {
  const std::size_t k = labels_.size();
  offsets_.resize(labels_per_feature.size() + 1);
  for (std::size_t f = 0; f < labels_per_feature.size(); ++f) {
    offsets_[f] = pair_labels_.size();
    for (auto l : labels_per_feature[f]) {
      if (l >= k) throw CrfError("feature label id out of range");
      if (!pair_labels_.empty() && pair_labels_.size() > offsets_[f] && pair_labels_.back() >= l) {
        throw CrfError("feature labels must be strictly ascending");
      }
      pair_labels_.push_back(l);
    }
  }
  offsets_[labels_per_feature.size()] = pair_labels_.size();
  params_.assign(pair_labels_.size() + (k + 2) * k, 0.0);
}

Lattice CrfModel::lattice(const FeatureSequence& features) const {
  Lattice lat(features.size(), num_labels());
  for (std::size_t i = 0; i < features.size(); ++i) {
    for (const auto& [f, x] : features.positions[i]) {
      if (f >= num_features()) continue;
      const auto labels = feature_labels(f);
      const std::size_t off = offsets_[f];
      for (std::size_t p = 0; p < labels.size(); ++p) lat(i, labels[p]) += x * params_[off + p];
    }
  }
  return lat;
}

TransitionMask TransitionMask::bio(std::span<const std::string> labels) {
  const std::size_t k = labels.size();
  TransitionMask mask;
  mask.start.assign(k, true);
  mask.allowed.assign(k * k, true);
  for (std::size_t to = 0; to < k; ++to) {
    auto [tag, type] = split_bio_label(labels[to]);
    if (tag != 'I') continue;
    mask.start[to] = false;
    for (std::size_t from = 0; from < k; ++from) {
      auto [ptag, ptype] = split_bio_label(labels[from]);
      mask.allowed[from * k + to] = ptag != 'O' && ptype == type;
    }
  }
  return mask;
}

double score_sequence(const CrfModel& model, const Lattice& lattice, std::span<const std::uint32_t> labels) {
  check_labels(model, lattice.length(), labels);
  if (labels.empty()) return 0.0;
  double s = model.start(labels[0]) + model.end(labels.back());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    s += lattice(i, labels[i]);
    if (i > 0) s += model.transition(labels[i - 1], labels[i]);
  }
  return s;
}

ForwardBackward forward_backward(const CrfModel& model, const Lattice& lattice) {
  if (lattice.length() == 0) throw CrfError("forward_backward needs a non-empty lattice");
  const auto exp_t = exp_transitions(model);
  const Recursions r = run_recursions(model, lattice, exp_t);
  const std::size_t n = r.n, k = r.k;
  ForwardBackward out;
  out.log_z = r.log_z;
  out.log_z_backward = r.log_z_backward;
  out.length = n;
  out.num_labels = k;
  out.log_node.resize(n * k);
  for (std::size_t i = 0; i < n * k; ++i) out.log_node[i] = r.alpha[i] + r.beta[i] - r.log_z;
  out.log_edge.resize((n - 1) * k * k);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b < k; ++b) {
        out.log_edge[(i * k + a) * k + b] =
            r.alpha[i * k + a] + model.transition(a, b) + lattice(i + 1, b) + r.beta[(i + 1) * k + b] - r.log_z;
      }
    }
  }
  return out;
}

ViterbiResult viterbi(const CrfModel& model, const Lattice& lattice, const TransitionMask* mask) {
  const std::size_t n = lattice.length(), k = lattice.num_labels();
  ViterbiResult out;
  if (n == 0) return out;
  std::vector<double> delta(n * k, kNegInf);
  std::vector<std::uint32_t> back(n * k, 0);
  for (std::size_t j = 0; j < k; ++j) {
    if (!mask || mask->start[j]) delta[j] = model.start(j) + lattice(0, j);
  }
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t b = 0; b < k; ++b) {
      double best = kNegInf;
      std::uint32_t arg = 0;
      for (std::size_t a = 0; a < k; ++a) {
        if (mask && !mask->allows(a, b)) continue;
        const double cand = delta[(i - 1) * k + a] + model.transition(a, b);
        if (cand > best) {
          best = cand;
          arg = static_cast<std::uint32_t>(a);
        }
      }
      delta[i * k + b] = best + lattice(i, b);
      back[i * k + b] = arg;
    }
  }
  double best = kNegInf;
  std::uint32_t last = 0;
  for (std::size_t j = 0; j < k; ++j) {
    const double cand = delta[(n - 1) * k + j] + model.end(j);
    if (cand > best) {
      best = cand;
      last = static_cast<std::uint32_t>(j);
    }
  }
  out.labels.resize(n);
  out.labels[n - 1] = last;
  for (std::size_t i = n - 1; i > 0; --i) out.labels[i - 1] = back[i * k + out.labels[i]];
  out.score = score_sequence(model, lattice, out.labels);
  return out;
}

double loglik_and_gradient(const CrfModel& model, std::span<const TrainingSequence> batch, double lambda,
                           std::span<double> gradient, int threads) {
  if (gradient.size() != model.num_parameters()) throw CrfError("gradient buffer has the wrong size");
  for (const auto& seq : batch) {
    check_labels(model, seq.features.size(), seq.labels);
    std::vector<std::string> names;
    names.reserve(seq.labels.size());
    for (auto l : seq.labels) names.push_back(model.labels()[l]);
    if (!is_valid_bio(names)) throw CrfError("gold label sequence is not valid BIO");
  }
  std::fill(gradient.begin(), gradient.end(), 0.0);
  const auto exp_t = exp_transitions(model);

  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, std::max<std::size_t>(batch.size(), 1));
  double value = 0.0;
  if (workers == 1) {
    for (const auto& seq : batch) {
      if (seq.features.size() > 0) value += accumulate_sequence(model, seq, exp_t, gradient);
    }
  } else {
    std::vector<std::vector<double>> partial(workers, std::vector<double>(gradient.size(), 0.0));
    std::vector<double> partial_value(workers, 0.0);
    std::vector<std::thread> pool;
    const std::size_t chunk = (batch.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        const std::size_t lo = w * chunk, hi = std::min(batch.size(), lo + chunk);
        for (std::size_t s = lo; s < hi; ++s) {
          if (batch[s].features.size() > 0) partial_value[w] += accumulate_sequence(model, batch[s], exp_t, partial[w]);
        }
      });
    }
    for (auto& t : pool) t.join();
    for (std::size_t w = 0; w < workers; ++w) {
      value += partial_value[w];
      for (std::size_t p = 0; p < gradient.size(); ++p) gradient[p] += partial[w][p];
    }
  }

  const auto params = model.parameters();
  double reg = 0.0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    reg += params[p] * params[p];
    gradient[p] -= lambda * params[p];
  }
  return value - 0.5 * lambda * reg;
}

CrfModel fit_crf(CrfModel model, std::span<const TrainingSequence> data, const CrfTrainConfig& config) {
  if (data.empty()) throw CrfError("cannot train a CRF on an empty dataset");
  const double scale = 1.0 / static_cast<double>(data.size());
  std::vector<double> x(model.parameters().begin(), model.parameters().end());
  LbfgsOptions opts;
  opts.memory = config.memory;
  opts.max_iterations = config.max_epochs;
  opts.gradient_tolerance = config.tolerance;
  opts.on_iteration = config.on_epoch;
  auto objective = [&](std::span<const double> theta, std::span<double> grad) {
    std::copy(theta.begin(), theta.end(), model.parameters().begin());
    const double ll = loglik_and_gradient(model, data, config.lambda, grad, config.threads);
    for (auto& g : grad) g *= -scale;
    return -ll * scale;
  };
  minimize_lbfgs(objective, x, opts);
  std::copy(x.begin(), x.end(), model.parameters().begin());
  return model;
}

}  // namespace expframe
