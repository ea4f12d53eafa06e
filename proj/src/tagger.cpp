#include "expframe/tagger.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace expframe {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kFormatVersion = 1;

void check_tables(const std::vector<std::string>& sources, std::span<const EmbeddingTable> tables) {
  bool ok = sources.size() == tables.size();
  for (std::size_t i = 0; ok && i < sources.size(); ++i) ok = sources[i] == tables[i].source();
  if (!ok) {
    std::string want;
    for (const auto& s : sources) want += (want.empty() ? "" : ", ") + s;
    throw CrfError("tagger expects embedding tables [" + want + "] in this order");
  }
}

}  // namespace

FeatureSequence CrfTagger::encode(const Sentence& sentence, std::span<const EmbeddingTable> tables) const {
  check_tables(embedding_sources_, tables);
  FeatureSequence seq;
  seq.positions.resize(sentence.size());
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    auto map = extract_token_features(sentence, i, tables, config_.features);
    if (config_.standardize) standardizer_.apply(map);
    for (const auto& f : map) {
      if (f.value == 0.0) continue;
      if (auto id = index_.find(f.name)) seq.positions[i].emplace_back(*id, f.value);
    }
  }
  return seq;
}

std::vector<std::uint32_t> CrfTagger::tag_ids(const Sentence& sentence, std::span<const EmbeddingTable> tables) const {
  if (sentence.size() == 0) return {};
  const Lattice lat = model_.lattice(encode(sentence, tables));
  if (config_.bio_mask) {
    const auto mask = TransitionMask::bio(model_.labels());
    return viterbi(model_, lat, &mask).labels;
  }
  return viterbi(model_, lat).labels;
}

LabelSequence CrfTagger::tag_labels(const Sentence& sentence, std::span<const EmbeddingTable> tables) const {
  LabelSequence out;
  for (auto id : tag_ids(sentence, tables)) out.push_back(model_.labels()[id]);
  return out;
}

std::vector<Span> CrfTagger::tag(const Sentence& sentence, std::span<const EmbeddingTable> tables) const {
  auto labels = tag_labels(sentence, tables);
  return bio_to_spans(labels);
}

CrfTagger train_crf(std::span<const Sentence* const> sentences, Layer layer, const CorpusSchema& schema,
                    std::span<const EmbeddingTable> tables, const TaggerConfig& config) {
  if (sentences.empty()) throw CrfError("cannot train a CRF on an empty dataset");
  CrfTagger tagger;
  tagger.layer_ = layer;
  tagger.schema_ = layer_schema(layer, schema);
  tagger.config_ = config;
  for (const auto& t : tables) tagger.embedding_sources_.push_back(t.source());

  std::vector<std::vector<FeatureMap>> maps(sentences.size());
  std::vector<std::vector<std::uint32_t>> gold(sentences.size());
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    const Sentence& sent = *sentences[s];
    for (const auto& label : spans_to_bio(sent, layer, schema)) {
      auto id = tagger.schema_.label_id(label);
      if (!id) throw CrfError("label '" + label + "' is not in the tagger schema");
      gold[s].push_back(*id);
    }
    for (std::size_t i = 0; i < sent.size(); ++i) {
      maps[s].push_back(extract_token_features(sent, i, tables, config.features));
    }
  }
  if (config.standardize) {
    std::vector<FeatureMap> flat;
    for (const auto& m : maps) flat.insert(flat.end(), m.begin(), m.end());
    tagger.standardizer_.fit(flat);
    for (auto& m : maps) {
      for (auto& row : m) tagger.standardizer_.apply(row);
    }
  }

  std::vector<std::vector<std::uint32_t>> pairs;
  std::vector<TrainingSequence> data(sentences.size());
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    data[s].labels = gold[s];
    data[s].features.positions.resize(maps[s].size());
    for (std::size_t i = 0; i < maps[s].size(); ++i) {
      for (const auto& f : maps[s][i]) {
        const auto id = tagger.index_.insert(f.name);
        if (id >= pairs.size()) pairs.resize(id + 1);
        pairs[id].push_back(gold[s][i]);
        if (f.value != 0.0) data[s].features.positions[i].emplace_back(id, f.value);
      }
    }
  }
  tagger.index_.freeze();
  for (auto& p : pairs) {
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
  }
  CrfModel model(tagger.schema_.labels(), pairs);
  tagger.model_ = fit_crf(std::move(model), data, config.train);
  return tagger;
}

ordered_json CrfTagger::to_json() const {
  ordered_json out;
  out["format"] = "expframe.crf";
  out["version"] = kFormatVersion;
  out["layer"] = std::string(to_string(layer_));
  out["schema"] = schema_.types();
  out["labels"] = model_.labels();
  out["lambda"] = config_.train.lambda;
  out["window"] = config_.features.window;
  out["standardize"] = config_.standardize;
  out["bio_mask"] = config_.bio_mask;
  out["embeddings"] = embedding_sources_;
  out["standardizer"] = standardizer_.to_json();

  const std::size_t k = model_.num_labels();
  ordered_json transitions = ordered_json::array();
  for (std::size_t r = 0; r < k + 2; ++r) {
    for (std::size_t c = 0; c < k; ++c) transitions.push_back(model_.parameters()[model_.transition_index(r, c)]);
  }
  out["transitions"] = std::move(transitions);

  std::vector<std::uint32_t> order(model_.num_features());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return index_.name(a) < index_.name(b); });
  ordered_json unary = ordered_json::array();
  for (auto f : order) {
    const auto labels = model_.feature_labels(f);
    for (std::size_t p = 0; p < labels.size(); ++p) {
      unary.push_back(ordered_json::array(
          {index_.name(f), model_.labels()[labels[p]], model_.parameters()[model_.unary_offset(f) + p]}));
    }
  }
  out["unary"] = std::move(unary);
  return out;
}

CrfTagger CrfTagger::from_json(const json& j) {
  if (j.value("format", "") != "expframe.crf" || j.value("version", 0) != kFormatVersion) {
    throw CrfError("not a version " + std::to_string(kFormatVersion) + " CRF model");
  }
  CrfTagger t;
  t.layer_ = j.at("layer").get<std::string>() == "slots" ? Layer::slots : Layer::mentions;
  t.schema_ = LabelSchema(j.at("schema").get<std::vector<std::string>>());
  auto labels = j.at("labels").get<std::vector<std::string>>();
  if (labels != t.schema_.labels()) throw CrfError("model labels do not match its schema");
  t.config_.train.lambda = j.at("lambda").get<double>();
  t.config_.features.window = j.at("window").get<int>();
  t.config_.standardize = j.at("standardize").get<bool>();
  t.config_.bio_mask = j.at("bio_mask").get<bool>();
  t.embedding_sources_ = j.at("embeddings").get<std::vector<std::string>>();
  t.standardizer_ = DenseStandardizer::from_json(j.at("standardizer"));

  std::vector<std::vector<std::uint32_t>> pairs;
  std::vector<std::vector<double>> weights;
  for (const auto& e : j.at("unary")) {
    const auto id = t.index_.insert(e.at(0).get<std::string>());
    auto label = t.schema_.label_id(e.at(1).get<std::string>());
    if (!label) throw CrfError("unknown label in unary weights");
    if (id >= pairs.size()) {
      pairs.resize(id + 1);
      weights.resize(id + 1);
    }
    pairs[id].push_back(*label);
    weights[id].push_back(e.at(2).get<double>());
  }
  t.index_.freeze();
  // Pairs must be ascending per feature; sort them alongside their weights.
  for (std::size_t f = 0; f < pairs.size(); ++f) {
    std::vector<std::size_t> idx(pairs[f].size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return pairs[f][a] < pairs[f][b]; });
    std::vector<std::uint32_t> p;
    std::vector<double> w;
    for (auto i : idx) {
      p.push_back(pairs[f][i]);
      w.push_back(weights[f][i]);
    }
    pairs[f] = std::move(p);
    weights[f] = std::move(w);
  }
  t.model_ = CrfModel(labels, pairs);
  for (std::uint32_t f = 0; f < pairs.size(); ++f) {
    for (std::size_t p = 0; p < weights[f].size(); ++p) t.model_.parameters()[t.model_.unary_offset(f) + p] = weights[f][p];
  }
  const auto transitions = j.at("transitions").get<std::vector<double>>();
  const std::size_t k = labels.size();
  if (transitions.size() != (k + 2) * k) throw CrfError("transition block has the wrong size");
  for (std::size_t r = 0; r < k + 2; ++r) {
    for (std::size_t c = 0; c < k; ++c) t.model_.parameters()[t.model_.transition_index(r, c)] = transitions[r * k + c];
  }
  return t;
}

}  // namespace expframe
