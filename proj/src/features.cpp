#include "expframe/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "expframe/text.hpp"

namespace expframe {

using nlohmann::json;

namespace {

constexpr std::string_view kJoin = "▸";

std::string token_pos(const Token& t) { return t.pos ? *t.pos : fallback_pos(t.surface); }
std::string token_lemma(const Token& t) { return t.lemma ? *t.lemma : fallback_lemma(t.surface); }

double parse_double(std::string_view text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw EmbeddingError("invalid number '" + std::string(text) + "'");
  }
  return v;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

EmbeddingTable load_word2vec(std::istream& in, std::string source) {
  std::string line;
  if (!std::getline(in, line)) throw EmbeddingError("empty embedding file");
  auto header = split_ws(line);
  std::size_t count = 0, dim = 0;
  if (header.size() != 2 || std::from_chars(header[0].data(), header[0].data() + header[0].size(), count).ec != std::errc() ||
      std::from_chars(header[1].data(), header[1].data() + header[1].size(), dim).ec != std::errc()) {
    throw EmbeddingError("malformed header '" + line + "', expected \"count dim\"");
  }
  if (dim == 0) throw EmbeddingError("embedding dimension must be positive");
  EmbeddingTable table(std::move(source), dim, EmbeddingTable::Kind::static_vectors);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    auto fields = split_ws(line);
    if (fields.empty()) continue;
    ++row;
    if (fields.size() != dim + 1) {
      throw EmbeddingError("row " + std::to_string(row) + " ('" + std::string(fields[0]) + "') has " +
                           std::to_string(fields.size() - 1) + " values, expected dimension " + std::to_string(dim));
    }
    std::vector<double> v(dim);
    for (std::size_t j = 0; j < dim; ++j) v[j] = parse_double(fields[j + 1]);
    table.add_static(std::string(fields[0]), std::move(v));
  }
  if (row != count) {
    throw EmbeddingError("header announces " + std::to_string(count) + " rows but file has " + std::to_string(row));
  }
  return table;
}

EmbeddingTable load_contextual(std::istream& in, std::string source) {
  std::optional<EmbeddingTable> table;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto rec = json::parse(line);
      const auto dim = rec.at("dim").get<std::size_t>();
      if (dim == 0) throw EmbeddingError("embedding dimension must be positive");
      if (!table) table.emplace(source, dim, EmbeddingTable::Kind::contextual);
      if (dim != table->dim()) {
        throw EmbeddingError("dimension mismatch: " + std::to_string(dim) + " vs " + std::to_string(table->dim()));
      }
      std::vector<std::vector<double>> vectors;
      for (const auto& v : rec.at("vectors")) {
        auto values = v.get<std::vector<double>>();
        if (values.size() != dim) {
          throw EmbeddingError("dimension mismatch: vector of length " + std::to_string(values.size()) +
                               ", expected " + std::to_string(dim));
        }
        vectors.push_back(std::move(values));
      }
      table->add_contextual(rec.at("doc_id").get<std::string>(), rec.at("sent_idx").get<std::size_t>(),
                            std::move(vectors));
    } catch (const json::exception& e) {
      throw EmbeddingError("line " + std::to_string(line_number) + ": malformed contextual record: " + e.what());
    } catch (const EmbeddingError& e) {
      throw EmbeddingError("line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  if (!table) throw EmbeddingError("empty contextual embedding file");
  return std::move(*table);
}

std::string offset_prefix(int offset) {
  if (offset > 0) return "+" + std::to_string(offset) + ":";
  return std::to_string(offset) + ":";
}

}  // namespace

std::optional<std::uint32_t> FeatureIndex::find(std::string_view name) const {
  auto it = ids_.find(std::string(name));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::uint32_t FeatureIndex::insert(std::string_view name) {
  std::string key(name);
  if (auto it = ids_.find(key); it != ids_.end()) return it->second;
  if (frozen_) throw std::logic_error("FeatureIndex is frozen");
  auto id = static_cast<std::uint32_t>(names_.size());
  names_.push_back(key);
  ids_.emplace(std::move(key), id);
  return id;
}

double SparseVector::dot(std::span<const double> weights) const {
  double s = 0.0;
  for (const auto& [id, v] : entries) s += weights[id] * v;
  return s;
}

SparseVector to_sparse(const FeatureIndex& index, const FeatureMap& features) {
  SparseVector out;
  for (const auto& f : features) {
    if (auto id = index.find(f.name)) out.entries.emplace_back(*id, f.value);
  }
  std::stable_sort(out.entries.begin(), out.entries.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  out.entries.erase(std::unique(out.entries.begin(), out.entries.end(),
                                [](const auto& a, const auto& b) { return a.first == b.first; }),
                    out.entries.end());
  return out;
}

SparseVector to_sparse(const FeatureIndex& index, std::span<const std::string> binary_features) {
  FeatureMap map;
  map.reserve(binary_features.size());
  for (const auto& name : binary_features) map.push_back(FeatureValue{name, 1.0, false});
  return to_sparse(index, map);
}

std::vector<std::string> sentence_ngram_features(const Sentence& sentence, int n_max) {
  std::set<std::string> names;
  const auto& toks = sentence.tokens;
  std::vector<std::string> pos;
  pos.reserve(toks.size());
  for (const auto& t : toks) pos.push_back(token_pos(t));
  for (int n = 1; n <= n_max; ++n) {
    for (std::size_t i = 0; i + n <= toks.size(); ++i) {
      std::string w = "w:", p = "p:";
      for (int k = 0; k < n; ++k) {
        if (k > 0) {
          w += kJoin;
          p += kJoin;
        }
        w += toks[i + k].surface;
        p += pos[i + k];
      }
      names.insert(std::move(w));
      names.insert(std::move(p));
    }
  }
  return {names.begin(), names.end()};
}

SparseVector extract_sentence_features(const Sentence& sentence, const FeatureIndex& index, int n_max) {
  auto names = sentence_ngram_features(sentence, n_max);
  return to_sparse(index, names);
}

EmbeddingTable::EmbeddingTable(std::string source, std::size_t dim, Kind kind)
    : source_(std::move(source)), dim_(dim), kind_(kind) {
  if (dim_ == 0) throw EmbeddingError("embedding dimension must be positive");
}

std::size_t EmbeddingTable::size() const {
  return kind_ == Kind::static_vectors ? static_.size() : contextual_.size();
}

void EmbeddingTable::add_static(std::string token, std::vector<double> vector) {
  if (vector.size() != dim_) throw EmbeddingError("dimension mismatch for token '" + token + "'");
  static_.insert_or_assign(std::move(token), std::move(vector));
}

void EmbeddingTable::add_contextual(std::string doc_id, std::size_t sentence, std::vector<std::vector<double>> vectors) {
  for (const auto& v : vectors) {
    if (v.size() != dim_) throw EmbeddingError("dimension mismatch in contextual vectors of '" + doc_id + "'");
  }
  contextual_.insert_or_assign({std::move(doc_id), sentence}, std::move(vectors));
}

std::optional<std::span<const double>> EmbeddingTable::lookup(std::string_view token) const {
  if (kind_ != Kind::static_vectors) return std::nullopt;
  auto it = static_.find(std::string(token));
  if (it == static_.end()) it = static_.find(ascii_lower(token));
  if (it == static_.end()) return std::nullopt;
  return std::span<const double>(it->second);
}

std::optional<std::span<const double>> EmbeddingTable::lookup(const Sentence& sentence, std::size_t position) const {
  if (kind_ == Kind::static_vectors) return lookup(sentence.tokens.at(position).surface);
  auto it = contextual_.find({sentence.doc_id, sentence.index});
  if (it == contextual_.end() || position >= it->second.size()) return std::nullopt;
  return std::span<const double>(it->second[position]);
}

EmbeddingTable load_embedding_table(std::istream& source, std::string source_tag) {
  int c = source.peek();
  while (c == ' ' || c == '\n' || c == '\r' || c == '\t') {
    source.get();
    c = source.peek();
  }
  if (c == '{') return load_contextual(source, std::move(source_tag));
  return load_word2vec(source, std::move(source_tag));
}

EmbeddingTable load_embedding_file(const std::string& path, std::string source_tag) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EmbeddingError("cannot open embedding file '" + path + "'");
  if (source_tag.empty()) {
    auto slash = path.find_last_of('/');
    source_tag = path.substr(slash == std::string::npos ? 0 : slash + 1);
    if (auto dot = source_tag.find('.'); dot != std::string::npos && dot > 0) source_tag.resize(dot);
  }
  return load_embedding_table(in, std::move(source_tag));
}

FeatureMap extract_token_features(const Sentence& sentence, std::size_t position,
                                  std::span<const EmbeddingTable> tables, const TokenFeatureConfig& config) {
  FeatureMap out;
  out.push_back({"bias", 1.0, false});
  const auto n = static_cast<long>(sentence.tokens.size());
  for (int o = -config.window; o <= config.window; ++o) {
    const long i = static_cast<long>(position) + o;
    const std::string pre = offset_prefix(o);
    if (i < 0) {
      out.push_back({pre + "BOS", 1.0, false});
      continue;
    }
    if (i >= n) {
      out.push_back({pre + "EOS", 1.0, false});
      continue;
    }
    const auto& tok = sentence.tokens[static_cast<std::size_t>(i)];
    out.push_back({pre + "w=" + tok.surface, 1.0, false});
    out.push_back({pre + "lw=" + ascii_lower(tok.surface), 1.0, false});
    out.push_back({pre + "lem=" + token_lemma(tok), 1.0, false});
    out.push_back({pre + "pos=" + token_pos(tok), 1.0, false});
    out.push_back({pre + "shape=" + word_shape(tok.surface), 1.0, false});
    if (is_numeric_token(tok.surface)) out.push_back({pre + "num", 1.0, false});
    if (has_unit_suffix(tok.surface)) out.push_back({pre + "unit", 1.0, false});
  }
  for (const auto& table : tables) {
    const std::string pre = "emb:" + table.source() + ":";
    auto vec = table.lookup(sentence, position);
    if (vec) {
      for (std::size_t j = 0; j < table.dim(); ++j) out.push_back({pre + std::to_string(j), (*vec)[j], true});
    } else {
      for (std::size_t j = 0; j < table.dim(); ++j) out.push_back({pre + std::to_string(j), 0.0, false});
      out.push_back({pre + "unk", 1.0, false});
    }
  }
  return out;
}

void DenseStandardizer::fit(std::span<const FeatureMap> rows) {
  struct Acc {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;
  };
  std::map<std::string, Acc, std::less<>> acc;
  for (const auto& row : rows) {
    for (const auto& f : row) {
      if (!f.dense) continue;
      auto& a = acc[f.name];
      ++a.n;
      const double delta = f.value - a.mean;
      a.mean += delta / static_cast<double>(a.n);
      a.m2 += delta * (f.value - a.mean);
    }
  }
  stats_.clear();
  for (const auto& [name, a] : acc) {
    const double var = a.n > 0 ? a.m2 / static_cast<double>(a.n) : 0.0;
    stats_[name] = Moments{a.mean, var > 1e-24 ? std::sqrt(var) : 1.0};
  }
}

void DenseStandardizer::apply(FeatureMap& row) const {
  for (auto& f : row) {
    if (!f.dense) continue;
    auto it = stats_.find(f.name);
    if (it != stats_.end()) f.value = (f.value - it->second.mean) / it->second.scale;
  }
}

json DenseStandardizer::to_json() const {
  json arr = json::array();
  for (const auto& [name, m] : stats_) arr.push_back(json::array({name, m.mean, m.scale}));
  return arr;
}

DenseStandardizer DenseStandardizer::from_json(const json& j) {
  DenseStandardizer s;
  for (const auto& e : j) s.stats_[e.at(0).get<std::string>()] = Moments{e.at(1).get<double>(), e.at(2).get<double>()};
  return s;
}

}  // namespace expframe
