#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "expframe/corpus.hpp"

namespace expframe {

struct FeatureValue {
  std::string name;
  double value = 1.0;
  /// Real-valued embedding component; only these are standardized.
  bool dense = false;
};

using FeatureMap = std::vector<FeatureValue>;

/// Feature name -> column id. Grows while fitting, then frozen.
class FeatureIndex {
 public:
  std::optional<std::uint32_t> find(std::string_view name) const;
  /// Returns the existing id or appends a new column. Throws once frozen.
  std::uint32_t insert(std::string_view name);
  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }
  std::size_t size() const { return names_.size(); }
  const std::string& name(std::uint32_t id) const { return names_.at(id); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::unordered_map<std::string, std::uint32_t> ids_;
  std::vector<std::string> names_;
  bool frozen_ = false;
};

/// Sorted (column, value) pairs with strictly increasing columns.
struct SparseVector {
  std::vector<std::pair<std::uint32_t, double>> entries;

  double dot(std::span<const double> weights) const;
  bool empty() const { return entries.empty(); }
};

/// Maps known names to columns; unknown names are dropped and repeated
/// names keep their first value.
SparseVector to_sparse(const FeatureIndex& index, const FeatureMap& features);
SparseVector to_sparse(const FeatureIndex& index, std::span<const std::string> binary_features);

/// Binary indicators for word and POS n-grams, n = 1..n_max, sorted and unique.
/// Names look like "w:the▸SOFC" and "p:DT▸NN". Missing POS uses the fallback tagger.
std::vector<std::string> sentence_ngram_features(const Sentence& sentence, int n_max = 4);
SparseVector extract_sentence_features(const Sentence& sentence, const FeatureIndex& index, int n_max = 4);

class EmbeddingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense vectors keyed either by token surface (static tables) or by
/// (doc_id, sentence index, position) (contextual tables).
class EmbeddingTable {
 public:
  enum class Kind { static_vectors, contextual };

  EmbeddingTable(std::string source, std::size_t dim, Kind kind);

  const std::string& source() const { return source_; }
  std::size_t dim() const { return dim_; }
  Kind kind() const { return kind_; }
  std::size_t size() const;

  void add_static(std::string token, std::vector<double> vector);
  void add_contextual(std::string doc_id, std::size_t sentence, std::vector<std::vector<double>> vectors);

  /// Static tables try the exact surface, then its ASCII lowercase form.
  std::optional<std::span<const double>> lookup(const Sentence& sentence, std::size_t position) const;
  std::optional<std::span<const double>> lookup(std::string_view token) const;

 private:
  std::string source_;
  std::size_t dim_;
  Kind kind_;
  std::unordered_map<std::string, std::vector<double>> static_;
  std::map<std::pair<std::string, std::size_t>, std::vector<std::vector<double>>> contextual_;
};

/// Reads word2vec text ("count dim" header, then "token v1 ... vd") or the
/// contextual JSONL layout; the format is detected from the first byte.
EmbeddingTable load_embedding_table(std::istream& source, std::string source_tag);
EmbeddingTable load_embedding_file(const std::string& path, std::string source_tag = "");

struct TokenFeatureConfig {
  int window = 1;
};

/// Discrete features of tokens in [position - window, position + window]
/// (surface, lowercase, lemma, POS, shape, is-numeric, has-unit) plus the
/// embedding components of the current token. Out-of-range neighbours give a
/// BOS/EOS sentinel; tokens missing from a table give zeros plus an unk flag.
FeatureMap extract_token_features(const Sentence& sentence, std::size_t position,
                                  std::span<const EmbeddingTable> tables, const TokenFeatureConfig& config);

/// Per-feature mean/standard deviation of dense values, fitted on training rows.
class DenseStandardizer {
 public:
  void fit(std::span<const FeatureMap> rows);
  void apply(FeatureMap& row) const;
  bool empty() const { return stats_.empty(); }

  nlohmann::json to_json() const;
  static DenseStandardizer from_json(const nlohmann::json& j);

 private:
  struct Moments {
    double mean = 0.0;
    double scale = 1.0;
  };
  std::map<std::string, Moments, std::less<>> stats_;
};

}  // namespace expframe
