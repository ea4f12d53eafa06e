#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "expframe/corpus.hpp"
#include "expframe/crf.hpp"
#include "expframe/features.hpp"

namespace expframe {

struct TaggerConfig {
  TokenFeatureConfig features;
  bool standardize = true;  ///< z-score dense features with training statistics
  bool bio_mask = true;     ///< restrict decoding to BIO-valid sequences
  CrfTrainConfig train;
};

/// A CRF bound to one annotation layer and its feature pipeline.
class CrfTagger {
 public:
  CrfTagger() = default;

  Layer layer() const { return layer_; }
  const LabelSchema& schema() const { return schema_; }
  const CrfModel& model() const { return model_; }
  const FeatureIndex& features() const { return index_; }
  const TaggerConfig& config() const { return config_; }
  /// Source tags of the embedding tables the model was trained with, in order.
  const std::vector<std::string>& embedding_sources() const { return embedding_sources_; }

  FeatureSequence encode(const Sentence& sentence, std::span<const EmbeddingTable> tables) const;
  std::vector<std::uint32_t> tag_ids(const Sentence& sentence, std::span<const EmbeddingTable> tables) const;
  LabelSequence tag_labels(const Sentence& sentence, std::span<const EmbeddingTable> tables) const;
  std::vector<Span> tag(const Sentence& sentence, std::span<const EmbeddingTable> tables) const;

  nlohmann::ordered_json to_json() const;
  static CrfTagger from_json(const nlohmann::json& j);

 private:
  friend CrfTagger train_crf(std::span<const Sentence* const>, Layer, const CorpusSchema&,
                             std::span<const EmbeddingTable>, const TaggerConfig&);

  Layer layer_ = Layer::mentions;
  LabelSchema schema_;
  TaggerConfig config_;
  FeatureIndex index_;
  DenseStandardizer standardizer_;
  std::vector<std::string> embedding_sources_;
  CrfModel model_;
};

/// Trains a tagger on the gold spans of `layer`. Unary weights exist only for
/// (feature, label) pairs seen in training. An all-O dataset is accepted.
CrfTagger train_crf(std::span<const Sentence* const> sentences, Layer layer, const CorpusSchema& schema,
                    std::span<const EmbeddingTable> tables, const TaggerConfig& config);

}  // namespace expframe
