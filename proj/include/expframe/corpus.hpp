#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "expframe/bio.hpp"

namespace expframe {

/// Mention and slot vocabularies the corpus is validated against.
struct CorpusSchema {
  std::vector<std::string> mention_types;
  std::string experiment_type;
  /// Every slot type a SlotLink may carry, auxiliary ones included.
  std::vector<std::string> slot_types;
  /// Slot types that only exist as training targets and are never scored.
  std::vector<std::string> auxiliary_slot_types;
  /// Auxiliary slot type given to experiment mentions that fill no slot.
  std::string evoking_slot_type;

  /// EXPERIMENT/MATERIAL/VALUE/DEVICE with the 16 frame slots plus
  /// experiment_evoking_word and thickness.
  static const CorpusSchema& sofc_exp();

  bool has_mention_type(std::string_view type) const;
  bool has_slot_type(std::string_view type) const;
  bool is_auxiliary_slot(std::string_view type) const;
  /// Slot types that are scored: slot_types minus auxiliary_slot_types.
  std::vector<std::string> evaluated_slot_types() const;

  LabelSchema mention_schema() const { return LabelSchema(mention_types); }
  LabelSchema slot_schema() const { return LabelSchema(slot_types); }
};

enum class LinkKind { same_exp, variation };

std::string_view to_string(LinkKind kind);
std::optional<LinkKind> parse_link_kind(std::string_view text);

struct Token {
  std::string surface;
  std::optional<std::string> lemma;
  std::optional<std::string> pos;
  /// Character (code point) offsets into the sentence text.
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct EntityMention {
  std::string id;
  std::string type;
  std::size_t begin = 0;  ///< first token
  std::size_t end = 0;    ///< one past the last token
  std::optional<std::string> coref;
};

/// Frame edge from an experiment-evoking mention to a slot filler.
struct SlotLink {
  std::string anchor;
  std::string filler;
  std::string type;
};

struct ExperimentLink {
  std::string from;
  std::string to;
  LinkKind kind = LinkKind::same_exp;
};

/// Model output attached to a sentence by `predict`.
struct Prediction {
  std::optional<bool> is_experiment;
  std::optional<double> score;
  std::optional<std::vector<Span>> mentions;
  std::optional<std::vector<Span>> slots;
};

struct Sentence {
  std::string doc_id;
  std::size_t index = 0;  ///< position within its document
  std::string text;
  std::vector<Token> tokens;
  std::vector<EntityMention> mentions;
  std::vector<SlotLink> slots;
  std::vector<ExperimentLink> links;
  bool is_experiment = false;
  std::optional<Prediction> predicted;

  std::size_t size() const { return tokens.size(); }
  const EntityMention* find_mention(std::string_view id) const;
};

struct Document {
  std::string doc_id;
  std::vector<Sentence> sentences;
};

struct Corpus {
  std::vector<Document> documents;

  std::size_t sentence_count() const;
};

/// Validation failure; `line()` is the 1-based JSONL line, 0 when unknown.
class CorpusError : public std::runtime_error {
 public:
  CorpusError(const std::string& message, std::size_t line = 0);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Parses and validates one JSONL record. Ids must resolve within the document.
Document parse_document(std::string_view line, const CorpusSchema& schema = CorpusSchema::sofc_exp(),
                        std::size_t line_number = 0);
Document document_from_json(const nlohmann::json& record, const CorpusSchema& schema = CorpusSchema::sofc_exp());

/// Reads a whole JSONL corpus. Blank lines are skipped.
Corpus parse_corpus(std::istream& source, const CorpusSchema& schema = CorpusSchema::sofc_exp());
Corpus load_corpus(const std::string& path, const CorpusSchema& schema = CorpusSchema::sofc_exp());

/// Canonical record: fixed key order, optional fields omitted when absent.
nlohmann::ordered_json document_to_json(const Document& doc);
std::string serialize_document(const Document& doc);
void serialize_corpus(const Corpus& corpus, std::ostream& out);

enum class Layer { mentions, slots };

std::string_view to_string(Layer layer);
LabelSchema layer_schema(Layer layer, const CorpusSchema& schema = CorpusSchema::sofc_exp());

/// Gold spans for one annotation layer, sorted by begin.
///
/// For the slot layer a token takes the type of the first SlotLink whose
/// filler covers it; experiment mentions that fill no slot get the schema's
/// evoking slot type.
std::vector<Span> layer_spans(const Sentence& sentence, Layer layer,
                              const CorpusSchema& schema = CorpusSchema::sofc_exp());

LabelSequence spans_to_bio(const Sentence& sentence, Layer layer,
                           const CorpusSchema& schema = CorpusSchema::sofc_exp());

}  // namespace expframe
