#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "expframe/corpus.hpp"

namespace expframe {

/// Splits one delimited line; double-quoted fields may contain the delimiter.
std::vector<std::string> split_delimited(std::string_view line, char delimiter);

/// Tab if the line contains one, else comma.
char detect_delimiter(std::string_view header);

struct ConvertStats {
  std::size_t documents = 0;
  std::size_t sentences = 0;
  std::size_t dropped_slots = 0;  ///< slot spans without a matching mention or experiment anchor
  std::size_t dropped_links = 0;  ///< link rows whose endpoints could not be resolved
  std::vector<std::string> warnings;
};

/// Reads the released corpus directory layout:
///
///   SOFC-Exp-Metadata.csv                      name, set (train/test)
///   texts/<name>.txt                           full text
///   annotations/sentences/<name>.csv           sentence_id, label, begin, end
///   annotations/tokens/<name>.csv              sentence_id, token_id, begin, end
///   annotations/entity_types_and_slots/<name>.csv
///                                              sentence_id, token_id, entity_label, slot_label
///   annotations/links/<name>.csv (optional)    kind, from_sentence, from_token, to_sentence, to_token
///
/// Offsets are code-point offsets into the full text, end exclusive. Entity
/// and slot labels are BIO. Each slot span fills the slot of the first
/// EXPERIMENT mention of its sentence and must coincide with a mention.
/// Files may be tab- or comma-separated with a header row.
/// `split` selects documents by the metadata "set" column; empty keeps all.
Corpus convert_release(const std::filesystem::path& root, std::string_view split, ConvertStats* stats = nullptr,
                       const CorpusSchema& schema = CorpusSchema::sofc_exp());

/// One sentence per non-blank line, tokenized with the regex fallback.
Document text_to_document(std::string doc_id, std::istream& lines);

}  // namespace expframe
