#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace expframe {

/// A typed token range [begin, end) within one sentence.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string type;

  auto operator<=>(const Span&) const = default;
};

using LabelSequence = std::vector<std::string>;

/// Ordered set of span types together with its BIO expansion.
///
/// Label ids are laid out as O = 0, B-t = 1 + 2i, I-t = 2 + 2i for the i-th
/// type, so every schema with T types has 2T + 1 labels.
class LabelSchema {
 public:
  LabelSchema() = default;
  explicit LabelSchema(std::vector<std::string> types);

  const std::vector<std::string>& types() const { return types_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t num_labels() const { return labels_.size(); }

  std::optional<std::uint32_t> label_id(std::string_view label) const;
  std::optional<std::size_t> type_index(std::string_view type) const;
  bool contains_type(std::string_view type) const { return type_index(type).has_value(); }

  static constexpr std::uint32_t outside() { return 0; }
  static constexpr std::uint32_t begin_id(std::size_t type) { return static_cast<std::uint32_t>(1 + 2 * type); }
  static constexpr std::uint32_t inside_id(std::size_t type) { return static_cast<std::uint32_t>(2 + 2 * type); }

  bool operator==(const LabelSchema& other) const { return types_ == other.types_; }

 private:
  std::vector<std::string> types_;
  std::vector<std::string> labels_;
};

class BioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Encodes non-overlapping spans as BIO labels over `length` tokens.
/// Throws BioError when spans overlap or fall outside the sentence.
LabelSequence encode_bio(std::span<const Span> spans, std::size_t length);

/// Decodes arbitrary label strings into sorted, non-overlapping spans.
///
/// An I-t that follows O, the sequence start, or a span of another type opens
/// a new span. Labels that are neither O nor B-/I- prefixed count as O.
std::vector<Span> bio_to_spans(std::span<const std::string> labels);

/// True when no I-t follows O, the start, or a B-s/I-s with s != t.
bool is_valid_bio(std::span<const std::string> labels);

/// Splits "B-MATERIAL" into ('B', "MATERIAL"); O and unknown labels give ('O', "").
std::pair<char, std::string_view> split_bio_label(std::string_view label);

}  // namespace expframe
