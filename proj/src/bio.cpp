#include "expframe/bio.hpp"

#include <algorithm>

namespace expframe {

LabelSchema::LabelSchema(std::vector<std::string> types) : types_(std::move(types)) {
  labels_.reserve(1 + 2 * types_.size());
  labels_.emplace_back("O");
  for (const auto& t : types_) {
    labels_.push_back("B-" + t);
    labels_.push_back("I-" + t);
  }
}

std::optional<std::uint32_t> LabelSchema::label_id(std::string_view label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == label) return static_cast<std::uint32_t>(i);
  }
  return std::nullopt;
}

std::optional<std::size_t> LabelSchema::type_index(std::string_view type) const {
  for (std::size_t i = 0; i < types_.size(); ++i) {
    if (types_[i] == type) return i;
  }
  return std::nullopt;
}

std::pair<char, std::string_view> split_bio_label(std::string_view label) {
  if (label.size() > 2 && (label[0] == 'B' || label[0] == 'I') && label[1] == '-') {
    return {label[0], label.substr(2)};
  }
  return {'O', {}};
}

LabelSequence encode_bio(std::span<const Span> spans, std::size_t length) {
  LabelSequence labels(length, "O");
  std::vector<bool> used(length, false);
  for (const auto& span : spans) {
    if (span.begin >= span.end || span.end > length) {
      throw BioError("span [" + std::to_string(span.begin) + "," + std::to_string(span.end) +
                     ") is empty or exceeds sentence length " + std::to_string(length));
    }
    for (std::size_t i = span.begin; i < span.end; ++i) {
      if (used[i]) {
        throw BioError("overlapping spans at token " + std::to_string(i));
      }
      used[i] = true;
      labels[i] = (i == span.begin ? "B-" : "I-") + span.type;
    }
  }
  return labels;
}

std::vector<Span> bio_to_spans(std::span<const std::string> labels) {
  std::vector<Span> spans;
  bool open = false;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [tag, type] = split_bio_label(labels[i]);
    if (tag == 'O') {
      open = false;
      continue;
    }
    if (tag == 'I' && open && spans.back().type == type) {
      spans.back().end = i + 1;
      continue;
    }
    spans.push_back(Span{i, i + 1, std::string(type)});
    open = true;
  }
  return spans;
}

bool is_valid_bio(std::span<const std::string> labels) {
  std::string_view current;
  bool open = false;
  for (const auto& label : labels) {
    auto [tag, type] = split_bio_label(label);
    if (tag == 'I' && (!open || current != type)) return false;
    open = tag != 'O';
    current = type;
  }
  return true;
}

}  // namespace expframe
