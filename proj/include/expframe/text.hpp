#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace expframe {

/// Number of code points in a UTF-8 string. Invalid lead bytes count as one.
std::size_t utf8_length(std::string_view text);

/// Substring by code-point offsets [begin, end).
std::string utf8_substr(std::string_view text, std::size_t begin, std::size_t end);

/// ASCII lowercase; multi-byte sequences are copied unchanged.
std::string ascii_lower(std::string_view text);

/// Word shape with repeated classes collapsed: "LiNiO2" -> "XxXxXd".
std::string word_shape(std::string_view token);

bool is_numeric_token(std::string_view token);

/// Unit-like tokens (°C, mW, cm−2, S/cm, V, h, ...) or digits glued to a unit ("800°C").
bool has_unit_suffix(std::string_view token);

/// Suffix-rule part-of-speech guess (Penn tags) for tokens without a tagger column.
std::string fallback_pos(std::string_view token);

/// Suffix-stripping lemma guess for tokens without a lemma column.
std::string fallback_lemma(std::string_view token);

struct RawToken {
  std::string surface;
  std::size_t begin = 0;  ///< code-point offset
  std::size_t end = 0;
};

/// Regex tokenizer used when no pre-tokenized input is available: numbers
/// (with decimals), words with internal hyphens/digits, and single symbols.
std::vector<RawToken> regex_tokenize(std::string_view text);

}  // namespace expframe
