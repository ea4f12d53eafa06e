#include "expframe/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace expframe {

namespace {

std::size_t sequence_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

// Splits into code points (as byte substrings).
std::vector<std::string_view> code_points(std::string_view text) {
  std::vector<std::string_view> out;
  for (std::size_t i = 0; i < text.size();) {
    std::size_t n = std::min(sequence_length(static_cast<unsigned char>(text[i])), text.size() - i);
    out.push_back(text.substr(i, n));
    i += n;
  }
  return out;
}

bool is_ascii_digit(std::string_view cp) { return cp.size() == 1 && std::isdigit(static_cast<unsigned char>(cp[0])); }
bool is_ascii_alpha(std::string_view cp) { return cp.size() == 1 && std::isalpha(static_cast<unsigned char>(cp[0])); }
bool is_space(std::string_view cp) {
  return (cp.size() == 1 && std::isspace(static_cast<unsigned char>(cp[0]))) || cp == " " || cp == " " ||
         cp == " ";
}

// Non-ASCII code points that behave as standalone symbols rather than word characters.
constexpr std::array<std::string_view, 14> kSymbolCodePoints = {
    "°", "−", "–", "—", "±", "×", "·", "′",
    "‘", "’", "“", "”", "•", "…"};

bool is_word_char(std::string_view cp) {
  if (cp.size() == 1) return std::isalnum(static_cast<unsigned char>(cp[0])) != 0;
  return std::find(kSymbolCodePoints.begin(), kSymbolCodePoints.end(), cp) == kSymbolCodePoints.end() &&
         !is_space(cp);
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

const std::vector<std::string_view>& units() {
  static const std::vector<std::string_view> list = {
      "°C",  "℃",    "K",     "mW",   "W",     "kW",     "mA",       "A",     "V",    "mV",
      "Ω",   "mΩ",   "ohm",   "S",    "mS",    "h",      "hr",       "min",   "cm",   "cm2",
      "cm−2", "cm-2", "cm^2",  "µm",   "μm",    "nm",     "mm",       "%",     "wt%",  "mol%",
      "vol%", "Pa",   "kPa",   "MPa",  "atm",   "bar",    "eV",       "Hz",    "kHz",  "MHz",
      "S/cm", "Scm−1", "Ωcm2", "Ω·cm2", "mWcm−2", "Acm−2", "mW/cm2", "A/cm2"};
  return list;
}

bool is_unit(std::string_view s) {
  const auto& list = units();
  return !s.empty() && std::find(list.begin(), list.end(), s) != list.end();
}

}  // namespace

std::size_t utf8_length(std::string_view text) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < text.size(); ++n) {
    i += std::min(sequence_length(static_cast<unsigned char>(text[i])), text.size() - i);
  }
  return n;
}

std::string utf8_substr(std::string_view text, std::size_t begin, std::size_t end) {
  std::string out;
  std::size_t cp = 0;
  for (auto piece : code_points(text)) {
    if (cp >= begin && cp < end) out.append(piece);
    ++cp;
  }
  return out;
}

std::string ascii_lower(std::string_view text) {
  std::string out(text);
  for (auto& c : out) {
    if (static_cast<unsigned char>(c) < 0x80) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::string word_shape(std::string_view token) {
  std::string out;
  std::string last;
  for (auto cp : code_points(token)) {
    std::string cls;
    if (cp.size() == 1 && std::isupper(static_cast<unsigned char>(cp[0]))) {
      cls = "X";
    } else if (cp.size() == 1 && std::islower(static_cast<unsigned char>(cp[0]))) {
      cls = "x";
    } else if (is_ascii_digit(cp)) {
      cls = "d";
    } else {
      cls = std::string(cp);
    }
    if (cls != last) out += cls;
    last = std::move(cls);
  }
  return out;
}

bool is_numeric_token(std::string_view token) {
  auto cps = code_points(token);
  std::size_t i = 0;
  if (i < cps.size() && (cps[i] == "+" || cps[i] == "-" || cps[i] == "−" || cps[i] == "±" || cps[i] == "~")) {
    ++i;
  }
  std::size_t digits = 0;
  while (i < cps.size() && is_ascii_digit(cps[i])) ++i, ++digits;
  if (i < cps.size() && (cps[i] == "." || cps[i] == ",")) {
    ++i;
    std::size_t frac = 0;
    while (i < cps.size() && is_ascii_digit(cps[i])) ++i, ++frac;
    if (frac == 0) return false;
    digits += frac;
  }
  if (digits == 0) return false;
  if (i < cps.size() && (cps[i] == "e" || cps[i] == "E")) {
    ++i;
    if (i < cps.size() && (cps[i] == "+" || cps[i] == "-" || cps[i] == "−")) ++i;
    std::size_t exp = 0;
    while (i < cps.size() && is_ascii_digit(cps[i])) ++i, ++exp;
    if (exp == 0) return false;
  }
  return i == cps.size();
}

bool has_unit_suffix(std::string_view token) {
  if (is_unit(token)) return true;
  std::size_t i = 0;
  while (i < token.size() && (std::isdigit(static_cast<unsigned char>(token[i])) || token[i] == '.')) ++i;
  if (i == 0 || i == token.size()) return false;
  return is_unit(token.substr(i));
}

std::string fallback_pos(std::string_view token) {
  if (token.empty()) return "SYM";
  if (is_numeric_token(token)) return "CD";
  auto cps = code_points(token);
  if (cps.size() == 1 && !is_word_char(cps[0])) {
    static constexpr std::array<std::pair<std::string_view, std::string_view>, 9> punct = {{
        {".", "."}, {"!", "."}, {"?", "."}, {",", ","}, {":", ":"}, {";", ":"}, {"(", "-LRB-"}, {")", "-RRB-"},
        {"-", "HYPH"},
    }};
    for (auto [p, tag] : punct) {
      if (token == p) return std::string(tag);
    }
    return "SYM";
  }
  const std::string lower = ascii_lower(token);
  static constexpr std::array<std::pair<std::string_view, std::string_view>, 40> closed = {{
      {"the", "DT"},   {"a", "DT"},       {"an", "DT"},     {"this", "DT"},   {"that", "DT"},    {"these", "DT"},
      {"those", "DT"}, {"of", "IN"},      {"in", "IN"},     {"at", "IN"},     {"on", "IN"},      {"with", "IN"},
      {"by", "IN"},    {"for", "IN"},     {"from", "IN"},   {"under", "IN"},  {"between", "IN"}, {"over", "IN"},
      {"as", "IN"},    {"than", "IN"},    {"to", "TO"},     {"and", "CC"},    {"or", "CC"},      {"but", "CC"},
      {"is", "VBZ"},   {"are", "VBP"},    {"was", "VBD"},   {"were", "VBD"},  {"be", "VB"},      {"been", "VBN"},
      {"has", "VBZ"},  {"have", "VBP"},   {"had", "VBD"},   {"we", "PRP"},    {"it", "PRP"},     {"they", "PRP"},
      {"which", "WDT"}, {"not", "RB"},    {"also", "RB"},   {"can", "MD"},
  }};
  for (auto [w, tag] : closed) {
    if (lower == w) return std::string(tag);
  }
  bool has_digit = std::any_of(token.begin(), token.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
  bool inner_upper = std::any_of(token.begin() + 1, token.end(), [](char c) { return std::isupper(static_cast<unsigned char>(c)); });
  if (has_digit || inner_upper || has_unit_suffix(token)) return "NNP";
  if (ends_with(lower, "ly")) return "RB";
  if (ends_with(lower, "ing")) return "VBG";
  if (ends_with(lower, "ed")) return "VBN";
  for (auto suf : {"tion", "sion", "ment", "ness", "ity", "ance", "ence", "ure", "ism"}) {
    if (ends_with(lower, suf)) return "NN";
  }
  for (auto suf : {"ous", "ive", "al", "able", "ible", "ic", "ful", "less"}) {
    if (ends_with(lower, suf)) return "JJ";
  }
  if (ends_with(lower, "s") && !ends_with(lower, "ss") && lower.size() > 3) return "NNS";
  if (std::isupper(static_cast<unsigned char>(token[0]))) return "NNP";
  return "NN";
}

std::string fallback_lemma(std::string_view token) {
  bool has_digit = std::any_of(token.begin(), token.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
  bool inner_upper = token.size() > 1 && std::any_of(token.begin() + 1, token.end(), [](char c) {
    return std::isupper(static_cast<unsigned char>(c));
  });
  if (has_digit || inner_upper) return std::string(token);
  std::string w = ascii_lower(token);
  auto strip = [&](std::size_t n) { return w.substr(0, w.size() - n); };
  if (w.size() > 4 && ends_with(w, "ies")) return strip(3) + "y";
  if (w.size() > 4 && (ends_with(w, "sses") || ends_with(w, "xes") || ends_with(w, "ches") || ends_with(w, "shes"))) {
    return strip(2);
  }
  if (w.size() > 3 && ends_with(w, "s") && !ends_with(w, "ss") && !ends_with(w, "us") && !ends_with(w, "is")) {
    return strip(1);
  }
  if (w.size() > 5 && ends_with(w, "ing")) return strip(3);
  if (w.size() > 4 && ends_with(w, "ied")) return strip(3) + "y";
  if (w.size() > 4 && ends_with(w, "ed")) return strip(2);
  return w;
}

std::vector<RawToken> regex_tokenize(std::string_view text) {
  auto cps = code_points(text);
  std::vector<RawToken> out;
  std::size_t i = 0;
  auto emit = [&](std::size_t b, std::size_t e) {
    RawToken t;
    t.begin = b;
    t.end = e;
    for (std::size_t k = b; k < e; ++k) t.surface.append(cps[k]);
    out.push_back(std::move(t));
  };
  while (i < cps.size()) {
    if (is_space(cps[i])) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (is_ascii_digit(cps[i])) {
      // 750, 0.5, 1,000
      while (i < cps.size() && is_ascii_digit(cps[i])) ++i;
      while (i + 1 < cps.size() && (cps[i] == "." || cps[i] == ",") && is_ascii_digit(cps[i + 1])) {
        ++i;
        while (i < cps.size() && is_ascii_digit(cps[i])) ++i;
      }
      // Formula-like tokens such as 3YSZ or 8mol keep their letters attached.
      if (i < cps.size() && is_word_char(cps[i]) && !is_ascii_digit(cps[i])) {
        std::size_t j = i;
        while (j < cps.size() && is_word_char(cps[j])) ++j;
        std::string tail;
        for (std::size_t k = i; k < j; ++k) tail.append(cps[k]);
        if (!is_unit(tail)) i = j;
      }
      emit(start, i);
      continue;
    }
    if (is_word_char(cps[i])) {
      while (i < cps.size()) {
        while (i < cps.size() && is_word_char(cps[i])) ++i;
        // Internal hyphens and slashes: Ni-YSZ, La0.8Sr0.2MnO3, S/cm
        if (i + 1 < cps.size() && (cps[i] == "-" || cps[i] == "/") && is_word_char(cps[i + 1])) {
          ++i;
          continue;
        }
        if (i + 1 < cps.size() && cps[i] == "." && is_ascii_digit(cps[i + 1]) && i > start &&
            (is_ascii_alpha(cps[i - 1]) || is_ascii_digit(cps[i - 1]))) {
          ++i;
          continue;
        }
        break;
      }
      emit(start, i);
      continue;
    }
    emit(start, i + 1);
    ++i;
  }
  return out;
}

}  // namespace expframe
