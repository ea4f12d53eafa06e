#include <doctest.h>

#include "expframe/text.hpp"

using namespace expframe;

namespace {

std::vector<std::string> surfaces(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& t : regex_tokenize(text)) out.push_back(t.surface);
  return out;
}

}  // namespace

TEST_CASE("utf8 helpers") {
  CHECK(utf8_length("°C") == 2);
  CHECK(utf8_length("abc") == 3);
  CHECK(utf8_substr("at 800 °C now", 7, 9) == "°C");
  CHECK(ascii_lower("LSCF-Ni") == "lscf-ni");
}

TEST_CASE("word shapes") {
  CHECK(word_shape("LiNiO2") == "XxXxXd");
  CHECK(word_shape("800") == "d");
  CHECK(word_shape("cell") == "x");
  CHECK(word_shape("Ni-YSZ") == "Xx-X");
}

TEST_CASE("numeric and unit detection") {
  CHECK(is_numeric_token("750"));
  CHECK(is_numeric_token("0.5"));
  CHECK(is_numeric_token("1,000"));
  CHECK_FALSE(is_numeric_token("cell"));
  CHECK_FALSE(is_numeric_token(""));
  CHECK(has_unit_suffix("°C"));
  CHECK(has_unit_suffix("mW"));
  CHECK(has_unit_suffix("800°C"));
  CHECK_FALSE(has_unit_suffix("cell"));
  CHECK_FALSE(has_unit_suffix(""));
}

TEST_CASE("fallback tagger and lemmatizer") {
  CHECK(fallback_pos("the") == "DT");
  CHECK(fallback_pos("750") == "CD");
  CHECK(fallback_pos("tested") == "VBN");
  CHECK(fallback_pos(".") == ".");
  CHECK(fallback_lemma("cells") == "cell");
  CHECK(fallback_lemma("tested") == "test");
}

TEST_CASE("regex tokenizer") {
  CHECK(surfaces("The cell was tested at 750 °C.") ==
        std::vector<std::string>{"The", "cell", "was", "tested", "at", "750", "°", "C", "."});
  CHECK(surfaces("Ni-YSZ and La0.8Sr0.2MnO3 gave 0.5 W/cm2") ==
        std::vector<std::string>{"Ni-YSZ", "and", "La0.8Sr0.2MnO3", "gave", "0.5", "W/cm2"});
  CHECK(surfaces("8YSZ (3 mol%)") == std::vector<std::string>{"8YSZ", "(", "3", "mol", "%", ")"});
  const auto toks = regex_tokenize("à 5");
  REQUIRE(toks.size() == 2);
  CHECK(toks[1].begin == 2);
  CHECK(toks[1].end == 3);
  CHECK(regex_tokenize("   ").empty());
}
