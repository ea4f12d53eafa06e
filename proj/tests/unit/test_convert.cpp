#include <sstream>

#include <doctest.h>

#include "expframe/convert.hpp"

using namespace expframe;

namespace {
const std::string kRelease = std::string(EXPFRAME_TEST_DATA) + "/release";
}

TEST_CASE("delimited lines") {
  CHECK(split_delimited("a,b,,c", ',') == std::vector<std::string>{"a", "b", "", "c"});
  CHECK(split_delimited("\"x,y\",\"say \"\"hi\"\"\"", ',') == std::vector<std::string>{"x,y", "say \"hi\""});
  CHECK(split_delimited("a\tb,c", '\t') == std::vector<std::string>{"a", "b,c"});
  CHECK(detect_delimiter("a\tb") == '\t');
  CHECK(detect_delimiter("a,b") == ',');
}

TEST_CASE("released layout converts to the corpus format") {
  ConvertStats stats;
  const Corpus train = convert_release(kRelease, "train", &stats);
  REQUIRE(train.documents.size() == 1);
  CHECK(stats.documents == 1);
  CHECK(stats.sentences == 2);
  CHECK(stats.dropped_links == 1);
  CHECK(stats.dropped_slots == 0);

  const Document& d = train.documents[0];
  CHECK(d.doc_id == "doc1");
  const Sentence& s = d.sentences[0];
  CHECK(s.text == "The LSCF cell was tested at 800 °C.");
  REQUIRE(s.tokens.size() == 9);
  CHECK(s.tokens[7].surface == "°C");
  CHECK(s.tokens[7].begin == 32);
  CHECK(s.is_experiment);
  REQUIRE(s.mentions.size() == 4);
  CHECK(s.mentions[2].type == "EXPERIMENT");
  CHECK(s.mentions[3].begin == 6);
  CHECK(s.mentions[3].end == 8);
  REQUIRE(s.slots.size() == 3);
  for (const auto& l : s.slots) CHECK(l.anchor == s.mentions[2].id);
  CHECK(s.slots[2].type == "working_temperature");
  CHECK(s.slots[2].filler == s.mentions[3].id);

  const Sentence& s2 = d.sentences[1];
  CHECK(s2.text == "It failed.");
  REQUIRE(s2.links.size() == 1);
  CHECK(s2.links[0].kind == LinkKind::same_exp);
  CHECK(s2.links[0].from == s2.mentions[0].id);
  CHECK(s2.links[0].to == s.mentions[2].id);
  // Experiment mentions with no slot role become evoking words in the slot layer.
  CHECK(spans_to_bio(s2, Layer::slots) == LabelSequence{"O", "B-experiment_evoking_word", "O"});
}

TEST_CASE("tab-separated files without headers and unanchored slots") {
  ConvertStats stats;
  const Corpus test = convert_release(kRelease, "test", &stats);
  REQUIRE(test.documents.size() == 1);
  const Sentence& s = test.documents[0].sentences[0];
  CHECK_FALSE(s.is_experiment);
  REQUIRE(s.mentions.size() == 1);
  CHECK(s.mentions[0].type == "MATERIAL");
  CHECK(s.slots.empty());
  CHECK(stats.dropped_slots == 1);
  CHECK(convert_release(kRelease, "").documents.size() == 2);
  CHECK_THROWS_AS(convert_release(kRelease + "/missing", ""), CorpusError);
}

TEST_CASE("plain text becomes one sentence per non-blank line") {
  std::istringstream in("The cell was tested.\n\n  \nIt failed.\r\n");
  const Document d = text_to_document("plain", in);
  REQUIRE(d.sentences.size() == 2);
  CHECK(d.sentences[1].text == "It failed.");
  CHECK(d.sentences[1].index == 1);
  CHECK(d.sentences[0].tokens.back().surface == ".");
  CHECK(d.sentences[0].mentions.empty());
  // The result serializes as a valid record.
  CHECK_NOTHROW(parse_document(serialize_document(d)));
}
