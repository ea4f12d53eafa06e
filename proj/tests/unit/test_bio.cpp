#include <random>

#include <doctest.h>

#include "expframe/bio.hpp"
#include "expframe/dataset.hpp"

using namespace expframe;

TEST_CASE("label schema layout") {
  LabelSchema s({"MATERIAL", "VALUE"});
  CHECK(s.labels() == std::vector<std::string>{"O", "B-MATERIAL", "I-MATERIAL", "B-VALUE", "I-VALUE"});
  CHECK(s.label_id("I-VALUE") == 4u);
  CHECK_FALSE(s.label_id("B-DEVICE"));
  CHECK(s.type_index("VALUE") == 1u);
}

TEST_CASE("encode_bio examples") {
  CHECK(encode_bio(std::vector<Span>{{0, 2, "MATERIAL"}}, 3) ==
        LabelSequence{"B-MATERIAL", "I-MATERIAL", "O"});
  CHECK(encode_bio(std::vector<Span>{}, 3) == LabelSequence{"O", "O", "O"});
  CHECK(encode_bio(std::vector<Span>{{0, 1, "VALUE"}, {1, 2, "VALUE"}}, 2) == LabelSequence{"B-VALUE", "B-VALUE"});
}

TEST_CASE("encode_bio rejects overlaps and out-of-range spans") {
  CHECK_THROWS_AS(encode_bio(std::vector<Span>{{0, 2, "A"}, {1, 3, "B"}}, 3), BioError);
  CHECK_THROWS_AS(encode_bio(std::vector<Span>{{2, 4, "A"}}, 3), BioError);
  CHECK_THROWS_AS(encode_bio(std::vector<Span>{{1, 1, "A"}}, 3), BioError);
}

TEST_CASE("bio_to_spans examples and repair rule") {
  using V = std::vector<Span>;
  CHECK(bio_to_spans(LabelSequence{"B-MAT", "I-MAT", "O"}) == V{{0, 2, "MAT"}});
  CHECK(bio_to_spans(LabelSequence{"O", "I-MAT"}) == V{{1, 2, "MAT"}});
  CHECK(bio_to_spans(LabelSequence{"B-MAT", "I-DEV"}) == V{{0, 1, "MAT"}, {1, 2, "DEV"}});
  CHECK(bio_to_spans(LabelSequence{"I-MAT", "I-MAT"}) == V{{0, 2, "MAT"}});
  CHECK(bio_to_spans(LabelSequence{"B-MAT", "garbage", "I-MAT"}) == V{{0, 1, "MAT"}, {2, 3, "MAT"}});
  CHECK(bio_to_spans(LabelSequence{}).empty());
}

TEST_CASE("is_valid_bio") {
  CHECK(is_valid_bio(LabelSequence{"B-A", "I-A", "O", "B-B"}));
  CHECK_FALSE(is_valid_bio(LabelSequence{"I-A"}));
  CHECK_FALSE(is_valid_bio(LabelSequence{"O", "I-A"}));
  CHECK_FALSE(is_valid_bio(LabelSequence{"B-A", "I-B"}));
}

TEST_CASE("decoder on random label strings emits sorted non-overlapping spans") {
  const std::vector<std::string> alphabet{"O", "B-A", "I-A", "B-B", "I-B", "X", "I-", "B-"};
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    LabelSequence labels(uniform_index(rng, 12));
    for (auto& l : labels) l = alphabet[uniform_index(rng, alphabet.size())];
    const auto spans = bio_to_spans(labels);
    std::size_t last_end = 0;
    for (const auto& s : spans) {
      REQUIRE(s.begin >= last_end);
      REQUIRE(s.begin < s.end);
      REQUIRE(s.end <= labels.size());
      last_end = s.end;
    }
    // Every predicted token inside a B-/I- label is covered.
    std::size_t covered = 0, tagged = 0;
    for (const auto& s : spans) covered += s.end - s.begin;
    for (const auto& l : labels) {
      const auto [tag, type] = split_bio_label(l);
      if (tag != 'O') ++tagged;
    }
    REQUIRE(covered == tagged);
  }
}

TEST_CASE("round trip over random valid span sets") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + uniform_index(rng, 15);
    std::vector<Span> spans;
    std::size_t pos = 0;
    while (pos < n) {
      pos += uniform_index(rng, 3);
      if (pos >= n) break;
      const std::size_t len = 1 + uniform_index(rng, std::min<std::size_t>(3, n - pos));
      spans.push_back(Span{pos, pos + len, uniform_index(rng, 2) ? "A" : "B"});
      pos += len;
    }
    const auto labels = encode_bio(spans, n);
    REQUIRE(is_valid_bio(labels));
    REQUIRE(bio_to_spans(labels) == spans);
  }
}
