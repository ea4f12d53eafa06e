#include <doctest.h>

#include "expframe/report.hpp"
#include "synthetic.hpp"

using namespace expframe;

TEST_CASE("number formatting") {
  CHECK(percent(0.8108108) == "81.1");
  CHECK(percent(0.0) == "0.0");
  CHECK(percent(1.0) == "100.0");
  CHECK(percent(-1e-9) == "0.0");
  CHECK(ratio2(0.7504) == "0.75");
  CHECK(ratio2(1.0) == "1.00");
}

TEST_CASE("format names") {
  CHECK(parse_format("table") == Format::table);
  CHECK(parse_format("json") == Format::json);
  CHECK(parse_format("csv") == Format::csv);
  CHECK_FALSE(parse_format("xml"));
}

TEST_CASE("aligned and csv rendering") {
  const std::vector<Table> tables{{"scores", {"type", "F1"}, {{"MATERIAL", "81.1"}, {"VALUE", "5.0"}}},
                                  {"", {"a", "b"}, {{"x,y", "say \"hi\""}}}};
  const std::string text = render(tables, Format::table);
  CHECK(text ==
        "scores\n"
        "type        F1\n"
        "--------------\n"
        "MATERIAL  81.1\n"
        "VALUE      5.0\n"
        "\n"
        "a           b\n"
        "-------------\n"
        "x,y  say \"hi\"\n");
  const std::string csv = render(tables, Format::csv);
  CHECK(csv ==
        "# scores\n"
        "type,F1\n"
        "MATERIAL,81.1\n"
        "VALUE,5.0\n"
        "\n"
        "a,b\n"
        "\"x,y\",\"say \"\"hi\"\"\"\n");
  CHECK(render(std::vector<Table>{}, Format::table).empty());
}

TEST_CASE("evaluation report json and tables") {
  const EvalReport r = make_report({"A", "B"}, {prf(3, 1, 0), prf(0, 0, 2)});
  const auto j = to_json(r);
  CHECK(j["per_type"]["A"]["tp"] == 3);
  CHECK(j["per_type"]["B"]["f1"] == 0.0);
  CHECK(j["micro"]["tp"] == 3);
  CHECK(j["micro"]["fn"] == 2);
  CHECK(j["macro"]["f1"].get<double>() == doctest::Approx(r.macro_f1));
  const auto t = to_tables(r, "x");
  REQUIRE(t.size() == 1);
  CHECK(t[0].rows.size() == 4);
  CHECK(t[0].rows[2][0] == "macro");
  CHECK(t[0].rows[3][0] == "micro");
}

TEST_CASE("corpus statistics render in every format") {
  const CorpusStats st = corpus_stats(testing::make_corpus(2, {.documents = 3}));
  const auto j = to_json(st);
  CHECK(j["documents"] == 3);
  CHECK(j["links"]["SAME_EXP"]["total"] == st.same_exp.total);
  CHECK(j["mentions"].size() == CorpusSchema::sofc_exp().mention_types.size());
  const auto tables = to_tables(st);
  CHECK(tables.size() == 5);
  for (auto f : {Format::table, Format::csv}) CHECK_FALSE(render(tables, f).empty());
}

TEST_CASE("agreement tables show the kappa block") {
  const Corpus c = testing::make_corpus(3, {.documents = 2});
  const auto tables = to_tables(agreement_report(c, c));
  REQUIRE(tables.size() == 4);
  CHECK(tables[0].rows.back() == std::vector<std::string>{"kappa", "1.00"});
}
