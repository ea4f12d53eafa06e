#include "expframe/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace expframe {

using nlohmann::ordered_json;

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s == "-0.0" || s == "-0.00") s.erase(0, 1);
  return s;
}

std::string pm(const MeanStd& m) { return percent(m.mean) + " +/- " + percent(m.std); }

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> prf_row(const std::string& name, const PrfScore& s) {
  return {name,
          percent(s.precision),
          percent(s.recall),
          percent(s.f1),
          std::to_string(s.tp),
          std::to_string(s.fp),
          std::to_string(s.fn)};
}

ordered_json mean_std_json(const MeanStd& m) { return ordered_json{{"mean", m.mean}, {"std", m.std}}; }

Table summary_table(const ReportSummary& s, std::string title, bool with_std) {
  Table t{std::move(title), {"type", "P", "R", "F1"}, {}};
  auto cell = [&](const MeanStd& m) { return with_std ? pm(m) : percent(m.mean); };
  for (std::size_t i = 0; i < s.types.size(); ++i) {
    t.rows.push_back({s.types[i], cell(s.precision[i]), cell(s.recall[i]), cell(s.f1[i])});
  }
  t.rows.push_back({"macro", cell(s.macro_precision), cell(s.macro_recall), cell(s.macro_f1)});
  return t;
}

}  // namespace

std::optional<Format> parse_format(std::string_view text) {
  if (text == "table") return Format::table;
  if (text == "json") return Format::json;
  if (text == "csv") return Format::csv;
  return std::nullopt;
}

std::string percent(double fraction) { return fixed(100.0 * fraction, 1); }
std::string ratio2(double value) { return fixed(value, 2); }

std::string render(std::span<const Table> tables, Format format) {
  std::string out;
  for (std::size_t n = 0; n < tables.size(); ++n) {
    const Table& t = tables[n];
    if (n > 0) out += '\n';
    if (format == Format::csv) {
      if (!t.title.empty()) out += "# " + t.title + '\n';
      auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + csv_cell(cells[i]);
        out += '\n';
      };
      line(t.columns);
      for (const auto& r : t.rows) line(r);
      continue;
    }
    std::vector<std::size_t> width(t.columns.size());
    for (std::size_t i = 0; i < t.columns.size(); ++i) width[i] = t.columns[i].size();
    for (const auto& r : t.rows) {
      for (std::size_t i = 0; i < r.size() && i < width.size(); ++i) width[i] = std::max(width[i], r[i].size());
    }
    auto line = [&](const std::vector<std::string>& cells) {
      std::string l;
      for (std::size_t i = 0; i < width.size(); ++i) {
        const std::string c = i < cells.size() ? cells[i] : "";
        const std::string pad(width[i] - std::min(width[i], c.size()), ' ');
        if (i) l += "  ";
        l += i == 0 ? c + pad : pad + c;
      }
      while (!l.empty() && l.back() == ' ') l.pop_back();
      out += l + '\n';
    };
    if (!t.title.empty()) out += t.title + '\n';
    line(t.columns);
    std::size_t total = 0;
    for (auto w : width) total += w;
    out += std::string(total + 2 * (width.empty() ? 0 : width.size() - 1), '-') + '\n';
    for (const auto& r : t.rows) line(r);
  }
  return out;
}

ordered_json to_json(const PrfScore& s) {
  return ordered_json{{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1},
                      {"tp", s.tp},               {"fp", s.fp},         {"fn", s.fn}};
}

ordered_json to_json(const EvalReport& r) {
  ordered_json per_type = ordered_json::object();
  for (std::size_t i = 0; i < r.types.size(); ++i) per_type[r.types[i]] = to_json(r.per_type[i]);
  return ordered_json{{"per_type", std::move(per_type)},
                      {"macro", {{"precision", r.macro_precision}, {"recall", r.macro_recall}, {"f1", r.macro_f1}}},
                      {"micro", to_json(r.micro)}};
}

ordered_json to_json(const AgreementResult& r) {
  ordered_json per_class = ordered_json::object();
  for (const auto& [c, s] : r.per_class) per_class[c] = to_json(s);
  return ordered_json{{"kappa", r.kappa},
                      {"observed", r.observed},
                      {"expected", r.expected},
                      {"items", r.items},
                      {"per_class", std::move(per_class)}};
}

ordered_json to_json(const AgreementReport& r) {
  return ordered_json{{"sentences", to_json(r.sentences)},
                      {"shared_experiment_sentences", r.shared_experiment_sentences},
                      {"mentions", to_json(r.mentions)},
                      {"slots", to_json(r.slots)}};
}

ordered_json to_json(const CorpusStats& s) {
  ordered_json mentions = ordered_json::object(), slots = ordered_json::object(), hist = ordered_json::object();
  for (const auto& [t, n] : s.mentions) mentions[t] = n;
  for (const auto& [t, n] : s.slots) slots[t] = n;
  for (const auto& [k, n] : s.experiments_per_sentence) hist[std::to_string(k)] = n;
  auto links = [](const LinkCounts& c) {
    return ordered_json{{"total", c.total}, {"cross_sentence", c.cross_sentence}};
  };
  return ordered_json{{"documents", s.documents},
                      {"sentences", s.sentences},
                      {"tokens", s.tokens},
                      {"tokens_per_sentence", s.tokens_per_sentence},
                      {"experiment_sentences", s.experiment_sentences},
                      {"experiment_fraction", s.experiment_fraction},
                      {"sentences_with_mentions", s.sentences_with_mentions},
                      {"mentions", std::move(mentions)},
                      {"slots", std::move(slots)},
                      {"experiments_per_sentence", std::move(hist)},
                      {"links", {{"SAME_EXP", links(s.same_exp)}, {"VARIATION", links(s.variation)}}},
                      {"tokens_missing_pos", s.tokens_missing_pos},
                      {"tokens_missing_lemma", s.tokens_missing_lemma}};
}

ordered_json to_json(const ReportSummary& s) {
  ordered_json per_type = ordered_json::object();
  for (std::size_t i = 0; i < s.types.size(); ++i) {
    per_type[s.types[i]] = ordered_json{{"precision", mean_std_json(s.precision[i])},
                                        {"recall", mean_std_json(s.recall[i])},
                                        {"f1", mean_std_json(s.f1[i])}};
  }
  return ordered_json{{"per_type", std::move(per_type)},
                      {"macro",
                       {{"precision", mean_std_json(s.macro_precision)},
                        {"recall", mean_std_json(s.macro_recall)},
                        {"f1", mean_std_json(s.macro_f1)}}}};
}

ordered_json to_json(const CrossvalResult& r) {
  ordered_json folds = ordered_json::array();
  for (std::size_t f = 0; f < r.dev.size(); ++f) {
    ordered_json fold{{"fold", f}, {"dev_documents", r.dev_documents[f]}, {"dev", to_json(r.dev[f])}};
    if (f < r.test.size()) fold["test"] = to_json(r.test[f]);
    folds.push_back(std::move(fold));
  }
  ordered_json out{{"task", std::string(to_string(r.task))},
                   {"k", r.k},
                   {"seed", r.seed},
                   {"folds", std::move(folds)},
                   {"dev", to_json(r.dev_summary)}};
  out["test"] = r.test_summary ? to_json(*r.test_summary) : ordered_json(nullptr);
  return out;
}

std::vector<Table> to_tables(const EvalReport& r, std::string_view title) {
  Table t{std::string(title), {"type", "P", "R", "F1", "tp", "fp", "fn"}, {}};
  for (std::size_t i = 0; i < r.types.size(); ++i) t.rows.push_back(prf_row(r.types[i], r.per_type[i]));
  if (r.types.size() > 1) {
    t.rows.push_back({"macro", percent(r.macro_precision), percent(r.macro_recall), percent(r.macro_f1), "", "", ""});
    auto micro = prf_row("micro", r.micro);
    t.rows.push_back(std::move(micro));
  }
  return {std::move(t)};
}

std::vector<Table> to_tables(const AgreementReport& r) {
  Table kappa{"sentence agreement", {"measure", "value"}, {}};
  kappa.rows.push_back({"items", std::to_string(r.sentences.items)});
  kappa.rows.push_back({"observed agreement (%)", percent(r.sentences.observed)});
  kappa.rows.push_back({"expected agreement (%)", percent(r.sentences.expected)});
  kappa.rows.push_back({"kappa", ratio2(r.sentences.kappa)});
  Table classes{"sentence classes (first annotation as gold)", {"class", "P", "R", "F1", "tp", "fp", "fn"}, {}};
  for (const auto& [c, s] : r.sentences.per_class) classes.rows.push_back(prf_row(c, s));
  std::vector<Table> out{std::move(kappa), std::move(classes)};
  const std::string suffix = " (" + std::to_string(r.shared_experiment_sentences) + " shared experiment sentences)";
  for (auto& t : to_tables(r.mentions, "mentions" + suffix)) out.push_back(std::move(t));
  for (auto& t : to_tables(r.slots, "slots" + suffix)) out.push_back(std::move(t));
  return out;
}

std::vector<Table> to_tables(const CorpusStats& s) {
  Table overview{"corpus", {"measure", "value"}, {}};
  overview.rows.push_back({"documents", std::to_string(s.documents)});
  overview.rows.push_back({"sentences", std::to_string(s.sentences)});
  overview.rows.push_back({"tokens per sentence", fixed(s.tokens_per_sentence, 1)});
  overview.rows.push_back({"experiment sentences", std::to_string(s.experiment_sentences)});
  overview.rows.push_back({"experiment sentences (%)", percent(s.experiment_fraction)});
  overview.rows.push_back({"sentences with mentions", std::to_string(s.sentences_with_mentions)});
  overview.rows.push_back({"tokens with fallback POS", std::to_string(s.tokens_missing_pos)});
  overview.rows.push_back({"tokens with fallback lemma", std::to_string(s.tokens_missing_lemma)});

  Table mentions{"mentions", {"type", "count"}, {}};
  for (const auto& [t, n] : s.mentions) mentions.rows.push_back({t, std::to_string(n)});
  Table slots{"slots", {"type", "count"}, {}};
  for (const auto& [t, n] : s.slots) slots.rows.push_back({t, std::to_string(n)});
  Table hist{"experiment mentions per sentence", {"mentions", "sentences"}, {}};
  for (const auto& [k, n] : s.experiments_per_sentence) hist.rows.push_back({std::to_string(k), std::to_string(n)});
  Table links{"experiment links", {"kind", "total", "cross-sentence", "within-sentence"}, {}};
  for (const auto& [name, c] : {std::pair{"SAME_EXP", s.same_exp}, std::pair{"VARIATION", s.variation}}) {
    links.rows.push_back(
        {name, std::to_string(c.total), std::to_string(c.cross_sentence), std::to_string(c.total - c.cross_sentence)});
  }
  return {std::move(overview), std::move(mentions), std::move(slots), std::move(hist), std::move(links)};
}

std::vector<Table> to_tables(const CrossvalResult& r) {
  const std::string name = std::string(to_string(r.task));
  Table folds{name + ": folds", {"fold", "dev docs", "dev macro F1", "test macro F1"}, {}};
  for (std::size_t f = 0; f < r.dev.size(); ++f) {
    folds.rows.push_back({std::to_string(f), std::to_string(r.dev_documents[f].size()), percent(r.dev[f].macro_f1),
                          f < r.test.size() ? percent(r.test[f].macro_f1) : "-"});
  }
  std::vector<Table> out{std::move(folds), summary_table(r.dev_summary, name + ": dev (mean +/- std over folds)", true)};
  if (r.test_summary) out.push_back(summary_table(*r.test_summary, name + ": test (average over fold models)", false));
  return out;
}

}  // namespace expframe
