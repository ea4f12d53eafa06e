#include "expframe/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <tuple>
#include <unordered_map>

namespace expframe {

PrfScore prf(std::size_t tp, std::size_t fp, std::size_t fn) {
  PrfScore s;
  s.tp = tp;
  s.fp = fp;
  s.fn = fn;
  if (tp + fp > 0) s.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) s.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (s.precision + s.recall > 0) s.f1 = 2 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

const PrfScore& EvalReport::at(std::string_view type) const {
  for (std::size_t i = 0; i < types.size(); ++i) {
    if (types[i] == type) return per_type[i];
  }
  throw EvaluationError("no score for type '" + std::string(type) + "'");
}

EvalReport make_report(std::vector<std::string> types, std::vector<PrfScore> per_type) {
  EvalReport r;
  r.types = std::move(types);
  r.per_type = std::move(per_type);
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& s : r.per_type) {
    tp += s.tp;
    fp += s.fp;
    fn += s.fn;
    r.macro_precision += s.precision;
    r.macro_recall += s.recall;
    r.macro_f1 += s.f1;
  }
  r.micro = prf(tp, fp, fn);
  if (!r.per_type.empty()) {
    const double n = static_cast<double>(r.per_type.size());
    r.macro_precision /= n;
    r.macro_recall /= n;
    r.macro_f1 /= n;
  }
  return r;
}

EvalReport span_prf(std::span<const std::vector<Span>> gold, std::span<const std::vector<Span>> predicted,
                    const std::vector<std::string>& types) {
  if (gold.size() != predicted.size()) throw EvaluationError("gold and predicted sentence counts differ");
  std::unordered_map<std::string_view, std::size_t> slot;
  for (std::size_t i = 0; i < types.size(); ++i) slot.emplace(types[i], i);
  std::vector<std::size_t> tp(types.size()), fp(types.size()), fn(types.size());

  for (std::size_t s = 0; s < gold.size(); ++s) {
    std::set<std::tuple<std::size_t, std::size_t, std::string_view>> g;
    for (const auto& sp : gold[s]) {
      if (slot.count(sp.type)) g.emplace(sp.begin, sp.end, sp.type);
    }
    std::set<std::tuple<std::size_t, std::size_t, std::string_view>> p;
    for (const auto& sp : predicted[s]) {
      if (slot.count(sp.type)) p.emplace(sp.begin, sp.end, sp.type);
    }
    for (const auto& key : p) (g.count(key) ? tp : fp)[slot.at(std::get<2>(key))]++;
    for (const auto& key : g) {
      if (!p.count(key)) fn[slot.at(std::get<2>(key))]++;
    }
  }
  std::vector<PrfScore> scores;
  for (std::size_t i = 0; i < types.size(); ++i) scores.push_back(prf(tp[i], fp[i], fn[i]));
  return make_report(types, std::move(scores));
}

AgreementResult cohens_kappa(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.size() != b.size()) throw EvaluationError("label sequences differ in length");
  if (a.empty()) throw EvaluationError("kappa needs at least one item");
  std::map<std::string, std::size_t> count_a, count_b, both;
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    count_a[a[i]]++;
    count_b[b[i]]++;
    if (a[i] == b[i]) {
      ++same;
      both[a[i]]++;
    }
  }
  AgreementResult r;
  r.items = a.size();
  const double n = static_cast<double>(a.size());
  r.observed = static_cast<double>(same) / n;
  std::set<std::string> classes;
  for (const auto& [c, _] : count_a) classes.insert(c);
  for (const auto& [c, _] : count_b) classes.insert(c);
  for (const auto& c : classes) {
    const std::size_t ca = count_a[c], cb = count_b[c], tp = both[c];
    r.expected += (static_cast<double>(ca) / n) * (static_cast<double>(cb) / n);
    r.per_class[c] = prf(tp, cb - tp, ca - tp);
  }
  if (r.expected >= 1.0) {
    r.kappa = 1.0;  // both constant and identical; p_o is 1 here as well
  } else {
    r.kappa = (r.observed - r.expected) / (1.0 - r.expected);
  }
  return r;
}

AgreementReport agreement_report(const Corpus& a, const Corpus& b, const CorpusSchema& schema) {
  std::map<std::string_view, const Document*> docs_b;
  for (const auto& d : b.documents) docs_b.emplace(d.doc_id, &d);
  if (docs_b.size() != a.documents.size()) throw EvaluationError("the two annotations cover different documents");

  std::vector<std::string> labels_a, labels_b;
  std::vector<std::vector<Span>> mentions_a, mentions_b, slots_a, slots_b;
  AgreementReport report;
  for (const auto& da : a.documents) {
    auto it = docs_b.find(da.doc_id);
    if (it == docs_b.end()) throw EvaluationError("document '" + da.doc_id + "' is missing from the second annotation");
    const Document& db = *it->second;
    if (da.sentences.size() != db.sentences.size()) {
      throw EvaluationError("document '" + da.doc_id + "' has different sentence counts");
    }
    for (std::size_t s = 0; s < da.sentences.size(); ++s) {
      const Sentence& sa = da.sentences[s];
      const Sentence& sb = db.sentences[s];
      if (sa.size() != sb.size()) {
        throw EvaluationError("document '" + da.doc_id + "' sentence " + std::to_string(s) + " has different tokens");
      }
      labels_a.emplace_back(sa.is_experiment ? kExperimentClass : kOtherClass);
      labels_b.emplace_back(sb.is_experiment ? kExperimentClass : kOtherClass);
      if (sa.is_experiment && sb.is_experiment) {
        ++report.shared_experiment_sentences;
        mentions_a.push_back(layer_spans(sa, Layer::mentions, schema));
        mentions_b.push_back(layer_spans(sb, Layer::mentions, schema));
        slots_a.push_back(layer_spans(sa, Layer::slots, schema));
        slots_b.push_back(layer_spans(sb, Layer::slots, schema));
      }
    }
  }
  if (labels_a.empty()) throw EvaluationError("no sentences to compare");
  report.sentences = cohens_kappa(labels_a, labels_b);
  report.mentions = span_prf(mentions_a, mentions_b, schema.mention_types);
  report.slots = span_prf(slots_a, slots_b, schema.evaluated_slot_types());
  return report;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd r;
  if (values.empty()) return r;
  // Identical scores (e.g. identical folds) report exactly zero spread.
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; })) {
    r.mean = values[0];
    return r;
  }
  const double n = static_cast<double>(values.size());
  for (double v : values) r.mean += v;
  r.mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - r.mean) * (v - r.mean);
  r.std = std::sqrt(ss / n);
  return r;
}

CorpusStats corpus_stats(const Corpus& corpus, const CorpusSchema& schema) {
  CorpusStats st;
  std::map<std::string, std::size_t, std::less<>> mention_counts, slot_counts;
  st.documents = corpus.documents.size();
  for (const auto& doc : corpus.documents) {
    std::unordered_map<std::string_view, std::size_t> sentence_of;
    for (const auto& s : doc.sentences) {
      for (const auto& m : s.mentions) sentence_of.emplace(m.id, s.index);
    }
    for (const auto& s : doc.sentences) {
      ++st.sentences;
      st.tokens += s.size();
      for (const auto& t : s.tokens) {
        if (!t.pos) ++st.tokens_missing_pos;
        if (!t.lemma) ++st.tokens_missing_lemma;
      }
      if (s.is_experiment) ++st.experiment_sentences;
      if (!s.mentions.empty()) ++st.sentences_with_mentions;
      std::size_t experiments = 0;
      for (const auto& m : s.mentions) {
        mention_counts[m.type]++;
        if (m.type == schema.experiment_type) ++experiments;
      }
      if (experiments > 0) st.experiments_per_sentence[experiments]++;
      for (const auto& l : s.slots) slot_counts[l.type]++;
      for (const auto& l : s.links) {
        LinkCounts& c = l.kind == LinkKind::same_exp ? st.same_exp : st.variation;
        ++c.total;
        auto from = sentence_of.find(l.from), to = sentence_of.find(l.to);
        if (from != sentence_of.end() && to != sentence_of.end() && from->second != to->second) ++c.cross_sentence;
      }
    }
  }
  if (st.sentences > 0) {
    st.tokens_per_sentence = static_cast<double>(st.tokens) / static_cast<double>(st.sentences);
    st.experiment_fraction = static_cast<double>(st.experiment_sentences) / static_cast<double>(st.sentences);
  }
  for (const auto& t : schema.mention_types) {
    auto it = mention_counts.find(t);
    st.mentions.emplace_back(t, it == mention_counts.end() ? 0 : it->second);
  }
  for (const auto& t : schema.slot_types) {
    auto it = slot_counts.find(t);
    st.slots.emplace_back(t, it == slot_counts.end() ? 0 : it->second);
  }
  return st;
}

}  // namespace expframe
