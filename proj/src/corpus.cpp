#include "expframe/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "expframe/text.hpp"

namespace expframe {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

bool contains(const std::vector<std::string>& values, std::string_view v) {
  return std::find(values.begin(), values.end(), v) != values.end();
}

std::string id_string(const json& value, const char* what) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  throw CorpusError(std::string(what) + " must be a string or integer id");
}

std::size_t offset(const json& object, const char* key) {
  const auto& v = object.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw CorpusError(std::string("field '") + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::optional<std::string> optional_string(const json& object, const char* key) {
  auto it = object.find(key);
  if (it == object.end() || it->is_null()) return std::nullopt;
  return it->get<std::string>();
}

std::vector<Span> parse_prediction_spans(const json& array) {
  std::vector<Span> spans;
  for (const auto& s : array) {
    spans.push_back(Span{offset(s, "begin_tok"), offset(s, "end_tok"), s.at("type").get<std::string>()});
  }
  return spans;
}

Prediction parse_prediction(const json& p) {
  Prediction out;
  if (auto it = p.find("is_experiment"); it != p.end()) out.is_experiment = it->get<bool>();
  if (auto it = p.find("score"); it != p.end()) out.score = it->get<double>();
  if (auto it = p.find("mentions"); it != p.end()) out.mentions = parse_prediction_spans(*it);
  if (auto it = p.find("slots"); it != p.end()) out.slots = parse_prediction_spans(*it);
  return out;
}

ordered_json spans_json(const std::vector<Span>& spans) {
  ordered_json arr = ordered_json::array();
  for (const auto& s : spans) {
    arr.push_back(ordered_json{{"type", s.type}, {"begin_tok", s.begin}, {"end_tok", s.end}});
  }
  return arr;
}

void validate_document(const Document& doc, const CorpusSchema& schema) {
  struct MentionRef {
    const EntityMention* mention;
    std::size_t sentence;
  };
  std::map<std::string, MentionRef, std::less<>> ids;
  for (std::size_t si = 0; si < doc.sentences.size(); ++si) {
    const auto& sent = doc.sentences[si];
    const std::size_t text_len = utf8_length(sent.text);
    for (std::size_t t = 0; t < sent.tokens.size(); ++t) {
      const auto& tok = sent.tokens[t];
      if (tok.begin >= tok.end || tok.end > text_len) {
        throw CorpusError("sentence " + std::to_string(si) + ": token " + std::to_string(t) +
                          " has invalid character offsets");
      }
      if (t > 0 && tok.begin < sent.tokens[t - 1].end) {
        throw CorpusError("sentence " + std::to_string(si) + ": tokens overlap or are unsorted at token " +
                          std::to_string(t));
      }
    }
    std::vector<bool> covered(sent.tokens.size(), false);
    for (const auto& m : sent.mentions) {
      if (!schema.has_mention_type(m.type)) {
        throw CorpusError("unknown mention type '" + m.type + "'");
      }
      if (m.begin >= m.end || m.end > sent.tokens.size()) {
        throw CorpusError("mention '" + m.id + "' has an invalid token range");
      }
      for (std::size_t i = m.begin; i < m.end; ++i) {
        if (covered[i]) throw CorpusError("overlapping spans: mention '" + m.id + "'");
        covered[i] = true;
      }
      if (!ids.emplace(m.id, MentionRef{&m, si}).second) {
        throw CorpusError("duplicate mention id '" + m.id + "'");
      }
    }
  }

  auto resolve = [&](const std::string& id, const char* role) -> const MentionRef& {
    auto it = ids.find(id);
    if (it == ids.end()) throw CorpusError(std::string(role) + " refers to missing mention id '" + id + "'");
    return it->second;
  };

  for (std::size_t si = 0; si < doc.sentences.size(); ++si) {
    const auto& sent = doc.sentences[si];
    for (const auto& m : sent.mentions) {
      if (m.coref) resolve(*m.coref, "coref");
    }
    for (const auto& slot : sent.slots) {
      if (!schema.has_slot_type(slot.type)) throw CorpusError("unknown slot type '" + slot.type + "'");
      const auto& anchor = resolve(slot.anchor, "slot anchor");
      const auto& filler = resolve(slot.filler, "slot filler");
      if (anchor.mention->type != schema.experiment_type) {
        throw CorpusError("slot anchor '" + slot.anchor + "' is not an " + schema.experiment_type + " mention");
      }
      if (slot.anchor == slot.filler) throw CorpusError("slot filler equals its anchor '" + slot.anchor + "'");
      if (filler.sentence != si) {
        throw CorpusError("slot filler '" + slot.filler + "' is not in the sentence that lists it");
      }
    }
    for (const auto& link : sent.links) {
      for (const auto* end : {&link.from, &link.to}) {
        const auto& ref = resolve(*end, "experiment link");
        if (ref.mention->type != schema.experiment_type) {
          throw CorpusError("experiment link endpoint '" + *end + "' is not an " + schema.experiment_type +
                            " mention");
        }
      }
    }
  }
}

}  // namespace

const CorpusSchema& CorpusSchema::sofc_exp() {
  static const CorpusSchema schema{
      {"EXPERIMENT", "MATERIAL", "VALUE", "DEVICE"},
      "EXPERIMENT",
      {"anode_material", "cathode_material", "conductivity", "current_density", "degradation_rate", "device",
       "electrolyte_material", "fuel_used", "interlayer_material", "open_circuit_voltage", "power_density",
       "resistance", "support_material", "time_of_operation", "voltage", "working_temperature",
       "experiment_evoking_word", "thickness"},
      {"experiment_evoking_word", "thickness"},
      "experiment_evoking_word",
  };
  return schema;
}

bool CorpusSchema::has_mention_type(std::string_view type) const { return contains(mention_types, type); }
bool CorpusSchema::has_slot_type(std::string_view type) const { return contains(slot_types, type); }
bool CorpusSchema::is_auxiliary_slot(std::string_view type) const { return contains(auxiliary_slot_types, type); }

std::vector<std::string> CorpusSchema::evaluated_slot_types() const {
  std::vector<std::string> out;
  for (const auto& t : slot_types) {
    if (!is_auxiliary_slot(t)) out.push_back(t);
  }
  return out;
}

std::string_view to_string(LinkKind kind) { return kind == LinkKind::same_exp ? "SAME_EXP" : "VARIATION"; }

std::optional<LinkKind> parse_link_kind(std::string_view text) {
  if (text == "SAME_EXP") return LinkKind::same_exp;
  if (text == "VARIATION") return LinkKind::variation;
  return std::nullopt;
}

const EntityMention* Sentence::find_mention(std::string_view id) const {
  for (const auto& m : mentions) {
    if (m.id == id) return &m;
  }
  return nullptr;
}

std::size_t Corpus::sentence_count() const {
  std::size_t n = 0;
  for (const auto& d : documents) n += d.sentences.size();
  return n;
}

CorpusError::CorpusError(const std::string& message, std::size_t line)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

Document document_from_json(const json& record, const CorpusSchema& schema) {
  Document doc;
  try {
    if (!record.is_object()) throw CorpusError("record is not a JSON object");
    doc.doc_id = record.at("doc_id").get<std::string>();
    const auto& sentences = record.at("sentences");
    if (!sentences.is_array()) throw CorpusError("'sentences' must be an array");
    for (const auto& js : sentences) {
      Sentence s;
      s.doc_id = doc.doc_id;
      s.index = doc.sentences.size();
      s.text = js.at("text").get<std::string>();
      for (const auto& jt : js.at("tokens")) {
        Token t;
        t.surface = jt.at("surface").get<std::string>();
        t.begin = offset(jt, "begin");
        t.end = offset(jt, "end");
        t.lemma = optional_string(jt, "lemma");
        t.pos = optional_string(jt, "pos");
        s.tokens.push_back(std::move(t));
      }
      if (auto it = js.find("mentions"); it != js.end()) {
        for (const auto& jm : *it) {
          EntityMention m;
          m.id = id_string(jm.at("id"), "mention id");
          m.type = jm.at("type").get<std::string>();
          m.begin = offset(jm, "begin_tok");
          m.end = offset(jm, "end_tok");
          if (auto c = jm.find("coref"); c != jm.end() && !c->is_null()) m.coref = id_string(*c, "coref");
          s.mentions.push_back(std::move(m));
        }
      }
      if (auto it = js.find("slots"); it != js.end()) {
        for (const auto& jl : *it) {
          s.slots.push_back(SlotLink{id_string(jl.at("anchor"), "slot anchor"),
                                     id_string(jl.at("filler"), "slot filler"), jl.at("type").get<std::string>()});
        }
      }
      if (auto it = js.find("links"); it != js.end()) {
        for (const auto& jl : *it) {
          auto kind_text = jl.at("kind").get<std::string>();
          auto kind = parse_link_kind(kind_text);
          if (!kind) throw CorpusError("unknown link kind '" + kind_text + "'");
          s.links.push_back(ExperimentLink{id_string(jl.at("from"), "link from"), id_string(jl.at("to"), "link to"),
                                           *kind});
        }
      }
      if (auto it = js.find("predicted"); it != js.end() && !it->is_null()) {
        s.predicted = parse_prediction(*it);
      }
      s.is_experiment = std::any_of(s.mentions.begin(), s.mentions.end(),
                                    [&](const EntityMention& m) { return m.type == schema.experiment_type; });
      doc.sentences.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw CorpusError(std::string("malformed record: ") + e.what());
  }
  validate_document(doc, schema);
  return doc;
}

Document parse_document(std::string_view line, const CorpusSchema& schema, std::size_t line_number) {
  try {
    auto record = json::parse(line);
    return document_from_json(record, schema);
  } catch (const json::exception& e) {
    throw CorpusError(std::string("malformed record: ") + e.what(), line_number);
  } catch (const CorpusError& e) {
    if (e.line() != 0 || line_number == 0) throw;
    throw CorpusError(e.what(), line_number);
  }
}

Corpus parse_corpus(std::istream& source, const CorpusSchema& schema) {
  Corpus corpus;
  std::string line;
  std::size_t line_number = 0;
  std::set<std::string> seen;
  while (std::getline(source, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto doc = parse_document(line, schema, line_number);
    if (!seen.insert(doc.doc_id).second) {
      throw CorpusError("duplicate doc_id '" + doc.doc_id + "'", line_number);
    }
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

Corpus load_corpus(const std::string& path, const CorpusSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot open corpus file '" + path + "'");
  return parse_corpus(in, schema);
}

ordered_json document_to_json(const Document& doc) {
  ordered_json out;
  out["doc_id"] = doc.doc_id;
  auto& sentences = out["sentences"] = ordered_json::array();
  for (const auto& s : doc.sentences) {
    ordered_json js;
    js["text"] = s.text;
    auto& tokens = js["tokens"] = ordered_json::array();
    for (const auto& t : s.tokens) {
      ordered_json jt{{"surface", t.surface}, {"begin", t.begin}, {"end", t.end}};
      if (t.lemma) jt["lemma"] = *t.lemma;
      if (t.pos) jt["pos"] = *t.pos;
      tokens.push_back(std::move(jt));
    }
    auto& mentions = js["mentions"] = ordered_json::array();
    for (const auto& m : s.mentions) {
      ordered_json jm{{"id", m.id}, {"type", m.type}, {"begin_tok", m.begin}, {"end_tok", m.end}};
      if (m.coref) jm["coref"] = *m.coref;
      mentions.push_back(std::move(jm));
    }
    auto& slots = js["slots"] = ordered_json::array();
    for (const auto& l : s.slots) slots.push_back(ordered_json{{"anchor", l.anchor}, {"filler", l.filler}, {"type", l.type}});
    auto& links = js["links"] = ordered_json::array();
    for (const auto& l : s.links) {
      links.push_back(ordered_json{{"from", l.from}, {"to", l.to}, {"kind", std::string(to_string(l.kind))}});
    }
    if (s.predicted) {
      ordered_json p = ordered_json::object();
      if (s.predicted->is_experiment) p["is_experiment"] = *s.predicted->is_experiment;
      if (s.predicted->score) p["score"] = *s.predicted->score;
      if (s.predicted->mentions) p["mentions"] = spans_json(*s.predicted->mentions);
      if (s.predicted->slots) p["slots"] = spans_json(*s.predicted->slots);
      js["predicted"] = std::move(p);
    }
    sentences.push_back(std::move(js));
  }
  return out;
}

std::string serialize_document(const Document& doc) {
  return document_to_json(doc).dump(-1, ' ', false, json::error_handler_t::strict);
}

void serialize_corpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& doc : corpus.documents) out << serialize_document(doc) << '\n';
}

std::string_view to_string(Layer layer) { return layer == Layer::mentions ? "mentions" : "slots"; }

LabelSchema layer_schema(Layer layer, const CorpusSchema& schema) {
  return layer == Layer::mentions ? schema.mention_schema() : schema.slot_schema();
}

std::vector<Span> layer_spans(const Sentence& sentence, Layer layer, const CorpusSchema& schema) {
  std::vector<Span> spans;
  if (layer == Layer::mentions) {
    for (const auto& m : sentence.mentions) spans.push_back(Span{m.begin, m.end, m.type});
  } else {
    std::set<std::string_view> labeled;
    for (const auto& slot : sentence.slots) {
      if (!labeled.insert(slot.filler).second) continue;
      const auto* m = sentence.find_mention(slot.filler);
      if (m) spans.push_back(Span{m->begin, m->end, slot.type});
    }
    if (!schema.evoking_slot_type.empty() && schema.has_slot_type(schema.evoking_slot_type)) {
      for (const auto& m : sentence.mentions) {
        if (m.type == schema.experiment_type && !labeled.count(m.id)) {
          spans.push_back(Span{m.begin, m.end, schema.evoking_slot_type});
        }
      }
    }
  }
  std::sort(spans.begin(), spans.end());
  return spans;
}

LabelSequence spans_to_bio(const Sentence& sentence, Layer layer, const CorpusSchema& schema) {
  auto spans = layer_spans(sentence, layer, schema);
  return encode_bio(spans, sentence.tokens.size());
}

}  // namespace expframe
