#include "expframe/convert.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "expframe/text.hpp"

namespace expframe {

namespace fs = std::filesystem;

namespace {

struct Rows {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

bool looks_numeric(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t b = 0;
  while (b < s.size() && s[b] == ' ') ++b;
  return s.substr(b);
}

Rows read_rows(const fs::path& path, bool numeric_first_column) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot read " + path.string());
  Rows out;
  std::string line;
  char delim = 0;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!delim) delim = detect_delimiter(line);
    auto cells = split_delimited(line, delim);
    for (auto& c : cells) c = trim(c);
    if (first) {
      first = false;
      if (!numeric_first_column || !looks_numeric(cells.front())) {
        out.header = std::move(cells);
        continue;
      }
    }
    out.rows.push_back(std::move(cells));
  }
  return out;
}

std::size_t to_size(const std::string& s, const fs::path& file) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size() || v < 0) throw std::invalid_argument(s);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw CorpusError(file.string() + ": expected a non-negative integer, got '" + s + "'");
  }
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path find_annotation(const fs::path& root, const std::string& layer, const std::string& name) {
  for (const char* ext : {".csv", ".tsv", ".txt"}) {
    fs::path p = root / "annotations" / layer / (name + ext);
    if (fs::exists(p)) return p;
  }
  return {};
}

std::string find_column(const Rows& meta, std::initializer_list<std::string_view> names, std::size_t fallback,
                        const std::vector<std::string>& row) {
  for (std::size_t i = 0; i < meta.header.size(); ++i) {
    std::string h = ascii_lower(meta.header[i]);
    for (auto n : names) {
      if (h == n && i < row.size()) return row[i];
    }
  }
  return fallback < row.size() ? row[fallback] : std::string();
}

struct RawSentence {
  std::size_t begin = 0, end = 0;
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> tokens;  // token id -> offsets
  std::map<std::size_t, std::pair<std::string, std::string>> labels;  // token id -> (entity, slot)
};

Document convert_document(const fs::path& root, const std::string& name, ConvertStats& stats,
                          const CorpusSchema& schema) {
  const std::string text = read_text(root / "texts" / (name + ".txt"));
  std::map<std::size_t, RawSentence> raw;

  const fs::path sent_path = find_annotation(root, "sentences", name);
  if (sent_path.empty()) throw CorpusError("no sentence annotations for '" + name + "'");
  for (const auto& r : read_rows(sent_path, true).rows) {
    if (r.size() < 4) throw CorpusError(sent_path.string() + ": expected 4 columns");
    auto& s = raw[to_size(r[0], sent_path)];
    s.begin = to_size(r[2], sent_path);
    s.end = to_size(r[3], sent_path);
  }
  const fs::path tok_path = find_annotation(root, "tokens", name);
  if (tok_path.empty()) throw CorpusError("no token annotations for '" + name + "'");
  for (const auto& r : read_rows(tok_path, true).rows) {
    if (r.size() < 4) throw CorpusError(tok_path.string() + ": expected 4 columns");
    auto it = raw.find(to_size(r[0], tok_path));
    if (it == raw.end()) throw CorpusError(tok_path.string() + ": token of unknown sentence " + r[0]);
    it->second.tokens[to_size(r[1], tok_path)] = {to_size(r[2], tok_path), to_size(r[3], tok_path)};
  }
  const fs::path lab_path = find_annotation(root, "entity_types_and_slots", name);
  if (!lab_path.empty()) {
    for (const auto& r : read_rows(lab_path, true).rows) {
      if (r.size() < 4) throw CorpusError(lab_path.string() + ": expected 4 columns");
      auto it = raw.find(to_size(r[0], lab_path));
      if (it == raw.end()) throw CorpusError(lab_path.string() + ": label of unknown sentence " + r[0]);
      it->second.labels[to_size(r[1], lab_path)] = {r[2], r[3]};
    }
  }

  Document doc;
  doc.doc_id = name;
  // (sentence id, token id) -> (sentence index, token index), for links.
  std::map<std::pair<std::size_t, std::size_t>, std::pair<std::size_t, std::size_t>> where;
  for (auto& [sid, rs] : raw) {
    Sentence s;
    s.doc_id = name;
    s.index = doc.sentences.size();
    s.text = utf8_substr(text, rs.begin, rs.end);
    LabelSequence entity, slot;
    for (const auto& [tid, off] : rs.tokens) {
      if (off.first < rs.begin || off.second > rs.end || off.first >= off.second) {
        throw CorpusError(tok_path.string() + ": token " + std::to_string(tid) + " lies outside sentence " +
                          std::to_string(sid));
      }
      where[{sid, tid}] = {s.index, s.tokens.size()};
      Token t;
      t.begin = off.first - rs.begin;
      t.end = off.second - rs.begin;
      t.surface = utf8_substr(s.text, t.begin, t.end);
      s.tokens.push_back(std::move(t));
      auto lab = rs.labels.find(tid);
      entity.push_back(lab == rs.labels.end() ? "O" : lab->second.first);
      slot.push_back(lab == rs.labels.end() ? "O" : lab->second.second);
    }
    std::size_t n = 0;
    for (const auto& sp : bio_to_spans(entity)) {
      if (!schema.has_mention_type(sp.type)) {
        stats.warnings.push_back(name + ": unknown mention type '" + sp.type + "' dropped");
        continue;
      }
      s.mentions.push_back(EntityMention{"s" + std::to_string(s.index) + "m" + std::to_string(n++), sp.type,
                                         sp.begin, sp.end, std::nullopt});
    }
    const EntityMention* anchor = nullptr;
    for (const auto& m : s.mentions) {
      if (m.type == schema.experiment_type) {
        anchor = &m;
        break;
      }
    }
    for (const auto& sp : bio_to_spans(slot)) {
      if (sp.type == schema.evoking_slot_type) continue;  // derived from EXPERIMENT mentions
      const EntityMention* filler = nullptr;
      for (const auto& m : s.mentions) {
        if (m.begin == sp.begin && m.end == sp.end) filler = &m;
      }
      if (!anchor || !filler || filler == anchor || !schema.has_slot_type(sp.type)) {
        ++stats.dropped_slots;
        continue;
      }
      s.slots.push_back(SlotLink{anchor->id, filler->id, sp.type});
    }
    doc.sentences.push_back(std::move(s));
  }

  const fs::path link_path = find_annotation(root, "links", name);
  if (!link_path.empty()) {
    auto mention_at = [&](std::size_t sid, std::size_t tid) -> const EntityMention* {
      auto it = where.find({sid, tid});
      if (it == where.end()) return nullptr;
      for (const auto& m : doc.sentences[it->second.first].mentions) {
        if (m.type == schema.experiment_type && m.begin <= it->second.second && it->second.second < m.end) return &m;
      }
      return nullptr;
    };
    Rows link_rows = read_rows(link_path, false);
    // Link files may lack a header: a first row starting with a link kind is data.
    if (!link_rows.header.empty() && parse_link_kind(link_rows.header[0])) {
      link_rows.rows.insert(link_rows.rows.begin(), std::move(link_rows.header));
    }
    for (const auto& r : link_rows.rows) {
      auto kind = r.empty() ? std::nullopt : parse_link_kind(r[0]);
      if (!kind || r.size() < 5) {
        ++stats.dropped_links;
        continue;
      }
      const auto* from = mention_at(to_size(r[1], link_path), to_size(r[2], link_path));
      const auto* to = mention_at(to_size(r[3], link_path), to_size(r[4], link_path));
      if (!from || !to || from == to) {
        ++stats.dropped_links;
        continue;
      }
      doc.sentences[where[{to_size(r[1], link_path), to_size(r[2], link_path)}].first].links.push_back(
          ExperimentLink{from->id, to->id, *kind});
    }
  }
  return doc;
}

}  // namespace

char detect_delimiter(std::string_view header) { return header.find('\t') != std::string_view::npos ? '\t' : ','; }

std::vector<std::string> split_delimited(std::string_view line, char delimiter) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"' && out.back().empty()) {
      quoted = true;
    } else if (c == delimiter) {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  return out;
}

Corpus convert_release(const fs::path& root, std::string_view split, ConvertStats* stats_out,
                       const CorpusSchema& schema) {
  ConvertStats stats;
  const fs::path meta_path = root / "SOFC-Exp-Metadata.csv";
  const Rows meta = read_rows(meta_path, false);
  if (meta.header.empty()) throw CorpusError(meta_path.string() + ": missing header row");
  Corpus corpus;
  for (const auto& row : meta.rows) {
    const std::string name = find_column(meta, {"name", "doc_id", "document"}, 0, row);
    const std::string set = ascii_lower(find_column(meta, {"set", "split"}, 1, row));
    if (name.empty()) continue;
    if (!split.empty() && set != split) continue;
    Document doc = convert_document(root, name, stats, schema);
    // Round-trip through the validating parser so converted data obeys every corpus rule.
    doc = document_from_json(nlohmann::json::parse(serialize_document(doc)), schema);
    stats.sentences += doc.sentences.size();
    ++stats.documents;
    corpus.documents.push_back(std::move(doc));
  }
  if (stats_out) *stats_out = std::move(stats);
  return corpus;
}

Document text_to_document(std::string doc_id, std::istream& lines) {
  Document doc;
  doc.doc_id = std::move(doc_id);
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    Sentence s;
    s.doc_id = doc.doc_id;
    s.index = doc.sentences.size();
    s.text = line;
    for (auto& t : regex_tokenize(line)) s.tokens.push_back(Token{std::move(t.surface), std::nullopt, std::nullopt, t.begin, t.end});
    doc.sentences.push_back(std::move(s));
  }
  return doc;
}

}  // namespace expframe
