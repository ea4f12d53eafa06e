#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "expframe/bio.hpp"
#include "expframe/corpus.hpp"
#include "expframe/crf.hpp"
#include "expframe/dataset.hpp"
#include "expframe/evaluation.hpp"
#include "expframe/features.hpp"
#include "expframe/report.hpp"
#include "expframe/tasks.hpp"

namespace py = pybind11;
using namespace expframe;

namespace {

using SpanTuple = std::tuple<std::size_t, std::size_t, std::string>;

py::object to_py(const nlohmann::ordered_json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

std::vector<Span> to_spans(const std::vector<SpanTuple>& in) {
  std::vector<Span> out;
  for (const auto& [b, e, t] : in) out.push_back(Span{b, e, t});
  return out;
}

std::vector<SpanTuple> from_spans(const std::vector<Span>& in) {
  std::vector<SpanTuple> out;
  for (const auto& s : in) out.emplace_back(s.begin, s.end, s.type);
  return out;
}

TaskConfig make_config(const py::kwargs& kw) {
  TaskConfig c;
  for (auto item : kw) {
    const auto key = item.first.cast<std::string>();
    const auto value = item.second;
    if (key == "loss") {
      auto loss = parse_loss_kind(value.cast<std::string>());
      if (!loss) throw py::value_error("unknown loss");
      c.loss = *loss;
    } else if (key == "lam" || key == "lambda_") {
      c.linear.lambda = c.tagger.train.lambda = value.cast<double>();
    } else if (key == "keep_rate") {
      c.keep_rate = value.cast<double>();
    } else if (key == "max_epochs") {
      c.linear.max_epochs = c.tagger.train.max_epochs = value.cast<int>();
    } else if (key == "window") {
      c.tagger.features.window = value.cast<int>();
    } else if (key == "ngram") {
      c.n_max = value.cast<int>();
    } else if (key == "bio_mask") {
      c.tagger.bio_mask = value.cast<bool>();
    } else if (key == "standardize") {
      c.tagger.standardize = value.cast<bool>();
    } else if (key == "threads") {
      c.tagger.train.threads = value.cast<int>();
    } else {
      throw py::type_error("unexpected keyword '" + key + "'");
    }
  }
  return c;
}

Task task_of(const std::string& name) {
  auto t = parse_task(name);
  if (!t) throw py::value_error("task must be sentence, entity or slot");
  return *t;
}

/// Builds a dense model from explicit score tables: unary[i][k], transitions[a][b], start[k], end[k].
std::pair<CrfModel, Lattice> make_crf(const std::vector<std::vector<double>>& unary,
                                      const std::vector<std::vector<double>>& transitions,
                                      const std::vector<double>& start, const std::vector<double>& end,
                                      const std::vector<std::string>& labels) {
  if (unary.empty()) throw py::value_error("need at least one position");
  const std::size_t k = unary.front().size();
  std::vector<std::string> names = labels;
  if (names.empty()) {
    for (std::size_t i = 0; i < k; ++i) names.push_back("L" + std::to_string(i));
  }
  if (names.size() != k || transitions.size() != k || start.size() != k || end.size() != k) {
    throw py::value_error("inconsistent label dimensions");
  }
  CrfModel model(names, std::size_t{0});
  for (std::size_t a = 0; a < k; ++a) {
    if (transitions[a].size() != k) throw py::value_error("transitions must be K x K");
    for (std::size_t b = 0; b < k; ++b) model.transition(a, b) = transitions[a][b];
    model.start(a) = start[a];
    model.end(a) = end[a];
  }
  Lattice lat(unary.size(), k);
  for (std::size_t i = 0; i < unary.size(); ++i) {
    if (unary[i].size() != k) throw py::value_error("ragged unary scores");
    for (std::size_t l = 0; l < k; ++l) lat(i, l) = unary[i][l];
  }
  return {std::move(model), std::move(lat)};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Corpus model, classifiers, CRF tagger and evaluation for experiment information extraction";

  py::register_exception<CorpusError>(m, "CorpusError", PyExc_ValueError);
  py::register_exception<BioError>(m, "BioError", PyExc_ValueError);
  py::register_exception<EmbeddingError>(m, "EmbeddingError", PyExc_ValueError);

  m.def("bio_encode", [](const std::vector<SpanTuple>& spans, std::size_t length) {
    return encode_bio(to_spans(spans), length);
  }, py::arg("spans"), py::arg("length"));
  m.def("bio_decode", [](const std::vector<std::string>& labels) { return from_spans(bio_to_spans(labels)); },
        py::arg("labels"));
  m.def("is_valid_bio", [](const std::vector<std::string>& labels) { return is_valid_bio(labels); });

  m.def("prf", [](std::size_t tp, std::size_t fp, std::size_t fn) { return to_py(to_json(prf(tp, fp, fn))); },
        py::arg("tp"), py::arg("fp"), py::arg("fn"));
  m.def("cohens_kappa", [](const std::vector<std::string>& a, const std::vector<std::string>& b) {
    return to_py(to_json(cohens_kappa(a, b)));
  });
  m.def("span_prf", [](const std::vector<std::vector<SpanTuple>>& gold, const std::vector<std::vector<SpanTuple>>& pred,
                       const std::vector<std::string>& types) {
    std::vector<std::vector<Span>> g, p;
    for (const auto& s : gold) g.push_back(to_spans(s));
    for (const auto& s : pred) p.push_back(to_spans(s));
    return to_py(to_json(span_prf(g, p, types)));
  });

  m.def("crf_viterbi", [](const std::vector<std::vector<double>>& unary, const std::vector<std::vector<double>>& transitions,
                          const std::vector<double>& start, const std::vector<double>& end,
                          const std::vector<std::string>& labels, bool bio_mask) {
    auto [model, lat] = make_crf(unary, transitions, start, end, labels);
    ViterbiResult r;
    if (bio_mask) {
      const auto mask = TransitionMask::bio(model.labels());
      r = viterbi(model, lat, &mask);
    } else {
      r = viterbi(model, lat);
    }
    return py::make_tuple(r.labels, r.score);
  }, py::arg("unary"), py::arg("transitions"), py::arg("start"), py::arg("end"),
     py::arg("labels") = std::vector<std::string>{}, py::arg("bio_mask") = false);
  m.def("crf_log_partition", [](const std::vector<std::vector<double>>& unary,
                                const std::vector<std::vector<double>>& transitions, const std::vector<double>& start,
                                const std::vector<double>& end) {
    auto [model, lat] = make_crf(unary, transitions, start, end, {});
    return forward_backward(model, lat).log_z;
  });

  py::class_<EmbeddingTable>(m, "EmbeddingTable")
      .def_property_readonly("source", &EmbeddingTable::source)
      .def_property_readonly("dim", &EmbeddingTable::dim)
      .def("__len__", &EmbeddingTable::size)
      .def("lookup", [](const EmbeddingTable& t, const std::string& token) -> std::optional<std::vector<double>> {
        auto v = t.lookup(token);
        if (!v) return std::nullopt;
        return std::vector<double>(v->begin(), v->end());
      });
  m.def("load_embeddings", &load_embedding_file, py::arg("path"), py::arg("tag") = "");
  m.def("parse_embeddings", [](const std::string& text, const std::string& tag) {
    std::istringstream in(text);
    return load_embedding_table(in, tag);
  }, py::arg("text"), py::arg("tag"));

  py::class_<Corpus>(m, "Corpus")
      .def_static("load", [](const std::string& path) { return load_corpus(path); })
      .def_static("parse", [](const std::string& text) {
        std::istringstream in(text);
        return parse_corpus(in);
      })
      .def("to_jsonl", [](const Corpus& c) {
        std::ostringstream out;
        serialize_corpus(c, out);
        return out.str();
      })
      .def("__len__", [](const Corpus& c) { return c.documents.size(); })
      .def_property_readonly("doc_ids", [](const Corpus& c) {
        std::vector<std::string> ids;
        for (const auto& d : c.documents) ids.push_back(d.doc_id);
        return ids;
      })
      .def_property_readonly("sentence_count", &Corpus::sentence_count)
      .def("stats", [](const Corpus& c) { return to_py(to_json(corpus_stats(c))); })
      .def("subset", [](const Corpus& c, const std::vector<std::size_t>& docs) { return subset(c, docs); })
      .def("split_kfold", [](const Corpus& c, std::size_t k, std::uint64_t seed) {
        std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> out;
        for (const auto& f : split_kfold(c, k, seed)) out.emplace_back(f.train_documents, f.dev_documents);
        return out;
      }, py::arg("k"), py::arg("seed"))
      .def("spans", [](const Corpus& c, const std::string& layer) {
        const Layer l = layer == "slots" ? Layer::slots : Layer::mentions;
        std::vector<std::vector<SpanTuple>> out;
        for (const auto& d : c.documents) {
          for (const auto& s : d.sentences) out.push_back(from_spans(layer_spans(s, l)));
        }
        return out;
      }, py::arg("layer") = "mentions");

  py::class_<TaskModel>(m, "Model")
      .def_property_readonly("task", [](const TaskModel& tm) { return std::string(to_string(tm.task())); })
      .def("to_json", [](const TaskModel& tm) { return tm.to_json().dump(); })
      .def_static("from_json", [](const std::string& text) { return TaskModel::from_json(nlohmann::json::parse(text)); })
      .def("annotate", [](const TaskModel& tm, const Corpus& c, const std::vector<EmbeddingTable>& tables) {
        Corpus out = c;
        tm.annotate(out, tables);
        return out;
      }, py::arg("corpus"), py::arg("tables") = std::vector<EmbeddingTable>{});

  m.def("train", [](const std::string& task, const Corpus& corpus, std::uint64_t seed,
                    const std::vector<EmbeddingTable>& tables, const py::kwargs& kw) {
    const TaskConfig config = make_config(kw);
    py::gil_scoped_release release;
    return train_task(task_of(task), corpus, tables, config, seed);
  }, py::arg("task"), py::arg("corpus"), py::arg("seed"), py::arg("tables") = std::vector<EmbeddingTable>{});

  m.def("evaluate", [](const std::string& task, const Corpus& corpus) {
    return to_py(to_json(evaluate_task(task_of(task), corpus)));
  });

  m.def("agreement", [](const Corpus& a, const Corpus& b) { return to_py(to_json(agreement_report(a, b))); });

  m.def("crossval", [](const std::string& task, const Corpus& corpus, std::optional<Corpus> test, std::size_t k,
                       std::uint64_t seed, const std::vector<EmbeddingTable>& tables, const py::kwargs& kw) {
    const TaskConfig config = make_config(kw);
    CrossvalResult r;
    {
      py::gil_scoped_release release;
      r = crossval(task_of(task), corpus, test ? &*test : nullptr, k, tables, config, seed);
    }
    return to_py(to_json(r));
  }, py::arg("task"), py::arg("corpus"), py::arg("test") = std::nullopt, py::arg("k") = 5, py::arg("seed"),
     py::arg("tables") = std::vector<EmbeddingTable>{});
}
