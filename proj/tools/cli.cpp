#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "expframe/convert.hpp"
#include "expframe/dataset.hpp"
#include "expframe/report.hpp"
#include "expframe/tasks.hpp"

namespace expframe::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Buffers output for a path and publishes it with a rename, or writes
/// straight through when the path is "-".
class Output {
 public:
  Output(std::string path, std::ostream& fallback) : path_(std::move(path)), fallback_(fallback) {
    if (path_ != "-") {
      tmp_ = path_ + ".tmp." + std::to_string(::getpid());
      file_.open(tmp_, std::ios::binary | std::ios::trunc);
      if (!file_) throw std::runtime_error("cannot write " + path_);
    }
  }
  ~Output() {
    if (!tmp_.empty() && !committed_) {
      file_.close();
      std::error_code ec;
      fs::remove(tmp_, ec);
    }
  }
  std::ostream& stream() { return path_ == "-" ? fallback_ : file_; }
  void commit() {
    if (path_ == "-") {
      fallback_.flush();
      return;
    }
    file_.close();
    if (!file_) throw std::runtime_error("failed writing " + path_);
    fs::rename(tmp_, path_);
    committed_ = true;
  }

 private:
  std::string path_;
  std::ostream& fallback_;
  std::string tmp_;
  std::ofstream file_;
  bool committed_ = false;
};

void write_all(const std::string& path, const std::string& content, std::ostream& out) {
  Output o(path, out);
  o.stream() << content;
  o.commit();
}

Corpus read_corpus(const std::string& path, std::istream& in) {
  if (path == "-") return parse_corpus(in);
  return load_corpus(path);
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  return nlohmann::json::parse(f);
}

std::vector<EmbeddingTable> load_tables(const std::vector<std::string>& paths, spdlog::logger& log) {
  std::vector<EmbeddingTable> tables;
  for (const auto& p : paths) {
    // "tag=path" names the table explicitly; otherwise the file stem is used.
    std::string tag, file = p;
    if (auto eq = p.find('='); eq != std::string::npos && !fs::exists(p)) {
      tag = p.substr(0, eq);
      file = p.substr(eq + 1);
    }
    tables.push_back(load_embedding_file(file, tag));
    log.info("loaded embedding table '{}' ({} entries, d={})", tables.back().source(), tables.back().size(),
             tables.back().dim());
  }
  return tables;
}

/// Reorders loaded tables to the order a model expects.
std::vector<EmbeddingTable> arrange_tables(std::vector<EmbeddingTable> tables,
                                           const std::vector<std::string>& wanted) {
  std::vector<EmbeddingTable> out;
  for (const auto& source : wanted) {
    auto it = std::find_if(tables.begin(), tables.end(), [&](const auto& t) { return t.source() == source; });
    if (it == tables.end()) throw EmbeddingError("model needs embedding table '" + source + "'; pass it with --embeddings");
    out.push_back(std::move(*it));
    tables.erase(it);
  }
  return out;
}

std::string render_report(const nlohmann::ordered_json& json, const std::vector<Table>& tables, Format format) {
  if (format == Format::json) return json.dump(2) + "\n";
  return render(tables, format);
}

struct Hyper {
  std::string task = "entity";
  std::string loss = "logistic";
  CLI::Option* lambda_opt = nullptr;
  double lambda = 0.0;
  CLI::Option* keep_opt = nullptr;
  double keep_rate = 0.3;
  CLI::Option* epochs_opt = nullptr;
  int max_epochs = 0;
  int window = 1;
  int ngram = 4;
  bool no_bio_mask = false;
  bool no_standardize = false;
  std::vector<std::string> embeddings;

  void add(CLI::App* app) {
    app->add_option("--task", task, "sentence, entity or slot")
        ->required()
        ->check(CLI::IsMember({"sentence", "entity", "slot"}));
    app->add_option("--loss", loss, "sentence classifier loss")->check(CLI::IsMember({"logistic", "hinge", "svm"}));
    lambda_opt = app->add_option("--lambda", lambda, "L2 strength (default 1e-4 linear, 1.0 CRF)");
    keep_opt = app->add_option("--keep-rate", keep_rate, "fraction of non-experiment sentences kept")
                   ->check(CLI::Range(0.0, 1.0));
    epochs_opt = app->add_option("--max-epochs", max_epochs, "optimizer iteration cap")->check(CLI::PositiveNumber);
    app->add_option("--window", window, "CRF context window")->check(CLI::NonNegativeNumber);
    app->add_option("--ngram", ngram, "largest n-gram for sentence features")->check(CLI::PositiveNumber);
    app->add_flag("--no-bio-mask", no_bio_mask, "decode without BIO constraints");
    app->add_flag("--no-standardize", no_standardize, "keep dense features unscaled");
    app->add_option("--embeddings", embeddings, "embedding table file, optionally tag=path (repeatable)");
  }

  TaskConfig config(int threads) const {
    TaskConfig c;
    c.loss = *parse_loss_kind(loss);
    c.n_max = ngram;
    if (*keep_opt) c.keep_rate = keep_rate;
    if (*lambda_opt) {
      c.linear.lambda = lambda;
      c.tagger.train.lambda = lambda;
    }
    if (*epochs_opt) {
      c.linear.max_epochs = max_epochs;
      c.tagger.train.max_epochs = max_epochs;
    }
    c.tagger.features.window = window;
    c.tagger.bio_mask = !no_bio_mask;
    c.tagger.standardize = !no_standardize;
    c.tagger.train.threads = threads;
    return c;
  }
};

spdlog::level::level_enum log_level(spdlog::logger& log) {
  const char* env = std::getenv("EXPFRAME_LOG");
  if (!env || !*env) return spdlog::level::warn;
  const std::string v = env;
  if (v == "error") return spdlog::level::err;
  if (v == "warn") return spdlog::level::warn;
  if (v == "info") return spdlog::level::info;
  if (v == "debug") return spdlog::level::debug;
  log.warn("ignoring EXPFRAME_LOG={}; expected error, warn, info or debug", v);
  return spdlog::level::warn;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err, true);
  auto log = std::make_shared<spdlog::logger>("expframe", sink);
  log->set_pattern("[%l] %v");
  log->set_level(log_level(*log));

  CLI::App app{"Experiment information extraction: corpus tools, classifiers, CRF taggers and evaluation", "expframe"};
  app.require_subcommand(1);
  app.fallthrough();
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string format_name = "table";
  auto* seed_opt = app.add_option("--seed", seed, "random seed (required for train and kfold)");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--format", format_name, "report format")->check(CLI::IsMember({"table", "json", "csv"}));
  (void)seed_opt;

  // convert
  auto* convert = app.add_subcommand("convert", "convert the released corpus layout or plain text to JSONL");
  std::string release_dir, text_file, doc_id, split, convert_out = "-";
  auto* release_opt = convert->add_option("--release", release_dir, "released corpus directory");
  auto* text_opt = convert->add_option("--text", text_file, "plain text, one sentence per line");
  release_opt->excludes(text_opt);
  convert->add_option("--doc-id", doc_id, "document id for --text (default: file stem)");
  convert->add_option("--split", split, "keep documents of this set (train or test)");
  convert->add_option("-o,--output", convert_out, "output JSONL");

  // stats
  auto* stats = app.add_subcommand("stats", "corpus statistics");
  std::string stats_corpus, stats_out = "-";
  stats->add_option("corpus", stats_corpus, "corpus JSONL")->required();
  stats->add_option("-o,--output", stats_out, "report file");

  // train
  auto* train = app.add_subcommand("train", "train a model on a gold corpus");
  Hyper train_h;
  train_h.add(train);
  std::string train_corpus, model_path;
  train->add_option("--corpus", train_corpus, "training corpus JSONL")->required();
  train->add_option("--model", model_path, "model file to write")->required();

  // predict
  auto* predict = app.add_subcommand("predict", "add model predictions to a corpus stream");
  std::string predict_model, predict_in = "-", predict_out = "-";
  std::vector<std::string> predict_emb;
  predict->add_option("--model", predict_model, "model file")->required();
  predict->add_option("-i,--input", predict_in, "input JSONL");
  predict->add_option("-o,--output", predict_out, "output JSONL");
  predict->add_option("--embeddings", predict_emb, "embedding table file, optionally tag=path (repeatable)");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "score predictions against gold annotations");
  std::string eval_task, eval_corpus, eval_model, eval_out = "-";
  std::vector<std::string> eval_emb;
  evaluate->add_option("--task", eval_task, "sentence, entity or slot")
      ->check(CLI::IsMember({"sentence", "entity", "slot"}));
  evaluate->add_option("--corpus", eval_corpus, "corpus with gold and predicted annotations")->required();
  evaluate->add_option("--model", eval_model, "predict with this model first");
  evaluate->add_option("--embeddings", eval_emb, "embedding table file (repeatable)");
  evaluate->add_option("-o,--output", eval_out, "report file");

  // agreement
  auto* agreement = app.add_subcommand("agreement", "inter-annotator agreement, first annotation as gold");
  std::string agree_a, agree_b, agree_out = "-";
  agreement->add_option("first", agree_a, "annotation A (JSONL)")->required();
  agreement->add_option("second", agree_b, "annotation B (JSONL)")->required();
  agreement->add_option("-o,--output", agree_out, "report file");

  // kfold
  auto* kfold = app.add_subcommand("kfold", "document-level k-fold cross-validation");
  Hyper kfold_h;
  kfold_h.add(kfold);
  std::string kfold_corpus, kfold_test, kfold_out = "-";
  std::size_t k = 5;
  kfold->add_option("--corpus", kfold_corpus, "training corpus JSONL")->required();
  kfold->add_option("--test", kfold_test, "held-out test corpus JSONL");
  kfold->add_option("--k", k, "number of folds")->check(CLI::Range(2, 1000));
  kfold->add_option("-o,--output", kfold_out, "report file");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return usage_error;
  }

  const Format format = *parse_format(format_name);
  try {
    if (convert->parsed()) {
      Corpus corpus;
      if (!release_dir.empty()) {
        ConvertStats cs;
        corpus = convert_release(release_dir, split, &cs);
        for (const auto& w : cs.warnings) log->warn("{}", w);
        log->info("converted {} documents, {} sentences; dropped {} slots and {} links", cs.documents, cs.sentences,
                  cs.dropped_slots, cs.dropped_links);
        if (cs.dropped_slots + cs.dropped_links > 0) {
          log->warn("dropped {} slot spans and {} links that did not resolve", cs.dropped_slots, cs.dropped_links);
        }
      } else if (!text_file.empty()) {
        std::ifstream f(text_file);
        if (!f) throw std::runtime_error("cannot read " + text_file);
        corpus.documents.push_back(text_to_document(doc_id.empty() ? fs::path(text_file).stem().string() : doc_id, f));
      } else {
        throw UsageError("convert needs --release or --text");
      }
      Output o(convert_out, out);
      serialize_corpus(corpus, o.stream());
      o.commit();
      return ok;
    }

    if (stats->parsed()) {
      const CorpusStats st = corpus_stats(read_corpus(stats_corpus, in));
      write_all(stats_out, render_report(to_json(st), to_tables(st), format), out);
      return ok;
    }

    if (train->parsed()) {
      if (!seed) throw UsageError("train requires --seed");
      const Task task = *parse_task(train_h.task);
      const Corpus corpus = read_corpus(train_corpus, in);
      const auto tables = load_tables(train_h.embeddings, *log);
      TaskConfig config = train_h.config(threads);
      config.tagger.train.on_epoch = [&](int epoch, double value) { log->debug("epoch {} objective {:.6f}", epoch, value); };
      config.linear.on_epoch = config.tagger.train.on_epoch;
      log->info("training {} model on {} documents", train_h.task, corpus.documents.size());
      const TaskModel model = train_task(task, corpus, tables, config, *seed);
      write_all(model_path, model.to_json().dump() + "\n", out);
      return ok;
    }

    if (predict->parsed()) {
      const TaskModel model = TaskModel::from_json(read_json(predict_model));
      const auto tables = arrange_tables(load_tables(predict_emb, *log), model.embedding_sources());
      std::ifstream file;
      std::istream* source = &in;
      if (predict_in != "-") {
        file.open(predict_in);
        if (!file) throw std::runtime_error("cannot read " + predict_in);
        source = &file;
      }
      Output o(predict_out, out);
      std::string line;
      std::size_t line_no = 0;
      bool failed = false;
      while (std::getline(*source, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
          Document doc = parse_document(line, CorpusSchema::sofc_exp(), line_no);
          for (auto& s : doc.sentences) model.annotate(s, tables);
          o.stream() << serialize_document(doc) << '\n';
        } catch (const std::exception& e) {
          failed = true;
          const std::string what = e.what();
          err << (what.rfind("line ", 0) == 0 ? what : "line " + std::to_string(line_no) + ": " + what) << "\n";
        }
      }
      o.commit();
      return failed ? validation_error : ok;
    }

    if (evaluate->parsed()) {
      Corpus corpus = read_corpus(eval_corpus, in);
      std::optional<Task> task;
      if (!eval_task.empty()) task = parse_task(eval_task);
      if (!eval_model.empty()) {
        const TaskModel model = TaskModel::from_json(read_json(eval_model));
        if (task && *task != model.task()) throw UsageError("--task does not match the model's task");
        task = model.task();
        const auto tables = arrange_tables(load_tables(eval_emb, *log), model.embedding_sources());
        model.annotate(corpus, tables);
      }
      if (!task) throw UsageError("evaluate needs --task or --model");
      const EvalReport report = evaluate_task(*task, corpus);
      nlohmann::ordered_json j{{"task", std::string(to_string(*task))}, {"report", to_json(report)}};
      write_all(eval_out, render_report(j, to_tables(report, to_string(*task)), format), out);
      return ok;
    }

    if (agreement->parsed()) {
      const AgreementReport r = agreement_report(read_corpus(agree_a, in), read_corpus(agree_b, in));
      write_all(agree_out, render_report(to_json(r), to_tables(r), format), out);
      return ok;
    }

    if (kfold->parsed()) {
      if (!seed) throw UsageError("kfold requires --seed");
      const Task task = *parse_task(kfold_h.task);
      const Corpus corpus = read_corpus(kfold_corpus, in);
      std::optional<Corpus> test;
      if (!kfold_test.empty()) test = load_corpus(kfold_test);
      const auto tables = load_tables(kfold_h.embeddings, *log);
      const TaskConfig config = kfold_h.config(threads);
      const CrossvalResult r = crossval(task, corpus, test ? &*test : nullptr, k, tables, config, *seed);
      for (std::size_t f = 0; f < r.dev.size(); ++f) log->info("fold {}: dev macro F1 {}", f, percent(r.dev[f].macro_f1));
      write_all(kfold_out, render_report(to_json(r), to_tables(r), format), out);
      return ok;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return usage_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return validation_error;
  }
  return usage_error;
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cin, std::cout, std::cerr);
}

}  // namespace expframe::cli
