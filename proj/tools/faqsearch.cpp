// faqsearch command line: data preparation, training, evaluation, serving.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "faqsearch/config.hpp"
#include "faqsearch/corpus.hpp"
#include "faqsearch/errors.hpp"
#include "faqsearch/evalharness.hpp"
#include "faqsearch/experiment.hpp"
#include "faqsearch/feedback_log.hpp"
#include "faqsearch/index.hpp"
#include "faqsearch/intent.hpp"
#include "faqsearch/pipeline.hpp"
#include "faqsearch/rank.hpp"
#include "faqsearch/reformulate.hpp"
#include "faqsearch/service.hpp"
#include "faqsearch/textproc.hpp"

namespace fs = std::filesystem;
using namespace faqsearch;
using nlohmann::json;

namespace {

std::shared_ptr<const QuestionSpace> space_from(const fs::path& index_path) {
  auto index = std::make_shared<const InvertedIndex>(InvertedIndex::load(index_path));
  return std::make_shared<const QuestionSpace>(std::move(index));
}

std::shared_ptr<const QuestionSpace> space_from_corpus(const fs::path& corpus_path) {
  const auto corpus = load_faq_corpus(corpus_path);
  return std::make_shared<const QuestionSpace>(
      std::make_shared<const InvertedIndex>(InvertedIndex::build(corpus)));
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
}

std::string classification_line(const ClassificationReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "precision %.4f  recall %.4f  f1 %.4f  (tp %zu fp %zu fn %zu tn %zu)",
                r.precision, r.recall, r.f1, r.confusion.true_positive, r.confusion.false_positive,
                r.confusion.false_negative, r.confusion.true_negative);
  return buf;
}

ClassificationReport evaluate_intent(std::span<const LabeledQuery> data,
                                     const std::function<Intent(const std::string&)>& predict) {
  std::vector<Intent> predicted, gold;
  for (const auto& q : data) {
    predicted.push_back(predict(q.query));
    gold.push_back(q.intent);
  }
  return compute_classification(predicted, gold);
}

// --- generate-corpus ------------------------------------------------------

struct GenerateArgs {
  std::size_t faqs = 500;
  std::size_t queries = 5000;
  double question_fraction = 0.1;
  std::uint64_t seed = 7;
  double train = 0.4, validation = 0.2, test = 0.4;
  fs::path out_dir = "data/synthetic";
};

void generate(const GenerateArgs& a) {
  TrafficProfile profile{a.queries, a.question_fraction, a.seed};
  const auto corpus = generate_synthetic_corpus(profile, a.faqs);
  const auto split = split_dataset(corpus.queries, {a.train, a.validation, a.test}, a.seed);
  fs::create_directories(a.out_dir);
  save_faq_corpus(a.out_dir / "faqs.jsonl", corpus.faqs);
  save_labeled_queries(a.out_dir / "traffic.jsonl", corpus.queries);
  save_labeled_queries(a.out_dir / "train.jsonl", split.train);
  save_labeled_queries(a.out_dir / "validation.jsonl", split.validation);
  save_labeled_queries(a.out_dir / "test.jsonl", split.test);
  std::cout << "wrote " << corpus.faqs.size() << " faqs, " << corpus.queries.size()
            << " queries (train " << split.train.size() << ", validation " << split.validation.size()
            << ", test " << split.test.size() << ") to " << a.out_dir.string() << "\n";
}

// --- training -------------------------------------------------------------

struct IntentArgs {
  fs::path train, val, out = "intent.bin";
  std::uint64_t seed = 0;
  std::uint32_t dims = kDefaultHashDims;
  double threshold = 0.5;
  bool no_oversample = false;
};

void train_intent(const IntentArgs& a) {
  const auto train = load_labeled_queries(a.train);
  const auto val = a.val.empty() ? std::vector<LabeledQuery>{} : load_labeled_queries(a.val);
  IntentTrainingConfig config;
  config.dims = a.dims;
  config.seed = a.seed;
  config.decision_threshold = a.threshold;
  const auto data = a.no_oversample ? train : oversample_minority(train, a.seed);
  const auto model = train_intent_model(data, val, config);
  model.save(a.out);
  if (!val.empty()) {
    const auto r = evaluate_intent(val, [&](const std::string& q) { return model.classify(q).intent; });
    std::cout << "validation " << classification_line(r) << "\n";
  }
  std::cout << "saved " << a.out.string() << "\n";
}

struct TuneArgs {
  std::string kind = "bm25";
  fs::path val, index;
};

void tune(const TuneArgs& a) {
  const auto space = space_from(a.index);
  const auto val = load_labeled_queries(a.val);
  const auto kind = parse_baseline_kind(a.kind);
  const auto tuned = tune_thresholds(kind, val, *space);
  const auto r = evaluate_intent(
      val, [&](const std::string& q) { return baseline_predict(tuned, *space, q).intent; });
  std::cout << "# validation " << classification_line(r) << "\n";
  if (kind == BaselineKind::Bm25Count) {
    std::cout << "baseline.x = " << tuned.x << "\nbaseline.y = " << tuned.y << "\n";
  } else {
    std::cout << "baseline.cosine = " << tuned.cosine_threshold << "\n";
  }
}

struct MineArgs {
  fs::path train, out = "templates.jsonl";
};

void mine(const MineArgs& a) {
  std::vector<ReformulationPair> pairs;
  for (const auto& q : load_labeled_queries(a.train)) {
    if (q.gold_reformulation) pairs.push_back({q.query, *q.gold_reformulation});
  }
  const auto templates = mine_templates(pairs);
  save_templates(a.out, templates);
  std::cout << "mined " << templates.size() << " templates from " << pairs.size() << " pairs into "
            << a.out.string() << "\n";
}

struct RankerArgs {
  fs::path pairs, corpus, val, templates, out = "ranker.bin";
  std::size_t negatives = 100;
  std::uint64_t seed = 0;
  std::size_t epochs = 10;
};

void train_ranker(const RankerArgs& a) {
  const auto space = space_from_corpus(a.corpus);
  std::optional<Reformulator> reformulator;
  if (!a.templates.empty()) reformulator = Reformulator::from_templates(load_templates(a.templates));
  const Reformulator* ref = reformulator ? &*reformulator : nullptr;
  const auto corpus_entries = space->index().entries();
  const auto train = ranker_training_queries(load_labeled_queries(a.pairs, corpus_entries), ref);
  const auto val = a.val.empty()
                       ? std::vector<QueryGold>{}
                       : ranker_training_queries(load_labeled_queries(a.val, corpus_entries), ref);
  PointwiseTrainingConfig config;
  config.negatives_per_query = a.negatives;
  config.seed = a.seed;
  config.max_epochs = a.epochs;
  const auto ranker = train_pointwise(train, val, *space, config);
  ranker.save(a.out);
  std::cout << "trained on " << train.size() << " queries; saved " << a.out.string() << "\n";
}

struct IndexArgs {
  fs::path corpus, out = "index.bin";
};

void build_index(const IndexArgs& a) {
  const auto index = InvertedIndex::build(load_faq_corpus(a.corpus));
  index.save(a.out);
  std::cout << "indexed " << index.doc_count() << " questions into " << a.out.string() << "\n";
}

// --- evaluation -----------------------------------------------------------

struct LatencyArgs {
  fs::path traffic, config;
  std::string mode = "units";
};

void simulate_latency(const LatencyArgs& a) {
  const auto loaded = load_config(a.config);
  const auto models = load_models(loaded);
  const auto traffic = load_labeled_queries(a.traffic);
  PipelineConfig config = loaded.pipeline;
  const auto mode = a.mode == "wallclock" ? CostMode::WallClock : CostMode::Units;
  const Pipeline pipeline(config, models);
  const auto r = account_cost(pipeline, traffic, mode);
  std::printf("config        %s\n", config.name.c_str());
  std::printf("queries       %zu\n", r.queries);
  std::printf("gated in      %zu\n", r.gated_in);
  std::printf("gated units   %.1f\n", r.gated_units);
  std::printf("ungated units %.1f\n", r.ungated_units);
  std::printf("unit ratio    %.4f (saving %.2f%%)\n", r.ratio, r.saving_percent);
  if (r.wall_ratio) {
    std::printf("gated ms      %.1f\n", *r.gated_wall_ms);
    std::printf("ungated ms    %.1f\n", *r.ungated_wall_ms);
    std::printf("wall ratio    %.4f (saving %.2f%%)\n", *r.wall_ratio, 100.0 * (1.0 - *r.wall_ratio));
  }
}

struct EvalArgs {
  std::string split = "test";
  fs::path config, data, jsonl;
  std::string relative_to;
};

void eval(const EvalArgs& a) {
  const auto loaded = load_config(a.config);
  fs::path data_path = a.data;
  if (data_path.empty()) {
    const auto it = loaded.paths.splits.find(a.split);
    if (it == loaded.paths.splits.end()) {
      throw ValidationError("config has no data." + a.split + " and --data was not given");
    }
    data_path = it->second;
  }
  const auto data = load_labeled_queries(data_path);

  // The matrix needs every model the config can name, not just its own.
  LoadedConfig all = loaded;
  all.pipeline.reformulator = ReformulatorKind::Identity;
  all.pipeline.scorer = Scorer::Bm25Only;
  auto models = load_models(all);
  if (!models.intent && loaded.paths.intent_model) {
    auto model = IntentModel::load(*loaded.paths.intent_model);
    if (loaded.decision_threshold) model.decision_threshold = *loaded.decision_threshold;
    models.intent = std::make_shared<const IntentModel>(std::move(model));
  }
  std::vector<ReformulatorKind> reformulators{ReformulatorKind::Identity};
  if (loaded.paths.templates) {
    models.reformulator = std::make_shared<const Reformulator>(
        Reformulator::from_templates(load_templates(*loaded.paths.templates)));
    reformulators.push_back(ReformulatorKind::Template);
  }
  std::vector<Scorer> scorers{Scorer::Bm25Only, Scorer::Cosine};
  if (loaded.paths.ranker) {
    models.ranker = std::make_shared<const PointwiseRanker>(PointwiseRanker::load(*loaded.paths.ranker));
    scorers.push_back(Scorer::Pointwise);
  }

  PipelineConfig base = loaded.pipeline;
  base.faq_deadline = std::chrono::milliseconds(0);
  const std::vector<CandidateSource> candidates{base.candidates};
  std::vector<ExperimentInput> inputs;
  for (auto& c : expand_matrix(base, scorers, candidates, reformulators)) inputs.push_back({c, models});
  const std::string relative_to =
      a.relative_to.empty() ? "bm25-" + to_string(base.candidates) + "/identity" : a.relative_to;
  const auto bundle = run_experiment_matrix(inputs, data, relative_to);

  std::cout << "== retrieval (" << a.split << ", " << data.size() << " queries)\n"
            << bundle.render_table() << "\n";

  // Intent classifiers side by side, relative to the default BM25 baseline.
  std::vector<ReportRow> intent_rows;
  const auto& space = *models.space;
  ThresholdBaseline bm25_default;
  ThresholdBaseline bm25_tuned = base.baseline;
  bm25_tuned.kind = BaselineKind::Bm25Count;
  ThresholdBaseline cosine_tuned = base.baseline;
  cosine_tuned.kind = BaselineKind::CosineSim;
  if (models.intent) {
    intent_rows.push_back(classification_row(
        "model", evaluate_intent(data, [&](const std::string& q) { return models.intent->classify(q).intent; })));
  }
  for (const auto& [name, b] : {std::pair<std::string, ThresholdBaseline>{"cosine", cosine_tuned},
                                {"bm25", bm25_tuned},
                                {"bm25-default", bm25_default}}) {
    intent_rows.push_back(classification_row(
        name, evaluate_intent(data, [&](const std::string& q) { return baseline_predict(b, space, q).intent; })));
  }
  std::cout << "== intent\n"
            << render_table(intent_rows) << "\n"
            << render_table(intent_rows, std::string("bm25-default"));

  if (!a.jsonl.empty()) {
    write_text(a.jsonl, bundle.render_jsonl() + render_jsonl(intent_rows, std::string("bm25-default")));
    std::cout << "wrote " << a.jsonl.string() << "\n";
  }
}

// --- serving --------------------------------------------------------------

struct PipelineHandle {
  LoadedConfig loaded;
  std::shared_ptr<const Pipeline> pipeline;
};

PipelineHandle open_pipeline(const fs::path& config_path) {
  PipelineHandle h;
  h.loaded = load_config(config_path);
  h.pipeline = std::make_shared<const Pipeline>(h.loaded.pipeline, load_models(h.loaded));
  return h;
}

struct SearchArgs {
  fs::path config;
  std::string query;
};

void search(const SearchArgs& a) {
  const auto h = open_pipeline(a.config);
  std::cout << json::parse(search_response_json(h.pipeline->search(a.query))).dump(2) << "\n";
}

struct ServeArgs {
  fs::path config, feedback_log = "feedback.jsonl";
  std::string host = "127.0.0.1";
  int port = 8080;
};

void serve(const ServeArgs& a) {
  // Signals are taken synchronously on this thread; every other thread
  // inherits the blocked mask.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  const auto h = open_pipeline(a.config);
  FeedbackLog::Options options;
  options.path = a.feedback_log;
  auto log = std::make_shared<FeedbackLog>(std::move(options));
  if (log->quarantined_bytes() > 0) {
    std::cerr << "quarantined " << log->quarantined_bytes() << " bytes of a partial record to "
              << a.feedback_log.string() << ".quarantine\n";
  }
  auto service = std::make_shared<SearchService>(h.pipeline, log);
  HttpServer server(service);
  const int port = server.start(a.host, a.port);
  std::cout << "serving " << h.loaded.pipeline.name << " on http://" << a.host << ":" << port
            << " (feedback log " << a.feedback_log.string() << ", " << log->recovered_records()
            << " records)" << std::endl;
  int sig = 0;
  sigwait(&signals, &sig);
  server.stop();
  std::cout << "stopped" << std::endl;
}

struct FeedbackArgs {
  fs::path log;
};

void aggregate(const FeedbackArgs& a) {
  const auto read = read_feedback_log(a.log);
  const auto report = aggregate_feedback(read.records);
  auto show = [](const char* label, const FeedbackStats& s) {
    std::printf("%-9s queries %zu  with positive %zu  events +%zu/-%zu  fraction %s  raw %s\n", label,
                s.queries_with_feedback, s.queries_with_positive, s.positive_events, s.negative_events,
                s.positive_fraction ? std::to_string(*s.positive_fraction).c_str() : "n/a",
                s.raw_positive_fraction ? std::to_string(*s.raw_positive_fraction).c_str() : "n/a");
  };
  show("all", report.all);
  show("normal", report.normal);
  show("degraded", report.degraded);
  if (read.corrupt_lines > 0 || read.partial_tail) {
    std::printf("skipped %zu corrupt lines%s\n", read.corrupt_lines,
                read.partial_tail ? " and a partial tail" : "");
  }
}

struct KeywordArgs {
  std::string text;
  fs::path stopwords;
};

void keywords(const KeywordArgs& a) {
  const auto list = a.stopwords.empty() ? StopwordList::builtin() : StopwordList::from_file(a.stopwords);
  std::cout << extract_keywords(a.text, list) << "\n";
}

// --- quickstart -----------------------------------------------------------

struct QuickstartArgs {
  fs::path out_dir = "work";
  std::uint64_t seed = 7;
};

void quickstart(const QuickstartArgs& a) {
  GenerateArgs g;
  g.out_dir = a.out_dir;
  g.seed = a.seed;
  generate(g);
  const auto d = a.out_dir;
  build_index({d / "faqs.jsonl", d / "index.bin"});
  mine({d / "train.jsonl", d / "templates.jsonl"});
  IntentArgs ia;
  ia.train = d / "train.jsonl";
  ia.val = d / "validation.jsonl";
  ia.out = d / "intent.bin";
  ia.seed = a.seed;
  train_intent(ia);
  RankerArgs ra;
  ra.pairs = d / "train.jsonl";
  ra.val = d / "validation.jsonl";
  ra.corpus = d / "faqs.jsonl";
  ra.templates = d / "templates.jsonl";
  ra.out = d / "ranker.bin";
  ra.seed = a.seed;
  train_ranker(ra);

  const auto space = space_from(d / "index.bin");
  const auto val = load_labeled_queries(d / "validation.jsonl");
  const auto bm25 = tune_thresholds(BaselineKind::Bm25Count, val, *space);
  const auto cos = tune_thresholds(BaselineKind::CosineSim, val, *space);
  std::ostringstream cfg;
  cfg << "# generated by faqsearch quickstart --seed " << a.seed << "\n"
      << "name = quickstart\n"
      << "intent_source = model\n"
      << "reformulator = template\n"
      << "scorer = pointwise\n"
      << "candidates = top10\n"
      << "deadline_ms = 1000\n"
      << "baseline.x = " << bm25.x << "\n"
      << "baseline.y = " << bm25.y << "\n"
      << "baseline.cosine = " << cos.cosine_threshold << "\n"
      << "corpus = faqs.jsonl\n"
      << "index = index.bin\n"
      << "intent_model = intent.bin\n"
      << "templates = templates.jsonl\n"
      << "ranker = ranker.bin\n"
      << "data.train = train.jsonl\n"
      << "data.validation = validation.jsonl\n"
      << "data.test = test.jsonl\n";
  write_text(d / "config.ini", cfg.str());
  std::cout << "wrote " << (d / "config.ini").string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Intent-aware FAQ search over product queries"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* c_gen = app.add_subcommand("generate-corpus", "Synthetic FAQ corpus, traffic and splits");
  c_gen->add_option("--faqs", gen.faqs, "FAQ count");
  c_gen->add_option("--queries", gen.queries, "Traffic size");
  c_gen->add_option("--question-fraction", gen.question_fraction, "Share of question-intent queries")
      ->check(CLI::Range(0.0, 1.0));
  c_gen->add_option("--seed", gen.seed, "Seed");
  c_gen->add_option("--train", gen.train, "Train ratio");
  c_gen->add_option("--validation", gen.validation, "Validation ratio");
  c_gen->add_option("--test", gen.test, "Test ratio");
  c_gen->add_option("--out-dir", gen.out_dir, "Output directory");
  c_gen->callback([&] { generate(gen); });

  IndexArgs idx;
  auto* c_idx = app.add_subcommand("build-index", "Index FAQ questions");
  c_idx->add_option("--corpus", idx.corpus, "FAQ corpus (jsonl)")->required();
  c_idx->add_option("--out", idx.out, "Index file");
  c_idx->callback([&] { build_index(idx); });

  IntentArgs ia;
  auto* c_ia = app.add_subcommand("train-intent", "Train the query intent classifier");
  c_ia->add_option("--train", ia.train, "Labeled training queries")->required();
  c_ia->add_option("--val", ia.val, "Labeled validation queries");
  c_ia->add_option("--seed", ia.seed, "Seed");
  c_ia->add_option("--dims", ia.dims, "Hashed feature dimensions (power of two)");
  c_ia->add_option("--threshold", ia.threshold, "Decision threshold")->check(CLI::Range(0.0, 1.0));
  c_ia->add_flag("--no-oversample", ia.no_oversample, "Train on the raw class balance");
  c_ia->add_option("--out", ia.out, "Model file");
  c_ia->callback([&] { train_intent(ia); });

  TuneArgs ta;
  auto* c_ta = app.add_subcommand("tune-thresholds", "Grid-search a threshold baseline");
  c_ta->add_option("--kind", ta.kind, "bm25 | cosine")->check(CLI::IsMember({"bm25", "cosine"}));
  c_ta->add_option("--val", ta.val, "Labeled validation queries")->required();
  c_ta->add_option("--index", ta.index, "Index file")->required();
  c_ta->callback([&] { tune(ta); });

  MineArgs ma;
  auto* c_ma = app.add_subcommand("mine-templates", "Mine reformulation templates");
  c_ma->add_option("--train", ma.train, "Labeled queries with gold reformulations")->required();
  c_ma->add_option("--out", ma.out, "Template file (jsonl)");
  c_ma->callback([&] { mine(ma); });

  RankerArgs ra;
  auto* c_ra = app.add_subcommand("train-ranker", "Train the pointwise ranker");
  c_ra->add_option("--pairs", ra.pairs, "Labeled queries with gold FAQ ids")->required();
  c_ra->add_option("--corpus", ra.corpus, "FAQ corpus (jsonl)")->required();
  c_ra->add_option("--val", ra.val, "Validation queries for early stopping");
  c_ra->add_option("--templates", ra.templates, "Also train on template reformulations");
  c_ra->add_option("--negatives", ra.negatives, "Sampled negatives per query");
  c_ra->add_option("--epochs", ra.epochs, "Maximum epochs");
  c_ra->add_option("--seed", ra.seed, "Seed");
  c_ra->add_option("--out", ra.out, "Ranker file");
  c_ra->callback([&] { train_ranker(ra); });

  LatencyArgs la;
  auto* c_la = app.add_subcommand("simulate-latency", "Gated vs ungated cost over traffic");
  c_la->add_option("--traffic", la.traffic, "Labeled traffic")->required();
  c_la->add_option("--config", la.config, "Pipeline config")->required();
  c_la->add_option("--mode", la.mode, "units | wallclock")->check(CLI::IsMember({"units", "wallclock"}));
  c_la->callback([&] { simulate_latency(la); });

  EvalArgs ea;
  auto* c_ea = app.add_subcommand("eval", "Retrieval matrix and intent baselines on a split");
  c_ea->add_option("--split", ea.split, "train | validation | test")
      ->check(CLI::IsMember({"train", "validation", "test"}));
  c_ea->add_option("--config", ea.config, "Pipeline config")->required();
  c_ea->add_option("--data", ea.data, "Labeled queries, overriding data.<split>");
  c_ea->add_option("--relative-to", ea.relative_to, "Baseline row for deltas");
  c_ea->add_option("--jsonl", ea.jsonl, "Also write machine-readable rows here");
  c_ea->callback([&] { eval(ea); });

  SearchArgs sa;
  auto* c_sa = app.add_subcommand("search", "Run one query through the pipeline");
  c_sa->add_option("--config", sa.config, "Pipeline config")->required();
  c_sa->add_option("query", sa.query, "Query text")->required();
  c_sa->callback([&] { search(sa); });

  ServeArgs sv;
  auto* c_sv = app.add_subcommand("serve", "HTTP search and feedback service");
  c_sv->add_option("--config", sv.config, "Pipeline config")->required();
  c_sv->add_option("--port", sv.port, "Port (0 picks a free one)");
  c_sv->add_option("--host", sv.host, "Bind address");
  c_sv->add_option("--feedback-log", sv.feedback_log, "Append-only feedback log");
  c_sv->callback([&] { serve(sv); });

  FeedbackArgs fa;
  auto* c_fa = app.add_subcommand("aggregate-feedback", "Query-level feedback statistics");
  c_fa->add_option("--log", fa.log, "Feedback log")->required();
  c_fa->callback([&] { aggregate(fa); });

  KeywordArgs ka;
  auto* c_ka = app.add_subcommand("keywords", "RAKE keyword projection of a question");
  c_ka->add_option("text", ka.text, "Question text")->required();
  c_ka->add_option("--stopwords", ka.stopwords, "Stopword list, one word per line");
  c_ka->callback([&] { keywords(ka); });

  QuickstartArgs qa;
  auto* c_qa = app.add_subcommand("quickstart", "Generate data, train every model, write a config");
  c_qa->add_option("--out-dir", qa.out_dir, "Workspace directory");
  c_qa->add_option("--seed", qa.seed, "Seed");
  c_qa->callback([&] { quickstart(qa); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
