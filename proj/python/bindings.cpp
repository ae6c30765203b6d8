#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "faqsearch/config.hpp"
#include "faqsearch/corpus.hpp"
#include "faqsearch/errors.hpp"
#include "faqsearch/feedback_log.hpp"
#include "faqsearch/index.hpp"
#include "faqsearch/intent.hpp"
#include "faqsearch/metrics.hpp"
#include "faqsearch/pipeline.hpp"
#include "faqsearch/reformulate.hpp"
#include "faqsearch/service.hpp"
#include "faqsearch/textproc.hpp"

namespace py = pybind11;
using namespace faqsearch;

namespace {

// The index is shared with QuestionSpace elsewhere, so keep it behind a
// shared_ptr and hand Python an immutable handle.
struct Index {
  std::shared_ptr<const InvertedIndex> index;
};

py::dict classification_dict(const ClassificationReport& r) {
  py::dict d;
  d["precision"] = r.precision;
  d["recall"] = r.recall;
  d["f1"] = r.f1;
  d["tp"] = r.confusion.true_positive;
  d["fp"] = r.confusion.false_positive;
  d["fn"] = r.confusion.false_negative;
  d["tn"] = r.confusion.true_negative;
  return d;
}

py::dict record_dict(const FeedbackRecord& r) {
  py::dict d;
  d["timestamp_ms"] = r.timestamp_ms;
  d["query"] = r.query;
  d["faq_id"] = r.faq_id;
  d["verdict"] = std::string(to_string(r.verdict));
  d["session_id"] = r.session_id;
  d["degraded"] = r.degraded;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the FAQ search pipeline.";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);

  py::enum_<Intent>(m, "Intent")
      .value("QUESTION", Intent::Question)
      .value("NON_QUESTION", Intent::NonQuestion);

  py::class_<FaqEntry>(m, "FaqEntry")
      .def(py::init([](std::string id, std::string question, std::string answer, std::vector<std::string> tags) {
             return FaqEntry{std::move(id), std::move(question), std::move(answer), std::move(tags)};
           }),
           py::arg("id"), py::arg("question"), py::arg("answer") = "", py::arg("tags") = std::vector<std::string>{})
      .def_readwrite("id", &FaqEntry::id)
      .def_readwrite("question", &FaqEntry::question)
      .def_readwrite("answer", &FaqEntry::answer)
      .def_readwrite("tags", &FaqEntry::tags)
      .def("__repr__", [](const FaqEntry& e) { return "FaqEntry(" + e.id + ", " + e.question + ")"; });

  py::class_<LabeledQuery>(m, "LabeledQuery")
      .def(py::init([](std::string query, Intent intent, std::optional<std::string> gold_faq_id,
                       std::optional<std::string> gold_reformulation) {
             return LabeledQuery{std::move(query), intent, std::move(gold_faq_id), std::move(gold_reformulation)};
           }),
           py::arg("query"), py::arg("intent"), py::arg("gold_faq_id") = py::none(),
           py::arg("gold_reformulation") = py::none())
      .def_readwrite("query", &LabeledQuery::query)
      .def_readwrite("intent", &LabeledQuery::intent)
      .def_readwrite("gold_faq_id", &LabeledQuery::gold_faq_id)
      .def_readwrite("gold_reformulation", &LabeledQuery::gold_reformulation);

  m.def("tokenize_terms", &tokenize_terms, py::arg("text"));
  m.def("normalize_query", &normalize_query, py::arg("text"));
  m.def("starts_with_question_word", &starts_with_question_word, py::arg("query"));
  m.def("extract_keywords", [](std::string_view q) { return extract_keywords(q); }, py::arg("question"));

  m.def("load_faq_corpus", &load_faq_corpus, py::arg("path"));
  m.def(
      "generate_synthetic_corpus",
      [](std::size_t total_queries, double question_fraction, std::uint64_t seed, std::size_t faq_count) {
        TrafficProfile p;
        p.total_queries = total_queries;
        p.question_intent_fraction = question_fraction;
        p.seed = seed;
        auto c = generate_synthetic_corpus(p, faq_count);
        return py::make_tuple(std::move(c.faqs), std::move(c.queries));
      },
      py::arg("total_queries"), py::arg("question_fraction"), py::arg("seed"), py::arg("faq_count"),
      "Returns (faqs, queries).");
  m.def(
      "split_dataset",
      [](const std::vector<LabeledQuery>& data, double train, double validation, double test, std::uint64_t seed) {
        auto s = split_dataset(data, {train, validation, test}, seed);
        return py::make_tuple(std::move(s.train), std::move(s.validation), std::move(s.test));
      },
      py::arg("data"), py::arg("train"), py::arg("validation"), py::arg("test"), py::arg("seed"));

  py::class_<Index>(m, "Index")
      .def(py::init([](const std::vector<FaqEntry>& faqs) {
             return Index{std::make_shared<const InvertedIndex>(InvertedIndex::build(faqs))};
           }),
           py::arg("faqs"))
      .def_static("load", [](const std::filesystem::path& p) {
        return Index{std::make_shared<const InvertedIndex>(InvertedIndex::load(p))};
      })
      .def("save", [](const Index& i, const std::filesystem::path& p) { i.index->save(p); })
      .def("__len__", [](const Index& i) { return i.index->doc_count(); })
      .def(
          "search",
          [](const Index& i, std::string_view query, std::size_t limit) {
            std::vector<std::pair<std::string, double>> out;
            for (auto& h : bm25_search(*i.index, query, limit)) out.emplace_back(h.faq_id, h.score);
            return out;
          },
          py::arg("query"), py::arg("limit") = 10, "BM25 hits as (faq_id, score), best first.");

  m.def(
      "compute_classification",
      [](const std::vector<Intent>& pred, const std::vector<Intent>& gold) {
        return classification_dict(compute_classification(pred, gold));
      },
      py::arg("predictions"), py::arg("golds"));
  m.def(
      "compute_retrieval",
      [](const std::map<std::string, std::vector<std::string>>& ranked, const std::map<std::string, std::string>& golds) {
        std::map<std::string, std::vector<ScoredHit>> hits;
        for (const auto& [q, ids] : ranked) {
          auto& list = hits[q];
          for (std::size_t i = 0; i < ids.size(); ++i) list.push_back({ids[i], 0.0, i + 1});
        }
        const auto r = compute_retrieval(hits, golds);
        py::dict d;
        d["mrr"] = r.mrr;
        d["hit_at_1"] = r.hit_at_1;
        return d;
      },
      py::arg("ranked"), py::arg("golds"), "ranked maps query -> ids best first; golds maps query -> id.");

  py::class_<IntentModel>(m, "IntentModel")
      .def_static("load", py::overload_cast<const std::filesystem::path&>(&IntentModel::load), py::arg("path"))
      .def("save", py::overload_cast<const std::filesystem::path&>(&IntentModel::save, py::const_), py::arg("path"))
      .def("probability", &IntentModel::probability, py::arg("query"))
      .def("classify", [](const IntentModel& m, std::string_view q) { return m.classify(q).intent; }, py::arg("query"))
      .def_readwrite("decision_threshold", &IntentModel::decision_threshold);
  m.def(
      "train_intent_model",
      [](const std::vector<LabeledQuery>& train, const std::vector<LabeledQuery>& validation, std::uint64_t seed,
         std::uint32_t dims) {
        IntentTrainingConfig c;
        c.seed = seed;
        c.dims = dims;
        py::gil_scoped_release release;
        return train_intent_model(train, validation, c);
      },
      py::arg("train"), py::arg("validation"), py::arg("seed") = 1, py::arg("dims") = kDefaultHashDims);

  py::class_<Reformulator, std::shared_ptr<Reformulator>>(m, "Reformulator")
      .def_static("identity", [] { return std::make_shared<Reformulator>(Reformulator::identity()); })
      .def_static(
          "from_pairs",
          [](const std::vector<std::pair<std::string, std::string>>& pairs) {
            std::vector<ReformulationPair> p;
            for (const auto& [q, question] : pairs) p.push_back({q, question});
            return std::make_shared<Reformulator>(Reformulator::from_templates(mine_templates(p)));
          },
          py::arg("pairs"), "Mines templates from (keyword query, question) pairs.")
      .def("reformulate", [](const Reformulator& r, std::string_view q) { return r.reformulate(q).text; },
           py::arg("query"));

  py::class_<Pipeline, std::shared_ptr<Pipeline>>(m, "Pipeline")
      .def_static(
          "from_config",
          [](const std::filesystem::path& path) {
            const auto config = load_config(path);
            return std::make_shared<Pipeline>(config.pipeline, load_models(config));
          },
          py::arg("path"))
      .def_property_readonly("name", [](const Pipeline& p) { return p.config().name; })
      .def(
          "search_json",
          [](const Pipeline& p, std::string_view q) {
            py::gil_scoped_release release;
            return search_response_json(p.search(q));
          },
          py::arg("query"), "The GET /search response body for `query`.");

  py::class_<FeedbackLog>(m, "FeedbackLog")
      .def(py::init([](const std::filesystem::path& path, double dedup_window_s) {
             FeedbackLog::Options o;
             o.path = path;
             o.dedup_window = std::chrono::milliseconds(static_cast<std::int64_t>(dedup_window_s * 1000));
             return std::make_unique<FeedbackLog>(o);
           }),
           py::arg("path"), py::arg("dedup_window_s") = 600.0)
      .def(
          "append",
          [](FeedbackLog& log, std::string query, std::string faq_id, std::string_view verdict, std::string session,
             bool degraded) {
            FeedbackRecord r;
            r.query = std::move(query);
            r.faq_id = std::move(faq_id);
            r.verdict = parse_verdict(verdict);
            r.session_id = std::move(session);
            r.degraded = degraded;
            py::gil_scoped_release release;
            return log.append(std::move(r)) == FeedbackLog::AppendResult::Appended;
          },
          py::arg("query"), py::arg("faq_id"), py::arg("verdict"), py::arg("session_id"), py::arg("degraded") = false,
          "True when written, False when a duplicate within the window.")
      .def_property_readonly("recovered_records", &FeedbackLog::recovered_records)
      .def_property_readonly("quarantined_bytes", &FeedbackLog::quarantined_bytes);
  m.def(
      "read_feedback_log",
      [](const std::filesystem::path& path) {
        py::list out;
        for (const auto& r : read_feedback_log(path).records) out.append(record_dict(r));
        return out;
      },
      py::arg("path"));
}
