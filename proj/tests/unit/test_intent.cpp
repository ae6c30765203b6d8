#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "faqsearch/errors.hpp"
#include "faqsearch/intent.hpp"
#include "faqsearch/metrics.hpp"
#include "fixtures.hpp"

using namespace faqsearch;

namespace {

std::vector<LabeledQuery> classes(std::size_t questions, std::size_t others) {
  std::vector<LabeledQuery> out;
  for (std::size_t i = 0; i < questions; ++i) out.push_back({"q" + std::to_string(i), Intent::Question, {}, {}});
  for (std::size_t i = 0; i < others; ++i) out.push_back({"n" + std::to_string(i), Intent::NonQuestion, {}, {}});
  return out;
}

std::size_t count(const std::vector<LabeledQuery>& v, Intent intent) {
  std::size_t n = 0;
  for (const auto& q : v) n += q.intent == intent;
  return n;
}

IntentTrainingConfig small_config(std::uint64_t seed) {
  IntentTrainingConfig c;
  c.dims = 1u << 14;
  c.max_epochs = 30;
  c.seed = seed;
  return c;
}

std::vector<LabeledQuery> separable(Rng& rng, std::size_t n) {
  const std::vector<std::string> words = {"kindle", "echo", "tv", "cable", "charger", "case", "remote", "battery"};
  std::vector<LabeledQuery> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string q = rng.pick(words) + " " + rng.pick(words);
    const bool question = rng.bernoulli(0.5);
    if (question) q = "how " + q;
    out.push_back({q, question ? Intent::Question : Intent::NonQuestion, {}, {}});
  }
  return out;
}

double logit(double p) { return std::log(p / (1 - p)); }

}  // namespace

TEST_CASE("oversampling balances classes") {
  const auto a = oversample_minority(classes(10, 50), 1);
  CHECK(count(a, Intent::Question) == 50);
  CHECK(count(a, Intent::NonQuestion) == 50);

  const auto b = oversample_minority(classes(20, 20), 1);
  CHECK(b.size() == 40);

  const auto c = oversample_minority(classes(1, 99), 1);
  std::size_t copies = 0;
  for (const auto& q : c) copies += q.query == "q0";
  CHECK(copies == 99);

  CHECK_THROWS_AS(oversample_minority(classes(0, 5), 1), ValidationError);
  CHECK(oversample_minority(classes(7, 31), 4) == oversample_minority(classes(7, 31), 4));
}

TEST_CASE("oversampling repeats every minority record before sampling the remainder") {
  const auto out = oversample_minority(classes(3, 10), 2);
  std::map<std::string, int> seen;
  for (const auto& q : out) {
    if (q.intent == Intent::Question) ++seen[q.query];
  }
  // 10 = 3 * 3 + 1: each appears 3 or 4 times.
  for (const auto& [q, n] : seen) CHECK((n == 3 || n == 4));
  CHECK(count(out, Intent::Question) == 10);
}

TEST_CASE("oversampling keeps the distinct majority queries (randomized)") {
  Rng rng(12);
  for (int round = 0; round < 20; ++round) {
    const auto q = 1 + rng.uniform_index(20);
    const auto n = q + rng.uniform_index(60);
    auto data = classes(q, n);
    if (rng.bernoulli(0.5)) {
      for (auto& r : data) r.intent = r.intent == Intent::Question ? Intent::NonQuestion : Intent::Question;
    }
    const auto out = oversample_minority(data, rng.next());
    const Intent majority = count(data, Intent::Question) > count(data, Intent::NonQuestion)
                                ? Intent::Question
                                : Intent::NonQuestion;
    std::multiset<std::string> before, after;
    for (const auto& r : data) if (r.intent == majority) before.insert(r.query);
    for (const auto& r : out) if (r.intent == majority) after.insert(r.query);
    CHECK(before == after);
    const auto diff = static_cast<long>(count(out, Intent::Question)) - static_cast<long>(count(out, Intent::NonQuestion));
    CHECK(std::abs(diff) <= 1);
  }
}

TEST_CASE("training separates a linearly separable set") {
  Rng rng(4);
  const auto train = separable(rng, 300);
  const auto model = train_intent_model(train, {}, small_config(1));
  std::size_t correct = 0;
  for (const auto& q : train) correct += model.classify(q.query).intent == q.intent;
  CHECK(static_cast<double>(correct) / static_cast<double>(train.size()) >= 0.99);
}

TEST_CASE("shuffled labels give chance-level validation F1") {
  Rng rng(6);
  std::vector<std::string> words;
  for (int i = 0; i < 200; ++i) words.push_back("item" + std::to_string(i));
  auto make = [&](std::size_t n) {
    std::vector<LabeledQuery> out;
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back({rng.pick(words) + " " + rng.pick(words), rng.bernoulli(0.5) ? Intent::Question : Intent::NonQuestion, {}, {}});
    }
    return out;
  };
  const auto train = make(600);
  const auto val = make(400);
  const auto model = train_intent_model(train, val, small_config(2));
  std::vector<Intent> pred, gold;
  for (const auto& q : val) {
    pred.push_back(model.classify(q.query).intent);
    gold.push_back(q.intent);
  }
  const auto f1 = compute_classification(pred, gold).f1;
  CHECK(f1 == doctest::Approx(0.5).epsilon(0.2));  // 0.5 +- 0.1
  CHECK(std::abs(f1 - 0.5) <= 0.1);
}

TEST_CASE("training is deterministic per seed") {
  Rng rng(9);
  const auto train = separable(rng, 100);
  const auto a = train_intent_model(train, {}, small_config(3));
  const auto b = train_intent_model(train, {}, small_config(3));
  CHECK(a.weights == b.weights);
  CHECK(a.bias == b.bias);
  CHECK_THROWS_AS(train_intent_model({}, {}, small_config(3)), ValidationError);
}

TEST_CASE("classify follows the logistic of the score") {
  auto m = IntentModel::zeros(1024);
  CHECK(m.probability("anything at all") == 0.5);
  CHECK(m.classify("x").intent == Intent::Question);  // 0.5 >= 0.5

  m.bias = logit(0.91);
  m.decision_threshold = 0.9;
  CHECK(m.probability("apple tv") == doctest::Approx(0.91));
  CHECK(m.classify("apple tv").intent == Intent::Question);

  m.bias = -1.3;
  CHECK(m.probability("") == doctest::Approx(1.0 / (1.0 + std::exp(1.3))));
}

TEST_CASE("raising the threshold never turns NonQuestion into Question") {
  Rng rng(10);
  const auto model = train_intent_model(separable(rng, 200), {}, small_config(5));
  const auto probe = separable(rng, 100);
  for (double lo = 0.05; lo < 0.95; lo += 0.1) {
    auto a = model, b = model;
    a.decision_threshold = lo;
    b.decision_threshold = lo + 0.1;
    for (const auto& q : probe) {
      if (a.classify(q.query).intent == Intent::NonQuestion) {
        CHECK(b.classify(q.query).intent == Intent::NonQuestion);
      }
    }
  }
}

TEST_CASE("intent model round-trips bit-exactly") {
  Rng rng(11);
  auto m = train_intent_model(separable(rng, 80), {}, small_config(6));
  m.decision_threshold = 0.73;
  std::stringstream buf;
  m.save(buf);
  const auto back = IntentModel::load(buf);
  CHECK(back.weights == m.weights);
  CHECK(back.bias == m.bias);
  CHECK(back.dims == m.dims);
  CHECK(back.decision_threshold == m.decision_threshold);
  std::stringstream bad("garbage");
  CHECK_THROWS_AS(IntentModel::load(bad), FormatError);
}

TEST_CASE("BM25 count baseline decisions") {
  const ThresholdBaseline defaults{};
  CHECK(defaults.x == 1);
  CHECK(defaults.y == 0.0);
  CHECK(baseline_decide(defaults, {3, 0.4, 0.0}).intent == Intent::Question);
  CHECK(baseline_decide(defaults, {0, 0.0, 0.0}).intent == Intent::NonQuestion);

  ThresholdBaseline tuned{BaselineKind::Bm25Count, 40, 5.0, 0.6};
  CHECK(baseline_decide(tuned, {12, 9.0, 0.0}).intent == Intent::NonQuestion);
  CHECK(baseline_decide(tuned, {45, 5.0, 0.0}).intent == Intent::NonQuestion);  // top must exceed y
  CHECK(baseline_decide(tuned, {45, 5.1, 0.0}).intent == Intent::Question);
}

TEST_CASE("cosine baseline decisions") {
  ThresholdBaseline b{BaselineKind::CosineSim, 1, 0.0, 0.6};
  CHECK(baseline_decide(b, {0, 0.0, 0.59}).intent == Intent::NonQuestion);
  CHECK(baseline_decide(b, {0, 0.0, 0.6}).intent == Intent::Question);
}

TEST_CASE("baseline probability agrees with its decision (randomized)") {
  Rng rng(13);
  for (int i = 0; i < 500; ++i) {
    ThresholdBaseline b{rng.bernoulli(0.5) ? BaselineKind::Bm25Count : BaselineKind::CosineSim,
                        1 + rng.uniform_index(50), 0.5 * static_cast<double>(rng.uniform_index(21)),
                        rng.uniform_real()};
    const BaselineSignal s{rng.uniform_index(60), 12 * rng.uniform_real(), rng.uniform_real()};
    const auto p = baseline_decide(b, s);
    CHECK((p.probability >= 0.5) == (p.intent == Intent::Question));
    CHECK(p.probability >= 0.0);
    CHECK(p.probability <= 1.0);
  }
}

TEST_CASE("default BM25 baseline fires exactly on queries with a positive hit") {
  Rng rng(14);
  const auto faqs = fixture::random_faqs(rng, 30);
  const auto space = fixture::space_of(faqs);
  for (int i = 0; i < 200; ++i) {
    const auto q = fixture::random_query(rng);
    const bool hit = !bm25_search(space->index(), q, 1).empty();
    CHECK((baseline_predict({}, *space, q).intent == Intent::Question) == hit);
  }
}

TEST_CASE("baseline validation") {
  CHECK_THROWS_AS((ThresholdBaseline{BaselineKind::Bm25Count, 0, 0.0, 0.6}.validate()), ValidationError);
  CHECK_THROWS_AS((ThresholdBaseline{BaselineKind::Bm25Count, 1, -1.0, 0.6}.validate()), ValidationError);
  CHECK_THROWS_AS((ThresholdBaseline{BaselineKind::CosineSim, 1, 0.0, 1.5}.validate()), ValidationError);
  CHECK_THROWS_AS(parse_baseline_kind("tfidf"), ValidationError);
}

TEST_CASE("tuning finds a perfect point when one exists in the grid") {
  // 60 documents share "common"; doc 0 also holds four rare terms, so a
  // question query hits 60 documents with a top score far above 5, while
  // product queries hit one document.
  std::vector<FaqEntry> faqs;
  for (int i = 0; i < 60; ++i) {
    std::string q = "common filler" + std::to_string(i);
    if (i == 0) q += " ra rb rc rd";
    faqs.push_back({"f" + std::to_string(i), q, "", {}});
  }
  const auto space = fixture::space_of(faqs);
  std::vector<LabeledQuery> val;
  for (int i = 0; i < 10; ++i) val.push_back({"common ra rb rc rd", Intent::Question, {}, {}});
  for (int i = 0; i < 30; ++i) val.push_back({"filler" + std::to_string(i), Intent::NonQuestion, {}, {}});

  const auto tuned = tune_thresholds(BaselineKind::Bm25Count, val, *space);
  for (const auto& q : val) {
    CHECK(baseline_predict(tuned, *space, q.query).intent == q.intent);
  }
}

TEST_CASE("single-point grid returns that point") {
  const auto space = fixture::space_of(fixture::device_faqs());
  const std::vector<LabeledQuery> val = {{"kindle reset", Intent::Question, {}, {}},
                                         {"red shoes", Intent::NonQuestion, {}, {}}};
  ThresholdGrid grid{{7}, {2.5}, {0.35}};
  const auto b = tune_thresholds(BaselineKind::Bm25Count, val, *space, grid);
  CHECK(b.x == 7);
  CHECK(b.y == 2.5);
  const auto c = tune_thresholds(BaselineKind::CosineSim, val, *space, grid);
  CHECK(c.cosine_threshold == 0.35);
  CHECK_THROWS_AS(tune_thresholds(BaselineKind::Bm25Count, {}, *space, grid), ValidationError);
}

TEST_CASE("default grids") {
  const auto g = ThresholdGrid::defaults();
  CHECK(g.x_values.size() == 50);
  CHECK(g.x_values.front() == 1);
  CHECK(g.y_values.size() == 21);
  CHECK(g.y_values.back() == 10.0);
  CHECK(g.cosine_values.size() == 19);
  CHECK(g.cosine_values.front() == doctest::Approx(0.05));
  CHECK(g.cosine_values.back() == doctest::Approx(0.95));
}

TEST_CASE("weak label bootstrap") {
  const std::vector<std::string> questions = {"How do I connect a Bluetooth device to my Apple TV", "the of and"};
  const std::vector<std::string> products = {"how to fix sink", "red running shoes"};
  const auto r = bootstrap_weak_labels(questions, products);
  REQUIRE(r.labeled.size() == 2);
  CHECK(r.labeled[0].query == "connect bluetooth device apple tv");
  CHECK(r.labeled[0].intent == Intent::Question);
  CHECK(r.labeled[0].gold_reformulation == questions[0]);
  CHECK(r.labeled[1].query == "red running shoes");
  CHECK(r.labeled[1].intent == Intent::NonQuestion);
  CHECK(r.skipped_questions == 1);
  CHECK(r.filtered_products == 1);
}
