#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "faqsearch/corpus.hpp"
#include "faqsearch/errors.hpp"
#include "faqsearch/textproc.hpp"
#include "fixtures.hpp"

using namespace faqsearch;

namespace {

std::vector<LabeledQuery> labeled(std::size_t questions, std::size_t others) {
  std::vector<LabeledQuery> out;
  for (std::size_t i = 0; i < questions; ++i) out.push_back({"question " + std::to_string(i), Intent::Question, {}, {}});
  for (std::size_t i = 0; i < others; ++i) out.push_back({"product " + std::to_string(i), Intent::NonQuestion, {}, {}});
  return out;
}

double question_share(const std::vector<LabeledQuery>& v) {
  std::size_t q = 0;
  for (const auto& r : v) q += r.intent == Intent::Question;
  return v.empty() ? 0.0 : static_cast<double>(q) / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("FAQ corpus file with three records loads three entries") {
  std::istringstream in(
      R"({"id":"a","question":"How do I pair?","answer":"x","tags":["t"]})" "\n"
      R"({"id":"b","question":"Why?","answer":"y"})" "\n"
      R"({"id":"c","question":"What?","answer":"z","tags":[]})" "\n");
  const auto faqs = read_faq_corpus(in);
  REQUIRE(faqs.size() == 3);
  CHECK(faqs[0].tags == std::vector<std::string>{"t"});
  CHECK(faqs[1].tags.empty());
}

TEST_CASE("duplicate FAQ id is rejected naming the id") {
  std::string text;
  for (int i = 1; i <= 5; ++i) {
    const std::string id = (i == 2 || i == 5) ? "faq-1" : "faq-x" + std::to_string(i);
    text += R"({"id":")" + id + R"(","question":"q )" + std::to_string(i) + R"(","answer":"a"})" "\n";
  }
  std::istringstream in(text);
  try {
    read_faq_corpus(in);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("faq-1") != std::string::npos);
  }
}

TEST_CASE("empty FAQ file is an empty corpus") {
  std::istringstream in("");
  CHECK(read_faq_corpus(in).empty());
}

TEST_CASE("malformed FAQ line reports its line number") {
  std::istringstream in(R"({"id":"a","question":"q","answer":"a"})" "\n" "{not json\n");
  try {
    read_faq_corpus(in);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("FAQ and labeled-query files round-trip") {
  fixture::TempDir dir;
  const auto faqs = fixture::device_faqs();
  save_faq_corpus(dir / "faqs.jsonl", faqs);
  CHECK(load_faq_corpus(dir / "faqs.jsonl") == faqs);

  std::vector<LabeledQuery> qs = {
      {"connect bluetooth device apple tv", Intent::Question, "faq-1", "How do I connect a Bluetooth device to my Apple TV?"},
      {"apple tv 4k", Intent::NonQuestion, {}, {}},
  };
  save_labeled_queries(dir / "q.jsonl", qs);
  CHECK(load_labeled_queries(dir / "q.jsonl", faqs) == qs);
}

TEST_CASE("labeled query invariants") {
  const auto faqs = fixture::device_faqs();
  CHECK_THROWS_AS(validate_labeled_query({" ", Intent::Question, {}, {}}), ValidationError);
  CHECK_THROWS_AS(validate_labeled_query({"x", Intent::NonQuestion, {}, "Why?"}), ValidationError);
  CHECK_THROWS_AS(validate_labeled_query({"x", Intent::Question, "faq-404", {}}, faqs), ValidationError);
  CHECK_NOTHROW(validate_labeled_query({"x", Intent::Question, "faq-2", {}}, faqs));
  CHECK_THROWS_AS(parse_intent("maybe"), ValidationError);
}

TEST_CASE("split of 100 queries at 0.5/0.25/0.25 is 50/25/25") {
  const auto data = labeled(30, 70);
  const auto s = split_dataset(data, {0.5, 0.25, 0.25}, 3);
  CHECK(s.train.size() == 50);
  CHECK(s.validation.size() == 25);
  CHECK(s.test.size() == 25);
}

TEST_CASE("split is deterministic per seed") {
  const auto data = labeled(30, 70);
  const auto a = split_dataset(data, {0.5, 0.25, 0.25}, 9);
  const auto b = split_dataset(data, {0.5, 0.25, 0.25}, 9);
  CHECK(a.train == b.train);
  CHECK(a.validation == b.validation);
  CHECK(a.test == b.test);
}

TEST_CASE("split is stratified by intent") {
  const auto s = split_dataset(labeled(4, 16), {0.5, 0.25, 0.25}, 1);
  // 10/5/5 items; a 0.2 share is 2/1/1 questions.
  CHECK(question_share(s.train) == doctest::Approx(0.2));
  CHECK(question_share(s.validation) == doctest::Approx(0.2));
  CHECK(question_share(s.test) == doctest::Approx(0.2));
}

TEST_CASE("split ratios must sum to one") {
  CHECK_THROWS_AS(split_dataset(labeled(2, 2), {0.5, 0.5, 0.5}, 1), ValidationError);
}

TEST_CASE("split partitions the input multiset (randomized)") {
  Rng rng(21);
  for (int round = 0; round < 25; ++round) {
    std::vector<LabeledQuery> data;
    const auto n = 5 + rng.uniform_index(80);
    for (std::size_t i = 0; i < n; ++i) {
      // Repeated strings must stay in one split.
      const auto id = rng.uniform_index(n / 2 + 1);
      const auto intent = id % 4 == 0 ? Intent::Question : Intent::NonQuestion;
      data.push_back({"q" + std::to_string(id), intent, {}, {}});
    }
    const double train = 0.2 + 0.6 * rng.uniform_real();
    const double val = (1.0 - train) / 2;
    const auto s = split_dataset(data, {train, val, 1.0 - train - val}, rng.next());

    std::multiset<std::string> in, out;
    for (const auto& q : data) in.insert(q.query);
    std::set<std::string> seen[3];
    const std::vector<LabeledQuery>* parts[3] = {&s.train, &s.validation, &s.test};
    for (int p = 0; p < 3; ++p) {
      for (const auto& q : *parts[p]) {
        out.insert(q.query);
        seen[p].insert(q.query);
      }
    }
    CHECK(in == out);
    for (int a = 0; a < 3; ++a) {
      for (int b = a + 1; b < 3; ++b) {
        for (const auto& q : seen[a]) CHECK(seen[b].count(q) == 0);
      }
    }
  }
}

TEST_CASE("synthetic corpus: 1000 queries at 0.1 over 50 FAQs") {
  const auto c = generate_synthetic_corpus({1000, 0.1, 5}, 50);
  CHECK(c.faqs.size() == 50);
  CHECK(c.queries.size() == 1000);
  std::set<std::string> ids;
  for (const auto& f : c.faqs) ids.insert(f.id);
  std::size_t questions = 0;
  for (const auto& q : c.queries) {
    if (q.intent != Intent::Question) {
      CHECK_FALSE(q.gold_faq_id.has_value());
      continue;
    }
    ++questions;
    REQUIRE(q.gold_faq_id.has_value());
    CHECK(ids.count(*q.gold_faq_id) == 1);
    CHECK(q.gold_reformulation.has_value());
  }
  CHECK(questions == 100);
  for (const auto& q : c.queries) CHECK_NOTHROW(validate_labeled_query(q, c.faqs));
}

TEST_CASE("synthetic question queries are keyword projections of their FAQ") {
  const auto c = generate_synthetic_corpus({400, 0.5, 2}, 40);
  std::map<std::string, std::string> question_of;
  for (const auto& f : c.faqs) question_of[f.id] = f.question;
  for (const auto& q : c.queries) {
    if (q.intent == Intent::Question) CHECK(q.query == extract_keywords(question_of.at(*q.gold_faq_id)));
  }
}

TEST_CASE("synthetic fraction 0 yields no question queries") {
  const auto c = generate_synthetic_corpus({300, 0.0, 5}, 20);
  for (const auto& q : c.queries) CHECK(q.intent == Intent::NonQuestion);
}

TEST_CASE("synthetic corpus is byte-identical per seed") {
  auto dump = [](std::uint64_t seed) {
    const auto c = generate_synthetic_corpus({500, 0.2, seed}, 60);
    std::ostringstream out;
    write_faq_corpus(out, c.faqs);
    write_labeled_queries(out, c.queries);
    return out.str();
  };
  CHECK(dump(4) == dump(4));
  CHECK(dump(4) != dump(5));
}

TEST_CASE("synthetic corpus preconditions") {
  CHECK_THROWS_AS(generate_synthetic_corpus({10, 0.1, 1}, 0), ValidationError);
  CHECK_THROWS_AS(generate_synthetic_corpus({10, 1.5, 1}, 5), ValidationError);
}
