#include <doctest.h>

#include <algorithm>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "faqsearch/corpus.hpp"
#include "faqsearch/errors.hpp"
#include "faqsearch/reformulate.hpp"
#include "faqsearch/textproc.hpp"
#include "fixtures.hpp"

using namespace faqsearch;
using Pattern = std::vector<std::string>;

namespace {

/// Pairs of one question frame over several devices and accessories.
std::vector<ReformulationPair> connect_family() {
  const std::vector<std::pair<std::string, std::string>> fills = {
      {"Bluetooth device", "Apple TV"}, {"wireless keyboard", "Fire tablet"},
      {"game controller", "Apple TV"},  {"Bluetooth speaker", "Kindle"},
      {"USB mouse", "Fire tablet"},     {"headphones", "Echo Show"},
  };
  std::vector<ReformulationPair> out;
  for (const auto& [o, p] : fills) {
    const auto question = "How do I connect a " + o + " to my " + p;
    out.push_back({extract_keywords(question), question});
  }
  return out;
}

}  // namespace

TEST_CASE("mining the worked example pair") {
  const std::vector<ReformulationPair> pairs = {
      {"connect bluetooth device apple tv", "How do I connect a Bluetooth device to my Apple TV"}};
  const auto t = mine_templates(pairs);
  REQUIRE(t.size() == 1);
  CHECK(t[0].pattern == Pattern{"how", "do", "i", "", "to", "my", ""});
  CHECK(t[0].support == 1);
  CHECK(t[0].slot_count() == 2);
  REQUIRE(t[0].slots.size() == 2);
  CHECK(t[0].slots[0].first.count("connect") == 1);
  CHECK(t[0].slots[0].last.count("device") == 1);
  CHECK(t[0].slots[1].all.count("apple") == 1);
}

TEST_CASE("mining merges identical patterns and drops unaligned pairs") {
  const std::vector<ReformulationPair> pairs = {
      {"reset kindle", "How do I reset my Kindle"},
      {"reset echo", "How do I reset my Echo"},
      {"zebra", "How do I reset my Kindle"},
  };
  const auto t = mine_templates(pairs);
  REQUIRE(t.size() == 1);
  CHECK(t[0].support == 2);
  CHECK(t[0].pattern == Pattern{"how", "do", "i", "", "my", ""});
  CHECK(mine_templates(std::vector<ReformulationPair>{{"zebra", "Why?"}}).empty());
}

TEST_CASE("templates are sorted by support") {
  auto pairs = connect_family();
  pairs.push_back({"reset kindle", "How do I reset my Kindle"});
  const auto t = mine_templates(pairs);
  REQUIRE(t.size() == 2);
  CHECK(t[0].support >= t[1].support);
}

TEST_CASE("identity reformulation is a byte-exact no-op") {
  const auto r = Reformulator::identity();
  const auto out = r.reformulate("apple tv bluetooth");
  CHECK(out.text == "apple tv bluetooth");
  CHECK_FALSE(out.degraded);
  CHECK(r.reformulate("  Odd  Spacing ").text == "  Odd  Spacing ");
}

TEST_CASE("template reformulation of the worked example") {
  const auto r = Reformulator::from_templates(mine_templates(connect_family()));
  const auto out = r.reformulate("connect bluetooth device apple tv");
  CHECK(out.text == "how do i connect bluetooth device to my apple tv");
  CHECK_FALSE(out.fallback);
  CHECK(out.template_index.has_value());
}

TEST_CASE("template reformulation falls back when nothing applies") {
  const auto r = Reformulator::from_templates({});
  const auto out = r.reformulate("apple tv");
  CHECK(out.text == "apple tv");
  CHECK(out.fallback);

  // A literal of the only template occurs in the query.
  const auto r2 = Reformulator::from_templates(mine_templates(connect_family()));
  CHECK(r2.reformulate("how to my").fallback);
}

TEST_CASE("template filling uses each query token once, in order (generated corpus)") {
  const auto c = generate_synthetic_corpus({2000, 0.3, 17}, 120);
  std::vector<ReformulationPair> pairs;
  for (const auto& q : c.queries) {
    if (q.gold_reformulation) pairs.push_back({q.query, *q.gold_reformulation});
  }
  const auto r = Reformulator::from_templates(mine_templates(pairs));
  Rng rng(3);
  for (int i = 0; i < 300; ++i) {
    const auto& q = c.queries[rng.uniform_index(c.queries.size())];
    const auto out = r.reformulate(q.query);
    CHECK_FALSE(out.text.empty());
    CHECK(r.reformulate(q.query).text == out.text);
    if (out.fallback) continue;
    const auto& t = r.templates().at(*out.template_index);
    const auto query_tokens = tokenize_terms(q.query);
    const auto words = tokenize_terms(out.text);
    // Remove the literals in pattern order; what remains must be the query.
    std::vector<std::string> rest;
    std::size_t w = 0;
    for (const auto& e : t.pattern) {
      if (!e.empty()) {
        while (w < words.size() && words[w] != e) rest.push_back(words[w++]);
        REQUIRE(w < words.size());
        ++w;
      }
    }
    while (w < words.size()) rest.push_back(words[w++]);
    CHECK(rest == query_tokens);
  }
}

TEST_CASE("fill rejects impossible templates") {
  const auto r = Reformulator::from_templates(mine_templates(connect_family()));
  const std::vector<std::string> one = {"kindle"};
  CHECK_FALSE(r.fill(0, one).has_value());  // two slots, one token
}

TEST_CASE("templates round-trip through line-delimited JSON") {
  const auto t = mine_templates(connect_family());
  std::stringstream buf;
  write_templates(buf, t);
  CHECK(read_templates(buf) == t);

  std::stringstream legacy(R"({"pattern":["how","do","i",null],"support":3})" "\n");
  const auto back = read_templates(legacy);
  REQUIRE(back.size() == 1);
  CHECK(back[0].support == 3);
  CHECK(back[0].slots.size() == 1);

  std::stringstream no_slot(R"({"pattern":["how"],"support":1})" "\n");
  CHECK_THROWS_AS(read_templates(no_slot), ParseError);
}

TEST_CASE("external reformulator falls back and flags degradation when unreachable") {
  const auto r = Reformulator::external({"http://127.0.0.1:9", "/reformulate", std::chrono::milliseconds(200)});
  const auto out = r.reformulate("apple tv bluetooth");
  CHECK(out.text == "apple tv bluetooth");
  CHECK(out.fallback);
  CHECK(out.degraded);
}

TEST_CASE("external reformulator returns the endpoint's question") {
  httplib::Server server;
  server.Post("/reformulate", [](const httplib::Request& req, httplib::Response& res) {
    const bool ok = req.body.find("apple tv") != std::string::npos;
    res.set_content(ok ? R"({"question":"How do I use my Apple TV?"})" : R"({"question":""})",
                    "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  const auto r = Reformulator::external({"http://127.0.0.1:" + std::to_string(port), "/reformulate",
                                         std::chrono::milliseconds(2000)});
  const auto out = r.reformulate("apple tv");
  CHECK(out.text == "How do I use my Apple TV?");
  CHECK_FALSE(out.degraded);
  // An empty answer is not a question.
  const auto empty = r.reformulate("kindle");
  CHECK(empty.text == "kindle");
  CHECK(empty.fallback);

  server.stop();
  t.join();
}

TEST_CASE("reformulator kind names") {
  CHECK(parse_reformulator_kind("template") == ReformulatorKind::Template);
  CHECK(to_string(ReformulatorKind::External) == "external");
  CHECK_THROWS_AS(parse_reformulator_kind("t5"), ValidationError);
}
