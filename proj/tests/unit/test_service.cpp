#include <doctest.h>

#include <httplib.h>
#include <json.hpp>

#include "faqsearch/service.hpp"
#include "fixtures.hpp"

using namespace faqsearch;
using nlohmann::json;

namespace {

std::shared_ptr<const Pipeline> pipeline() {
  PipelineModels m;
  m.space = fixture::space_of(fixture::device_faqs());
  m.gate_override = [](std::string_view q) {
    const bool yes = q.find("bluetooth") != std::string_view::npos || q.find("reset") != std::string_view::npos;
    return IntentPrediction{yes ? Intent::Question : Intent::NonQuestion, yes ? 0.9 : 0.1};
  };
  PipelineConfig c;
  c.reformulator = ReformulatorKind::Identity;
  c.scorer = Scorer::Bm25Only;
  return std::make_shared<const Pipeline>(c, m);
}

std::string feedback_body(const std::string& query, const std::string& faq, const std::string& verdict,
                          const std::string& session) {
  return json{{"query", query}, {"faq_id", faq}, {"verdict", verdict}, {"session_id", session}}.dump();
}

}  // namespace

TEST_CASE("search responses") {
  SearchService svc(pipeline(), nullptr);
  const auto q = svc.handle_search("apple tv bluetooth", "s1");
  CHECK(q.status == 200);
  const auto body = json::parse(q.body);
  CHECK(body["faq"]["id"] == "faq-1");
  CHECK(body["faq"].contains("answer"));
  CHECK(body["intent"]["label"] == "question");
  CHECK(body["products"].is_array());
  CHECK(body["degraded"] == false);
  CHECK(body["timings"].contains("retrieve"));

  const auto n = json::parse(svc.handle_search("apple tv 4k", "s1").body);
  CHECK(n["faq"].is_null());
  CHECK(n["intent"]["label"] == "non_question");
  CHECK_FALSE(n["products"].empty());

  CHECK(svc.handle_search("", "s1").status == 400);
  CHECK(svc.handle_health().status == 200);
}

TEST_CASE("feedback is validated against what was served") {
  fixture::TempDir dir;
  FeedbackLog::Options o;
  o.path = dir / "fb.jsonl";
  auto log = std::make_shared<FeedbackLog>(o);
  SearchService svc(pipeline(), log);
  svc.handle_search("reset kindle", "s1");

  const auto ok = svc.handle_feedback(feedback_body("reset kindle", "faq-2", "helpful", "s1"));
  CHECK(ok.status == 200);
  CHECK(json::parse(ok.body)["status"] == "recorded");
  CHECK(json::parse(svc.handle_feedback(feedback_body("Reset  Kindle", "faq-2", "helpful", "s1")).body)["status"] ==
        "duplicate");
  CHECK(read_feedback_log(o.path).records.size() == 1);

  CHECK(svc.handle_feedback(feedback_body("reset kindle", "faq-2", "love it", "s1")).status == 400);
  CHECK(svc.handle_feedback(feedback_body("reset kindle", "faq-3", "helpful", "s1")).status == 422);
  CHECK(svc.handle_feedback(feedback_body("reset kindle", "faq-2", "helpful", "other")).status == 422);
  CHECK(svc.handle_feedback("not json").status == 400);
  CHECK(svc.handle_feedback(R"({"query":"x"})").status == 400);
  CHECK(read_feedback_log(o.path).records.size() == 1);

  SearchService no_log(pipeline(), nullptr);
  CHECK(no_log.handle_feedback(feedback_body("a", "b", "helpful", "c")).status == 503);
}

TEST_CASE("served cache evicts least recently used entries") {
  ServedCache cache(2, std::chrono::minutes(1));
  const auto now = std::chrono::steady_clock::now();
  cache.put("s", "a", {"f1", false, now});
  cache.put("s", "b", {"f2", false, now});
  CHECK(cache.get("s", "a").has_value());  // refreshes a
  cache.put("s", "c", {"f3", false, now});
  CHECK(cache.size() == 2);
  CHECK_FALSE(cache.get("s", "b").has_value());
  CHECK(cache.get("s", "A").has_value());

  ServedCache expiring(4, std::chrono::milliseconds(0));
  expiring.put("s", "a", {"f1", false, now - std::chrono::seconds(1)});
  CHECK_FALSE(expiring.get("s", "a").has_value());
}

TEST_CASE("HTTP surface") {
  fixture::TempDir dir;
  FeedbackLog::Options o;
  o.path = dir / "fb.jsonl";
  auto svc = std::make_shared<SearchService>(pipeline(), std::make_shared<FeedbackLog>(o));
  HttpServer server(svc);
  const int port = server.start("127.0.0.1", 0);
  httplib::Client client("127.0.0.1", port);

  auto r = client.Get("/search?q=apple%20tv%20bluetooth&session=web");
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(json::parse(r->body)["faq"]["id"] == "faq-1");

  auto bad = client.Get("/search");
  REQUIRE(bad);
  CHECK(bad->status == 400);

  auto fb = client.Post("/feedback", feedback_body("apple tv bluetooth", "faq-1", "helpful", "web"),
                        "application/json");
  REQUIRE(fb);
  CHECK(fb->status == 200);
  CHECK(read_feedback_log(o.path).records.size() == 1);

  auto health = client.Get("/healthz");
  REQUIRE(health);
  CHECK(health->status == 200);
  server.stop();
}
