#include <doctest.h>

#include <algorithm>

#include "faqsearch/corpus.hpp"
#include "faqsearch/errors.hpp"
#include "faqsearch/textproc.hpp"
#include "fixtures.hpp"

using namespace faqsearch;
using Terms = std::vector<std::string>;

TEST_CASE("tokenize lowercases and splits on non-alphanumerics") {
  CHECK(tokenize_terms("Apple TV bluetooth?") == Terms{"apple", "tv", "bluetooth"});
  CHECK(tokenize_terms("").empty());
  CHECK(tokenize_terms("wi-fi 6E") == Terms{"wi", "fi", "6e"});
  CHECK(tokenize_terms("ÉCRAN Ärger ΣΟΦΙΑ") == Terms{"écran", "ärger", "σοφια"});
}

TEST_CASE("token offsets are increasing, disjoint and point at the token") {
  const std::string text = "  How do I, connect  a Bluetooth-device?";
  const auto ts = tokenize(text);
  REQUIRE(ts.tokens.size() == ts.offsets.size());
  std::size_t last_end = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto [b, e] = ts.offsets[i];
    CHECK(b >= last_end);
    CHECK(e > b);
    last_end = e;
    CHECK(tokenize_terms(text.substr(b, e - b)) == Terms{ts.tokens[i]});
    CHECK(ts.tokens[i].find(' ') == std::string::npos);
  }
}

TEST_CASE("extract keywords") {
  CHECK(extract_keywords("How do I connect a Bluetooth device to my Apple TV") ==
        "connect bluetooth device apple tv");
  CHECK(extract_keywords("Does Apple TV support Bluetooth") == "apple tv support bluetooth");
  CHECK_THROWS_AS(extract_keywords("the of and"), EmptyResultError);
}

TEST_CASE("RAKE phrases are scored by summed degree over frequency") {
  // Phrases: [connect bluetooth device] [apple tv]. Every word occurs once;
  // degree counts co-occurring words including itself.
  const auto phrases = rake_phrases("How do I connect a Bluetooth device to my Apple TV");
  REQUIRE(phrases.size() == 3);
  CHECK(phrases[0].words == Terms{"connect"});
  CHECK(phrases[0].score == doctest::Approx(1.0));
  CHECK(phrases[1].words == Terms{"bluetooth", "device"});
  CHECK(phrases[1].score == doctest::Approx(4.0));
  CHECK(phrases[2].words == Terms{"apple", "tv"});
  CHECK(phrases[2].score == doctest::Approx(4.0));
}

TEST_CASE("keywords keep order and drop stopwords (generated questions)") {
  const auto& stop = StopwordList::builtin();
  const auto c = generate_synthetic_corpus({10, 0.0, 8}, 150);
  for (const auto& f : c.faqs) {
    const auto kw = tokenize_terms(extract_keywords(f.question));
    const auto all = tokenize_terms(f.question);
    for (const auto& w : kw) CHECK_FALSE(stop.contains(w));
    // Keywords are a subsequence of the question tokens.
    auto it = all.begin();
    for (const auto& w : kw) {
      it = std::find(it, all.end(), w);
      REQUIRE(it != all.end());
      ++it;
    }
  }
}

TEST_CASE("stopword list parsing") {
  const auto s = StopwordList::from_text("# comment\nthe\n\n  And \n");
  CHECK(s.size() == 2);
  CHECK(s.contains("the"));
  CHECK(s.contains("and"));
  CHECK(StopwordList::builtin().size() > 100);
}

TEST_CASE("question-word filter") {
  CHECK(starts_with_question_word("how to return a package"));
  CHECK(starts_with_question_word("Would it fit"));
  CHECK_FALSE(starts_with_question_word("apple tv bluetooth"));
  CHECK_FALSE(starts_with_question_word(""));
  CHECK_FALSE(starts_with_question_word("however long"));
}

TEST_CASE("tfidf vectors") {
  const Terms docs = {"connect bluetooth apple tv", "reset kindle", "return package receipt"};
  const auto stats = TfidfStats::build(docs);
  const auto v = stats.vectorize("connect apple tv");
  CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cosine(v, stats.vectorize("connect apple tv")) == doctest::Approx(1.0));
  CHECK(cosine(stats.vectorize("reset kindle"), stats.vectorize("return package")) == 0.0);
  CHECK(stats.vectorize("unknown words only").empty());
  // Smoothed idf: ln((1+N)/(1+df)) + 1.
  CHECK(stats.idf("kindle") == doctest::Approx(std::log(4.0 / 2.0) + 1.0));
}

TEST_CASE("tfidf cosine lies in [0, 1] (randomized)") {
  Rng rng(3);
  const auto faqs = fixture::random_faqs(rng, 40);
  Terms docs;
  for (const auto& f : faqs) docs.push_back(f.question);
  const auto stats = TfidfStats::build(docs);
  for (int i = 0; i < 300; ++i) {
    const double c = cosine(stats.vectorize(fixture::random_query(rng)), stats.vectorize(fixture::random_query(rng)));
    CHECK(c >= 0.0);
    CHECK(c <= 1.0 + 1e-12);
  }
}

TEST_CASE("sparse vector construction merges, sorts and drops zeros") {
  const auto v = SparseVector::from_unsorted({{5, 1.0}, {2, 2.0}, {5, -1.0}, {2, 0.5}, {9, 3.0}});
  CHECK(v.indices == std::vector<std::uint32_t>{2, 9});
  CHECK(v.weights == std::vector<double>{2.5, 3.0});
}

TEST_CASE("FNV-1a reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("hash features") {
  CHECK(hash_features("apple tv bluetooth") == hash_features("apple tv bluetooth"));
  CHECK(hash_features("apple tv") != hash_features("tv apple"));
  CHECK(hash_features("").empty());
  const auto v = hash_features("how do i connect", 1024);
  CHECK(v.norm() == doctest::Approx(1.0));
  for (auto i : v.indices) CHECK(i < 1024);
  CHECK_THROWS_AS(hash_features("x", 1000), ValidationError);
  CHECK_THROWS_AS(hash_features("x", 512), ValidationError);
}

TEST_CASE("hash features of a 100-string fixture are pinned") {
  constexpr std::uint64_t kPinnedDigest = 17985565053893945869ULL;
  // Any change to tokenization, hashing or n-gram layout changes this digest,
  // which would silently invalidate saved intent models.
  std::uint64_t digest = 0xcbf29ce484222325ULL;
  for (int i = 0; i < 100; ++i) {
    const auto v = hash_features("query number " + std::to_string(i) + " apple tv bluetooth");
    for (std::size_t k = 0; k < v.size(); ++k) {
      digest = (digest ^ v.indices[k]) * 0x100000001b3ULL;
      digest = (digest ^ static_cast<std::uint64_t>(std::llround(v.weights[k] * 1e9))) * 0x100000001b3ULL;
    }
  }
  MESSAGE("digest " << digest);
  CHECK(digest == kPinnedDigest);
}
