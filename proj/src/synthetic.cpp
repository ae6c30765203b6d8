// Desk-scale synthetic FAQ corpus and labeled traffic.
//
// FAQs are grouped into topics (verb, object, product). A topic emits one to
// three sibling questions from its family's frames; within the connect,
// maintain and order families sibling frames share the same content words in
// a different order, so the keyword projection drops exactly the phrasing
// that tells siblings apart.

#include <array>
#include <cmath>
#include <cstdio>
#include <string_view>
#include <unordered_set>

#include "faqsearch/corpus.hpp"
#include "faqsearch/errors.hpp"
#include "faqsearch/random.hpp"
#include "faqsearch/textproc.hpp"

namespace faqsearch {
namespace {

struct Family {
  std::string_view name;
  std::vector<std::string_view> verbs;  // empty: frames have no {v}
  std::vector<std::string_view> objects;
  std::vector<std::string_view> frames;
  // Annotator rewordings per frame. Each keeps the frame's keywords.
  std::vector<std::vector<std::string_view>> rewordings;
  std::string_view answer;
};

const std::vector<std::string_view>& products() {
  static const std::vector<std::string_view> v = {
      "apple tv",     "kindle",          "echo dot",      "fire tablet",     "airpods",
      "laptop",       "printer",         "smart watch",   "wifi router",     "game console",
      "headphones",   "security camera", "robot vacuum",  "coffee maker",    "smart thermostat",
      "smart speaker", "phone",          "soundbar",      "smart tv",        "doorbell camera",
      "fitness tracker", "drone",        "dash cam",      "projector",       "e reader"};
  return v;
}

const std::vector<Family>& families() {
  static const std::vector<Family> v = {
      {"connect",
       {"connect", "pair", "link", "sync"},
       {"bluetooth device", "wireless keyboard", "wifi network", "phone app", "smart home hub",
        "external speaker", "game controller", "mobile hotspot"},
       {"How do I {v} {a} {o} to my {p}?", "Why won't my {p} {v} to {a} {o}?",
        "What should I do if {a} {o} won't {v} to my {p}?"},
       {{"How can I {v} {a} {o} to my {p}?", "How do I {v} {a} {o} with my {p}?"},
        {"Why won't my {p} {v} with {a} {o}?", "Any idea why my {p} won't {v} to {a} {o}?"},
        {"What can I do when {a} {o} won't {v} to my {p}?",
         "What should I do when {a} {o} will not {v} to my {p}?"}},
       "Open Settings on your {p}, choose {o}, and follow the prompts to {v} it."},
      {"maintain",
       {"reset", "update", "replace", "clean", "calibrate"},
       {"battery", "firmware", "remote", "screen", "filter", "charging cable", "power adapter",
        "memory card", "software", "sensor"},
       {"How do I {v} the {o} on my {p}?", "Why should I {v} my {p} {o}?",
        "My {p} {o} will not {v}, what can I do?"},
       {{"How can I {v} the {o} on my {p}?", "What is the best way to {v} the {o} on my {p}?"},
        {"Why do I need to {v} my {p} {o}?", "Why would I {v} my {p} {o}?"},
        {"What do I do if my {p} {o} will not {v}?", "My {p} {o} won't {v}, what should I do?"}},
       "Turn off the {p}, locate the {o}, and {v} it following the manual."},
      {"order",
       {"return", "cancel", "track", "exchange"},
       {"order", "gift card", "package", "warranty claim", "subscription", "replacement part",
        "protection plan"},
       {"How can I {v} my {p} {o}?", "Can I {v} {a} {o} for my {p}?",
        "What is the policy to {v} {a} {p} {o}?"},
       {{"How do I {v} my {p} {o}?", "How would I {v} my {p} {o}?"},
        {"Is it possible to {v} {a} {o} for my {p}?", "Am I able to {v} {a} {o} for my {p}?"},
        {"Is there a policy to {v} {a} {p} {o}?", "What policy applies if I {v} {a} {p} {o}?"}},
       "Go to Your Orders, select the {p} {o}, and choose {v}."},
      {"info",
       {},
       {"bluetooth audio", "dolby atmos", "4k video", "voice control", "usb c charging",
        "fast charging", "parental controls", "offline mode", "screen mirroring"},
       {"Does the {p} support {o}?", "Is {o} compatible with my {p}?",
        "Where can I find {o} settings on my {p}?"},
       {{"Can the {p} support {o}?", "Does my {p} support {o}?"},
        {"Is {o} compatible with the {p}?", "Will {o} be compatible with my {p}?"},
        {"Where do I find the {o} settings on my {p}?", "How can I find {o} settings on my {p}?"}},
       "Yes. Check the {p} specifications page for {o} details."},
  };
  return v;
}

const std::vector<std::string_view> kAttributes = {
    "red",  "black", "white", "blue",  "wireless", "cheap", "refurbished", "mini",  "pro",
    "portable", "waterproof", "kids", "large", "small", "best", "new", "2024", "64gb",
    "128gb", "4k", "deals", "used", "gift", "premium", "slim"};

const std::vector<std::string_view> kAccessories = {
    "case",  "cover",  "charger", "cable",   "stand",  "mount",  "remote", "screen protector",
    "battery", "bundle", "replacement", "strap", "bag", "adapter", "filter", "skin", "holder",
    "dock",  "sale"};

const std::vector<std::string_view> kShoppableObjects = {
    "bluetooth speaker", "wireless keyboard", "usb c cable", "game controller",
    "charging cable", "power adapter", "memory card", "wifi extender", "smart plug",
    "hdmi cable"};

std::string fill(std::string_view pattern, std::string_view verb, std::string_view object,
                 std::string_view product) {
  const bool vowel = !object.empty() && std::string_view("aeiou").find(object.front()) !=
                                            std::string_view::npos;
  std::string out;
  for (std::size_t i = 0; i < pattern.size();) {
    if (pattern[i] == '{' && i + 2 < pattern.size() && pattern[i + 2] == '}') {
      switch (pattern[i + 1]) {
        case 'v': out += verb; break;
        case 'o': out += object; break;
        case 'p': out += product; break;
        case 'a': out += vowel ? "an" : "a"; break;
        default: out += pattern.substr(i, 3); break;
      }
      i += 3;
    } else {
      out.push_back(pattern[i++]);
    }
  }
  return out;
}

std::string capitalize_first(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 32);
  return s;
}

std::string product_query(Rng& rng) {
  const auto& p = rng.pick(products());
  switch (rng.uniform_index(6)) {
    case 0: return std::string(rng.pick(kAttributes)) + " " + std::string(p);
    case 1: return std::string(p) + " " + std::string(rng.pick(kAccessories));
    case 2:
      return std::string(rng.pick(kAttributes)) + " " + std::string(p) + " " +
             std::string(rng.pick(kAccessories));
    case 3:
      return std::string(p) + " " + std::string(rng.pick(kAccessories)) + " " +
             std::string(rng.pick(kAttributes));
    case 4: return std::string(rng.pick(kAttributes)) + " " + std::string(rng.pick(kShoppableObjects));
    default: return std::string(rng.pick(kShoppableObjects)) + " for " + std::string(p);
  }
}

}  // namespace

SyntheticCorpus generate_synthetic_corpus(const TrafficProfile& profile, std::size_t faq_count) {
  if (faq_count < 1) throw ValidationError("faq_count must be at least 1");
  if (!(profile.question_intent_fraction >= 0.0 && profile.question_intent_fraction <= 1.0)) {
    throw ValidationError("question_intent_fraction must lie in [0, 1]");
  }

  Rng rng(profile.seed);
  SyntheticCorpus out;
  std::unordered_set<std::string> questions;
  std::unordered_set<std::string> projections;
  std::vector<std::string> keyword_of;
  struct Source {
    const Family* family;
    std::size_t frame;
    std::string_view verb, object, product;
  };
  std::vector<Source> source_of;

  const std::size_t max_attempts = faq_count * 200 + 1000;
  for (std::size_t attempt = 0; out.faqs.size() < faq_count; ++attempt) {
    if (attempt >= max_attempts) {
      throw ValidationError("vocabulary exhausted after " + std::to_string(out.faqs.size()) +
                            " FAQs");
    }
    const auto& fam = rng.pick(families());
    const std::string_view verb = fam.verbs.empty() ? std::string_view{} : rng.pick(fam.verbs);
    const auto object = rng.pick(fam.objects);
    const auto product = rng.pick(products());

    std::vector<std::size_t> frames(fam.frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) frames[i] = i;
    rng.shuffle(std::span<std::size_t>(frames));
    const double u = rng.uniform_real();
    const std::size_t siblings = u < 0.3 ? 1 : (u < 0.7 ? 2 : 3);

    for (std::size_t s = 0; s < siblings && out.faqs.size() < faq_count; ++s) {
      auto question = capitalize_first(fill(fam.frames[frames[s]], verb, object, product));
      auto keywords = extract_keywords(question);
      if (questions.count(question) || projections.count(keywords)) continue;
      questions.insert(question);
      projections.insert(keywords);

      FaqEntry e;
      char id[32];
      std::snprintf(id, sizeof id, "faq-%04zu", out.faqs.size() + 1);
      e.id = id;
      e.question = std::move(question);
      e.answer = fill(fam.answer, verb, object, product);
      e.tags = {std::string(fam.name), std::string(product), std::string(object)};
      out.faqs.push_back(std::move(e));
      keyword_of.push_back(std::move(keywords));
      source_of.push_back({&fam, frames[s], verb, object, product});
    }
  }

  const auto question_count = static_cast<std::size_t>(
      std::llround(static_cast<double>(profile.total_queries) * profile.question_intent_fraction));

  std::vector<std::size_t> order;
  for (std::size_t q = 0; q < question_count; ++q) {
    if (order.empty()) {
      order.resize(out.faqs.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = out.faqs.size() - 1 - i;
      rng.shuffle(std::span<std::size_t>(order));
    }
    const std::size_t f = order.back();
    order.pop_back();
    LabeledQuery lq;
    lq.query = keyword_of[f];
    lq.intent = Intent::Question;
    lq.gold_faq_id = out.faqs[f].id;
    const auto& src = source_of[f];
    lq.gold_reformulation = capitalize_first(
        fill(rng.pick(src.family->rewordings[src.frame]), src.verb, src.object, src.product));
    out.queries.push_back(std::move(lq));
  }
  for (std::size_t q = question_count; q < profile.total_queries; ++q) {
    LabeledQuery lq;
    lq.query = product_query(rng);
    lq.intent = Intent::NonQuestion;
    out.queries.push_back(std::move(lq));
  }
  rng.shuffle(std::span<LabeledQuery>(out.queries));
  return out;
}

}  // namespace faqsearch
