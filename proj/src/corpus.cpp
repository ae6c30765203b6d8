#include "faqsearch/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "faqsearch/errors.hpp"
#include "faqsearch/random.hpp"
#include "faqsearch/textproc.hpp"

namespace faqsearch {
namespace {

using nlohmann::json;

std::string required_string(const json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw ParseError(line, std::string("missing string field \"") + key + "\"");
  }
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw ParseError(line, std::string("field \"") + key + "\" must be a string");
  return it->get<std::string>();
}

json parse_line(const std::string& text, std::size_t line) {
  try {
    auto j = json::parse(text);
    if (!j.is_object()) throw ParseError(line, "record is not an object");
    return j;
  } catch (const json::parse_error& e) {
    throw ParseError(line, e.what());
  }
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

template <typename Fn>
void for_each_record(std::istream& in, Fn&& fn) {
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (blank(text)) continue;
    fn(parse_line(text, line), line);
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  return out;
}

}  // namespace

std::string_view to_string(Intent intent) {
  return intent == Intent::Question ? "question" : "non_question";
}

Intent parse_intent(std::string_view s) {
  if (s == "question") return Intent::Question;
  if (s == "non_question") return Intent::NonQuestion;
  throw ValidationError("unknown intent \"" + std::string(s) + "\"");
}

std::vector<FaqEntry> read_faq_corpus(std::istream& in) {
  std::vector<FaqEntry> corpus;
  std::unordered_map<std::string, std::size_t> seen;  // id -> line
  for_each_record(in, [&](const json& j, std::size_t line) {
    FaqEntry e;
    e.id = required_string(j, "id", line);
    e.question = required_string(j, "question", line);
    e.answer = j.contains("answer") && j["answer"].is_string() ? j["answer"].get<std::string>() : "";
    if (auto it = j.find("tags"); it != j.end() && !it->is_null()) {
      if (!it->is_array()) throw ParseError(line, "field \"tags\" must be an array");
      for (const auto& t : *it) {
        if (!t.is_string()) throw ParseError(line, "tags must be strings");
        e.tags.push_back(t.get<std::string>());
      }
    }
    if (e.id.empty()) throw ParseError(line, "empty id");
    if (blank(e.question)) throw ValidationError("FAQ \"" + e.id + "\" has an empty question");
    auto [it, inserted] = seen.emplace(e.id, line);
    if (!inserted) {
      throw ValidationError("duplicate FAQ id \"" + e.id + "\" on line " + std::to_string(line) +
                            " (first on line " + std::to_string(it->second) + ")");
    }
    corpus.push_back(std::move(e));
  });
  return corpus;
}

std::vector<FaqEntry> load_faq_corpus(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_faq_corpus(in);
}

void write_faq_corpus(std::ostream& out, std::span<const FaqEntry> corpus) {
  for (const auto& e : corpus) {
    json j = {{"id", e.id}, {"question", e.question}, {"answer", e.answer}, {"tags", e.tags}};
    out << j.dump() << '\n';
  }
}

void save_faq_corpus(const std::filesystem::path& path, std::span<const FaqEntry> corpus) {
  auto out = open_output(path);
  write_faq_corpus(out, corpus);
}

void validate_labeled_query(const LabeledQuery& q, std::span<const FaqEntry> corpus) {
  if (blank(q.query)) throw ValidationError("empty query");
  if (q.gold_reformulation && q.intent != Intent::Question) {
    throw ValidationError("gold reformulation on non-question query \"" + q.query + "\"");
  }
  if (q.gold_faq_id && !corpus.empty()) {
    const bool found = std::any_of(corpus.begin(), corpus.end(),
                                   [&](const FaqEntry& e) { return e.id == *q.gold_faq_id; });
    if (!found) throw ValidationError("unknown gold FAQ id \"" + *q.gold_faq_id + "\"");
  }
}

std::vector<LabeledQuery> read_labeled_queries(std::istream& in, std::span<const FaqEntry> corpus) {
  std::unordered_set<std::string> ids;
  for (const auto& e : corpus) ids.insert(e.id);
  std::vector<LabeledQuery> out;
  for_each_record(in, [&](const json& j, std::size_t line) {
    LabeledQuery q;
    q.query = required_string(j, "query", line);
    try {
      q.intent = parse_intent(required_string(j, "intent", line));
    } catch (const ValidationError& e) {
      throw ParseError(line, e.what());
    }
    q.gold_faq_id = optional_string(j, "gold_faq_id", line);
    q.gold_reformulation = optional_string(j, "gold_reformulation", line);
    try {
      validate_labeled_query(q);
    } catch (const ValidationError& e) {
      throw ParseError(line, e.what());
    }
    if (q.gold_faq_id && !corpus.empty() && !ids.count(*q.gold_faq_id)) {
      throw ValidationError("line " + std::to_string(line) + ": unknown gold FAQ id \"" +
                            *q.gold_faq_id + "\"");
    }
    out.push_back(std::move(q));
  });
  return out;
}

std::vector<LabeledQuery> load_labeled_queries(const std::filesystem::path& path,
                                               std::span<const FaqEntry> corpus) {
  auto in = open_input(path);
  return read_labeled_queries(in, corpus);
}

void write_labeled_queries(std::ostream& out, std::span<const LabeledQuery> data) {
  for (const auto& q : data) {
    json j = {{"query", q.query}, {"intent", to_string(q.intent)}};
    if (q.gold_faq_id) j["gold_faq_id"] = *q.gold_faq_id;
    if (q.gold_reformulation) j["gold_reformulation"] = *q.gold_reformulation;
    out << j.dump() << '\n';
  }
}

void save_labeled_queries(const std::filesystem::path& path, std::span<const LabeledQuery> data) {
  auto out = open_output(path);
  write_labeled_queries(out, data);
}

DatasetSplit split_dataset(std::span<const LabeledQuery> data, SplitRatios ratios,
                           std::uint64_t seed) {
  const double r[3] = {ratios.train, ratios.validation, ratios.test};
  for (double v : r) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("split ratios must lie in [0, 1]");
  }
  if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) {
    throw ValidationError("split ratios must sum to 1");
  }

  // Group identical query strings; a group takes the label of its first record.
  std::vector<std::vector<std::size_t>> groups;
  std::unordered_map<std::string, std::size_t> group_of;
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto [it, inserted] = group_of.try_emplace(data[i].query, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(i);
  }
  std::vector<std::size_t> strata[2];
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const bool question = data[groups[g].front()].intent == Intent::Question;
    strata[question ? 0 : 1].push_back(g);
  }

  Rng rng(seed);
  std::vector<LabeledQuery>* targets[3];
  DatasetSplit split;
  split.seed = seed;
  targets[0] = &split.train;
  targets[1] = &split.validation;
  targets[2] = &split.test;

  // Sweep the strata in turn, always assigning the next group to the split
  // with the largest deficit against its quota. Every prefix of the sweep is
  // then proportionally allocated, so each stratum lands within one item of
  // its share.
  double counts[3] = {0, 0, 0};
  double assigned = 0.0;
  for (auto& stratum : strata) {
    std::span<std::size_t> view(stratum);
    rng.shuffle(view);
    for (std::size_t g : stratum) {
      const double size = static_cast<double>(groups[g].size());
      int best = 0;
      double best_deficit = -1e300;
      for (int s = 0; s < 3; ++s) {
        const double deficit = r[s] * (assigned + size) - counts[s];
        if (r[s] > 0.0 && deficit > best_deficit + 1e-12) {
          best = s;
          best_deficit = deficit;
        }
      }
      counts[best] += size;
      assigned += size;
      for (std::size_t i : groups[g]) targets[best]->push_back(data[i]);
    }
  }
  return split;
}

}  // namespace faqsearch
