#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace faqsearch {

enum class Intent { Question, NonQuestion };

std::string_view to_string(Intent intent);
/// "question" | "non_question"; throws ValidationError otherwise.
Intent parse_intent(std::string_view s);

struct FaqEntry {
  std::string id;
  std::string question;
  std::string answer;
  std::vector<std::string> tags;

  bool operator==(const FaqEntry&) const = default;
};

struct LabeledQuery {
  std::string query;
  Intent intent = Intent::NonQuestion;
  std::optional<std::string> gold_faq_id;
  std::optional<std::string> gold_reformulation;

  bool operator==(const LabeledQuery&) const = default;
};

struct SplitRatios {
  double train = 0.5;
  double validation = 0.25;
  double test = 0.25;
};

struct DatasetSplit {
  std::vector<LabeledQuery> train;
  std::vector<LabeledQuery> validation;
  std::vector<LabeledQuery> test;
  std::uint64_t seed = 0;
};

struct TrafficProfile {
  std::size_t total_queries = 1000;
  double question_intent_fraction = 0.1;
  std::uint64_t seed = 0;
};

// Line-delimited JSON. FAQ: {"id","question","answer","tags"}.
// Labeled query: {"query","intent","gold_faq_id"?,"gold_reformulation"?}.

std::vector<FaqEntry> read_faq_corpus(std::istream& in);
std::vector<FaqEntry> load_faq_corpus(const std::filesystem::path& path);
void write_faq_corpus(std::ostream& out, std::span<const FaqEntry> corpus);
void save_faq_corpus(const std::filesystem::path& path, std::span<const FaqEntry> corpus);

/// When `corpus` is given, every gold_faq_id must resolve in it.
std::vector<LabeledQuery> read_labeled_queries(std::istream& in,
                                               std::span<const FaqEntry> corpus = {});
std::vector<LabeledQuery> load_labeled_queries(const std::filesystem::path& path,
                                               std::span<const FaqEntry> corpus = {});
void write_labeled_queries(std::ostream& out, std::span<const LabeledQuery> data);
void save_labeled_queries(const std::filesystem::path& path, std::span<const LabeledQuery> data);

/// Throws ValidationError if a record breaks a LabeledQuery invariant.
void validate_labeled_query(const LabeledQuery& q, std::span<const FaqEntry> corpus = {});

/// Stratified by intent, deterministic per seed. Identical query strings are
/// kept together so the splits are disjoint by query.
DatasetSplit split_dataset(std::span<const LabeledQuery> data, SplitRatios ratios,
                           std::uint64_t seed);

struct SyntheticCorpus {
  std::vector<FaqEntry> faqs;
  std::vector<LabeledQuery> queries;
};

/// Template-vocabulary FAQ corpus plus a labeled traffic sample. Question
/// queries are extract_keywords() projections of FAQ questions, with gold ids
/// and an annotator rewording of the source question (same keywords, other
/// phrasing) as gold reformulation; FAQs are used without repetition until
/// every FAQ has been drawn once. Non-question queries are
/// product-style keyword strings.
SyntheticCorpus generate_synthetic_corpus(const TrafficProfile& profile, std::size_t faq_count);

}  // namespace faqsearch
