#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "faqsearch/corpus.hpp"

namespace faqsearch {

using DocId = std::uint32_t;

struct Posting {
  DocId doc;
  std::uint32_t tf;
  bool operator==(const Posting&) const = default;
};

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

struct ScoredHit {
  std::string faq_id;
  double score = 0.0;
  std::size_t rank = 0;  // 1-based
  bool operator==(const ScoredHit&) const = default;
};

/// Inverted index over FAQ questions (answers are not indexed). Immutable
/// once built; postings are sorted by doc id.
class InvertedIndex {
 public:
  /// Throws ValidationError on an empty corpus or duplicate ids.
  static InvertedIndex build(std::span<const FaqEntry> corpus);

  std::size_t doc_count() const noexcept { return entries_.size(); }
  double avg_doc_length() const noexcept { return avg_doc_length_; }
  std::uint32_t doc_length(DocId doc) const { return doc_lengths_.at(doc); }
  const FaqEntry& entry(DocId doc) const { return entries_.at(doc); }
  std::span<const FaqEntry> entries() const noexcept { return entries_; }
  /// Throws std::out_of_range for unknown ids.
  DocId doc_of(std::string_view faq_id) const;
  bool contains(std::string_view faq_id) const;
  const FaqEntry* find_entry(std::string_view faq_id) const;

  /// Empty span for unknown terms.
  std::span<const Posting> postings(std::string_view term) const;
  std::size_t document_frequency(std::string_view term) const { return postings(term).size(); }
  std::uint32_t term_frequency(std::string_view term, DocId doc) const;
  const std::map<std::string, std::vector<Posting>, std::less<>>& all_postings() const noexcept {
    return postings_;
  }

  void save(std::ostream& out) const;
  static InvertedIndex load(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static InvertedIndex load(const std::filesystem::path& path);

  bool operator==(const InvertedIndex&) const = default;

 private:
  void finish();

  std::map<std::string, std::vector<Posting>, std::less<>> postings_;
  std::vector<std::uint32_t> doc_lengths_;
  std::vector<FaqEntry> entries_;
  std::map<std::string, DocId, std::less<>> id_to_doc_;
  double avg_doc_length_ = 0.0;
};

/// ln(1 + (N - df + 0.5) / (df + 0.5)).
double bm25_idf(std::size_t doc_count, std::size_t df);

/// Score of one document for the distinct terms of `query`.
double bm25_score(const InvertedIndex& index, std::span<const std::string> query_terms, DocId doc,
                  const Bm25Params& params = {});

/// Up to k hits with positive score, score descending, ties by ascending id.
/// Each distinct query term contributes once.
std::vector<ScoredHit> bm25_search(const InvertedIndex& index, std::string_view query,
                                   std::size_t k, const Bm25Params& params = {});

/// Sorts by score descending then faq id ascending, truncates to `limit`,
/// and assigns ranks 1..n.
void finalize_ranking(std::vector<ScoredHit>& hits, std::size_t limit);

}  // namespace faqsearch
