#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "faqsearch/index.hpp"
#include "faqsearch/textproc.hpp"

namespace faqsearch {

/// Token-level view of a text under the corpus statistics.
struct PreparedText {
  std::vector<std::string> terms;         // in order
  std::vector<std::string> unique_terms;  // sorted
  std::vector<std::uint64_t> hashes;      // fnv1a64 per unique term
  std::vector<double> idf;                // per unique term; unseen terms weigh the most
  double idf_mass = 0.0;                  // sum of idf
  std::vector<std::string> bigrams;       // sorted distinct
  SparseVector vector;

  static PreparedText from(const TfidfStats& tfidf, std::string_view text);
};

/// TF-IDF view of the indexed FAQ questions, shared by the cosine scorer,
/// the cosine intent baseline and the pair features. Holds the index it was
/// built from.
class QuestionSpace {
 public:
  explicit QuestionSpace(std::shared_ptr<const InvertedIndex> index);

  const InvertedIndex& index() const noexcept { return *index_; }
  std::shared_ptr<const InvertedIndex> index_ptr() const noexcept { return index_; }
  const TfidfStats& tfidf() const noexcept { return tfidf_; }
  const SparseVector& question_vector(DocId doc) const { return prepared_.at(doc).vector; }
  /// Sorted distinct question tokens.
  const std::vector<std::string>& question_terms(DocId doc) const {
    return prepared_.at(doc).unique_terms;
  }
  const PreparedText& prepared(DocId doc) const { return prepared_.at(doc); }

  /// Cosine of `query` against every question sharing a term with it.
  /// Returned pairs are (doc, cosine) with cosine > 0, in doc order.
  std::vector<std::pair<DocId, double>> cosine_all(std::string_view query) const;
  double max_cosine(std::string_view query) const;

 private:
  std::shared_ptr<const InvertedIndex> index_;
  TfidfStats tfidf_;
  std::vector<PreparedText> prepared_;
};

}  // namespace faqsearch
