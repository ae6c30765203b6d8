#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace faqsearch {

using Span = std::pair<std::size_t, std::size_t>;  // [begin, end) byte offsets

struct TokenStream {
  std::vector<std::string> tokens;
  std::vector<Span> offsets;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }
};

/// Lowercases (ASCII, Latin-1, Latin Extended-A, Greek, Cyrillic) and splits
/// UTF-8 text on anything that is not a letter or digit.
TokenStream tokenize(std::string_view text);

/// tokenize(text).tokens.
std::vector<std::string> tokenize_terms(std::string_view text);

/// Tokens joined by single spaces. Used to key queries.
std::string normalize_query(std::string_view text);

class StopwordList {
 public:
  /// The list shipped in data/stopwords.txt, compiled into the library.
  static const StopwordList& builtin();
  /// One word per line; '#' starts a comment line; blank lines ignored.
  static StopwordList from_file(const std::filesystem::path& path);
  static StopwordList from_text(std::string_view text);

  bool contains(std::string_view word) const;
  std::size_t size() const noexcept { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

struct RakePhrase {
  std::vector<std::string> words;
  double score = 0.0;
  std::size_t first_token = 0;  // position in the token stream
};

/// Candidate phrases in text order, each scored by summed word
/// degree/frequency over the co-occurrence graph.
std::vector<RakePhrase> rake_phrases(std::string_view text,
                                     const StopwordList& stopwords = StopwordList::builtin());

/// All content phrases joined in original order. Throws EmptyResultError when
/// the question has no content words.
std::string extract_keywords(std::string_view question,
                             const StopwordList& stopwords = StopwordList::builtin());

bool starts_with_question_word(std::string_view query);

struct SparseVector {
  std::vector<std::uint32_t> indices;  // strictly increasing
  std::vector<double> weights;

  bool empty() const noexcept { return indices.empty(); }
  std::size_t size() const noexcept { return indices.size(); }
  double norm() const;
  double dot(const SparseVector& other) const;
  bool operator==(const SparseVector&) const = default;

  /// Merges duplicate indices by summing, sorts, and drops exact zeros.
  static SparseVector from_unsorted(std::vector<std::pair<std::uint32_t, double>> entries);
};

/// Cosine similarity; 0 when either vector is empty.
double cosine(const SparseVector& a, const SparseVector& b);

/// Document statistics for TF-IDF; immutable after build.
class TfidfStats {
 public:
  static TfidfStats build(std::span<const std::string> documents);

  /// Raw term frequency times smoothed idf ln((1+N)/(1+df)) + 1, L2-normalised.
  /// Out-of-vocabulary terms are ignored.
  SparseVector vectorize(std::string_view text) const;
  SparseVector vectorize_terms(std::span<const std::string> terms) const;

  std::size_t document_count() const noexcept { return doc_count_; }
  std::size_t vocabulary_size() const noexcept { return idf_.size(); }
  double idf(std::string_view term) const;

 private:
  std::unordered_map<std::string, std::uint32_t> vocab_;
  std::vector<double> idf_;
  std::size_t doc_count_ = 0;
};

inline constexpr std::uint32_t kDefaultHashDims = 1u << 18;

/// 64-bit FNV-1a; stable across runs and platforms.
std::uint64_t fnv1a64(std::string_view data);

/// Signed feature hashing of word unigrams, word bigrams and character
/// trigrams into `dims` buckets, L2-normalised. `dims` must be a power of two
/// and at least 1024. Weights may be negative.
SparseVector hash_features(std::string_view text, std::uint32_t dims = kDefaultHashDims);

}  // namespace faqsearch
