#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "faqsearch/corpus.hpp"
#include "faqsearch/index.hpp"
#include "faqsearch/question_space.hpp"
#include "faqsearch/textproc.hpp"

namespace faqsearch {

// Pair feature layout.
inline constexpr std::uint32_t kFeatCosine = 0;
inline constexpr std::uint32_t kFeatJaccard = 1;
inline constexpr std::uint32_t kFeatBm25 = 2;        // log1p(bm25), 0 without an index
inline constexpr std::uint32_t kFeatLengthRatio = 3; // min(len) / max(len)
inline constexpr std::uint32_t kFeatBigram = 4;      // bigram Jaccard
inline constexpr std::uint32_t kFeatQueryCover = 5;  // |q ∩ d| / |q|
inline constexpr std::uint32_t kFeatDocCover = 6;    // |q ∩ d| / |d|
inline constexpr std::uint32_t kFeatBigramCover = 7; // shared bigrams / question bigrams
inline constexpr std::uint32_t kFeatExact = 8;       // identical token sequences
inline constexpr std::uint32_t kFeatIdfQueryCover = 9;  // idf mass of q ∩ d over idf mass of q
inline constexpr std::uint32_t kFeatIdfDocCover = 10;   // idf mass of q ∩ d over idf mass of d
inline constexpr std::uint32_t kFeatTermBase = 11;
inline constexpr std::uint32_t kTermBuckets = 256;   // hashed matched-term indicators
inline constexpr std::uint32_t kFeatCrossBase = kFeatTermBase + kTermBuckets;
inline constexpr std::uint32_t kCrossBuckets = 4096;  // hashed (query-only, question-only) term pairs
inline constexpr std::uint32_t kPairFeatureDims = kFeatCrossBase + kCrossBuckets;

/// Features of (query, question) with TF-IDF weights from `tfidf` and no
/// BM25 component.
SparseVector pair_features(const TfidfStats& tfidf, std::string_view query,
                           std::string_view question);

/// Features of (query, indexed question `doc`), including BM25.
SparseVector pair_features(const QuestionSpace& space, std::string_view query, DocId doc);

/// Query-side state reused across candidates.
using PreparedQuery = PreparedText;

SparseVector pair_features(const QuestionSpace& space, const PreparedQuery& query, DocId doc);

/// Linear pair scorer: score = weights . features + bias.
struct PointwiseRanker {
  std::vector<double> weights = std::vector<double>(kPairFeatureDims, 0.0);
  double bias = 0.0;
  double margin = 1.0;

  double score(const SparseVector& features) const;

  void save(std::ostream& out) const;
  static PointwiseRanker load(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static PointwiseRanker load(const std::filesystem::path& path);
  bool operator==(const PointwiseRanker&) const = default;
};

struct QueryGold {
  std::string query;
  std::string faq_id;
};

enum class Scorer { Bm25Only, Cosine, Pointwise };

std::string_view to_string(Scorer scorer);
Scorer parse_scorer(std::string_view s);  // bm25|cosine|pointwise

struct CandidateSource {
  enum class Kind { FullCorpus, Bm25TopK };
  Kind kind = Kind::Bm25TopK;
  std::size_t k = 10;

  static CandidateSource full_corpus() { return {Kind::FullCorpus, 0}; }
  static CandidateSource bm25_top_k(std::size_t k) { return {Kind::Bm25TopK, k}; }
  void validate() const;
  bool operator==(const CandidateSource&) const = default;
};

std::string to_string(const CandidateSource& source);  // "full" | "top<k>"
CandidateSource parse_candidate_source(std::string_view s);

struct RankRequest {
  std::string query_text;
  CandidateSource candidates;
  Scorer scorer = Scorer::Bm25Only;
};

struct PointwiseTrainingConfig {
  std::size_t negatives_per_query = 100;
  std::size_t max_epochs = 10;
  std::size_t patience = 3;
  double learning_rate = 0.05;
  double l2 = 1e-5;
  double margin = 1.0;
  std::uint64_t seed = 0;
  CandidateSource validation_candidates = CandidateSource::full_corpus();
};

/// Hinge-loss SGD over one positive and `negatives_per_query` uniformly
/// sampled other questions per query. Keeps the epoch with the best
/// validation MRR (training MRR when `validation` is empty).
PointwiseRanker train_pointwise(std::span<const QueryGold> train,
                                std::span<const QueryGold> validation, const QuestionSpace& space,
                                const PointwiseTrainingConfig& config);

/// Bm25Only returns BM25 hits (top k, or every positive-score document for
/// FullCorpus). Cosine keeps candidates with cosine > 0. Pointwise scores
/// every candidate and needs `ranker`. Ranks are score descending with ties
/// by ascending faq id.
std::vector<ScoredHit> rank_faqs(const RankRequest& request, const QuestionSpace& space,
                                 const PointwiseRanker* ranker = nullptr);

/// Candidate documents for Cosine and Pointwise scoring, ascending.
std::vector<DocId> candidate_set(const QuestionSpace& space, std::string_view query,
                                 const CandidateSource& source);

/// Cosine or Pointwise scoring of `docs`; Bm25Only is rejected.
std::vector<ScoredHit> score_candidates(const QuestionSpace& space, std::string_view query,
                                        Scorer scorer, std::span<const DocId> docs,
                                        const PointwiseRanker* ranker);

std::optional<FaqEntry> top_one(std::span<const ScoredHit> hits, const InvertedIndex& index);

}  // namespace faqsearch
