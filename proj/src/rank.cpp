#include "faqsearch/rank.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "faqsearch/binary_io.hpp"
#include "faqsearch/errors.hpp"
#include "faqsearch/random.hpp"

namespace faqsearch {
namespace {

constexpr std::string_view kRankerMagic = "FAQRNK01";
constexpr std::uint32_t kRankerVersion = 1;

// |a ∩ b| for sorted distinct ranges.
std::size_t intersection_size(std::span<const std::string> a, std::span<const std::string> b) {
  std::size_t n = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) ++i;
    else if (*j < *i) ++j;
    else { ++n; ++i; ++j; }
  }
  return n;
}

double jaccard(std::size_t inter, std::size_t a, std::size_t b) {
  const std::size_t uni = a + b - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::uint32_t cross_bucket(std::uint64_t query_term, std::uint64_t question_term) {
  std::uint64_t h = query_term ^ (question_term * 0x9E3779B97F4A7C15ull);
  h ^= h >> 33;
  h *= 0xFF51AFD7ED558CCDull;
  h ^= h >> 33;
  return static_cast<std::uint32_t>(h % kCrossBuckets);
}

SparseVector assemble(const PreparedText& q, const PreparedText& d, double bm25) {
  std::vector<std::pair<std::uint32_t, double>> f;
  f.emplace_back(kFeatCosine, cosine(q.vector, d.vector));
  f.emplace_back(kFeatBm25, std::log1p(std::max(bm25, 0.0)));
  const double lq = static_cast<double>(q.terms.size());
  const double ld = static_cast<double>(d.terms.size());
  f.emplace_back(kFeatLengthRatio, std::max(lq, ld) > 0 ? std::min(lq, ld) / std::max(lq, ld) : 0.0);
  const std::size_t shared_bigrams = intersection_size(q.bigrams, d.bigrams);
  f.emplace_back(kFeatBigram, jaccard(shared_bigrams, q.bigrams.size(), d.bigrams.size()));
  if (!d.bigrams.empty()) {
    f.emplace_back(kFeatBigramCover,
                   static_cast<double>(shared_bigrams) / static_cast<double>(d.bigrams.size()));
  }
  if (!q.terms.empty() && q.terms == d.terms) f.emplace_back(kFeatExact, 1.0);

  // One merge over the sorted vocabularies: shared terms feed the overlap
  // features, the rest feed the cross pairs.
  std::size_t inter = 0;
  double shared_mass = 0.0;
  std::vector<std::uint64_t> q_only, d_only;
  std::size_t i = 0, j = 0;
  while (i < q.unique_terms.size() || j < d.unique_terms.size()) {
    if (j == d.unique_terms.size() ||
        (i < q.unique_terms.size() && q.unique_terms[i] < d.unique_terms[j])) {
      q_only.push_back(q.hashes[i++]);
    } else if (i == q.unique_terms.size() || d.unique_terms[j] < q.unique_terms[i]) {
      d_only.push_back(d.hashes[j++]);
    } else {
      ++inter;
      shared_mass += d.idf[j];
      f.emplace_back(kFeatTermBase + static_cast<std::uint32_t>(q.hashes[i] % kTermBuckets), 1.0);
      ++i;
      ++j;
    }
  }
  f.emplace_back(kFeatJaccard, jaccard(inter, q.unique_terms.size(), d.unique_terms.size()));
  const auto shared = static_cast<double>(inter);
  if (!q.unique_terms.empty()) f.emplace_back(kFeatQueryCover, shared / q.unique_terms.size());
  if (!d.unique_terms.empty()) f.emplace_back(kFeatDocCover, shared / d.unique_terms.size());
  if (q.idf_mass > 0) f.emplace_back(kFeatIdfQueryCover, shared_mass / q.idf_mass);
  if (d.idf_mass > 0) f.emplace_back(kFeatIdfDocCover, shared_mass / d.idf_mass);
  if (!q_only.empty() && !d_only.empty()) {
    const double w = 1.0 / std::sqrt(static_cast<double>(q_only.size() * d_only.size()));
    for (auto a : q_only) {
      for (auto b : d_only) f.emplace_back(kFeatCrossBase + cross_bucket(a, b), w);
    }
  }
  return SparseVector::from_unsorted(std::move(f));
}

}  // namespace

SparseVector pair_features(const TfidfStats& tfidf, std::string_view query,
                           std::string_view question) {
  return assemble(PreparedText::from(tfidf, query), PreparedText::from(tfidf, question), 0.0);
}

SparseVector pair_features(const QuestionSpace& space, const PreparedQuery& query, DocId doc) {
  return assemble(query, space.prepared(doc), bm25_score(space.index(), query.terms, doc));
}

SparseVector pair_features(const QuestionSpace& space, std::string_view query, DocId doc) {
  return pair_features(space, PreparedQuery::from(space.tfidf(), query), doc);
}

double PointwiseRanker::score(const SparseVector& features) const {
  double s = bias;
  for (std::size_t k = 0; k < features.size(); ++k) {
    const auto i = features.indices[k];
    if (i < weights.size()) s += weights[i] * features.weights[k];
  }
  return s;
}

void PointwiseRanker::save(std::ostream& out) const {
  binary::write_magic(out, kRankerMagic, kRankerVersion);
  binary::write_u32(out, static_cast<std::uint32_t>(weights.size()));
  binary::write_f64(out, bias);
  binary::write_f64(out, margin);
  for (double w : weights) binary::write_f64(out, w);
  if (!out) throw FormatError("failed writing ranker");
}

PointwiseRanker PointwiseRanker::load(std::istream& in) {
  binary::read_magic(in, kRankerMagic, kRankerVersion);
  PointwiseRanker r;
  const auto dims = binary::read_u32(in);
  if (dims != kPairFeatureDims) throw FormatError("ranker feature dimension mismatch");
  r.bias = binary::read_f64(in);
  r.margin = binary::read_f64(in);
  r.weights.resize(dims);
  for (auto& w : r.weights) w = binary::read_f64(in);
  return r;
}

void PointwiseRanker::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  save(out);
}

PointwiseRanker PointwiseRanker::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  return load(in);
}

std::string_view to_string(Scorer scorer) {
  switch (scorer) {
    case Scorer::Bm25Only: return "bm25";
    case Scorer::Cosine: return "cosine";
    case Scorer::Pointwise: return "pointwise";
  }
  return "bm25";
}

Scorer parse_scorer(std::string_view s) {
  if (s == "bm25") return Scorer::Bm25Only;
  if (s == "cosine") return Scorer::Cosine;
  if (s == "pointwise") return Scorer::Pointwise;
  throw ValidationError("unknown scorer \"" + std::string(s) + "\"");
}

void CandidateSource::validate() const {
  if (kind == Kind::Bm25TopK && k < 1) throw ValidationError("bm25 top-k needs k >= 1");
}

std::string to_string(const CandidateSource& source) {
  return source.kind == CandidateSource::Kind::FullCorpus ? "full" : "top" + std::to_string(source.k);
}

CandidateSource parse_candidate_source(std::string_view s) {
  if (s == "full") return CandidateSource::full_corpus();
  if (s.starts_with("top")) {
    const auto digits = s.substr(3);
    std::size_t k = 0;
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string_view::npos) {
      throw ValidationError("bad candidate source \"" + std::string(s) + "\"");
    }
    k = std::stoul(std::string(digits));
    auto c = CandidateSource::bm25_top_k(k);
    c.validate();
    return c;
  }
  throw ValidationError("bad candidate source \"" + std::string(s) + "\"");
}

std::vector<ScoredHit> rank_faqs(const RankRequest& request, const QuestionSpace& space,
                                 const PointwiseRanker* ranker) {
  request.candidates.validate();
  const auto& index = space.index();

  if (request.scorer == Scorer::Bm25Only) {
    const std::size_t k = request.candidates.kind == CandidateSource::Kind::FullCorpus
                              ? index.doc_count()
                              : request.candidates.k;
    return bm25_search(index, request.query_text, k);
  }
  return score_candidates(space, request.query_text, request.scorer,
                          candidate_set(space, request.query_text, request.candidates), ranker);
}

std::vector<DocId> candidate_set(const QuestionSpace& space, std::string_view query,
                                 const CandidateSource& source) {
  source.validate();
  const auto& index = space.index();
  std::vector<DocId> docs;
  if (source.kind == CandidateSource::Kind::FullCorpus) {
    docs.resize(index.doc_count());
    for (DocId d = 0; d < docs.size(); ++d) docs[d] = d;
    return docs;
  }
  for (const auto& h : bm25_search(index, query, source.k)) docs.push_back(index.doc_of(h.faq_id));
  std::sort(docs.begin(), docs.end());
  return docs;
}

std::vector<ScoredHit> score_candidates(const QuestionSpace& space, std::string_view query,
                                        Scorer scorer, std::span<const DocId> docs,
                                        const PointwiseRanker* ranker) {
  if (scorer == Scorer::Bm25Only) throw ValidationError("bm25 scores come from rank_faqs");
  if (scorer == Scorer::Pointwise && ranker == nullptr) {
    throw ValidationError("pointwise scorer requested without a trained ranker");
  }
  const auto& index = space.index();
  std::vector<ScoredHit> hits;
  hits.reserve(docs.size());
  if (scorer == Scorer::Cosine) {
    const auto qv = space.tfidf().vectorize(query);
    for (DocId d : docs) {
      const double c = cosine(qv, space.question_vector(d));
      if (c > 0.0) hits.push_back({index.entry(d).id, c, 0});
    }
  } else {
    const auto q = PreparedQuery::from(space.tfidf(), query);
    for (DocId d : docs) hits.push_back({index.entry(d).id, ranker->score(pair_features(space, q, d)), 0});
  }
  finalize_ranking(hits, hits.size());
  return hits;
}

std::optional<FaqEntry> top_one(std::span<const ScoredHit> hits, const InvertedIndex& index) {
  if (hits.empty()) return std::nullopt;
  const auto* e = index.find_entry(hits.front().faq_id);
  if (!e) return std::nullopt;
  return *e;
}

PointwiseRanker train_pointwise(std::span<const QueryGold> train,
                                std::span<const QueryGold> validation, const QuestionSpace& space,
                                const PointwiseTrainingConfig& config) {
  const auto& index = space.index();
  if (train.empty()) throw ValidationError("cannot train a ranker on empty data");
  if (config.negatives_per_query < 1) throw ValidationError("negatives per query must be >= 1");
  if (index.doc_count() < config.negatives_per_query + 1) {
    throw ValidationError("corpus has " + std::to_string(index.doc_count()) +
                          " entries; need at least negatives + 1 = " +
                          std::to_string(config.negatives_per_query + 1));
  }
  for (const auto& g : train) {
    if (!index.contains(g.faq_id)) throw ValidationError("unknown gold faq id \"" + g.faq_id + "\"");
  }
  for (const auto& g : validation) {
    if (!index.contains(g.faq_id)) throw ValidationError("unknown gold faq id \"" + g.faq_id + "\"");
  }

  // Examples are featurised once: per query, the positive followed by its
  // sampled negatives.
  Rng rng(config.seed);
  struct Example {
    SparseVector x;
    double y;
  };
  std::vector<std::vector<Example>> groups;
  groups.reserve(train.size());
  std::vector<DocId> pool(index.doc_count());
  for (const auto& g : train) {
    const auto q = PreparedQuery::from(space.tfidf(), g.query);
    const DocId gold = index.doc_of(g.faq_id);
    std::vector<Example> group;
    group.push_back({pair_features(space, q, gold), 1.0});
    for (DocId d = 0; d < pool.size(); ++d) pool[d] = d;
    std::swap(pool[gold], pool.back());
    const std::size_t available = pool.size() - 1;
    for (std::size_t k = 0; k < config.negatives_per_query; ++k) {
      const auto j = k + static_cast<std::size_t>(rng.uniform_index(available - k));
      std::swap(pool[k], pool[j]);
      group.push_back({pair_features(space, q, pool[k]), -1.0});
    }
    groups.push_back(std::move(group));
  }

  const auto monitor = validation.empty() ? train : validation;
  auto mrr_of = [&](const PointwiseRanker& r) {
    double total = 0.0;
    for (const auto& g : monitor) {
      const auto hits = rank_faqs({g.query, config.validation_candidates, Scorer::Pointwise}, space, &r);
      for (const auto& h : hits) {
        if (h.faq_id == g.faq_id) {
          total += 1.0 / static_cast<double>(h.rank);
          break;
        }
      }
    }
    return total / static_cast<double>(monitor.size());
  };

  PointwiseRanker model;
  model.margin = config.margin;
  PointwiseRanker best = model;
  double best_mrr = -1.0;
  std::size_t since_best = 0;
  std::vector<std::size_t> order(groups.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  // Weights are kept as scale * v so the per-step L2 shrink is O(1).
  std::vector<double> v(kPairFeatureDims, 0.0);
  double scale = 1.0;
  auto materialize = [&] {
    for (std::size_t i = 0; i < v.size(); ++i) model.weights[i] = scale * v[i];
  };
  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    const double lr = config.learning_rate / std::sqrt(1.0 + static_cast<double>(epoch));
    for (std::size_t gi : order) {
      for (const auto& ex : groups[gi]) {
        double dot = 0.0;
        for (std::size_t k = 0; k < ex.x.size(); ++k) dot += v[ex.x.indices[k]] * ex.x.weights[k];
        const double s = scale * dot + model.bias;
        scale *= 1.0 - lr * config.l2;
        if (config.margin - ex.y * s > 0.0) {
          for (std::size_t k = 0; k < ex.x.size(); ++k) {
            v[ex.x.indices[k]] += lr * ex.y * ex.x.weights[k] / scale;
          }
          model.bias += lr * ex.y;
        }
        if (scale < 1e-9) {
          for (auto& w : v) w *= scale;
          scale = 1.0;
        }
      }
    }
    materialize();
    const double mrr = mrr_of(model);
    if (mrr > best_mrr + 1e-12) {
      best_mrr = mrr;
      best = model;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  return best;
}

}  // namespace faqsearch
