#include "faqsearch/index.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "faqsearch/binary_io.hpp"
#include "faqsearch/errors.hpp"
#include "faqsearch/textproc.hpp"

namespace faqsearch {
namespace {

constexpr std::string_view kIndexMagic = "FAQIDX01";
constexpr std::uint32_t kIndexVersion = 1;

std::vector<std::string> distinct_terms(std::string_view query) {
  auto terms = tokenize_terms(query);
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  return terms;
}

}  // namespace

InvertedIndex InvertedIndex::build(std::span<const FaqEntry> corpus) {
  if (corpus.empty()) throw ValidationError("cannot index an empty corpus");
  InvertedIndex index;
  index.entries_.assign(corpus.begin(), corpus.end());
  index.doc_lengths_.reserve(corpus.size());
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    const auto doc = static_cast<DocId>(d);
    const auto terms = tokenize_terms(corpus[d].question);
    index.doc_lengths_.push_back(static_cast<std::uint32_t>(terms.size()));
    for (const auto& t : terms) {
      auto& list = index.postings_[t];
      if (!list.empty() && list.back().doc == doc) {
        ++list.back().tf;
      } else {
        list.push_back({doc, 1});
      }
    }
  }
  index.finish();
  return index;
}

void InvertedIndex::finish() {
  id_to_doc_.clear();
  for (std::size_t d = 0; d < entries_.size(); ++d) {
    auto [it, inserted] = id_to_doc_.emplace(entries_[d].id, static_cast<DocId>(d));
    if (!inserted) throw ValidationError("duplicate FAQ id \"" + entries_[d].id + "\"");
  }
  double total = 0.0;
  for (auto len : doc_lengths_) total += len;
  avg_doc_length_ = doc_lengths_.empty() ? 0.0 : total / static_cast<double>(doc_lengths_.size());
}

DocId InvertedIndex::doc_of(std::string_view faq_id) const {
  auto it = id_to_doc_.find(faq_id);
  if (it == id_to_doc_.end()) throw std::out_of_range("unknown FAQ id " + std::string(faq_id));
  return it->second;
}

bool InvertedIndex::contains(std::string_view faq_id) const {
  return id_to_doc_.find(faq_id) != id_to_doc_.end();
}

const FaqEntry* InvertedIndex::find_entry(std::string_view faq_id) const {
  auto it = id_to_doc_.find(faq_id);
  return it == id_to_doc_.end() ? nullptr : &entries_[it->second];
}

std::span<const Posting> InvertedIndex::postings(std::string_view term) const {
  auto it = postings_.find(term);
  if (it == postings_.end()) return {};
  return it->second;
}

std::uint32_t InvertedIndex::term_frequency(std::string_view term, DocId doc) const {
  const auto list = postings(term);
  auto it = std::lower_bound(list.begin(), list.end(), doc,
                             [](const Posting& p, DocId d) { return p.doc < d; });
  return (it != list.end() && it->doc == doc) ? it->tf : 0;
}

void InvertedIndex::save(std::ostream& out) const {
  binary::write_magic(out, kIndexMagic, kIndexVersion);
  binary::write_u64(out, entries_.size());
  for (std::size_t d = 0; d < entries_.size(); ++d) {
    const auto& e = entries_[d];
    binary::write_string(out, e.id);
    binary::write_string(out, e.question);
    binary::write_string(out, e.answer);
    binary::write_u64(out, e.tags.size());
    for (const auto& t : e.tags) binary::write_string(out, t);
    binary::write_u32(out, doc_lengths_[d]);
  }
  binary::write_u64(out, postings_.size());
  for (const auto& [term, list] : postings_) {
    binary::write_string(out, term);
    binary::write_u64(out, list.size());
    for (const auto& p : list) {
      binary::write_u32(out, p.doc);
      binary::write_u32(out, p.tf);
    }
  }
  if (!out) throw FormatError("failed writing index");
}

InvertedIndex InvertedIndex::load(std::istream& in) {
  binary::read_magic(in, kIndexMagic, kIndexVersion);
  InvertedIndex index;
  const auto n = binary::read_u64(in);
  for (std::uint64_t d = 0; d < n; ++d) {
    FaqEntry e;
    e.id = binary::read_string(in);
    e.question = binary::read_string(in);
    e.answer = binary::read_string(in);
    const auto tags = binary::read_u64(in);
    for (std::uint64_t t = 0; t < tags; ++t) e.tags.push_back(binary::read_string(in));
    index.entries_.push_back(std::move(e));
    index.doc_lengths_.push_back(binary::read_u32(in));
  }
  const auto terms = binary::read_u64(in);
  for (std::uint64_t t = 0; t < terms; ++t) {
    auto term = binary::read_string(in);
    const auto count = binary::read_u64(in);
    std::vector<Posting> list;
    list.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
      const auto doc = binary::read_u32(in);
      const auto tf = binary::read_u32(in);
      if (doc >= n || (!list.empty() && doc <= list.back().doc)) {
        throw FormatError("corrupt posting list for term " + term);
      }
      list.push_back({doc, tf});
    }
    index.postings_.emplace(std::move(term), std::move(list));
  }
  index.finish();
  return index;
}

void InvertedIndex::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  save(out);
}

InvertedIndex InvertedIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  return load(in);
}

double bm25_idf(std::size_t doc_count, std::size_t df) {
  const double n = static_cast<double>(doc_count);
  const double f = static_cast<double>(df);
  return std::log(1.0 + (n - f + 0.5) / (f + 0.5));
}

double bm25_score(const InvertedIndex& index, std::span<const std::string> query_terms, DocId doc,
                  const Bm25Params& params) {
  if (index.avg_doc_length() <= 0.0) return 0.0;
  const double len_norm =
      1.0 - params.b + params.b * index.doc_length(doc) / index.avg_doc_length();
  double score = 0.0;
  for (const auto& term : query_terms) {
    const auto tf = index.term_frequency(term, doc);
    if (tf == 0) continue;
    const double idf = bm25_idf(index.doc_count(), index.document_frequency(term));
    score += idf * (tf * (params.k1 + 1.0)) / (tf + params.k1 * len_norm);
  }
  return score;
}

void finalize_ranking(std::vector<ScoredHit>& hits, std::size_t limit) {
  std::sort(hits.begin(), hits.end(), [](const ScoredHit& a, const ScoredHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.faq_id < b.faq_id;
  });
  if (hits.size() > limit) hits.resize(limit);
  for (std::size_t i = 0; i < hits.size(); ++i) hits[i].rank = i + 1;
}

std::vector<ScoredHit> bm25_search(const InvertedIndex& index, std::string_view query,
                                   std::size_t k, const Bm25Params& params) {
  if (k == 0) throw ValidationError("k must be at least 1");
  const auto terms = distinct_terms(query);
  std::vector<double> scores(index.doc_count(), 0.0);
  std::vector<DocId> touched;
  for (const auto& term : terms) {
    const auto list = index.postings(term);
    if (list.empty()) continue;
    const double idf = bm25_idf(index.doc_count(), list.size());
    for (const auto& p : list) {
      const double len_norm =
          1.0 - params.b + params.b * index.doc_length(p.doc) / index.avg_doc_length();
      if (scores[p.doc] == 0.0) touched.push_back(p.doc);
      scores[p.doc] += idf * (p.tf * (params.k1 + 1.0)) / (p.tf + params.k1 * len_norm);
    }
  }
  std::vector<ScoredHit> hits;
  hits.reserve(touched.size());
  for (DocId d : touched) {
    if (scores[d] > 0.0) hits.push_back({index.entry(d).id, scores[d], 0});
  }
  finalize_ranking(hits, k);
  return hits;
}

}  // namespace faqsearch
