#include "faqsearch/question_space.hpp"

#include <algorithm>
#include <cmath>

#include "faqsearch/errors.hpp"

namespace faqsearch {

PreparedText PreparedText::from(const TfidfStats& tfidf, std::string_view text) {
  PreparedText p;
  p.terms = tokenize_terms(text);
  p.unique_terms = p.terms;
  std::sort(p.unique_terms.begin(), p.unique_terms.end());
  p.unique_terms.erase(std::unique(p.unique_terms.begin(), p.unique_terms.end()),
                       p.unique_terms.end());
  const double unseen = std::log(1.0 + static_cast<double>(tfidf.document_count())) + 1.0;
  for (const auto& t : p.unique_terms) {
    p.hashes.push_back(fnv1a64(t));
    const double w = tfidf.idf(t);
    p.idf.push_back(w > 0.0 ? w : unseen);
    p.idf_mass += p.idf.back();
  }
  for (std::size_t i = 0; i + 1 < p.terms.size(); ++i) {
    p.bigrams.push_back(p.terms[i] + ' ' + p.terms[i + 1]);
  }
  std::sort(p.bigrams.begin(), p.bigrams.end());
  p.bigrams.erase(std::unique(p.bigrams.begin(), p.bigrams.end()), p.bigrams.end());
  p.vector = tfidf.vectorize_terms(p.terms);
  return p;
}

QuestionSpace::QuestionSpace(std::shared_ptr<const InvertedIndex> index) : index_(std::move(index)) {
  if (!index_) throw ValidationError("QuestionSpace needs an index");
  std::vector<std::string> questions;
  questions.reserve(index_->doc_count());
  for (const auto& e : index_->entries()) questions.push_back(e.question);
  tfidf_ = TfidfStats::build(questions);
  prepared_.reserve(questions.size());
  for (const auto& q : questions) prepared_.push_back(PreparedText::from(tfidf_, q));
}

std::vector<std::pair<DocId, double>> QuestionSpace::cosine_all(std::string_view query) const {
  auto terms = tokenize_terms(query);
  const auto qv = tfidf_.vectorize_terms(terms);
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  std::vector<DocId> candidates;
  for (const auto& t : terms) {
    for (const auto& p : index_->postings(t)) candidates.push_back(p.doc);
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  std::vector<std::pair<DocId, double>> out;
  out.reserve(candidates.size());
  for (DocId d : candidates) {
    const double c = cosine(qv, prepared_[d].vector);
    if (c > 0.0) out.emplace_back(d, c);
  }
  return out;
}

double QuestionSpace::max_cosine(std::string_view query) const {
  double best = 0.0;
  for (const auto& [doc, c] : cosine_all(query)) best = std::max(best, c);
  return best;
}

}  // namespace faqsearch
