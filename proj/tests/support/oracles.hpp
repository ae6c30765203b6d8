#pragma once

// Straight-line reference implementations. They share no code with the
// library beyond the tokenizer, so agreement is evidence, not tautology.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "faqsearch/corpus.hpp"
#include "faqsearch/textproc.hpp"

namespace oracle {

struct Hit {
  std::string id;
  double score;
};

/// Okapi BM25 evaluated document by document from raw token lists.
inline std::vector<Hit> bm25(const std::vector<faqsearch::FaqEntry>& corpus, const std::string& query,
                             double k1 = 1.2, double b = 0.75) {
  std::vector<std::vector<std::string>> docs;
  double total = 0;
  for (const auto& e : corpus) {
    docs.push_back(faqsearch::tokenize_terms(e.question));
    total += static_cast<double>(docs.back().size());
  }
  const double n = static_cast<double>(docs.size());
  const double avg = total / n;
  const auto q = faqsearch::tokenize_terms(query);
  const std::set<std::string> terms(q.begin(), q.end());
  std::vector<Hit> out;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    double score = 0;
    for (const auto& t : terms) {
      double df = 0;
      for (const auto& other : docs) df += std::count(other.begin(), other.end(), t) > 0 ? 1 : 0;
      const double tf = static_cast<double>(std::count(docs[d].begin(), docs[d].end(), t));
      if (tf == 0) continue;
      const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
      const double len = static_cast<double>(docs[d].size());
      score += idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len / avg));
    }
    if (score > 0) out.push_back({corpus[d].id, score});
  }
  std::sort(out.begin(), out.end(), [](const Hit& a, const Hit& c) {
    return a.score != c.score ? a.score > c.score : a.id < c.id;
  });
  return out;
}

struct Prf {
  double precision, recall, f1;
  std::size_t tp, fp, fn, tn;
};

inline Prf classification(const std::vector<faqsearch::Intent>& pred,
                          const std::vector<faqsearch::Intent>& gold) {
  Prf r{0, 0, 0, 0, 0, 0, 0};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] == faqsearch::Intent::Question;
    const bool g = gold[i] == faqsearch::Intent::Question;
    if (p && g) ++r.tp;
    if (p && !g) ++r.fp;
    if (!p && g) ++r.fn;
    if (!p && !g) ++r.tn;
  }
  if (r.tp + r.fp > 0) r.precision = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp);
  if (r.tp + r.fn > 0) r.recall = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn);
  if (r.precision + r.recall > 0) r.f1 = 2 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

/// (mrr, hit@1) over queries; each ranked list is ids in rank order.
inline std::pair<double, double> retrieval(const std::map<std::string, std::vector<std::string>>& ranked,
                                           const std::map<std::string, std::string>& golds) {
  double rr = 0, hits = 0;
  for (const auto& [q, gold] : golds) {
    const auto& list = ranked.at(q);
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (list[i] == gold) {
        rr += 1.0 / static_cast<double>(i + 1);
        hits += i == 0 ? 1 : 0;
        break;
      }
    }
  }
  const double n = static_cast<double>(golds.size());
  return {golds.empty() ? 0.0 : rr / n, golds.empty() ? 0.0 : hits / n};
}

}  // namespace oracle
