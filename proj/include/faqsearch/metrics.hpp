#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "faqsearch/corpus.hpp"
#include "faqsearch/index.hpp"

namespace faqsearch {

struct Confusion {
  std::size_t true_positive = 0;
  std::size_t false_positive = 0;
  std::size_t false_negative = 0;
  std::size_t true_negative = 0;

  std::size_t total() const noexcept {
    return true_positive + false_positive + false_negative + true_negative;
  }
  bool operator==(const Confusion&) const = default;
};

struct MetricDelta {
  std::string baseline;
  std::map<std::string, double> deltas;  // metric name -> value minus baseline value
};

/// Question is the positive class. Degenerate ratios are 0.
struct ClassificationReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  Confusion confusion;
  std::optional<MetricDelta> relative_to;
};

ClassificationReport compute_classification(std::span<const Intent> predictions,
                                            std::span<const Intent> golds);
ClassificationReport classification_from_confusion(const Confusion& c);

struct RetrievalReport {
  double mrr = 0.0;
  double hit_at_1 = 0.0;
  std::map<std::string, std::optional<std::size_t>> per_query_ranks;  // nullopt = miss
  std::optional<MetricDelta> relative_to;
};

/// Every query in `golds` must have an entry in `ranked` (possibly empty).
/// When `known_ids` is non-empty, each gold id must be in it.
RetrievalReport compute_retrieval(const std::map<std::string, std::vector<ScoredHit>>& ranked,
                                  const std::map<std::string, std::string>& golds,
                                  std::span<const std::string> known_ids = {});

}  // namespace faqsearch
