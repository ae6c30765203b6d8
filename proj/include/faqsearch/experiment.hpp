#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "faqsearch/evalharness.hpp"
#include "faqsearch/pipeline.hpp"

namespace faqsearch {

struct ExperimentInput {
  PipelineConfig config;
  PipelineModels models;
};

struct ExperimentRow {
  std::string name;
  PipelineConfig config;
  ClassificationReport classification;
  RetrievalReport retrieval;
  CostReport cost;

  ReportRow report_row() const;  // precision, recall, f1, mrr, hit@1, cost_ratio
};

struct ExperimentBundle {
  std::vector<ExperimentRow> rows;
  std::optional<std::string> relative_to;

  const ExperimentRow& row(const std::string& name) const;
  std::string render_table() const;
  std::string render_jsonl() const;
};

/// Ranker training queries from labeled records that carry a gold id: the
/// keyword query, its gold reformulation when present, and the output of
/// `reformulator` when given. Every variant keeps the record's gold id.
std::vector<QueryGold> ranker_training_queries(std::span<const LabeledQuery> data,
                                               const Reformulator* reformulator = nullptr);

/// Configs named "<scorer>-<candidates>/<reformulator>" for every
/// combination, other settings copied from `base`.
std::vector<PipelineConfig> expand_matrix(const PipelineConfig& base,
                                          std::span<const Scorer> scorers,
                                          std::span<const CandidateSource> candidates,
                                          std::span<const ReformulatorKind> reformulators);

/// Per config: intent classification over all of `test`, retrieval over
/// the Question records that carry a gold id (ungated, so retrieval quality
/// is independent of the gate), and unit cost over all of `test`. Row deltas
/// are computed against `relative_to` when set.
ExperimentBundle run_experiment_matrix(std::span<const ExperimentInput> inputs,
                                       std::span<const LabeledQuery> test,
                                       const std::optional<std::string>& relative_to = std::nullopt);

}  // namespace faqsearch
