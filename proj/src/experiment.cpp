#include "faqsearch/experiment.hpp"

#include <set>

#include "faqsearch/errors.hpp"

namespace faqsearch {

ReportRow ExperimentRow::report_row() const {
  return {name,
          {{"precision", classification.precision},
           {"recall", classification.recall},
           {"f1", classification.f1},
           {"mrr", retrieval.mrr},
           {"hit@1", retrieval.hit_at_1},
           {"cost_ratio", cost.ratio}}};
}

const ExperimentRow& ExperimentBundle::row(const std::string& name) const {
  for (const auto& r : rows) {
    if (r.name == name) return r;
  }
  throw ValidationError("no experiment row named \"" + name + "\"");
}

namespace {

std::vector<ReportRow> report_rows(const ExperimentBundle& b) {
  std::vector<ReportRow> out;
  for (const auto& r : b.rows) out.push_back(r.report_row());
  return out;
}

}  // namespace

std::string ExperimentBundle::render_table() const {
  const auto rows_ = report_rows(*this);
  std::string out = faqsearch::render_table(rows_);
  if (relative_to) out += "\n" + faqsearch::render_table(rows_, relative_to);
  return out;
}

std::string ExperimentBundle::render_jsonl() const {
  return faqsearch::render_jsonl(report_rows(*this), relative_to);
}

std::vector<QueryGold> ranker_training_queries(std::span<const LabeledQuery> data,
                                               const Reformulator* reformulator) {
  std::vector<QueryGold> out;
  for (const auto& q : data) {
    if (q.intent != Intent::Question || !q.gold_faq_id) continue;
    out.push_back({q.query, *q.gold_faq_id});
    if (q.gold_reformulation) out.push_back({*q.gold_reformulation, *q.gold_faq_id});
    if (reformulator) out.push_back({reformulator->reformulate(q.query).text, *q.gold_faq_id});
  }
  return out;
}

std::vector<PipelineConfig> expand_matrix(const PipelineConfig& base,
                                          std::span<const Scorer> scorers,
                                          std::span<const CandidateSource> candidates,
                                          std::span<const ReformulatorKind> reformulators) {
  std::vector<PipelineConfig> out;
  for (auto scorer : scorers) {
    for (const auto& source : candidates) {
      for (auto reformulator : reformulators) {
        PipelineConfig c = base;
        c.scorer = scorer;
        c.candidates = source;
        c.reformulator = reformulator;
        c.name = std::string(to_string(scorer)) + "-" + to_string(source) + "/" +
                 std::string(to_string(reformulator));
        out.push_back(std::move(c));
      }
    }
  }
  return out;
}

ExperimentBundle run_experiment_matrix(std::span<const ExperimentInput> inputs,
                                       std::span<const LabeledQuery> test,
                                       const std::optional<std::string>& relative_to) {
  if (test.empty()) throw ValidationError("experiment needs test data");
  std::set<std::string> names;
  for (const auto& in : inputs) {
    if (!names.insert(in.config.name).second) {
      throw ValidationError("duplicate config name \"" + in.config.name + "\"");
    }
  }
  if (relative_to && !names.count(*relative_to)) {
    throw ValidationError("baseline config \"" + *relative_to + "\" is not in the matrix");
  }

  std::map<std::string, std::string> golds;
  std::vector<Intent> gold_intents;
  for (const auto& q : test) {
    gold_intents.push_back(q.intent);
    if (q.intent == Intent::Question && q.gold_faq_id) golds.emplace(q.query, *q.gold_faq_id);
  }

  ExperimentBundle bundle;
  bundle.relative_to = relative_to;
  for (const auto& in : inputs) {
    const Pipeline pipeline(in.config, in.models);  // validates required models
    ExperimentRow row;
    row.name = in.config.name;
    row.config = in.config;

    std::vector<Intent> predicted;
    predicted.reserve(test.size());
    for (const auto& q : test) predicted.push_back(pipeline.decide_intent(q.query).intent);
    row.classification = compute_classification(predicted, gold_intents);

    std::map<std::string, std::vector<ScoredHit>> ranked;
    for (const auto& [query, gold] : golds) ranked[query] = pipeline.retrieve(query);
    std::vector<std::string> known;
    for (const auto& e : in.models.space->index().entries()) known.push_back(e.id);
    row.retrieval = compute_retrieval(ranked, golds, known);

    row.cost = account_cost(pipeline, test, CostMode::Units);
    bundle.rows.push_back(std::move(row));
  }

  if (relative_to) {
    const auto base = bundle.row(*relative_to);
    const auto base_row = base.report_row();
    for (auto& r : bundle.rows) {
      const auto delta = relative_delta(r.report_row(), base_row);
      MetricDelta cls{delta.baseline, {}};
      MetricDelta ret{delta.baseline, {}};
      for (const auto& [k, v] : delta.deltas) {
        if (k == "precision" || k == "recall" || k == "f1") cls.deltas[k] = v;
        else if (k == "mrr" || k == "hit@1") ret.deltas[k] = v;
      }
      r.classification.relative_to = cls;
      r.retrieval.relative_to = ret;
    }
  }
  return bundle;
}

}  // namespace faqsearch
