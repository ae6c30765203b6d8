#include "faqsearch/evalharness.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "faqsearch/errors.hpp"
#include "faqsearch/textproc.hpp"

namespace faqsearch {

ClassificationReport classification_from_confusion(const Confusion& c) {
  ClassificationReport r;
  r.confusion = c;
  const double tp = static_cast<double>(c.true_positive);
  const double predicted = tp + static_cast<double>(c.false_positive);
  const double actual = tp + static_cast<double>(c.false_negative);
  r.precision = predicted > 0 ? tp / predicted : 0.0;
  r.recall = actual > 0 ? tp / actual : 0.0;
  r.f1 = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

ClassificationReport compute_classification(std::span<const Intent> predictions,
                                            std::span<const Intent> golds) {
  if (predictions.size() != golds.size()) {
    throw ValidationError("prediction and gold lengths differ (" +
                          std::to_string(predictions.size()) + " vs " +
                          std::to_string(golds.size()) + ")");
  }
  Confusion c;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    const bool p = predictions[i] == Intent::Question;
    const bool g = golds[i] == Intent::Question;
    if (p && g) ++c.true_positive;
    else if (p) ++c.false_positive;
    else if (g) ++c.false_negative;
    else ++c.true_negative;
  }
  return classification_from_confusion(c);
}

RetrievalReport compute_retrieval(const std::map<std::string, std::vector<ScoredHit>>& ranked,
                                  const std::map<std::string, std::string>& golds,
                                  std::span<const std::string> known_ids) {
  const std::set<std::string> known(known_ids.begin(), known_ids.end());
  RetrievalReport r;
  double rr_sum = 0.0;
  std::size_t hits = 0;
  for (const auto& [query, gold] : golds) {
    if (!known.empty() && !known.count(gold)) {
      throw ValidationError("gold faq id \"" + gold + "\" is not in the corpus");
    }
    auto it = ranked.find(query);
    if (it == ranked.end()) throw ValidationError("no ranked list for query \"" + query + "\"");
    std::optional<std::size_t> rank;
    for (std::size_t i = 0; i < it->second.size(); ++i) {
      if (it->second[i].faq_id == gold) {
        rank = i + 1;
        break;
      }
    }
    if (rank) {
      rr_sum += 1.0 / static_cast<double>(*rank);
      hits += *rank == 1;
    }
    r.per_query_ranks[query] = rank;
  }
  if (!golds.empty()) {
    r.mrr = rr_sum / static_cast<double>(golds.size());
    r.hit_at_1 = static_cast<double>(hits) / static_cast<double>(golds.size());
  }
  return r;
}

FeedbackStats feedback_stats(std::span<const FeedbackRecord> records) {
  FeedbackStats s;
  std::map<std::string, bool> any_positive;
  for (const auto& r : records) {
    const bool positive = r.verdict == Verdict::Helpful;
    (positive ? s.positive_events : s.negative_events) += 1;
    auto& flag = any_positive[normalize_query(r.query)];
    flag = flag || positive;
  }
  s.queries_with_feedback = any_positive.size();
  for (const auto& [q, positive] : any_positive) s.queries_with_positive += positive;
  if (s.queries_with_feedback > 0) {
    s.positive_fraction = static_cast<double>(s.queries_with_positive) /
                          static_cast<double>(s.queries_with_feedback);
    s.raw_positive_fraction = static_cast<double>(s.positive_events) /
                              static_cast<double>(s.positive_events + s.negative_events);
  }
  return s;
}

FeedbackReport aggregate_feedback(std::span<const FeedbackRecord> records) {
  std::vector<FeedbackRecord> normal, degraded;
  for (const auto& r : records) (r.degraded ? degraded : normal).push_back(r);
  return {feedback_stats(records), feedback_stats(normal), feedback_stats(degraded)};
}

MetricDelta relative_delta(const ReportRow& row, const ReportRow& baseline) {
  MetricDelta d;
  d.baseline = baseline.name;
  for (const auto& [name, value] : row.metrics) {
    auto it = std::find_if(baseline.metrics.begin(), baseline.metrics.end(),
                           [&](const auto& m) { return m.first == name; });
    if (it != baseline.metrics.end()) d.deltas[name] = value - it->second;
  }
  return d;
}

namespace {

const ReportRow& find_row(std::span<const ReportRow> rows, const std::string& name) {
  for (const auto& r : rows) {
    if (r.name == name) return r;
  }
  throw ValidationError("baseline row \"" + name + "\" is not in the report");
}

std::string format_value(double v, bool signed_delta) {
  char buf[32];
  std::snprintf(buf, sizeof buf, signed_delta ? "%+.4f" : "%.4f", v);
  // A zero delta prints unsigned so the baseline row reads 0.0000.
  if (signed_delta && std::string_view(buf) == "-0.0000") return "+0.0000";
  return buf;
}

}  // namespace

std::string render_table(std::span<const ReportRow> rows,
                         const std::optional<std::string>& relative_to) {
  std::vector<std::string> columns;
  for (const auto& r : rows) {
    for (const auto& [name, v] : r.metrics) {
      if (std::find(columns.begin(), columns.end(), name) == columns.end()) columns.push_back(name);
    }
  }
  const ReportRow* baseline = relative_to ? &find_row(rows, *relative_to) : nullptr;

  std::size_t name_width = 6;
  for (const auto& r : rows) name_width = std::max(name_width, r.name.size());
  std::vector<std::size_t> widths;
  for (const auto& c : columns) widths.push_back(std::max<std::size_t>(c.size(), 9));

  std::ostringstream out;
  auto pad = [&](const std::string& s, std::size_t w, bool left) {
    if (s.size() >= w) return s;
    return left ? s + std::string(w - s.size(), ' ') : std::string(w - s.size(), ' ') + s;
  };
  out << pad("config", name_width, true);
  for (std::size_t i = 0; i < columns.size(); ++i) out << "  " << pad(columns[i], widths[i], false);
  out << '\n' << std::string(name_width, '-');
  for (auto w : widths) out << "  " << std::string(w, '-');
  out << '\n';
  for (const auto& r : rows) {
    out << pad(r.name, name_width, true);
    std::map<std::string, double> values(r.metrics.begin(), r.metrics.end());
    std::map<std::string, double> deltas;
    if (baseline) deltas = relative_delta(r, *baseline).deltas;
    for (std::size_t i = 0; i < columns.size(); ++i) {
      std::string cell = "-";
      if (baseline) {
        if (auto it = deltas.find(columns[i]); it != deltas.end()) cell = format_value(it->second, true);
      } else if (auto it = values.find(columns[i]); it != values.end()) {
        cell = format_value(it->second, false);
      }
      out << "  " << pad(cell, widths[i], false);
    }
    out << '\n';
  }
  if (baseline) out << "(values relative to " << baseline->name << ")\n";
  return out.str();
}

std::string render_jsonl(std::span<const ReportRow> rows,
                         const std::optional<std::string>& relative_to) {
  const ReportRow* baseline = relative_to ? &find_row(rows, *relative_to) : nullptr;
  std::ostringstream out;
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["name"] = r.name;
    nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.metrics) metrics[k] = v;
    j["metrics"] = metrics;
    if (baseline) {
      j["relative_to"] = baseline->name;
      nlohmann::ordered_json deltas = nlohmann::ordered_json::object();
      for (const auto& [k, v] : relative_delta(r, *baseline).deltas) deltas[k] = v;
      j["deltas"] = deltas;
    }
    out << j.dump() << '\n';
  }
  return out.str();
}

ReportRow classification_row(const std::string& name, const ClassificationReport& r) {
  return {name, {{"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1}}};
}

ReportRow retrieval_row(const std::string& name, const RetrievalReport& r) {
  return {name, {{"mrr", r.mrr}, {"hit@1", r.hit_at_1}}};
}

}  // namespace faqsearch
