#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "faqsearch/feedback_log.hpp"
#include "faqsearch/metrics.hpp"

namespace faqsearch {

struct FeedbackStats {
  std::size_t queries_with_feedback = 0;
  std::size_t queries_with_positive = 0;
  std::size_t positive_events = 0;
  std::size_t negative_events = 0;
  std::optional<double> positive_fraction;      // over distinct queries
  std::optional<double> raw_positive_fraction;  // over events
};

/// Queries are grouped by normalised text. `normal` and `degraded` split the
/// records by the degraded flag of the response that showed the FAQ.
struct FeedbackReport {
  FeedbackStats all;
  FeedbackStats normal;
  FeedbackStats degraded;
};

FeedbackReport aggregate_feedback(std::span<const FeedbackRecord> records);
FeedbackStats feedback_stats(std::span<const FeedbackRecord> records);

/// One named row of metrics, in display order.
struct ReportRow {
  std::string name;
  std::vector<std::pair<std::string, double>> metrics;
};

/// Row minus baseline, metric by metric. Metrics absent from the baseline
/// are skipped.
MetricDelta relative_delta(const ReportRow& row, const ReportRow& baseline);

/// Fixed-width table; with `relative_to`, values are shown as deltas against
/// that row. Throws ValidationError when the baseline row is missing.
std::string render_table(std::span<const ReportRow> rows,
                         const std::optional<std::string>& relative_to = std::nullopt);

/// One JSON object per row: {"name", "metrics": {...}, "relative_to"?, "deltas"?}.
std::string render_jsonl(std::span<const ReportRow> rows,
                         const std::optional<std::string>& relative_to = std::nullopt);

ReportRow classification_row(const std::string& name, const ClassificationReport& r);
ReportRow retrieval_row(const std::string& name, const RetrievalReport& r);

}  // namespace faqsearch
