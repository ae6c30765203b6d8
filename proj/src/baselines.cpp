#include <algorithm>
#include <cmath>

#include "faqsearch/errors.hpp"
#include "faqsearch/intent.hpp"
#include "faqsearch/metrics.hpp"

namespace faqsearch {

std::string_view to_string(BaselineKind kind) {
  return kind == BaselineKind::Bm25Count ? "bm25" : "cosine";
}

BaselineKind parse_baseline_kind(std::string_view s) {
  if (s == "bm25") return BaselineKind::Bm25Count;
  if (s == "cosine") return BaselineKind::CosineSim;
  throw ValidationError("unknown baseline kind \"" + std::string(s) + "\"");
}

void ThresholdBaseline::validate() const {
  if (x < 1) throw ValidationError("baseline x must be >= 1");
  if (!(y >= 0.0)) throw ValidationError("baseline y must be >= 0");
  if (!(cosine_threshold >= -1.0 && cosine_threshold <= 1.0)) {
    throw ValidationError("cosine threshold must lie in [-1, 1]");
  }
}

BaselineSignal baseline_signal(BaselineKind kind, const QuestionSpace& space,
                               std::string_view query) {
  BaselineSignal s;
  if (kind == BaselineKind::Bm25Count) {
    const auto hits = bm25_search(space.index(), query, kBaselineDepth);
    s.hit_count = hits.size();
    s.top_score = hits.empty() ? 0.0 : hits.front().score;
  } else {
    s.max_cosine = space.max_cosine(query);
  }
  return s;
}

IntentPrediction baseline_decide(const ThresholdBaseline& b, const BaselineSignal& s) {
  if (b.kind == BaselineKind::Bm25Count) {
    const bool question = s.hit_count >= b.x && s.top_score > b.y;
    if (question) {
      const double margin = s.top_score - b.y;
      return {Intent::Question, 0.5 + 0.5 * margin / (1.0 + margin)};
    }
    const double count_part = std::min(static_cast<double>(s.hit_count) / b.x, 1.0);
    const double score_part = b.y > 0.0 ? std::min(s.top_score / b.y, 1.0) : 0.0;
    return {Intent::NonQuestion, 0.249 * (count_part + score_part)};
  }
  const double c = std::clamp(s.max_cosine, 0.0, 1.0);
  const double t = b.cosine_threshold;
  if (c >= t) {
    const double p = t < 1.0 ? 0.5 + 0.5 * std::clamp((c - t) / (1.0 - t), 0.0, 1.0) : 1.0;
    return {Intent::Question, p};
  }
  return {Intent::NonQuestion, t > 0.0 ? 0.499 * c / t : 0.0};
}

IntentPrediction baseline_predict(const ThresholdBaseline& baseline, const QuestionSpace& space,
                                  std::string_view query) {
  return baseline_decide(baseline, baseline_signal(baseline.kind, space, query));
}

ThresholdGrid ThresholdGrid::defaults() {
  ThresholdGrid g;
  for (std::size_t x = 1; x <= 50; ++x) g.x_values.push_back(x);
  for (int i = 0; i <= 20; ++i) g.y_values.push_back(0.5 * i);
  for (int i = 1; i <= 19; ++i) g.cosine_values.push_back(0.05 * i);
  return g;
}

ThresholdBaseline tune_thresholds(BaselineKind kind, std::span<const LabeledQuery> validation,
                                  const QuestionSpace& space, const ThresholdGrid& grid) {
  if (validation.empty()) throw ValidationError("threshold tuning needs validation data");

  std::vector<BaselineSignal> signals;
  signals.reserve(validation.size());
  for (const auto& q : validation) signals.push_back(baseline_signal(kind, space, q.query));

  auto f1_of = [&](const ThresholdBaseline& b) {
    Confusion c;
    for (std::size_t i = 0; i < validation.size(); ++i) {
      const bool predicted = baseline_decide(b, signals[i]).intent == Intent::Question;
      const bool gold = validation[i].intent == Intent::Question;
      if (predicted && gold) ++c.true_positive;
      else if (predicted) ++c.false_positive;
      else if (gold) ++c.false_negative;
      else ++c.true_negative;
    }
    return classification_from_confusion(c).f1;
  };

  // Grid values are visited in ascending order and only a strictly better F1
  // replaces the incumbent, which yields the smaller-threshold tie-break.
  std::optional<ThresholdBaseline> best;
  double best_f1 = -1.0;
  auto consider = [&](const ThresholdBaseline& b) {
    const double f1 = f1_of(b);
    if (f1 > best_f1) {
      best_f1 = f1;
      best = b;
    }
  };

  if (kind == BaselineKind::Bm25Count) {
    auto xs = grid.x_values;
    auto ys = grid.y_values;
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    for (auto x : xs) {
      for (auto y : ys) {
        ThresholdBaseline b{BaselineKind::Bm25Count, x, y, 0.0};
        b.validate();
        consider(b);
      }
    }
  } else {
    auto cs = grid.cosine_values;
    std::sort(cs.begin(), cs.end());
    for (auto t : cs) {
      ThresholdBaseline b{BaselineKind::CosineSim, 1, 0.0, t};
      b.validate();
      consider(b);
    }
  }
  if (!best) throw ValidationError("threshold grid is empty");
  return *best;
}

WeakLabelResult bootstrap_weak_labels(std::span<const std::string> questions,
                                      std::span<const std::string> product_queries) {
  WeakLabelResult out;
  for (const auto& q : questions) {
    try {
      LabeledQuery lq;
      lq.query = extract_keywords(q);
      lq.intent = Intent::Question;
      lq.gold_reformulation = q;
      out.labeled.push_back(std::move(lq));
    } catch (const EmptyResultError&) {
      ++out.skipped_questions;
    }
  }
  for (const auto& p : product_queries) {
    if (starts_with_question_word(p) || normalize_query(p).empty()) {
      ++out.filtered_products;
      continue;
    }
    LabeledQuery lq;
    lq.query = p;
    lq.intent = Intent::NonQuestion;
    out.labeled.push_back(std::move(lq));
  }
  return out;
}

}  // namespace faqsearch
