#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "faqsearch/corpus.hpp"
#include "faqsearch/index.hpp"
#include "faqsearch/question_space.hpp"
#include "faqsearch/textproc.hpp"

namespace faqsearch {

struct IntentPrediction {
  Intent intent = Intent::NonQuestion;
  double probability = 0.0;
};

/// Logistic model over hash_features(query, dims).
struct IntentModel {
  std::vector<double> weights;
  double bias = 0.0;
  std::uint32_t dims = kDefaultHashDims;
  double decision_threshold = 0.5;

  static IntentModel zeros(std::uint32_t dims);

  double probability(std::string_view query) const;
  IntentPrediction classify(std::string_view query) const;

  void save(std::ostream& out) const;
  static IntentModel load(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static IntentModel load(const std::filesystem::path& path);
};

inline IntentPrediction classify(const IntentModel& model, std::string_view query) {
  return model.classify(query);
}

/// Balances the classes by repeating minority records: whole copies first,
/// then a seeded sample without replacement for the remainder. Majority
/// records are kept as-is; the result is shuffled by `seed`.
std::vector<LabeledQuery> oversample_minority(std::span<const LabeledQuery> data,
                                              std::uint64_t seed);

struct IntentTrainingConfig {
  std::uint32_t dims = kDefaultHashDims;
  double learning_rate = 0.5;
  double l2 = 1e-6;
  std::size_t max_epochs = 60;
  std::size_t patience = 10;
  double decision_threshold = 0.5;
  std::uint64_t seed = 0;
};

/// L2-regularised log loss minimised by per-example SGD. Early stopping
/// watches validation loss (training loss when `validation` is empty) and
/// returns the best epoch's weights.
IntentModel train_intent_model(std::span<const LabeledQuery> train,
                               std::span<const LabeledQuery> validation,
                               const IntentTrainingConfig& config);

// Threshold baselines: retrieval signals reused as intent classifiers.

enum class BaselineKind { Bm25Count, CosineSim };

std::string_view to_string(BaselineKind kind);
BaselineKind parse_baseline_kind(std::string_view s);  // "bm25" | "cosine"

/// Retrieval depth whose hit count the Bm25Count baseline thresholds.
inline constexpr std::size_t kBaselineDepth = 50;

struct ThresholdBaseline {
  BaselineKind kind = BaselineKind::Bm25Count;
  std::size_t x = 1;    // minimum hit count
  double y = 0.0;       // top-1 score must exceed this
  double cosine_threshold = 0.6;

  void validate() const;
};

/// Signals a baseline thresholds, computed once per query.
struct BaselineSignal {
  std::size_t hit_count = 0;
  double top_score = 0.0;
  double max_cosine = 0.0;
};

BaselineSignal baseline_signal(BaselineKind kind, const QuestionSpace& space,
                               std::string_view query);

/// Decision from precomputed signals. probability >= 0.5 exactly when the
/// decision is Question.
IntentPrediction baseline_decide(const ThresholdBaseline& baseline, const BaselineSignal& signal);

IntentPrediction baseline_predict(const ThresholdBaseline& baseline, const QuestionSpace& space,
                                  std::string_view query);

struct ThresholdGrid {
  std::vector<std::size_t> x_values;
  std::vector<double> y_values;
  std::vector<double> cosine_values;

  /// x in 1..50, y in 0..10 step 0.5, cosine in 0.05..0.95 step 0.05.
  static ThresholdGrid defaults();
};

/// Exhaustive F1 maximisation on the validation set. Ties go to the smaller
/// x, then the smaller y (or the smaller cosine threshold).
ThresholdBaseline tune_thresholds(BaselineKind kind, std::span<const LabeledQuery> validation,
                                  const QuestionSpace& space,
                                  const ThresholdGrid& grid = ThresholdGrid::defaults());

struct WeakLabelResult {
  std::vector<LabeledQuery> labeled;
  std::size_t skipped_questions = 0;   // no content words
  std::size_t filtered_products = 0;   // started with a question word
};

/// Positives: keyword projections of `questions`. Negatives: product queries
/// that do not begin with a question word.
WeakLabelResult bootstrap_weak_labels(std::span<const std::string> questions,
                                      std::span<const std::string> product_queries);

}  // namespace faqsearch
