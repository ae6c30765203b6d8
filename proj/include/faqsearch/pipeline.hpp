#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "faqsearch/corpus.hpp"
#include "faqsearch/intent.hpp"
#include "faqsearch/question_space.hpp"
#include "faqsearch/rank.hpp"
#include "faqsearch/reformulate.hpp"

namespace faqsearch {

struct Product {
  std::string id;
  std::string title;
  double score = 0.0;  // matched distinct query terms
  bool operator==(const Product&) const = default;
};

/// Token-overlap product search over a fixed title list.
class ProductCatalog {
 public:
  static ProductCatalog builtin();
  static ProductCatalog from_file(const std::filesystem::path& path);
  static ProductCatalog from_jsonl(std::string_view text);

  /// Products sharing at least one content term with the query, by overlap
  /// descending then id ascending, at most `limit`.
  std::vector<Product> search(std::string_view query, std::size_t limit = 10) const;
  std::size_t size() const noexcept { return products_.size(); }

 private:
  struct Item {
    Product product;
    std::vector<std::string> terms;  // sorted distinct content terms
  };
  std::vector<Item> products_;
};

enum class IntentSource { Model, Bm25Baseline, CosineBaseline, AlwaysOn };

std::string_view to_string(IntentSource s);
IntentSource parse_intent_source(std::string_view s);  // model|bm25|cosine|always_on

// Stage names, also the keys of SearchResponse timings.
inline constexpr std::string_view kStageProducts = "product_search";
inline constexpr std::string_view kStageClassify = "classify";
inline constexpr std::string_view kStageReformulate = "reformulate";
inline constexpr std::string_view kStageRetrieve = "retrieve";
inline constexpr std::string_view kStageRerank = "rerank";

/// Abstract cost units charged per executed stage. The default FAQ path
/// (reformulate + retrieve + rerank) totals 100.
struct CostProfile {
  double product_search = 0.0;
  double classify = 1.0;
  double reformulate = 20.0;
  double retrieve = 30.0;
  double rerank = 50.0;

  double of(std::string_view stage) const;
  void validate() const;
};

struct PipelineConfig {
  std::string name = "default";
  IntentSource intent_source = IntentSource::Model;
  ThresholdBaseline baseline;  // used by the baseline intent sources
  ReformulatorKind reformulator = ReformulatorKind::Template;
  Scorer scorer = Scorer::Pointwise;
  CandidateSource candidates = CandidateSource::bm25_top_k(10);
  CostProfile cost;
  std::size_t product_limit = 10;
  std::chrono::milliseconds faq_deadline{0};  // 0: no deadline

  void validate() const;
};

using IntentGate = std::function<IntentPrediction(std::string_view query)>;
/// Called before each FAQ-path stage; may throw or block (fault injection).
using StageHook = std::function<void(std::string_view stage)>;

/// Shared immutable state the pipeline reads.
struct PipelineModels {
  std::shared_ptr<const QuestionSpace> space;
  std::shared_ptr<const IntentModel> intent;
  std::shared_ptr<const Reformulator> reformulator;
  std::shared_ptr<const PointwiseRanker> ranker;
  std::shared_ptr<const ProductCatalog> products;
  IntentGate gate_override;  // replaces the configured intent source when set
  StageHook stage_hook;
};

struct FaqResult {
  FaqEntry entry;
  double score = 0.0;
};

struct SearchResponse {
  std::vector<Product> products;
  std::optional<FaqResult> faq;
  IntentPrediction intent;
  bool gated_in = false;
  bool degraded = false;
  std::string faq_query;  // text sent to retrieval when gated in
  std::map<std::string, double> timings_ms;  // executed stages only
  std::map<std::string, double> cost_units;  // same keys as timings_ms
};

class Pipeline {
 public:
  /// Throws ValidationError naming the config when a required model is
  /// missing.
  Pipeline(PipelineConfig config, PipelineModels models);

  const PipelineConfig& config() const noexcept { return config_; }
  const PipelineModels& models() const noexcept { return models_; }

  /// Never throws for FAQ-path faults: they yield degraded = true with the
  /// product results intact. Empty queries throw ValidationError.
  SearchResponse search(std::string_view query) const;

  IntentPrediction decide_intent(std::string_view query) const;

  /// Reformulate, rank and return the ranked list (no gating, no timings).
  std::vector<ScoredHit> retrieve(std::string_view query) const;

 private:
  struct FaqPath {
    std::optional<FaqResult> faq;
    std::string faq_query;
    bool degraded = false;
    std::map<std::string, double> timings_ms;
  };
  std::shared_ptr<FaqPath> run_faq_path(std::string query) const;

  PipelineConfig config_;
  PipelineModels models_;
};

struct CostReport {
  std::size_t queries = 0;
  std::size_t gated_in = 0;
  double gated_units = 0.0;
  double ungated_units = 0.0;
  double ratio = 0.0;           // gated / ungated
  double saving_percent = 0.0;  // 100 * (1 - ratio)
  std::optional<double> gated_wall_ms;
  std::optional<double> ungated_wall_ms;
  std::optional<double> wall_ratio;
};

enum class CostMode { Units, WallClock };

/// Runs `traffic` through the gated pipeline and through its AlwaysOn
/// counterpart. WallClock mode also times both passes.
CostReport account_cost(const Pipeline& gated, std::span<const LabeledQuery> traffic,
                        CostMode mode = CostMode::Units);

}  // namespace faqsearch
