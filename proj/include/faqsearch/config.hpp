#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "faqsearch/corpus.hpp"
#include "faqsearch/pipeline.hpp"

namespace faqsearch {

/// Parsed "key = value" lines. '#' starts a comment; blank lines are skipped.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text);
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(std::string_view key) const;
  std::optional<std::string> get(std::string_view key) const;
  std::string get_or(std::string_view key, std::string fallback) const;
  double get_double(std::string_view key, double fallback) const;
  std::size_t get_size(std::string_view key, std::size_t fallback) const;
  /// Relative values resolve against the config file's directory.
  std::optional<std::filesystem::path> get_path(std::string_view key) const;

  void set(std::string key, std::string value) { values_[std::move(key)] = std::move(value); }
  const std::map<std::string, std::string, std::less<>>& values() const noexcept { return values_; }
  const std::filesystem::path& base_dir() const noexcept { return base_dir_; }

 private:
  std::map<std::string, std::string, std::less<>> values_;
  std::filesystem::path base_dir_;
};

/// File locations referenced by a config.
struct ModelPaths {
  std::optional<std::filesystem::path> corpus;
  std::optional<std::filesystem::path> index;
  std::optional<std::filesystem::path> intent_model;
  std::optional<std::filesystem::path> templates;
  std::optional<std::filesystem::path> ranker;
  std::optional<std::filesystem::path> products;
  std::optional<std::string> external_url;
  std::chrono::milliseconds external_timeout{500};
  std::map<std::string, std::filesystem::path> splits;  // train|validation|test
};

struct LoadedConfig {
  PipelineConfig pipeline;
  ModelPaths paths;
  std::optional<double> decision_threshold;  // overrides the saved model's
};

/// Keys: name, intent_source, decision_threshold, baseline.x, baseline.y,
/// baseline.cosine, reformulator, scorer, candidates, product_limit,
/// deadline_ms, cost.{product_search,classify,reformulate,retrieve,rerank},
/// corpus, index, intent_model, templates, ranker, products, external_url,
/// external_timeout_ms, data.{train,validation,test}.
LoadedConfig interpret_config(const KeyValueConfig& kv);
LoadedConfig load_config(const std::filesystem::path& path);

/// Loads what the config needs. The index comes from `index` when set,
/// otherwise it is built from `corpus`.
PipelineModels load_models(const LoadedConfig& config);

}  // namespace faqsearch
