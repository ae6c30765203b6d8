#include "faqsearch/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "faqsearch/embedded_products.hpp"
#include "faqsearch/errors.hpp"
#include "faqsearch/textproc.hpp"

namespace faqsearch {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

std::vector<std::string> content_terms(std::string_view text) {
  const auto& stop = StopwordList::builtin();
  std::vector<std::string> out;
  for (auto& t : tokenize_terms(text)) {
    if (!stop.contains(t)) out.push_back(std::move(t));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

const Reformulator& identity_reformulator() {
  static const Reformulator r = Reformulator::identity();
  return r;
}

}  // namespace

ProductCatalog ProductCatalog::builtin() {
  static const ProductCatalog catalog = from_jsonl(detail::kEmbeddedProducts);
  return catalog;
}

ProductCatalog ProductCatalog::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return from_jsonl(buf.str());
}

ProductCatalog ProductCatalog::from_jsonl(std::string_view text) {
  ProductCatalog c;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      Item item;
      item.product.id = j.at("id").get<std::string>();
      item.product.title = j.at("title").get<std::string>();
      item.terms = content_terms(item.product.title);
      c.products_.push_back(std::move(item));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(lineno, e.what());
    }
  }
  std::sort(c.products_.begin(), c.products_.end(),
            [](const Item& a, const Item& b) { return a.product.id < b.product.id; });
  return c;
}

std::vector<Product> ProductCatalog::search(std::string_view query, std::size_t limit) const {
  const auto q = content_terms(query);
  std::vector<Product> out;
  for (const auto& item : products_) {
    std::size_t overlap = 0;
    for (const auto& t : item.terms) overlap += std::binary_search(q.begin(), q.end(), t);
    if (overlap == 0) continue;
    Product p = item.product;
    p.score = static_cast<double>(overlap);
    out.push_back(std::move(p));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Product& a, const Product& b) { return a.score > b.score; });
  if (out.size() > limit) out.resize(limit);
  return out;
}

std::string_view to_string(IntentSource s) {
  switch (s) {
    case IntentSource::Model: return "model";
    case IntentSource::Bm25Baseline: return "bm25";
    case IntentSource::CosineBaseline: return "cosine";
    case IntentSource::AlwaysOn: return "always_on";
  }
  return "model";
}

IntentSource parse_intent_source(std::string_view s) {
  if (s == "model") return IntentSource::Model;
  if (s == "bm25") return IntentSource::Bm25Baseline;
  if (s == "cosine") return IntentSource::CosineBaseline;
  if (s == "always_on") return IntentSource::AlwaysOn;
  throw ValidationError("unknown intent source \"" + std::string(s) + "\"");
}

double CostProfile::of(std::string_view stage) const {
  if (stage == kStageProducts) return product_search;
  if (stage == kStageClassify) return classify;
  if (stage == kStageReformulate) return reformulate;
  if (stage == kStageRetrieve) return retrieve;
  if (stage == kStageRerank) return rerank;
  return 0.0;
}

void CostProfile::validate() const {
  for (double v : {product_search, classify, reformulate, retrieve, rerank}) {
    if (!(v >= 0.0)) throw ValidationError("cost units must be non-negative");
  }
}

void PipelineConfig::validate() const {
  cost.validate();
  candidates.validate();
  baseline.validate();
  if (faq_deadline.count() < 0) throw ValidationError("deadline must be non-negative");
}

Pipeline::Pipeline(PipelineConfig config, PipelineModels models)
    : config_(std::move(config)), models_(std::move(models)) {
  const auto missing = [&](const std::string& what) {
    return ValidationError("config \"" + config_.name + "\": " + what);
  };
  try {
    config_.validate();
  } catch (const ValidationError& e) {
    throw missing(e.what());
  }
  if (!models_.space) throw missing("no FAQ index loaded");
  if (!models_.products) models_.products = std::make_shared<ProductCatalog>(ProductCatalog::builtin());
  if (config_.intent_source == IntentSource::Model && !models_.intent && !models_.gate_override) {
    throw missing("intent source \"model\" needs an intent model");
  }
  if (config_.reformulator != ReformulatorKind::Identity) {
    if (!models_.reformulator) {
      throw missing("reformulator \"" + std::string(to_string(config_.reformulator)) +
                    "\" is not loaded");
    }
    if (models_.reformulator->kind() != config_.reformulator) {
      throw missing("loaded reformulator kind does not match the config");
    }
  }
  if (config_.scorer == Scorer::Pointwise && !models_.ranker) {
    throw missing("scorer \"pointwise\" needs a trained ranker");
  }
}

IntentPrediction Pipeline::decide_intent(std::string_view query) const {
  switch (config_.intent_source) {
    case IntentSource::AlwaysOn: return {Intent::Question, 1.0};
    default: break;
  }
  if (models_.gate_override) return models_.gate_override(query);
  switch (config_.intent_source) {
    case IntentSource::Model: return models_.intent->classify(query);
    case IntentSource::Bm25Baseline: {
      auto b = config_.baseline;
      b.kind = BaselineKind::Bm25Count;
      return baseline_predict(b, *models_.space, query);
    }
    case IntentSource::CosineBaseline: {
      auto b = config_.baseline;
      b.kind = BaselineKind::CosineSim;
      return baseline_predict(b, *models_.space, query);
    }
    case IntentSource::AlwaysOn: break;
  }
  return {Intent::Question, 1.0};
}

std::vector<ScoredHit> Pipeline::retrieve(std::string_view query) const {
  const Reformulator& r = models_.reformulator && config_.reformulator != ReformulatorKind::Identity
                              ? *models_.reformulator
                              : identity_reformulator();
  const auto text = r.reformulate(query).text;
  return rank_faqs({text, config_.candidates, config_.scorer}, *models_.space, models_.ranker.get());
}

std::shared_ptr<Pipeline::FaqPath> Pipeline::run_faq_path(std::string query) const {
  auto out = std::make_shared<FaqPath>();
  const auto& space = *models_.space;
  const auto hook = [&](std::string_view stage) {
    if (models_.stage_hook) models_.stage_hook(stage);
  };
  const Reformulator& reformulator =
      models_.reformulator && config_.reformulator != ReformulatorKind::Identity
          ? *models_.reformulator
          : identity_reformulator();

  auto t = Clock::now();
  hook(kStageReformulate);
  const auto reformulation = reformulator.reformulate(query);
  out->timings_ms[std::string(kStageReformulate)] = elapsed_ms(t);
  out->faq_query = reformulation.text;
  out->degraded = reformulation.degraded;

  std::vector<ScoredHit> hits;
  t = Clock::now();
  hook(kStageRetrieve);
  if (config_.scorer == Scorer::Bm25Only) {
    hits = rank_faqs({out->faq_query, config_.candidates, Scorer::Bm25Only}, space);
    out->timings_ms[std::string(kStageRetrieve)] = elapsed_ms(t);
  } else {
    const auto docs = candidate_set(space, out->faq_query, config_.candidates);
    out->timings_ms[std::string(kStageRetrieve)] = elapsed_ms(t);
    t = Clock::now();
    hook(kStageRerank);
    hits = score_candidates(space, out->faq_query, config_.scorer, docs, models_.ranker.get());
    out->timings_ms[std::string(kStageRerank)] = elapsed_ms(t);
  }
  if (!hits.empty()) {
    if (auto entry = top_one(hits, space.index())) out->faq = FaqResult{*entry, hits.front().score};
  }
  return out;
}

SearchResponse Pipeline::search(std::string_view query) const {
  if (normalize_query(query).empty()) throw ValidationError("query is empty");
  SearchResponse resp;

  auto t = Clock::now();
  resp.products = models_.products->search(query, config_.product_limit);
  resp.timings_ms[std::string(kStageProducts)] = elapsed_ms(t);

  if (config_.intent_source == IntentSource::AlwaysOn) {
    resp.intent = {Intent::Question, 1.0};
  } else {
    t = Clock::now();
    try {
      resp.intent = decide_intent(query);
    } catch (const std::exception&) {
      resp.intent = {Intent::NonQuestion, 0.0};
      resp.degraded = true;
    }
    resp.timings_ms[std::string(kStageClassify)] = elapsed_ms(t);
  }

  if (resp.intent.intent == Intent::Question && !resp.degraded) {
    resp.gated_in = true;
    std::shared_ptr<FaqPath> path;
    try {
      if (config_.faq_deadline.count() > 0) {
        // The worker owns copies of everything it touches, so an overrun can
        // be abandoned safely.
        auto promise = std::make_shared<std::promise<std::shared_ptr<FaqPath>>>();
        auto future = promise->get_future();
        auto self = std::make_shared<Pipeline>(*this);
        std::thread([self, promise, q = std::string(query)] {
          try {
            promise->set_value(self->run_faq_path(q));
          } catch (...) {
            promise->set_exception(std::current_exception());
          }
        }).detach();
        if (future.wait_for(config_.faq_deadline) == std::future_status::ready) {
          path = future.get();
        } else {
          resp.degraded = true;
        }
      } else {
        path = run_faq_path(std::string(query));
      }
    } catch (const std::exception&) {
      resp.degraded = true;
      path.reset();
    }
    if (path) {
      resp.faq = path->faq;
      resp.faq_query = path->faq_query;
      resp.degraded = resp.degraded || path->degraded;
      for (const auto& [k, v] : path->timings_ms) resp.timings_ms[k] = v;
    }
  }
  for (const auto& [stage, ms] : resp.timings_ms) resp.cost_units[stage] = config_.cost.of(stage);
  return resp;
}

CostReport account_cost(const Pipeline& gated, std::span<const LabeledQuery> traffic,
                        CostMode mode) {
  if (traffic.empty()) throw ValidationError("cost accounting needs traffic");
  auto gated_config = gated.config();
  auto models = gated.models();
  if (mode == CostMode::Units) gated_config.faq_deadline = std::chrono::milliseconds(0);
  auto ungated_config = gated_config;
  ungated_config.intent_source = IntentSource::AlwaysOn;
  ungated_config.name = gated_config.name + "/always_on";
  const Pipeline g(gated_config, models);
  const Pipeline u(ungated_config, models);

  CostReport r;
  r.queries = traffic.size();
  auto run = [&](const Pipeline& p, double& units, std::size_t* gated_in) {
    const auto start = Clock::now();
    for (const auto& q : traffic) {
      const auto resp = p.search(q.query);
      for (const auto& [stage, c] : resp.cost_units) units += c;
      if (gated_in) *gated_in += resp.gated_in;
    }
    return elapsed_ms(start);
  };
  const double gated_ms = run(g, r.gated_units, &r.gated_in);
  const double ungated_ms = run(u, r.ungated_units, nullptr);
  r.ratio = r.ungated_units > 0 ? r.gated_units / r.ungated_units : 0.0;
  r.saving_percent = 100.0 * (1.0 - r.ratio);
  if (mode == CostMode::WallClock) {
    r.gated_wall_ms = gated_ms;
    r.ungated_wall_ms = ungated_ms;
    r.wall_ratio = ungated_ms > 0 ? gated_ms / ungated_ms : 0.0;
  }
  return r;
}

}  // namespace faqsearch
