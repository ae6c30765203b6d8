#include "faqsearch/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "faqsearch/errors.hpp"

namespace faqsearch {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

const std::set<std::string, std::less<>>& known_keys() {
  static const std::set<std::string, std::less<>> keys{
      "name", "intent_source", "decision_threshold", "baseline.x", "baseline.y",
      "baseline.cosine", "reformulator", "scorer", "candidates", "product_limit",
      "deadline_ms", "cost.product_search", "cost.classify", "cost.reformulate",
      "cost.retrieve", "cost.rerank", "corpus", "index", "intent_model", "templates",
      "ranker", "products", "external_url", "external_timeout_ms", "data.train",
      "data.validation", "data.test"};
  return keys;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text) {
  KeyValueConfig c;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected key = value");
    auto key = trim(std::string_view(body).substr(0, eq));
    auto value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw ParseError(lineno, "empty key");
    if (!known_keys().count(key)) throw ParseError(lineno, "unknown key \"" + key + "\"");
    if (c.values_.count(key)) throw ParseError(lineno, "duplicate key \"" + key + "\"");
    c.values_[std::move(key)] = std::move(value);
  }
  return c;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  auto c = parse(buf.str());
  c.base_dir_ = std::filesystem::absolute(path).parent_path();
  return c;
}

bool KeyValueConfig::has(std::string_view key) const { return values_.find(key) != values_.end(); }

std::optional<std::string> KeyValueConfig::get(std::string_view key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueConfig::get_or(std::string_view key, std::string fallback) const {
  auto v = get(key);
  return v ? *v : std::move(fallback);
}

double KeyValueConfig::get_double(std::string_view key, double fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  double out = 0.0;
  const auto* end = v->data() + v->size();
  auto [ptr, ec] = std::from_chars(v->data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    throw ValidationError("config key " + std::string(key) + " expects a number, got \"" + *v + "\"");
  }
  return out;
}

std::size_t KeyValueConfig::get_size(std::string_view key, std::size_t fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  std::size_t out = 0;
  const auto* end = v->data() + v->size();
  auto [ptr, ec] = std::from_chars(v->data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    throw ValidationError("config key " + std::string(key) + " expects a count, got \"" + *v + "\"");
  }
  return out;
}

std::optional<std::filesystem::path> KeyValueConfig::get_path(std::string_view key) const {
  auto v = get(key);
  if (!v || v->empty()) return std::nullopt;
  std::filesystem::path p(*v);
  if (p.is_relative() && !base_dir_.empty()) p = base_dir_ / p;
  return p;
}

LoadedConfig interpret_config(const KeyValueConfig& kv) {
  LoadedConfig c;
  auto& p = c.pipeline;
  p.name = kv.get_or("name", "default");
  p.intent_source = parse_intent_source(kv.get_or("intent_source", "model"));
  p.baseline.x = kv.get_size("baseline.x", p.baseline.x);
  p.baseline.y = kv.get_double("baseline.y", p.baseline.y);
  p.baseline.cosine_threshold = kv.get_double("baseline.cosine", p.baseline.cosine_threshold);
  p.reformulator = parse_reformulator_kind(kv.get_or("reformulator", "template"));
  p.scorer = parse_scorer(kv.get_or("scorer", "pointwise"));
  p.candidates = parse_candidate_source(kv.get_or("candidates", "top10"));
  p.product_limit = kv.get_size("product_limit", p.product_limit);
  p.faq_deadline = std::chrono::milliseconds(kv.get_size("deadline_ms", 1000));
  p.cost.product_search = kv.get_double("cost.product_search", p.cost.product_search);
  p.cost.classify = kv.get_double("cost.classify", p.cost.classify);
  p.cost.reformulate = kv.get_double("cost.reformulate", p.cost.reformulate);
  p.cost.retrieve = kv.get_double("cost.retrieve", p.cost.retrieve);
  p.cost.rerank = kv.get_double("cost.rerank", p.cost.rerank);
  p.validate();

  auto& m = c.paths;
  m.corpus = kv.get_path("corpus");
  m.index = kv.get_path("index");
  m.intent_model = kv.get_path("intent_model");
  m.templates = kv.get_path("templates");
  m.ranker = kv.get_path("ranker");
  m.products = kv.get_path("products");
  m.external_url = kv.get("external_url");
  m.external_timeout = std::chrono::milliseconds(kv.get_size("external_timeout_ms", 500));
  for (const char* split : {"train", "validation", "test"}) {
    if (auto path = kv.get_path(std::string("data.") + split)) m.splits[split] = *path;
  }
  if (kv.has("decision_threshold")) {
    const double t = kv.get_double("decision_threshold", 0.5);
    if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("decision_threshold must lie in [0, 1]");
    c.decision_threshold = t;
  }
  return c;
}

LoadedConfig load_config(const std::filesystem::path& path) {
  return interpret_config(KeyValueConfig::load(path));
}

PipelineModels load_models(const LoadedConfig& config) {
  const auto& paths = config.paths;
  const auto& p = config.pipeline;
  PipelineModels m;
  std::shared_ptr<const InvertedIndex> index;
  if (paths.index) {
    index = std::make_shared<const InvertedIndex>(InvertedIndex::load(*paths.index));
  } else if (paths.corpus) {
    const auto corpus = load_faq_corpus(*paths.corpus);
    index = std::make_shared<const InvertedIndex>(InvertedIndex::build(corpus));
  } else {
    throw ValidationError("config \"" + p.name + "\" names neither an index nor a corpus");
  }
  m.space = std::make_shared<const QuestionSpace>(index);

  if (p.intent_source == IntentSource::Model) {
    if (!paths.intent_model) throw ValidationError("config \"" + p.name + "\" needs intent_model");
    auto model = IntentModel::load(*paths.intent_model);
    if (config.decision_threshold) model.decision_threshold = *config.decision_threshold;
    m.intent = std::make_shared<const IntentModel>(std::move(model));
  }
  switch (p.reformulator) {
    case ReformulatorKind::Identity: break;
    case ReformulatorKind::Template:
      if (!paths.templates) throw ValidationError("config \"" + p.name + "\" needs templates");
      m.reformulator = std::make_shared<const Reformulator>(
          Reformulator::from_templates(load_templates(*paths.templates)));
      break;
    case ReformulatorKind::External:
      if (!paths.external_url) throw ValidationError("config \"" + p.name + "\" needs external_url");
      m.reformulator = std::make_shared<const Reformulator>(
          Reformulator::external({*paths.external_url, "/reformulate", paths.external_timeout}));
      break;
  }
  if (p.scorer == Scorer::Pointwise) {
    if (!paths.ranker) throw ValidationError("config \"" + p.name + "\" needs ranker");
    m.ranker = std::make_shared<const PointwiseRanker>(PointwiseRanker::load(*paths.ranker));
  }
  if (paths.products) {
    m.products = std::make_shared<const ProductCatalog>(ProductCatalog::from_file(*paths.products));
  }
  return m;
}

}  // namespace faqsearch
