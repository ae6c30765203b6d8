#include "faqsearch/intent.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>

#include "faqsearch/binary_io.hpp"
#include "faqsearch/errors.hpp"
#include "faqsearch/random.hpp"

namespace faqsearch {
namespace {

constexpr std::string_view kModelMagic = "FAQINT01";
constexpr std::uint32_t kModelVersion = 1;

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double log_loss(double p, double y) {
  constexpr double eps = 1e-15;
  p = std::clamp(p, eps, 1.0 - eps);
  return -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
}

struct Example {
  SparseVector x;
  double y;
};

std::vector<Example> featurize(std::span<const LabeledQuery> data, std::uint32_t dims) {
  std::vector<Example> out;
  out.reserve(data.size());
  for (const auto& q : data) {
    out.push_back({hash_features(q.query, dims), q.intent == Intent::Question ? 1.0 : 0.0});
  }
  return out;
}

double mean_loss(const std::vector<Example>& data, std::span<const double> w, double scale,
                 double bias) {
  double total = 0.0;
  for (const auto& ex : data) {
    double z = bias;
    for (std::size_t k = 0; k < ex.x.size(); ++k) z += scale * w[ex.x.indices[k]] * ex.x.weights[k];
    total += log_loss(logistic(z), ex.y);
  }
  return data.empty() ? 0.0 : total / static_cast<double>(data.size());
}

}  // namespace

IntentModel IntentModel::zeros(std::uint32_t dims) {
  IntentModel m;
  m.dims = dims;
  m.weights.assign(dims, 0.0);
  return m;
}

double IntentModel::probability(std::string_view query) const {
  const auto x = hash_features(query, dims);
  double z = bias;
  for (std::size_t k = 0; k < x.size(); ++k) z += weights[x.indices[k]] * x.weights[k];
  return logistic(z);
}

IntentPrediction IntentModel::classify(std::string_view query) const {
  const double p = probability(query);
  return {p >= decision_threshold ? Intent::Question : Intent::NonQuestion, p};
}

void IntentModel::save(std::ostream& out) const {
  binary::write_magic(out, kModelMagic, kModelVersion);
  binary::write_u32(out, dims);
  binary::write_f64(out, bias);
  binary::write_f64(out, decision_threshold);
  std::uint64_t nnz = 0;
  for (double w : weights) nnz += std::bit_cast<std::uint64_t>(w) != 0;
  binary::write_u64(out, nnz);
  for (std::uint32_t i = 0; i < weights.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(weights[i]) == 0) continue;
    binary::write_u32(out, i);
    binary::write_f64(out, weights[i]);
  }
  if (!out) throw FormatError("failed writing intent model");
}

IntentModel IntentModel::load(std::istream& in) {
  binary::read_magic(in, kModelMagic, kModelVersion);
  IntentModel m;
  m.dims = binary::read_u32(in);
  if (m.dims < 1024 || (m.dims & (m.dims - 1)) != 0) throw FormatError("bad model dims");
  m.bias = binary::read_f64(in);
  m.decision_threshold = binary::read_f64(in);
  m.weights.assign(m.dims, 0.0);
  const auto nnz = binary::read_u64(in);
  for (std::uint64_t k = 0; k < nnz; ++k) {
    const auto i = binary::read_u32(in);
    if (i >= m.dims) throw FormatError("weight index out of range");
    m.weights[i] = binary::read_f64(in);
  }
  return m;
}

void IntentModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  save(out);
}

IntentModel IntentModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  return load(in);
}

std::vector<LabeledQuery> oversample_minority(std::span<const LabeledQuery> data,
                                              std::uint64_t seed) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < data.size(); ++i) {
    (data[i].intent == Intent::Question ? pos : neg).push_back(i);
  }
  if (pos.empty() || neg.empty()) {
    throw ValidationError("oversampling needs both intent classes");
  }
  const auto& minority = pos.size() <= neg.size() ? pos : neg;
  const std::size_t target = std::max(pos.size(), neg.size());

  std::vector<LabeledQuery> out(data.begin(), data.end());
  Rng rng(seed);
  std::size_t deficit = target - minority.size();
  while (deficit >= minority.size()) {
    for (std::size_t i : minority) out.push_back(data[i]);
    deficit -= minority.size();
  }
  if (deficit > 0) {
    std::vector<std::size_t> sample = minority;
    rng.shuffle(std::span<std::size_t>(sample));
    for (std::size_t k = 0; k < deficit; ++k) out.push_back(data[sample[k]]);
  }
  rng.shuffle(std::span<LabeledQuery>(out));
  return out;
}

IntentModel train_intent_model(std::span<const LabeledQuery> train,
                               std::span<const LabeledQuery> validation,
                               const IntentTrainingConfig& config) {
  if (train.empty()) throw ValidationError("cannot train an intent model on empty data");
  if (config.max_epochs == 0) throw ValidationError("max_epochs must be positive");

  const auto examples = featurize(train, config.dims);
  const auto held_out = featurize(validation, config.dims);
  const auto& monitor = held_out.empty() ? examples : held_out;

  // Weights are stored as scale * w so L2 decay is O(1) per step.
  std::vector<double> w(config.dims, 0.0);
  double scale = 1.0;
  double bias = 0.0;

  std::vector<double> best_w = w;
  double best_bias = 0.0;
  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(config.seed);

  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    const double lr = config.learning_rate / std::sqrt(1.0 + static_cast<double>(epoch));
    for (std::size_t i : order) {
      const auto& ex = examples[i];
      double z = bias;
      for (std::size_t k = 0; k < ex.x.size(); ++k) z += scale * w[ex.x.indices[k]] * ex.x.weights[k];
      const double g = logistic(z) - ex.y;
      scale *= 1.0 - lr * config.l2;
      if (scale < 1e-9) {
        for (double& v : w) v *= scale;
        scale = 1.0;
      }
      for (std::size_t k = 0; k < ex.x.size(); ++k) {
        w[ex.x.indices[k]] -= lr * g * ex.x.weights[k] / scale;
      }
      bias -= lr * g;
    }
    const double loss = mean_loss(monitor, w, scale, bias);
    if (loss < best_loss - 1e-12) {
      best_loss = loss;
      best_w = w;
      for (double& v : best_w) v *= scale;
      best_bias = bias;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }

  IntentModel model;
  model.dims = config.dims;
  model.weights = std::move(best_w);
  model.bias = best_bias;
  model.decision_threshold = config.decision_threshold;
  return model;
}

}  // namespace faqsearch
