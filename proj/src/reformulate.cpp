#include "faqsearch/reformulate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <unordered_set>

#include <httplib.h>
#include <json.hpp>

#include "faqsearch/errors.hpp"
#include "faqsearch/textproc.hpp"

namespace faqsearch {
namespace {

using nlohmann::json;

constexpr double kSmoothing = 0.1;

bool is_article(std::string_view t) { return t == "a" || t == "an" || t == "the"; }

std::string join(std::span<const std::string> tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

json counts_to_json(const std::map<std::string, std::size_t>& m) {
  json j = json::object();
  for (const auto& [k, v] : m) j[k] = v;
  return j;
}

std::map<std::string, std::size_t> counts_from_json(const json& j) {
  std::map<std::string, std::size_t> m;
  if (!j.is_object()) return m;
  for (auto it = j.begin(); it != j.end(); ++it) m[it.key()] = it.value().get<std::size_t>();
  return m;
}

}  // namespace

void SlotProfile::add(std::span<const std::string> span) {
  if (span.empty()) return;
  ++first[span.front()];
  ++last[span.back()];
  for (const auto& t : span) ++all[t];
  ++fills;
}

void SlotProfile::merge(const SlotProfile& other) {
  for (const auto& [k, v] : other.first) first[k] += v;
  for (const auto& [k, v] : other.last) last[k] += v;
  for (const auto& [k, v] : other.all) all[k] += v;
  fills += other.fills;
}

std::size_t Template::slot_count() const {
  return static_cast<std::size_t>(
      std::count_if(pattern.begin(), pattern.end(), [](const std::string& e) { return e.empty(); }));
}

std::vector<Template> mine_templates(std::span<const ReformulationPair> pairs) {
  std::map<std::vector<std::string>, Template> merged;
  for (const auto& pair : pairs) {
    const auto query = tokenize_terms(pair.query);
    const auto question = tokenize_terms(pair.question);
    if (query.empty() || question.empty()) continue;
    const std::unordered_set<std::string> query_set(query.begin(), query.end());

    std::vector<bool> matched(question.size());
    for (std::size_t i = 0; i < question.size(); ++i) matched[i] = query_set.count(question[i]) > 0;
    std::vector<bool> absorbed(question.size(), false);
    for (std::size_t i = 1; i + 1 < question.size(); ++i) {
      absorbed[i] = !matched[i] && is_article(question[i]) && matched[i - 1] && matched[i + 1];
    }

    Template t;
    t.support = 1;
    for (std::size_t i = 0; i < question.size();) {
      if (!matched[i]) {
        t.pattern.push_back(question[i++]);
        continue;
      }
      std::vector<std::string> fill;
      while (i < question.size() && (matched[i] || absorbed[i])) {
        if (matched[i]) fill.push_back(question[i]);
        ++i;
      }
      t.pattern.emplace_back();
      t.slots.emplace_back().add(fill);
    }
    if (t.slots.empty()) continue;

    auto [it, inserted] = merged.try_emplace(t.pattern, t);
    if (!inserted) {
      it->second.support += 1;
      for (std::size_t s = 0; s < t.slots.size(); ++s) it->second.slots[s].merge(t.slots[s]);
    }
  }

  std::vector<Template> out;
  out.reserve(merged.size());
  for (auto& [pattern, t] : merged) out.push_back(std::move(t));
  std::stable_sort(out.begin(), out.end(),
                   [](const Template& a, const Template& b) { return a.support > b.support; });
  return out;
}

void write_templates(std::ostream& out, std::span<const Template> templates) {
  for (const auto& t : templates) {
    json pattern = json::array();
    for (const auto& e : t.pattern) pattern.push_back(e.empty() ? json(nullptr) : json(e));
    json slots = json::array();
    for (const auto& s : t.slots) {
      slots.push_back({{"first", counts_to_json(s.first)},
                       {"last", counts_to_json(s.last)},
                       {"all", counts_to_json(s.all)},
                       {"fills", s.fills}});
    }
    out << json{{"pattern", pattern}, {"support", t.support}, {"slots", slots}}.dump() << '\n';
  }
}

std::vector<Template> read_templates(std::istream& in) {
  std::vector<Template> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(lineno, e.what());
    }
    if (!j.is_object() || !j.contains("pattern") || !j["pattern"].is_array()) {
      throw ParseError(lineno, "template record needs a pattern array");
    }
    Template t;
    for (const auto& e : j["pattern"]) {
      if (e.is_null()) t.pattern.emplace_back();
      else if (e.is_string() && !e.get<std::string>().empty()) t.pattern.push_back(e.get<std::string>());
      else throw ParseError(lineno, "pattern elements must be strings or null");
    }
    t.support = j.value("support", std::size_t{1});
    if (t.support < 1) throw ParseError(lineno, "support must be >= 1");
    const auto slots = t.slot_count();
    if (slots == 0) throw ParseError(lineno, "template has no slot");
    if (j.contains("slots") && j["slots"].is_array()) {
      for (const auto& s : j["slots"]) {
        SlotProfile p;
        p.first = counts_from_json(s.value("first", json::object()));
        p.last = counts_from_json(s.value("last", json::object()));
        p.all = counts_from_json(s.value("all", json::object()));
        p.fills = s.value("fills", std::size_t{0});
        t.slots.push_back(std::move(p));
      }
    }
    if (t.slots.size() != slots) t.slots.assign(slots, SlotProfile{});
    out.push_back(std::move(t));
  }
  return out;
}

void save_templates(const std::filesystem::path& path, std::span<const Template> templates) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  write_templates(out, templates);
}

std::vector<Template> load_templates(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return read_templates(in);
}

std::string_view to_string(ReformulatorKind kind) {
  switch (kind) {
    case ReformulatorKind::Identity: return "identity";
    case ReformulatorKind::Template: return "template";
    case ReformulatorKind::External: return "external";
  }
  return "identity";
}

ReformulatorKind parse_reformulator_kind(std::string_view s) {
  if (s == "identity") return ReformulatorKind::Identity;
  if (s == "template") return ReformulatorKind::Template;
  if (s == "external") return ReformulatorKind::External;
  throw ValidationError("unknown reformulator \"" + std::string(s) + "\"");
}

Reformulator Reformulator::identity() { return Reformulator{}; }

Reformulator Reformulator::from_templates(std::vector<Template> templates) {
  Reformulator r;
  r.kind_ = ReformulatorKind::Template;
  r.templates_ = std::move(templates);
  std::vector<const SlotProfile*> flat;
  for (const auto& t : r.templates_) {
    r.total_support_ += t.support;
    for (const auto& s : t.slots) {
      flat.push_back(&s);
      for (const auto& [tok, n] : s.all) {
        r.background_[tok] += static_cast<double>(n);
        r.background_total_ += static_cast<double>(n);
      }
    }
  }
  r.vocabulary_ = r.background_.size();

  std::vector<double> norms;
  for (const auto* s : flat) {
    double sq = 0.0;
    for (const auto& [tok, n] : s->all) sq += static_cast<double>(n) * static_cast<double>(n);
    norms.push_back(std::sqrt(sq));
  }
  auto cosine = [&](std::size_t a, std::size_t b) {
    if (norms[a] == 0.0 || norms[b] == 0.0) return a == b ? 1.0 : 0.0;
    double dot = 0.0;
    for (const auto& [tok, n] : flat[a]->all) {
      if (auto it = flat[b]->all.find(tok); it != flat[b]->all.end()) {
        dot += static_cast<double>(n) * static_cast<double>(it->second);
      }
    }
    return dot / (norms[a] * norms[b]);
  };
  auto add = [](Counts& into, const std::map<std::string, std::size_t>& from, double w) {
    for (const auto& [tok, n] : from) into[tok] += w * static_cast<double>(n);
  };
  std::size_t a = 0;
  for (const auto& t : r.templates_) {
    auto& out = r.smoothed_.emplace_back();
    for (std::size_t k = 0; k < t.slots.size(); ++k, ++a) {
      SmoothedSlot m;
      for (std::size_t b = 0; b < flat.size(); ++b) {
        const double w = b == a ? 1.0 : cosine(a, b);
        if (w < 1e-6) continue;
        add(m.first, flat[b]->first, w);
        add(m.last, flat[b]->last, w);
        add(m.all, flat[b]->all, w);
        m.fills += w * static_cast<double>(flat[b]->fills);
      }
      for (const auto& [tok, c] : m.all) m.all_total += c;
      out.push_back(std::move(m));
    }
  }
  return r;
}

Reformulator Reformulator::external(ExternalEndpoint endpoint) {
  Reformulator r;
  r.kind_ = ReformulatorKind::External;
  r.endpoint_ = std::move(endpoint);
  return r;
}

Reformulation Reformulator::reformulate(std::string_view query) const {
  switch (kind_) {
    case ReformulatorKind::Identity: return {std::string(query), false, false, std::nullopt};
    case ReformulatorKind::Template: return reformulate_template(query);
    case ReformulatorKind::External: return reformulate_external(query);
  }
  return {std::string(query), true, false, std::nullopt};
}

double Reformulator::token_log_prob(const Counts& counts, double total,
                                    const std::string& token) const {
  auto it = counts.find(token);
  const double c = it == counts.end() ? 0.0 : it->second;
  return std::log((c + kSmoothing) / (total + kSmoothing * static_cast<double>(vocabulary_ + 1)));
}

double Reformulator::token_log_ratio(const Counts& counts, double total,
                                     const std::string& token) const {
  return token_log_prob(counts, total, token) -
         token_log_prob(background_, background_total_, token);
}

std::optional<std::pair<std::string, double>> Reformulator::fill(
    std::size_t template_index, std::span<const std::string> tokens) const {
  const auto& t = templates_.at(template_index);
  const std::size_t slots = t.slots.size();
  const std::size_t n = tokens.size();
  if (slots == 0 || slots > n) return std::nullopt;
  for (const auto& e : t.pattern) {
    if (!e.empty() && std::find(tokens.begin(), tokens.end(), e) != tokens.end()) return std::nullopt;
  }

  const auto& profiles = smoothed_.at(template_index);
  std::vector<double> token_all(n * slots);
  for (std::size_t s = 0; s < slots; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      token_all[s * n + i] = token_log_ratio(profiles[s].all, profiles[s].all_total, tokens[i]);
    }
  }
  auto span_score = [&](std::size_t s, std::size_t begin, std::size_t end) {
    const auto& p = profiles[s];
    double score = token_log_ratio(p.first, p.fills, tokens[begin]) +
                   token_log_ratio(p.last, p.fills, tokens[end - 1]);
    for (std::size_t i = begin; i < end; ++i) score += token_all[s * n + i];
    return score;
  };

  // best[s][i]: first s slots consume the first i tokens.
  constexpr double kNone = -std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> best(slots + 1, std::vector<double>(n + 1, kNone));
  std::vector<std::vector<std::size_t>> cut(slots + 1, std::vector<std::size_t>(n + 1, 0));
  best[0][0] = 0.0;
  for (std::size_t s = 1; s <= slots; ++s) {
    for (std::size_t i = s; i + (slots - s) <= n; ++i) {
      for (std::size_t j = s - 1; j < i; ++j) {
        if (best[s - 1][j] == kNone) continue;
        const double v = best[s - 1][j] + span_score(s - 1, j, i);
        if (v > best[s][i]) {
          best[s][i] = v;
          cut[s][i] = j;
        }
      }
    }
  }
  if (best[slots][n] == kNone) return std::nullopt;

  std::vector<std::size_t> bounds(slots + 1);
  bounds[slots] = n;
  for (std::size_t s = slots; s > 0; --s) bounds[s - 1] = cut[s][bounds[s]];

  std::vector<std::string> words;
  std::size_t slot = 0;
  for (const auto& e : t.pattern) {
    if (!e.empty()) {
      words.push_back(e);
      continue;
    }
    for (std::size_t i = bounds[slot]; i < bounds[slot + 1]; ++i) words.push_back(tokens[i]);
    ++slot;
  }
  const double prior = std::log(static_cast<double>(t.support) /
                                static_cast<double>(std::max<std::size_t>(total_support_, 1)));
  return std::make_pair(join(words), prior + best[slots][n]);
}

Reformulation Reformulator::reformulate_template(std::string_view query) const {
  const auto tokens = tokenize_terms(query);
  std::optional<std::size_t> chosen;
  std::string text;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < templates_.size(); ++i) {
    auto filled = fill(i, tokens);
    if (filled && filled->second > best) {
      best = filled->second;
      text = std::move(filled->first);
      chosen = i;
    }
  }
  if (!chosen || text.empty()) return {std::string(query), true, false, std::nullopt};
  return {std::move(text), false, false, chosen};
}

Reformulation Reformulator::reformulate_external(std::string_view query) const {
  Reformulation fallback{std::string(query), true, true, std::nullopt};
  try {
    httplib::Client client(endpoint_.base_url);
    const auto secs = endpoint_.timeout.count() / 1000;
    const auto usecs = (endpoint_.timeout.count() % 1000) * 1000;
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    const auto body = json{{"query", std::string(query)}}.dump();
    auto res = client.Post(endpoint_.path, body, "application/json");
    if (!res || res->status != 200) return fallback;
    const auto j = json::parse(res->body);
    if (!j.is_object() || !j.contains("question") || !j["question"].is_string()) return fallback;
    auto question = j["question"].get<std::string>();
    if (normalize_query(question).empty()) return fallback;
    return {std::move(question), false, false, std::nullopt};
  } catch (const std::exception&) {
    return fallback;
  }
}

}  // namespace faqsearch
