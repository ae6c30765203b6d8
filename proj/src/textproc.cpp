#include "faqsearch/textproc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include "faqsearch/embedded_stopwords.hpp"
#include "faqsearch/errors.hpp"

namespace faqsearch {
namespace {

struct Decoded {
  char32_t cp;
  std::size_t len;  // 0 marks an invalid sequence of one byte
};

Decoded decode_utf8(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) return {b0, 1};
  std::size_t len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    return {0, 0};
  }
  if (i + len > s.size()) return {0, 0};
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) return {0, 0};
    cp = (cp << 6) | (b & 0x3F);
  }
  return {cp, len};
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_word_char(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9');
  }
  // Latin-1 punctuation and symbols, except the letter-like ª µ º.
  if (cp <= 0xBF) return cp == 0xAA || cp == 0xB5 || cp == 0xBA;
  if (cp == 0xD7 || cp == 0xF7) return false;
  // General punctuation through miscellaneous symbols/arrows.
  if (cp >= 0x2000 && cp <= 0x2BFF) return false;
  // CJK symbols and punctuation, vertical forms, small forms, fullwidth ASCII punctuation.
  if (cp >= 0x3000 && cp <= 0x303F) return false;
  if (cp >= 0xFE10 && cp <= 0xFE6F) return false;
  if (cp >= 0xFF00 && cp <= 0xFF0F) return false;
  if (cp >= 0xFF1A && cp <= 0xFF20) return false;
  // Emoji and pictographs.
  if (cp >= 0x1F000 && cp <= 0x1FAFF) return false;
  return true;
}

char32_t to_lower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if (cp < 0xC0) return cp;
  if (cp <= 0xDE && cp != 0xD7) return cp + 32;
  if (cp >= 0x100 && cp <= 0x137) return cp | 1u;
  if (cp >= 0x139 && cp <= 0x148) return (cp % 2 == 1) ? cp + 1 : cp;
  if (cp >= 0x14A && cp <= 0x177) return cp | 1u;
  if (cp == 0x178) return 0xFF;
  if (cp >= 0x179 && cp <= 0x17E) return (cp % 2 == 1) ? cp + 1 : cp;
  if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 32;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 32;
  return cp;
}

constexpr std::array<std::string_view, 19> kQuestionWords = {
    "how", "what", "why",   "when", "where", "which",  "who", "whom",  "whose", "can",
    "could", "do", "does", "did", "is",    "are", "will", "would", "should"};

}  // namespace

TokenStream tokenize(std::string_view text) {
  TokenStream out;
  std::string current;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    if (!current.empty()) {
      out.tokens.push_back(std::move(current));
      out.offsets.emplace_back(start, end);
      current.clear();
    }
  };
  std::size_t i = 0;
  while (i < text.size()) {
    const auto d = decode_utf8(text, i);
    const std::size_t len = d.len == 0 ? 1 : d.len;
    if (d.len != 0 && is_word_char(d.cp)) {
      if (current.empty()) start = i;
      append_utf8(current, to_lower(d.cp));
    } else {
      flush(i);
    }
    i += len;
  }
  flush(text.size());
  return out;
}

std::vector<std::string> tokenize_terms(std::string_view text) { return tokenize(text).tokens; }

std::string normalize_query(std::string_view text) {
  std::string out;
  for (const auto& t : tokenize(text).tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

const StopwordList& StopwordList::builtin() {
  static const StopwordList list = from_text(detail::kEmbeddedStopwords);
  return list;
}

StopwordList StopwordList::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open stopword file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

StopwordList StopwordList::from_text(std::string_view text) {
  StopwordList list;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
      line.remove_suffix(1);
    }
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
    if (line.empty() || line.front() == '#') continue;
    for (auto& t : tokenize(line).tokens) list.words_.insert(std::move(t));
  }
  return list;
}

bool StopwordList::contains(std::string_view word) const {
  return words_.find(std::string(word)) != words_.end();
}

bool starts_with_question_word(std::string_view query) {
  const auto tokens = tokenize(query);
  if (tokens.empty()) return false;
  return std::find(kQuestionWords.begin(), kQuestionWords.end(), tokens.tokens.front()) !=
         kQuestionWords.end();
}

double SparseVector::norm() const {
  double s = 0.0;
  for (double w : weights) s += w * w;
  return std::sqrt(s);
}

double SparseVector::dot(const SparseVector& other) const {
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < indices.size() && j < other.indices.size()) {
    if (indices[i] == other.indices[j]) {
      s += weights[i] * other.weights[j];
      ++i;
      ++j;
    } else if (indices[i] < other.indices[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return s;
}

SparseVector SparseVector::from_unsorted(std::vector<std::pair<std::uint32_t, double>> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  SparseVector v;
  for (std::size_t i = 0; i < entries.size();) {
    const auto idx = entries[i].first;
    double sum = 0.0;
    for (; i < entries.size() && entries[i].first == idx; ++i) sum += entries[i].second;
    if (sum != 0.0) {
      v.indices.push_back(idx);
      v.weights.push_back(sum);
    }
  }
  return v;
}

double cosine(const SparseVector& a, const SparseVector& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

TfidfStats TfidfStats::build(std::span<const std::string> documents) {
  TfidfStats stats;
  stats.doc_count_ = documents.size();
  std::vector<std::size_t> df;
  for (const auto& doc : documents) {
    auto terms = tokenize_terms(doc);
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    for (auto& t : terms) {
      auto [it, inserted] = stats.vocab_.try_emplace(std::move(t), static_cast<std::uint32_t>(df.size()));
      if (inserted) df.push_back(0);
      ++df[it->second];
    }
  }
  stats.idf_.resize(df.size());
  const double n = static_cast<double>(stats.doc_count_);
  for (std::size_t i = 0; i < df.size(); ++i) {
    stats.idf_[i] = std::log((1.0 + n) / (1.0 + static_cast<double>(df[i]))) + 1.0;
  }
  return stats;
}

double TfidfStats::idf(std::string_view term) const {
  auto it = vocab_.find(std::string(term));
  return it == vocab_.end() ? 0.0 : idf_[it->second];
}

SparseVector TfidfStats::vectorize(std::string_view text) const {
  const auto terms = tokenize_terms(text);
  return vectorize_terms(terms);
}

SparseVector TfidfStats::vectorize_terms(std::span<const std::string> terms) const {
  std::vector<std::pair<std::uint32_t, double>> entries;
  for (const auto& t : terms) {
    auto it = vocab_.find(t);
    if (it == vocab_.end()) continue;
    entries.emplace_back(it->second, idf_[it->second]);
  }
  auto v = SparseVector::from_unsorted(std::move(entries));
  const double n = v.norm();
  if (n > 0.0) {
    for (double& w : v.weights) w /= n;
  }
  return v;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

SparseVector hash_features(std::string_view text, std::uint32_t dims) {
  if (dims < 1024 || (dims & (dims - 1)) != 0) {
    throw ValidationError("hash dims must be a power of two >= 1024, got " + std::to_string(dims));
  }
  const auto tokens = tokenize_terms(text);
  if (tokens.empty()) return {};

  std::vector<std::pair<std::uint32_t, double>> entries;
  auto add = [&](const std::string& feature) {
    const auto h = fnv1a64(feature);
    const auto bucket = static_cast<std::uint32_t>(h & (dims - 1));
    const double sign = (h >> 63) != 0 ? -1.0 : 1.0;
    entries.emplace_back(bucket, sign);
  };

  std::string feature;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    add("u:" + tokens[i]);
    if (i + 1 < tokens.size()) add("b:" + tokens[i] + ' ' + tokens[i + 1]);
  }
  std::string joined = " ";
  for (const auto& t : tokens) joined += t + ' ';
  for (std::size_t i = 0; i + 3 <= joined.size(); ++i) {
    add("c:" + joined.substr(i, 3));
  }

  auto v = SparseVector::from_unsorted(std::move(entries));
  const double n = v.norm();
  if (n > 0.0) {
    for (double& w : v.weights) w /= n;
  }
  return v;
}

}  // namespace faqsearch
