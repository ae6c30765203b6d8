// RAKE keyword extraction: candidate phrases are maximal runs of content
// words, delimited by stopwords and phrase punctuation.

#include <map>

#include "faqsearch/errors.hpp"
#include "faqsearch/textproc.hpp"

namespace faqsearch {
namespace {

bool is_phrase_delimiter(char c) {
  switch (c) {
    case '.': case ',': case '!': case '?': case ';': case ':':
    case '(': case ')': case '[': case ']': case '"': case '\t': case '\n':
    case '\r': case '\'':
      return true;
    default:
      return false;
  }
}

}  // namespace

std::vector<RakePhrase> rake_phrases(std::string_view text, const StopwordList& stopwords) {
  const auto stream = tokenize(text);
  std::vector<RakePhrase> phrases;
  RakePhrase current;
  auto close = [&] {
    if (!current.words.empty()) phrases.push_back(std::move(current));
    current = RakePhrase{};
  };

  for (std::size_t i = 0; i < stream.size(); ++i) {
    if (i > 0) {
      const auto gap = text.substr(stream.offsets[i - 1].second,
                                   stream.offsets[i].first - stream.offsets[i - 1].second);
      for (char c : gap) {
        if (is_phrase_delimiter(c)) {
          close();
          break;
        }
      }
    }
    const auto& word = stream.tokens[i];
    if (stopwords.contains(word)) {
      close();
      continue;
    }
    if (current.words.empty()) current.first_token = i;
    current.words.push_back(word);
  }
  close();

  std::map<std::string, double> freq;
  std::map<std::string, double> degree;
  for (const auto& p : phrases) {
    for (const auto& w : p.words) {
      freq[w] += 1.0;
      degree[w] += static_cast<double>(p.words.size());
    }
  }
  for (auto& p : phrases) {
    p.score = 0.0;
    for (const auto& w : p.words) p.score += degree[w] / freq[w];
  }
  return phrases;
}

std::string extract_keywords(std::string_view question, const StopwordList& stopwords) {
  const auto phrases = rake_phrases(question, stopwords);
  std::string out;
  for (const auto& p : phrases) {
    for (const auto& w : p.words) {
      if (!out.empty()) out.push_back(' ');
      out += w;
    }
  }
  if (out.empty()) {
    throw EmptyResultError("no content words in \"" + std::string(question) + "\"");
  }
  return out;
}

}  // namespace faqsearch
